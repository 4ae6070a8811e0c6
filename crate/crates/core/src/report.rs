//! Machine-readable verification reports.
//!
//! A `Report` collects named checks with pass/fail status and optional
//! witness data.  Serialization is deterministic: checks are sorted by
//! name and timings are excluded unless explicitly requested, so a fixed
//! (scenario, seed, version) triple always produces byte-identical JSON.

use serde::{Deserialize, Serialize};

/// A single named check with its outcome and optional witness payload.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    /// Free-form witness: a counterexample term, a period, a table, …
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<serde_json::Value>,
}

impl Check {
    pub fn pass(name: impl Into<String>) -> Self {
        Check { name: name.into(), pass: true, witness: None }
    }

    pub fn fail(name: impl Into<String>, witness: serde_json::Value) -> Self {
        Check { name: name.into(), pass: false, witness: Some(witness) }
    }

    pub fn new(name: impl Into<String>, pass: bool) -> Self {
        Check { name: name.into(), pass, witness: None }
    }

    pub fn with_witness(mut self, witness: serde_json::Value) -> Self {
        self.witness = Some(witness);
        self
    }
}

/// Result of a verification run: a sorted list of checks plus metadata.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq, Default)]
pub struct Report {
    pub title: String,
    pub version: String,
    pub checks: Vec<Check>,
    /// Optional wall-clock timings in milliseconds, keyed by check name.
    /// Omitted by default so reports stay byte-identical across runs.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings_ms: Option<std::collections::BTreeMap<String, u64>>,
}

impl Report {
    pub fn new(title: impl Into<String>) -> Self {
        Report {
            title: title.into(),
            version: crate::VERSION.to_string(),
            checks: Vec::new(),
            timings_ms: None,
        }
    }

    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn record(&mut self, name: impl Into<String>, pass: bool) {
        self.checks.push(Check::new(name, pass));
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.pass).collect()
    }

    /// Merge another report's checks under a prefix.
    pub fn absorb(&mut self, prefix: &str, other: Report) {
        for mut c in other.checks {
            c.name = format!("{prefix}.{}", c.name);
            self.checks.push(c);
        }
    }

    /// Deterministic JSON form: checks sorted by name.
    pub fn to_json(&self, pretty: bool) -> String {
        let mut sorted = self.clone();
        sorted.checks.sort_by(|a, b| a.name.cmp(&b.name));
        if pretty {
            serde_json::to_string_pretty(&sorted).expect("report serialization")
        } else {
            serde_json::to_string(&sorted).expect("report serialization")
        }
    }
}
