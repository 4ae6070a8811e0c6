//! JSON scenario ingestion: schema validation and dispatch to the owning
//! module, producing a machine-readable [`Report`].
//!
//! A scenario is `{ "kind": ..., "payload": {...}, "seed": optional u64 }`.
//! Supported kinds: `continuant`, `bilinear`, `quiver`, `functor`,
//! `enriques`.  Scalars are canonical strings per the scalars module:
//! rationals as `"a/b"` or `"a"`, extension elements as
//! lowest-degree-first coefficient arrays rendered by the field.

use serde_json::{json, Value};

use crate::bilinear::{
    glue, is_sod, orthogonal_chain, periodicity_criterion, BilinearSpace, Operator, Side,
};
use crate::continuants::{verify_determinant_identity, verify_matrix_identity, verify_recursions};
use crate::functorcat::{
    determinantal_check, duality_check, enriques_check, fibonacci_triangle_check, higher_twist,
    triangle_identities, FunctorGen, FunctorMatrix, Variant,
};
use crate::quiverk0::{coxeter_relation_check, sod_chain_an, sod_chain_dn, Quiver};
use crate::report::{Check, Report};
use crate::scalars::{Field, Mat, Poly, Rat};

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    /// The input does not validate against the scenario schema (exit 2).
    #[error("schema error: {0}")]
    Schema(String),
    /// A module rejected the (schema-valid) data (exit 2).
    #[error("{0}")]
    Module(String),
}

fn schema(msg: impl Into<String>) -> ScenarioError {
    ScenarioError::Schema(msg.into())
}

/// The scenario kinds understood by the dispatcher.
pub const KINDS: [&str; 5] = ["continuant", "bilinear", "quiver", "functor", "enriques"];

fn get_usize(v: &Value, key: &str) -> Result<usize, ScenarioError> {
    v.get(key)
        .and_then(Value::as_u64)
        .map(|x| x as usize)
        .ok_or_else(|| schema(format!("missing or non-integer field \"{key}\"")))
}

fn opt_usize(v: &Value, key: &str) -> Result<Option<usize>, ScenarioError> {
    match v.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(x) => x
            .as_u64()
            .map(|x| Some(x as usize))
            .ok_or_else(|| schema(format!("non-integer field \"{key}\""))),
    }
}

/// Field encoding: `"Q"`, or `{"modulus": ["-2", "0", "1"]}` for
/// `Q[x]/(x^2 - 2)` (coefficients lowest degree first, monic).
pub fn parse_field(v: &Value) -> Result<Field, ScenarioError> {
    match v {
        Value::String(s) if s == "Q" => Ok(Field::Rationals),
        Value::Object(o) => {
            let coeffs = o
                .get("modulus")
                .and_then(Value::as_array)
                .ok_or_else(|| schema("extension field needs a \"modulus\" array"))?;
            let coeffs: Vec<Rat> = coeffs
                .iter()
                .map(|c| {
                    c.as_str()
                        .ok_or_else(|| schema("modulus coefficients must be strings"))
                        .and_then(|s| {
                            crate::scalars::parse_rat(s).map_err(|e| schema(e.to_string()))
                        })
                })
                .collect::<Result<_, _>>()?;
            let p = Poly::new(coeffs);
            if p.degree() < 1 || !p.is_monic() {
                return Err(schema("modulus must be monic of degree >= 1"));
            }
            Ok(Field::extension(p))
        }
        _ => Err(schema("field must be \"Q\" or {\"modulus\": [...]}")),
    }
}

/// A matrix as a rectangular grid of canonical scalar strings.
pub fn parse_matrix(field: &Field, v: &Value) -> Result<Mat, ScenarioError> {
    let rows = v.as_array().ok_or_else(|| schema("matrix must be an array of rows"))?;
    let ncols = rows
        .first()
        .and_then(Value::as_array)
        .map(|r| r.len())
        .unwrap_or(0);
    let mut m = Mat::zero(field.clone(), rows.len(), ncols);
    for (i, row) in rows.iter().enumerate() {
        let row = row.as_array().ok_or_else(|| schema("matrix row must be an array"))?;
        if row.len() != ncols {
            return Err(schema("matrix rows must all have the same length"));
        }
        for (j, e) in row.iter().enumerate() {
            let s = e.as_str().ok_or_else(|| schema("matrix entries must be strings"))?;
            let e = field.parse_elem(s).map_err(|e| schema(e.to_string()))?;
            m.set(i, j, e);
        }
    }
    Ok(m)
}

pub fn matrix_to_json(field: &Field, m: &Mat) -> Value {
    Value::Array(
        (0..m.rows)
            .map(|i| {
                Value::Array(
                    (0..m.cols)
                        .map(|j| Value::String(field.fmt_elem(m.get(i, j))))
                        .collect(),
                )
            })
            .collect(),
    )
}

/// Run a scenario document and collect the results into a report titled by
/// the scenario kind.
pub fn run_scenario(doc: &Value) -> Result<Report, ScenarioError> {
    let kind = doc
        .get("kind")
        .and_then(Value::as_str)
        .ok_or_else(|| schema("missing \"kind\""))?;
    let payload = doc.get("payload").unwrap_or(&Value::Null);
    let seed = doc.get("seed").and_then(Value::as_u64).unwrap_or(0);
    match kind {
        "continuant" => continuant_scenario(payload),
        "bilinear" => bilinear_scenario(payload),
        "quiver" => quiver_scenario(payload),
        "functor" => functor_scenario(payload, seed),
        "enriques" => enriques_scenario(payload),
        other => Err(schema(format!(
            "unknown kind \"{other}\"; expected one of {KINDS:?}"
        ))),
    }
}

fn continuant_scenario(payload: &Value) -> Result<Report, ScenarioError> {
    let n_max = get_usize(payload, "n_max")?;
    let mut report = Report::new("continuant");
    report.absorb("recursions", verify_recursions(n_max));
    for n in 2..=n_max.max(2) {
        report.absorb(&format!("matrix-identity N={n}"), verify_matrix_identity(n));
        report.absorb(
            &format!("determinant-identity N={n}"),
            verify_determinant_identity(n),
        );
    }
    Ok(report)
}

fn bilinear_scenario(payload: &Value) -> Result<Report, ScenarioError> {
    let field = parse_field(
        payload.get("field").ok_or_else(|| schema("missing \"field\""))?,
    )?;
    let mut report = Report::new("bilinear");
    if payload.get("gramA").is_some() {
        // Operator variant: gramA, gramB, f, N.
        let gram_a = parse_matrix(&field, payload.get("gramA").unwrap())?;
        let gram_b = parse_matrix(
            &field,
            payload.get("gramB").ok_or_else(|| schema("missing \"gramB\""))?,
        )?;
        let fm = parse_matrix(
            &field,
            payload.get("f").ok_or_else(|| schema("missing \"f\""))?,
        )?;
        let n = get_usize(payload, "N")?;
        if n < 2 {
            return Err(schema("\"N\" must be at least 2"));
        }
        let a = BilinearSpace::new(gram_a).map_err(|e| ScenarioError::Module(e.to_string()))?;
        let b = BilinearSpace::new(gram_b).map_err(|e| ScenarioError::Module(e.to_string()))?;
        if fm.rows != b.dim() || fm.cols != a.dim() {
            return Err(schema("\"f\" must be dim(B) x dim(A)"));
        }
        let f = Operator::new(a.clone(), b.clone(), fm);
        let cr = periodicity_criterion(&f, n).map_err(|e| ScenarioError::Module(e.to_string()))?;
        report.push(
            Check::new("criterion biconditional", cr.biconditional_holds).with_witness(json!({
                "continuant_vanishes": cr.continuant_vanishes,
                "chain_periodic": cr.chain_periodic,
                "period": cr.period,
                "e_nm2_isometry": cr.e_nm2_isometry,
                "e_n_isometry": cr.e_n_isometry,
            })),
        );
        if let Some(iso) = cr.e_nm2_isometry {
            report.record("E_{N-2} is an isometry", iso);
        }
        if let Some(iso) = cr.e_n_isometry {
            report.record("E_N is an isometry", iso);
        }
        // Chain bases in the glued space, for the record.
        let (_c, emb_a, _emb_b) =
            glue(&a, &b, &f).map_err(|e| ScenarioError::Module(e.to_string()))?;
        let (chain, period) = orthogonal_chain(&emb_a, n);
        let bases: Vec<Value> =
            chain.iter().map(|s| matrix_to_json(&field, &s.basis)).collect();
        report.push(
            Check::new("orthogonal chain computed", true)
                .with_witness(json!({ "period": period, "bases": bases })),
        );
    } else {
        // Subspace variant: gram, subspace, optional max_steps.
        let gram = parse_matrix(
            &field,
            payload.get("gram").ok_or_else(|| schema("missing \"gram\" or \"gramA\""))?,
        )?;
        let basis = parse_matrix(
            &field,
            payload.get("subspace").ok_or_else(|| schema("missing \"subspace\""))?,
        )?;
        let space = BilinearSpace::new(gram).map_err(|e| ScenarioError::Module(e.to_string()))?;
        if basis.rows != space.dim() {
            return Err(schema("\"subspace\" columns must live in the ambient space"));
        }
        let a = space.subspace(basis);
        let max_steps = opt_usize(payload, "max_steps")?.unwrap_or(2 * space.dim() + 2);
        report.record("subspace is nondegenerate", a.is_nondegenerate());
        let b = a.orthogonal(Side::Left);
        report.record("A with its left orthogonal is an SOD", is_sod(&a, &b));
        let (chain, period) = orthogonal_chain(&a, max_steps);
        let bases: Vec<Value> =
            chain.iter().map(|s| matrix_to_json(&field, &s.basis)).collect();
        report.push(
            Check::new("orthogonal chain computed", true)
                .with_witness(json!({ "period": period, "bases": bases })),
        );
    }
    Ok(report)
}

fn quiver_scenario(payload: &Value) -> Result<Report, ScenarioError> {
    let ty = payload
        .get("type")
        .and_then(Value::as_str)
        .ok_or_else(|| schema("missing \"type\" (\"A\" or \"D\")"))?;
    let n = get_usize(payload, "n")?;
    let (quiver, chain) = match ty {
        "A" => (
            Quiver::a_n(n).map_err(|e| ScenarioError::Module(e.to_string()))?,
            sod_chain_an(n).map_err(|e| ScenarioError::Module(e.to_string()))?,
        ),
        "D" => (
            Quiver::d_n(n).map_err(|e| ScenarioError::Module(e.to_string()))?,
            sod_chain_dn(n).map_err(|e| ScenarioError::Module(e.to_string()))?,
        ),
        other => return Err(schema(format!("unknown quiver type \"{other}\""))),
    };
    let mut report = Report::new("quiver");
    report.absorb("coxeter", coxeter_relation_check(&quiver));
    report.absorb("chain", chain);
    Ok(report)
}

fn functor_scenario(payload: &Value, seed: u64) -> Result<Report, ScenarioError> {
    let f = match payload.get("f") {
        Some(v) => FunctorMatrix::from_json(v).map_err(|e| schema(e.to_string()))?,
        None => {
            // Seeded random instance: {"random": {"labels": [...],
            // "max_entry_dim": d, "deg_lo": a, "deg_hi": b}}.
            let r = payload
                .get("random")
                .ok_or_else(|| schema("functor scenario needs \"f\" or \"random\""))?;
            let labels: Vec<String> = r
                .get("labels")
                .and_then(Value::as_array)
                .ok_or_else(|| schema("\"random\" needs \"labels\""))?
                .iter()
                .map(|x| {
                    x.as_str()
                        .map(String::from)
                        .ok_or_else(|| schema("labels must be strings"))
                })
                .collect::<Result<_, _>>()?;
            let dim = opt_usize(r, "max_entry_dim")?.unwrap_or(2);
            let lo = r.get("deg_lo").and_then(Value::as_i64).unwrap_or(-1);
            let hi = r.get("deg_hi").and_then(Value::as_i64).unwrap_or(1);
            if lo > hi {
                return Err(schema("deg_lo must be <= deg_hi"));
            }
            FunctorGen::new(seed).random_functor(&labels, &labels, dim.max(1), lo, hi)
        }
    };
    let n = get_usize(payload, "N")?;
    let mut report = Report::new("functor");
    report.absorb("adjunction", triangle_identities(&f));
    let (_, table) =
        higher_twist(&f, n, Variant::Homological).map_err(|e| ScenarioError::Module(e.to_string()))?;
    report.push(Check::new(format!("twist E_{n} computed"), true).with_witness(json!({
        "cohomology": table
            .iter()
            .map(|(k, v)| {
                (k.clone(), v.iter().map(|(d, c)| (d.to_string(), *c)).collect::<Value>())
            })
            .collect::<serde_json::Map<String, Value>>(),
    })));
    if n >= 1 {
        report.absorb(
            "duality",
            duality_check(&f, n).map_err(|e| ScenarioError::Module(e.to_string()))?,
        );
    }
    if n >= 2 {
        report.absorb(
            "triangle",
            fibonacci_triangle_check(&f, n).map_err(|e| ScenarioError::Module(e.to_string()))?,
        );
    }
    if n >= 1 && f.source.len() == 1 && f.target.len() == 1 {
        report.absorb(
            "determinantal",
            determinantal_check(&f, n).map_err(|e| ScenarioError::Module(e.to_string()))?,
        );
    }
    Ok(report)
}

fn enriques_scenario(payload: &Value) -> Result<Report, ScenarioError> {
    let n = get_usize(payload, "n")?;
    if n == 0 {
        return Err(schema("\"n\" must be at least 1"));
    }
    Ok(enriques_check(n))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn continuant_scenario_runs() {
        let doc = json!({ "kind": "continuant", "payload": { "n_max": 4 } });
        let r = run_scenario(&doc).unwrap();
        assert!(r.all_pass(), "{:?}", r.failures());
    }

    #[test]
    fn bilinear_operator_scenario_sqrt2() {
        // rho = sqrt(2) with 1-dimensional spaces: the classic period-4
        // chain.
        let doc = json!({
            "kind": "bilinear",
            "payload": {
                "field": { "modulus": ["-2", "0", "1"] },
                "gramA": [["1"]],
                "gramB": [["1"]],
                "f": [["[0, 1]"]],
                "N": 4
            }
        });
        let r = run_scenario(&doc).unwrap();
        assert!(r.all_pass(), "{:?}", r.failures());
        let chain = r
            .checks
            .iter()
            .find(|c| c.name == "orthogonal chain computed")
            .unwrap();
        let w = chain.witness.as_ref().unwrap();
        assert_eq!(w["period"], json!(4));
    }

    #[test]
    fn bilinear_subspace_scenario() {
        let doc = json!({
            "kind": "bilinear",
            "payload": {
                "field": "Q",
                "gram": [["1", "1"], ["0", "1"]],
                "subspace": [["1"], ["0"]]
            }
        });
        let r = run_scenario(&doc).unwrap();
        assert!(r.all_pass(), "{:?}", r.failures());
    }

    #[test]
    fn quiver_scenario_runs() {
        for (ty, n) in [("A", 3), ("D", 4)] {
            let doc = json!({ "kind": "quiver", "payload": { "type": ty, "n": n } });
            let r = run_scenario(&doc).unwrap();
            assert!(r.all_pass(), "{ty}_{n}: {:?}", r.failures());
        }
    }

    #[test]
    fn functor_scenario_runs() {
        let doc = json!({
            "kind": "functor",
            "seed": 5,
            "payload": {
                "random": { "labels": ["*"], "max_entry_dim": 2 },
                "N": 2
            }
        });
        let r = run_scenario(&doc).unwrap();
        assert!(r.all_pass(), "{:?}", r.failures());
    }

    #[test]
    fn enriques_scenario_runs() {
        let doc = json!({ "kind": "enriques", "payload": { "n": 3 } });
        let r = run_scenario(&doc).unwrap();
        assert!(r.all_pass(), "{:?}", r.failures());
    }

    #[test]
    fn schema_errors() {
        for doc in [
            json!({ "payload": {} }),
            json!({ "kind": "nope", "payload": {} }),
            json!({ "kind": "bilinear", "payload": { "field": "Q" } }),
            json!({ "kind": "enriques", "payload": { "n": 0 } }),
        ] {
            assert!(matches!(run_scenario(&doc), Err(ScenarioError::Schema(_))));
        }
    }

    #[test]
    fn matrix_roundtrip() {
        let f = Field::quadratic(2);
        let doc = json!([["[1, 0]", "[0, 1]"], ["[-1/2, 0]", "[2, 0]"]]);
        let m = parse_matrix(&f, &doc).unwrap();
        assert_eq!(matrix_to_json(&f, &m), doc);
    }
}
