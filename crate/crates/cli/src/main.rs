//! Command-line verification harness: scenario ingestion, per-module
//! verification suites, deterministic seeding, and JSON report emission.
//!
//! Exit codes: 0 if every check passes, 1 if any check fails, 2 on input
//! or schema errors.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use contwist::bilinear::{glue, periodicity_criterion, InstanceGen};
use contwist::continuants::{verify_determinant_identity, verify_matrix_identity, verify_recursions};
use contwist::functorcat::{
    determinantal_check, duality_check, enriques_check, fibonacci_triangle_check, higher_twist,
    is_n_spherical, phi_at, triangle_identities, Complex, FunctorGen, FunctorMatrix,
    SphericalMode, Variant,
};
use contwist::quiverk0::{coxeter_relation_check, sod_chain_an, sod_chain_dn, Quiver};
use contwist::scenario::{run_scenario, ScenarioError};
use contwist::{Check, Field, Report};

#[derive(Parser)]
#[command(
    name = "contwist",
    about = "Exact verification of Euler continuants, periodic SODs, and higher spherical twists",
    version
)]
struct Cli {
    /// Pretty-print the JSON report.
    #[arg(long, global = true)]
    pretty: bool,
    /// Write the report to this path instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Include wall-clock timings in the report (breaks byte-identity).
    #[arg(long, global = true)]
    timings: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a JSON scenario file (kinds: continuant, bilinear, quiver,
    /// functor, enriques).
    Run {
        /// Path to the scenario JSON document.
        scenario: PathBuf,
    },
    /// Continuant identity suite up to a bound.
    Continuant {
        #[arg(long, default_value_t = 6)]
        n_max: usize,
    },
    /// Bilinear-space scenario from a payload file (operator or subspace
    /// schema).
    Bilinear {
        /// Path to the payload JSON (the "payload" body of a bilinear
        /// scenario).
        payload: PathBuf,
    },
    /// Dynkin quiver K0 checks: Coxeter relations and the periodic SOD
    /// chain.
    Quiver {
        /// Quiver type: A or D.
        #[arg(long, value_parser = ["A", "D"])]
        r#type: String,
        #[arg(long)]
        n: usize,
    },
    /// Higher twist of a functor matrix from a payload file, plus the
    /// attached functor-calculus checks.
    Twist {
        /// Path to the payload JSON (the "payload" body of a functor
        /// scenario).
        payload: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// A small cross-module showcase with fixed inputs.
    Demo,
    /// The full verification suite with adjustable bounds.
    VerifyAll {
        /// Largest N for continuant and twist families.
        #[arg(long, default_value_t = 6)]
        max_n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Random instances per property family.
        #[arg(long, default_value_t = 25)]
        instances: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let started = Instant::now();
    let (echo, outcome) = match &cli.command {
        Command::Run { scenario } => {
            let doc = match read_json(scenario) {
                Ok(doc) => doc,
                Err(msg) => return input_error(&msg),
            };
            (doc.clone(), run_scenario(&doc))
        }
        Command::Continuant { n_max } => {
            let doc = json!({ "kind": "continuant", "payload": { "n_max": n_max } });
            (doc.clone(), run_scenario(&doc))
        }
        Command::Bilinear { payload } => {
            let body = match read_json(payload) {
                Ok(doc) => doc,
                Err(msg) => return input_error(&msg),
            };
            let doc = json!({ "kind": "bilinear", "payload": body });
            (doc.clone(), run_scenario(&doc))
        }
        Command::Quiver { r#type, n } => {
            let doc = json!({ "kind": "quiver", "payload": { "type": r#type, "n": n } });
            (doc.clone(), run_scenario(&doc))
        }
        Command::Twist { payload, seed } => {
            let body = match read_json(payload) {
                Ok(doc) => doc,
                Err(msg) => return input_error(&msg),
            };
            let doc = json!({ "kind": "functor", "payload": body, "seed": seed });
            (doc.clone(), run_scenario(&doc))
        }
        Command::Demo => (json!({ "command": "demo" }), Ok(demo())),
        Command::VerifyAll { max_n, seed, instances } => (
            json!({
                "command": "verify-all",
                "max_n": max_n,
                "seed": seed,
                "instances": instances,
            }),
            Ok(verify_all(*max_n, *seed, *instances)),
        ),
    };
    let mut report = match outcome {
        Ok(report) => report,
        Err(ScenarioError::Schema(msg)) | Err(ScenarioError::Module(msg)) => {
            return input_error(&msg);
        }
    };
    if cli.timings {
        let mut t = BTreeMap::new();
        t.insert("total".to_string(), started.elapsed().as_millis() as u64);
        report.timings_ms = Some(t);
    }
    let all_pass = report.all_pass();
    let envelope = json!({ "scenario": echo, "report": sorted_report_value(&report) });
    let text = if cli.pretty {
        serde_json::to_string_pretty(&envelope).expect("report serialization")
    } else {
        serde_json::to_string(&envelope).expect("report serialization")
    };
    if let Some(path) = &cli.out {
        if let Err(e) = std::fs::write(path, text + "\n") {
            eprintln!("error: cannot write {}: {e}", path.display());
            return ExitCode::from(2);
        }
    } else {
        println!("{text}");
    }
    if all_pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn input_error(msg: &str) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(2)
}

fn read_json(path: &PathBuf) -> Result<Value, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| {
        format!(
            "{}: invalid JSON at line {}, column {}: {e}",
            path.display(),
            e.line(),
            e.column()
        )
    })
}

/// Report JSON with checks sorted by name, as a `Value` for enveloping.
fn sorted_report_value(report: &Report) -> Value {
    serde_json::from_str(&report.to_json(false)).expect("report JSON")
}

/// A fixed small showcase: one example per module.
fn demo() -> Report {
    let mut report = Report::new("demo");
    report.absorb("continuant", verify_matrix_identity(4));
    // The sqrt(2) gluing: a 1-dimensional operator with a period-4 chain.
    let field = Field::quadratic(2);
    let mut gen = InstanceGen::new(1, field);
    let a = gen.space(1);
    let b = gen.space(1);
    let f = gen.operator(&a, &b);
    if let Ok(cr) = periodicity_criterion(&f, 4) {
        report.push(
            Check::new("bilinear.criterion biconditional", cr.biconditional_holds)
                .with_witness(json!({ "period": cr.period })),
        );
    }
    report.absorb(
        "quiver.A3",
        sod_chain_an(3).expect("A3 is supported"),
    );
    let id = FunctorMatrix::from_complex(Complex::point());
    let (e3, table) = higher_twist(&id, 3, Variant::Homological).expect("twist of Id");
    report.push(
        Check::new("functor.E_3(Id) computed", e3.source.len() == 1)
            .with_witness(json!({ "cohomology_entries": table.len() })),
    );
    report.absorb("enriques.n=3", enriques_check(3));
    report
}

/// The complete verification suite with adjustable bounds; defaults pass.
fn verify_all(max_n: usize, seed: u64, instances: usize) -> Report {
    let mut report = Report::new("verify-all");

    // Continuants.
    let n_max = max_n.max(2);
    report.absorb("continuant.recursions", verify_recursions(n_max));
    for n in 2..=n_max.min(7) {
        report.absorb(&format!("continuant.matrix N={n}"), verify_matrix_identity(n));
        report.absorb(
            &format!("continuant.determinant N={n}"),
            verify_determinant_identity(n),
        );
    }

    // Bilinear instances over Q and Q(sqrt 2).
    for (tag, field) in [("Q", Field::Rationals), ("Q(sqrt2)", Field::quadratic(2))] {
        let mut gen = InstanceGen::new(seed, field);
        let mut all_ok = true;
        let mut count = 0usize;
        for i in 0..instances.max(1) {
            let da = 1 + i % 3;
            let db = 1 + (i / 3) % 3;
            let a = gen.space(da);
            let b = gen.space(db);
            let f = gen.operator(&a, &b);
            for n in (2..=max_n.min(6)).step_by(2) {
                match periodicity_criterion(&f, n) {
                    Ok(cr) => {
                        all_ok &= cr.biconditional_holds;
                        count += 1;
                    }
                    Err(_) => {}
                }
            }
            // Chains exist in the glued space.
            if let Ok((_c, emb_a, _)) = glue(&a, &b, &f) {
                all_ok &= emb_a.is_nondegenerate();
            }
        }
        report.push(
            Check::new(format!("bilinear.criterion biconditional over {tag}"), all_ok)
                .with_witness(json!({ "instances": count })),
        );
    }

    // Quivers.
    for n in 1..=max_n.min(8) {
        let q = Quiver::a_n(n).expect("A_n");
        report.absorb(&format!("quiver.A{n}.coxeter"), coxeter_relation_check(&q));
    }
    for n in 1..=max_n.min(5) {
        report.absorb(
            &format!("quiver.A{n}.chain"),
            sod_chain_an(n).expect("A_n chain"),
        );
    }
    for n in 4..=max_n.max(4).min(6) {
        let q = Quiver::d_n(n).expect("D_n");
        report.absorb(&format!("quiver.D{n}.coxeter"), coxeter_relation_check(&q));
        report.absorb(
            &format!("quiver.D{n}.chain"),
            sod_chain_dn(n).expect("D_n chain"),
        );
    }

    // Functor calculus.
    let mut fgen = FunctorGen::new(seed.wrapping_add(1));
    let mut triangles_ok = true;
    let mut chi_ok = true;
    for _ in 0..instances.clamp(1, 12) {
        let c = fgen.random_complex(3, -1, 1);
        let x = c.chi();
        let f = FunctorMatrix::from_complex(c);
        triangles_ok &= triangle_identities(&f).all_pass();
        for n in 1..=max_n.min(4) {
            let (e, _) = higher_twist(&f, n, Variant::Homological).expect("twist");
            chi_ok &= e.entry(0, 0).chi() == phi_at(n, x);
        }
    }
    report.record("functor.triangle identities", triangles_ok);
    report.record("functor.chi of twists matches continuants", chi_ok);
    let id = FunctorMatrix::from_complex(Complex::point());
    for n in 2..=max_n.min(4) {
        report.absorb(
            &format!("functor.fibonacci N={n}"),
            fibonacci_triangle_check(&id, n).expect("triangle"),
        );
        report.absorb(
            &format!("functor.duality N={n}"),
            duality_check(&id, n).expect("duality"),
        );
        report.absorb(
            &format!("functor.determinantal N={n}"),
            determinantal_check(&id, n).expect("determinantal"),
        );
    }

    // Sphericity landmarks.
    report.record(
        "spherical.Id is 3-spherical",
        is_n_spherical(&id, 3, SphericalMode::Both).unwrap_or(false),
    );
    report.record(
        "spherical.Id is not 4-spherical",
        !is_n_spherical(&id, 4, SphericalMode::Both).unwrap_or(true),
    );
    let z = FunctorMatrix::from_complex(Complex::zero());
    report.record(
        "spherical.zero functor is 2-spherical",
        is_n_spherical(&z, 2, SphericalMode::Both).unwrap_or(false),
    );

    // Enriques complexes.
    for n in 2..=4 {
        report.absorb(&format!("enriques.n={n}"), enriques_check(n));
    }
    report
}
