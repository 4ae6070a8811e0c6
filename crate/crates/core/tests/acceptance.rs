//! The acceptance suite: ten criteria, each printing a single pass/fail
//! line and enforcing its time budget.  Run with `--nocapture` to see the
//! lines when everything passes.

use std::time::{Duration, Instant};

use num_bigint::BigInt;
use serde_json::json;

use contwist::bilinear::{
    coordinate_change, euler_evaluated, glue, gluing_operator, is_sod, mutation,
    mutation_matrix_product, orthogonal_chain, periodicity_criterion, BilinearError, InstanceGen,
    Operator, Side,
};
use contwist::continuants::{
    binomial, chebyshev_u, euler_poly, euler_poly_alt, fibonacci_number, fibonacci_poly,
    verify_determinant_identity, verify_matrix_identity, verify_recursions,
};
use contwist::functorcat::{
    determinantal_check, duality_check, enriques_check, fibonacci_triangle_check, higher_twist,
    is_n_spherical, phi_at, triangle_identities, Complex, FunctorGen, FunctorMatrix,
    SphericalMode, Variant,
};
use contwist::quiverk0::{coxeter_relation_check, sod_chain_an, sod_chain_dn, Quiver};
use contwist::scalars::{rat_int, Mat};
use contwist::Field;

/// Run one criterion body, print its line, and enforce the budget.
fn criterion(index: usize, name: &str, budget: Duration, body: impl FnOnce() -> Result<(), String>) {
    let started = Instant::now();
    let outcome = body();
    let elapsed = started.elapsed();
    let status = if outcome.is_ok() && elapsed <= budget { "PASS" } else { "FAIL" };
    println!(
        "criterion {index:2} ({name}): {status} in {} ms (budget {} ms)",
        elapsed.as_millis(),
        budget.as_millis()
    );
    if let Err(msg) = outcome {
        panic!("criterion {index} ({name}) failed: {msg}");
    }
    assert!(
        elapsed <= budget,
        "criterion {index} ({name}) exceeded its budget: {elapsed:?} > {budget:?}"
    );
}

fn ensure(cond: bool, msg: &str) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.to_string())
    }
}

#[test]
fn criterion_01_symbolic_continuants() {
    criterion(1, "symbolic continuants", Duration::from_secs(2), || {
        ensure(euler_poly_alt(1).render() == "x1", "E_1 display")?;
        ensure(euler_poly_alt(2).render() == "-1 + x1*x2", "E_2 display")?;
        ensure(euler_poly_alt(3).render() == "-x1 - x3 + x1*x2*x3", "E_3 display")?;
        ensure(
            euler_poly_alt(4).render() == "1 - x1*x2 - x1*x4 - x3*x4 + x1*x2*x3*x4",
            "E_4 display",
        )?;
        for n in 0..=20usize {
            let e = euler_poly(n);
            let count: BigInt = e.terms.len().into();
            ensure(count == fibonacci_number(n), "monomial count is phi_N")?;
            for k in 0..=n / 2 {
                let depth_k = e
                    .terms
                    .values()
                    .filter(|c| !c.is_zero() && c.degree() == k)
                    .count();
                ensure(
                    BigInt::from(depth_k) == binomial(n - k, k),
                    "depth-k count is C(N-k, k)",
                )?;
            }
        }
        ensure(
            euler_poly(20).terms.len() == 10946,
            "phi_20 = 10946",
        )
    });
}

#[test]
fn criterion_02_identity_suite() {
    criterion(2, "identity suite", Duration::from_secs(10), || {
        let r = verify_recursions(12);
        ensure(r.all_pass(), "recursions up to N = 12")?;
        for n in 2..=8 {
            ensure(
                verify_matrix_identity(n).all_pass(),
                "matrix identity",
            )?;
        }
        for n in 2..=7 {
            ensure(
                verify_determinant_identity(n).all_pass(),
                "determinant identity (direct and renumbered)",
            )?;
        }
        Ok(())
    });
}

#[test]
fn criterion_03_chebyshev_bridge() {
    criterion(3, "Chebyshev bridge", Duration::from_secs(1), || {
        for n in 0..=50 {
            ensure(
                fibonacci_poly(n).at_q(&rat_int(-1)) == chebyshev_u(n),
                "Phi_N(x, -1) = U_N(x/2)",
            )?;
        }
        Ok(())
    });
}

#[test]
fn criterion_04_bilinear_property_suite() {
    criterion(4, "bilinear property suite", Duration::from_secs(30), || {
        let mut total = 0usize;
        for field in [Field::Rationals, Field::quadratic(2)] {
            let mut gen = InstanceGen::new(2024, field.clone());
            for i in 0..100usize {
                total += 1;
                let da = 1 + i % 6;
                let db = 1 + (i / 6) % 6;
                let s = gen.space(da);
                let t = gen.space(db);

                // Serre isometry: beta(x, y) = beta(y, Sx), i.e. G = S^T G^T.
                let serre = s.serre();
                ensure(serre.is_isometry(), "Serre operator is an isometry")?;
                let lhs = serre.matrix.transpose().mul(&s.gram().transpose()).unwrap();
                ensure(&lhs == s.gram(), "Serre defining identity")?;

                // Adjoint involutions and the Serre conjugation formula.
                let f = gen.operator(&s, &t);
                let right = f.adjoint(Side::Right);
                let left = f.adjoint(Side::Left);
                ensure(right.adjoint(Side::Left).matrix == f.matrix, "*(f^*) = f")?;
                ensure(left.adjoint(Side::Right).matrix == f.matrix, "(*f)^* = f")?;
                let sa = s.serre().matrix;
                let sb_inv = t.serre().matrix.inverse().unwrap();
                let conj = sa.mul(&left.matrix).unwrap().mul(&sb_inv).unwrap();
                ensure(right.matrix == conj, "f^* = S_A (*f) S_B^{-1}")?;

                // Orthogonals and SODs around a nondegenerate subspace.
                let dim_a = 1 + i % da.max(1);
                let a = gen.nondegenerate_subspace(&s, dim_a.min(da));
                ensure(
                    a.orthogonal(Side::Right).orthogonal(Side::Left) == a,
                    "perp(A^perp) = A",
                )?;
                ensure(
                    a.orthogonal(Side::Left).orthogonal(Side::Right) == a,
                    "(perp-A)^perp = A",
                )?;
                let b = a.orthogonal(Side::Left);
                ensure(is_sod(&a, &b), "(A, perp-A) is an SOD")?;
                ensure(b.orthogonal(Side::Right) == a, "A recovered from B")?;

                // Glue / extract round trip.
                let (_glued, ea, eb) = glue(&s, &t, &f).map_err(|e| e.to_string())?;
                let extracted = gluing_operator(&ea, &eb).map_err(|e| e.to_string())?;
                ensure(extracted.matrix == f.matrix, "glue/extract round trip")?;

                // Mutation formula: gluing of (A^perp, A) is (-f^*) M_A.
                if a.dim() < s.dim() {
                    let right_orth = a.orthogonal(Side::Right);
                    if right_orth.is_nondegenerate() && b.is_nondegenerate() {
                        let g2 = gluing_operator(&right_orth, &a).map_err(|e| e.to_string())?;
                        let f_op = gluing_operator(&a, &b).map_err(|e| e.to_string())?;
                        let m = mutation(&a).map_err(|e| e.to_string())?;
                        let rhs = f_op.adjoint(Side::Right).compose(&m).neg();
                        ensure(g2.matrix == rhs.matrix, "(-f^*) M_A formula")?;
                        // Block coordinate change assembles to the ambient
                        // basis change.
                        let (blocks, change) =
                            coordinate_change(&a).map_err(|e| e.to_string())?;
                        ensure(blocks.assemble() == change, "2x2 block coordinate change")?;
                    }
                }
            }
        }
        ensure(total >= 200, "at least 200 instances")
    });
}

#[test]
fn criterion_05_periodicity_biconditional() {
    criterion(5, "periodicity biconditional", Duration::from_secs(30), || {
        // Seeded random instances: the biconditional must hold whenever the
        // criterion applies.
        for field in [Field::Rationals, Field::quadratic(2)] {
            let mut gen = InstanceGen::new(5, field);
            for i in 0..20usize {
                let d = 1 + i % 3;
                let a = gen.space(d);
                let b = gen.space(d);
                let f = gen.operator(&a, &b);
                for n in 2..=5 {
                    match periodicity_criterion(&f, n) {
                        Ok(rep) => ensure(rep.biconditional_holds, "biconditional")?,
                        Err(BilinearError::Inapplicable) => {}
                        Err(e) => return Err(e.to_string()),
                    }
                }
            }
        }

        let positive = |rep: &contwist::bilinear::CriterionReport| -> Result<(), String> {
            ensure(rep.continuant_vanishes, "continuant vanishes")?;
            ensure(rep.chain_periodic, "chain periodic")?;
            ensure(rep.e_nm2_isometry == Some(true), "E_{N-2} isometry")?;
            ensure(rep.e_n_isometry == Some(true), "E_N isometry")
        };

        // f = 0 <-> N = 2.
        let q = Field::Rationals;
        let a1 = contwist::bilinear::BilinearSpace::standard(q.clone(), 1);
        let zero_op = Operator::new(a1.clone(), a1.clone(), Mat::zero(q.clone(), 1, 1));
        positive(&periodicity_criterion(&zero_op, 2).map_err(|e| e.to_string())?)?;

        // Random isometries <-> N = 3, with E_3 evaluating to -f^{-1}.
        let mut gen = InstanceGen::new(11, q.clone());
        for d in 1..=3usize {
            let t = gen.space(d);
            let iso = gen.isometry_onto(&t);
            positive(&periodicity_criterion(&iso, 3).map_err(|e| e.to_string())?)?;
            let e3 = euler_evaluated(&iso, 3, 1, -1).map_err(|e| e.to_string())?;
            ensure(
                e3.matrix == iso.matrix.inverse().unwrap().neg(),
                "E_3(isometry) = -f^{-1}",
            )?;
        }

        // 1D rho = 2 cos(k pi / N) for N in {3, 4, 6}: rho = 1, sqrt 2,
        // sqrt 3.
        let rho_case = |field: Field, n: usize| -> Result<(), String> {
            let a = contwist::bilinear::BilinearSpace::standard(field.clone(), 1);
            let rho = if field.ext_degree() > 1 { field.generator() } else { field.one() };
            let m = Mat::from_fn(field.clone(), 1, 1, |_, _| rho.clone());
            let f = Operator::new(a.clone(), a, m);
            positive(&periodicity_criterion(&f, n).map_err(|e| e.to_string())?)
        };
        rho_case(Field::Rationals, 3)?;
        rho_case(Field::quadratic(2), 4)?;
        rho_case(Field::quadratic(3), 6)?;

        // Root vector with B(v, v) = 2: 4-periodic.
        let b2 = contwist::bilinear::BilinearSpace::standard(q.clone(), 2);
        let v = Operator::new(a1, b2, Mat::from_int_rows(q, &[&[1], &[1]]));
        positive(&periodicity_criterion(&v, 4).map_err(|e| e.to_string())?)
    });
}

#[test]
fn criterion_06_w_matrix_mechanism() {
    criterion(6, "W-matrix mechanism", Duration::from_secs(30), || {
        let q = Field::Rationals;
        let mut runs = 0usize;

        // Periodic seeds.
        let a1 = contwist::bilinear::BilinearSpace::standard(q.clone(), 1);
        let zero_op = Operator::new(a1.clone(), a1.clone(), Mat::zero(q.clone(), 1, 1));
        let (_c, ea, _) = glue(&a1, &a1, &zero_op).map_err(|e| e.to_string())?;
        let w = mutation_matrix_product(&ea, 2).map_err(|e| e.to_string())?;
        ensure(w.report.all_pass(), "f = 0 product")?;
        runs += 1;

        for field in [Field::Rationals, Field::quadratic(2)] {
            let mut gen = InstanceGen::new(17, field);
            for i in 0..8usize {
                let space = gen.space(2 + i % 3);
                let a = gen.nondegenerate_subspace(&space, 1 + i % 2);
                for n in 2..=6usize {
                    match mutation_matrix_product(&a, n) {
                        Ok(w) => {
                            ensure(
                                w.report.all_pass(),
                                "W-product block checks on a random instance",
                            )?;
                            runs += 1;
                        }
                        Err(BilinearError::DegenerateSubspace) => {}
                        Err(e) => return Err(e.to_string()),
                    }
                }
            }
        }
        ensure(runs >= 50, "at least 50 completed instances")
    });
}

#[test]
fn criterion_07_quiver_shadows() {
    criterion(7, "quiver shadows", Duration::from_secs(10), || {
        for n in 1..=8usize {
            let quiver = Quiver::a_n(n).map_err(|e| e.to_string())?;
            ensure(
                coxeter_relation_check(&quiver).all_pass(),
                "A_n Coxeter relations",
            )?;
            ensure(
                sod_chain_an(n).map_err(|e| e.to_string())?.all_pass(),
                "A_n chain period 2(n+1), table at n = 3",
            )?;
        }
        for n in 4..=8usize {
            let quiver = Quiver::d_n(n).map_err(|e| e.to_string())?;
            ensure(
                coxeter_relation_check(&quiver).all_pass(),
                "D_n Coxeter relations",
            )?;
            ensure(
                sod_chain_dn(n).map_err(|e| e.to_string())?.all_pass(),
                "D_n chain period 2(n-1)",
            )?;
        }
        Ok(())
    });
}

#[test]
fn criterion_08_functor_calculus() {
    criterion(8, "functor calculus", Duration::from_secs(60), || {
        let mut gen = FunctorGen::new(88);

        // 20 random complexes, kept small so the degree-8 tensor words stay
        // tractable: triangle identities and fully built twists up to N = 8.
        let mut complexes: Vec<Complex> = Vec::new();
        for _ in 0..20 {
            complexes.push(gen.random_complex(2, -1, 1));
        }
        for c in &complexes {
            let x = c.chi();
            let f = FunctorMatrix::from_complex(c.clone());
            ensure(triangle_identities(&f).all_pass(), "triangle identities")?;
            for n in 1..=8usize {
                let (e, _) =
                    higher_twist(&f, n, Variant::Homological).map_err(|e| e.to_string())?;
                ensure(e.entry(0, 0).chi() == phi_at(n, x), "chi(E_N) = Phi_N(chi, -1)")?;
            }
        }

        // Fibonacci triangles and duality on the same instances.
        for c in &complexes {
            let f = FunctorMatrix::from_complex(c.clone());
            for n in 2..=4usize {
                ensure(
                    fibonacci_triangle_check(&f, n)
                        .map_err(|e| e.to_string())?
                        .all_pass(),
                    "Fibonacci triangle",
                )?;
                ensure(
                    duality_check(&f, n).map_err(|e| e.to_string())?.all_pass(),
                    "duality",
                )?;
            }
        }
        for c in complexes.iter().take(5) {
            let f = FunctorMatrix::from_complex(c.clone());
            ensure(
                fibonacci_triangle_check(&f, 5)
                    .map_err(|e| e.to_string())?
                    .all_pass(),
                "Fibonacci triangle at N = 5",
            )?;
            ensure(
                duality_check(&f, 5).map_err(|e| e.to_string())?.all_pass(),
                "duality at N = 5",
            )?;
        }

        // Determinantal chi identity up to N = 7.
        for c in complexes.iter().take(3) {
            let f = FunctorMatrix::from_complex(c.clone());
            for n in 1..=7usize {
                ensure(
                    determinantal_check(&f, n).map_err(|e| e.to_string())?.all_pass(),
                    "determinantal identity",
                )?;
            }
        }
        Ok(())
    });
}

#[test]
fn criterion_09_sphericity() {
    criterion(9, "sphericity detection", Duration::from_secs(30), || {
        let id = FunctorMatrix::from_complex(Complex::point());
        for n in [3usize, 6, 9] {
            ensure(
                is_n_spherical(&id, n, SphericalMode::Both).map_err(|e| e.to_string())?,
                "Id is 3k-spherical",
            )?;
        }
        for n in [4usize, 5] {
            ensure(
                !is_n_spherical(&id, n, SphericalMode::Both).map_err(|e| e.to_string())?,
                "Id is not 4- or 5-spherical",
            )?;
        }
        let zero = FunctorMatrix::from_complex(Complex::zero());
        for n in [2usize, 4, 6, 8] {
            ensure(
                is_n_spherical(&zero, n, SphericalMode::Both).map_err(|e| e.to_string())?,
                "zero functor is 2M-spherical",
            )?;
        }

        // A permutation-of-shifts equivalence.
        let labels: Vec<String> = vec!["a".into(), "b".into()];
        let perm = FunctorMatrix::new(
            labels.clone(),
            labels,
            vec![
                Complex::zero(),
                Complex::line(1),
                Complex::line(-2),
                Complex::zero(),
            ],
        )
        .map_err(|e| e.to_string())?;
        ensure(
            is_n_spherical(&perm, 3, SphericalMode::Both).map_err(|e| e.to_string())?,
            "permutation-of-shifts equivalence is 3-spherical",
        )?;

        // Mode agreement wherever the even criterion applies.
        for f in [&id, &zero, &perm] {
            for n in [2usize, 4, 6, 8] {
                if let Ok(even) = is_n_spherical(f, n, SphericalMode::EvenCriterion) {
                    let both =
                        is_n_spherical(f, n, SphericalMode::Both).map_err(|e| e.to_string())?;
                    ensure(even == both, "modes agree where both apply")?;
                }
            }
        }
        Ok(())
    });
}

#[test]
fn criterion_10_enriques() {
    criterion(10, "Enriques complexes", Duration::from_secs(1), || {
        for n in 2..=4usize {
            let r = enriques_check(n);
            ensure(
                r.all_pass(),
                &format!("Enriques checks at n = {n}: {}", json!(r.failures())),
            )?;
        }
        Ok(())
    });
}

// ---------------------------------------------------------------------------
// Supporting sanity: chains behind criterion 5's positive library.
// ---------------------------------------------------------------------------

#[test]
fn positive_library_periods() {
    // The rho cases really do have the advertised chain periods.
    let cases: [(Field, i64, usize); 2] = [(Field::quadratic(2), 2, 4), (Field::quadratic(3), 3, 6)];
    for (field, _d, n) in cases {
        let a = contwist::bilinear::BilinearSpace::standard(field.clone(), 1);
        let m = Mat::from_fn(field.clone(), 1, 1, |_, _| field.generator());
        let f = Operator::new(a.clone(), a.clone(), m);
        let (_c, emb_a, _) = glue(&f.source, &f.target, &f).unwrap();
        let (_chain, period) = orthogonal_chain(&emb_a, n);
        assert_eq!(period, Some(n));
    }
}
