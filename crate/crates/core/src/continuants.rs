//! Cotwinned-subset combinatorics, the Fibonacci cube poset, Euler
//! continuant polynomials, and the Fibonacci/Chebyshev bridge.
//!
//! Conventions: the Fibonacci numbers here follow the continuant count,
//! `phi_1 = 1`, `phi_2 = 2`, `phi_N = phi_{N-1} + phi_{N-2}` (classical
//! `F_{N+1}`).  The `N`th Euler polynomial has one term per cotwinned
//! subset of `[1, N]`, weighted by `q^depth`.

use crate::freealg::{NCPoly, Word};
use crate::report::{Check, Report};
use crate::scalars::{rat_int, Poly, Rat};
use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

/// A cotwinned subset of `[1, N]`: the complement is a disjoint union of
/// adjacent pairs ("twins"), and the depth counts those missing twins.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cotwinned {
    pub n: usize,
    /// Increasing member list.
    pub members: Vec<usize>,
    /// Number of missing twins; `2 * depth + members.len() == n`.
    pub depth: usize,
}

/// All cotwinned subsets of `[1, N]`, ordered lexicographically by member
/// list.  The count is `phi_N`, and the count at depth `k` is `C(N-k, k)`.
pub fn cotwinned_subsets(n: usize) -> Vec<Cotwinned> {
    // Walk the interval left to right: at position i either keep i, or
    // drop the twin {i, i+1}.
    fn go(n: usize, i: usize, acc: &mut Vec<usize>, depth: usize, out: &mut Vec<Cotwinned>) {
        if i > n {
            out.push(Cotwinned { n, members: acc.clone(), depth });
            return;
        }
        acc.push(i);
        go(n, i + 1, acc, depth, out);
        acc.pop();
        if i + 1 <= n {
            go(n, i + 2, acc, depth + 1, out);
        }
    }
    let mut out = Vec::new();
    go(n, 1, &mut Vec::new(), 0, &mut out);
    out.sort_by(|a, b| a.members.cmp(&b.members));
    out
}

/// `phi_N` with `phi_1 = 1`, `phi_2 = 2` (and `phi_0 = 1`).
pub fn fibonacci_number(n: usize) -> BigInt {
    let (mut a, mut b) = (BigInt::one(), BigInt::one());
    for _ in 0..n {
        let next = &a + &b;
        a = b;
        b = next;
    }
    a
}

pub fn binomial(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let mut out = BigInt::one();
    for i in 0..k {
        out = out * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    out
}

// ---------------------------------------------------------------------------
// Fibonacci cube poset
// ---------------------------------------------------------------------------

/// The Fibonacci cube `Gamma_N`: separated 0/1 sequences of length `N-1`
/// (no two adjacent ones), ordered componentwise inside the `(N-1)`-cube.
///
/// Elements are stored as bitmasks (bit `i` = position `i+1` of the
/// sequence).  Only covering relations are stored; because the cube order
/// restricted to a down-closed set is generated by single-bit steps, the
/// full order is the bitmask-subset test, which `leq` uses directly.
#[derive(Clone, Debug)]
pub struct FibPoset {
    pub n: usize,
    /// Sorted list of separated bitmasks of width `n - 1`.
    pub elements: Vec<u64>,
    /// Covering pairs `(lower, upper)` as indices into `elements`;
    /// the upper mask has exactly one extra bit.
    pub covers: Vec<(usize, usize)>,
}

pub fn is_separated(mask: u64) -> bool {
    mask & (mask << 1) == 0
}

/// Builds `Gamma_N` for `N >= 1` (width `N - 1`).
pub fn fibonacci_cube(n: usize) -> FibPoset {
    assert!(n >= 1);
    let width = n - 1;
    let mut elements: Vec<u64> = Vec::new();
    // Enumerate separated masks by the same twin recursion as the subsets.
    fn gen(width: usize, pos: usize, mask: u64, out: &mut Vec<u64>) {
        if pos >= width {
            out.push(mask);
            return;
        }
        gen(width, pos + 1, mask, out);
        gen(width, pos + 2, mask | (1 << pos), out);
    }
    gen(width, 0, 0, &mut elements);
    elements.sort_unstable();
    elements.dedup();
    let index = |m: u64| elements.binary_search(&m).expect("element present");
    let mut covers = Vec::new();
    for (i, &m) in elements.iter().enumerate() {
        for b in 0..width {
            if m & (1 << b) == 0 {
                let up = m | (1 << b);
                if is_separated(up) {
                    covers.push((i, index(up)));
                }
            }
        }
    }
    FibPoset { n, elements, covers }
}

impl FibPoset {
    pub fn width(&self) -> usize {
        self.n - 1
    }

    /// Cube order: `a <= b` iff the bitmask of `a` is contained in `b`.
    pub fn leq(&self, a: u64, b: u64) -> bool {
        a & b == a
    }

    /// The full order recomputed as the transitive closure of the stored
    /// covers; used to validate that cover storage loses nothing.
    pub fn leq_by_covers(&self, a: u64, b: u64) -> bool {
        if a == b {
            return true;
        }
        let ai = self.elements.binary_search(&a).expect("element");
        let bi = self.elements.binary_search(&b).expect("element");
        let mut reach = vec![false; self.elements.len()];
        reach[ai] = true;
        let mut frontier = vec![ai];
        while let Some(x) = frontier.pop() {
            for &(lo, hi) in &self.covers {
                if lo == x && !reach[hi] {
                    reach[hi] = true;
                    frontier.push(hi);
                }
            }
        }
        reach[bi]
    }

    /// Missing-twin bijection: a cotwinned subset of `[1, N]` maps to the
    /// mask with a 1 at the lower index of each missing twin.
    pub fn from_cotwinned(&self, c: &Cotwinned) -> u64 {
        assert_eq!(c.n, self.n);
        let mut mask = 0u64;
        let mut i = 1;
        let mut members = c.members.iter().peekable();
        while i <= c.n {
            if members.peek() == Some(&&i) {
                members.next();
                i += 1;
            } else {
                // Missing twin {i, i+1}.
                mask |= 1 << (i - 1);
                i += 2;
            }
        }
        mask
    }

    pub fn to_cotwinned(&self, mask: u64) -> Cotwinned {
        let mut members = Vec::new();
        let mut depth = 0;
        let mut i = 1;
        while i <= self.n {
            if mask & (1 << (i - 1)) != 0 {
                depth += 1;
                i += 2;
            } else {
                members.push(i);
                i += 1;
            }
        }
        Cotwinned { n: self.n, members, depth }
    }
}

// ---------------------------------------------------------------------------
// Euler polynomials
// ---------------------------------------------------------------------------

/// The parametric Euler polynomial `E_N` over `Q[q]` in ambient `N`
/// generators; `E_0 = 1`.
pub fn euler_poly(n: usize) -> NCPoly {
    euler_poly_on(&(1..=n).collect::<Vec<_>>(), n.max(1))
}

/// `E_k` evaluated on an explicit argument list: `args[j-1]` plays the role
/// of the `j`th variable, as a polynomial in `ambient` generators.
/// `args` may repeat or reverse indices.
pub fn euler_poly_on(args: &[usize], ambient: usize) -> NCPoly {
    let k = args.len();
    let mut out = NCPoly::zero(ambient);
    for c in cotwinned_subsets(k) {
        let word = Word(c.members.iter().map(|&j| args[j - 1]).collect());
        let coeff = Poly::monomial(c.depth);
        // Accumulate in place: repeated indices in `args` can collide on
        // the same word.
        let entry = out.terms.entry(word).or_insert_with(Poly::zero);
        *entry = entry.add(&coeff);
    }
    out.terms.retain(|_, c| !c.is_zero());
    out
}

/// The alternating Euler polynomial `E_N` at `q = -1`.
pub fn euler_poly_alt(n: usize) -> NCPoly {
    euler_poly(n).specialize_q(&rat_int(-1))
}

// ---------------------------------------------------------------------------
// Identity suite
// ---------------------------------------------------------------------------

/// Both recursion forms, `E_N = x_1 E_{N-1}(x_2..x_N) + q E_{N-2}(x_3..x_N)`
/// and its mirror, as exact parametric identities for `2 <= N <= n_max`.
pub fn verify_recursions(n_max: usize) -> Report {
    assert!(n_max >= 2);
    let mut report = Report::new("euler-recursions");
    for n in 2..=n_max {
        let e = euler_poly_on(&(1..=n).collect::<Vec<_>>(), n);
        let q = NCPoly::q(n);

        let left = NCPoly::gen(n, 1)
            .mul(&euler_poly_on(&(2..=n).collect::<Vec<_>>(), n))
            .unwrap()
            .add(&q.mul(&euler_poly_on(&(3..=n).collect::<Vec<_>>(), n)).unwrap())
            .unwrap();
        push_identity(&mut report, format!("left-form N={n}"), &e, &left);

        let right = euler_poly_on(&(1..n).collect::<Vec<_>>(), n)
            .mul(&NCPoly::gen(n, n))
            .unwrap()
            .add(&q.mul(&euler_poly_on(&(1..n.saturating_sub(1)).collect::<Vec<_>>(), n)).unwrap())
            .unwrap();
        push_identity(&mut report, format!("right-form N={n}"), &e, &right);
    }
    report
}

fn push_identity(report: &mut Report, name: String, lhs: &NCPoly, rhs: &NCPoly) {
    if lhs == rhs {
        report.push(Check::pass(name));
    } else {
        let diff = lhs.sub(rhs).expect("same ambient");
        report.push(Check::fail(name, serde_json::json!({ "difference": diff.render() })));
    }
}

/// Symbolic 2x2 matrix over the free algebra.
type Sym2 = [[NCPoly; 2]; 2];

fn sym2_mul(a: &Sym2, b: &Sym2) -> Sym2 {
    std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            a[i][0]
                .mul(&b[0][j])
                .unwrap()
                .add(&a[i][1].mul(&b[1][j]).unwrap())
                .unwrap()
        })
    })
}

fn sign(k: i64) -> Rat {
    if k.rem_euclid(2) == 0 {
        rat_int(1)
    } else {
        rat_int(-1)
    }
}

fn floor_div2(k: i64) -> i64 {
    k.div_euclid(2)
}

/// The product `U_1 ... U_N` with `U_i = [[0, 1], [1, (-1)^i x_i]]` equals
/// the block matrix of signed alternating continuants; checked entrywise.
pub fn verify_matrix_identity(n: usize) -> Report {
    assert!(n >= 2);
    let mut report = Report::new("euler-matrix-identity");
    let ni = n as i64;
    let mut prod: Sym2 = [
        [NCPoly::one(n), NCPoly::zero(n)],
        [NCPoly::zero(n), NCPoly::one(n)],
    ];
    for i in 1..=n {
        let xi = NCPoly::gen(n, i).scale_q(&Poly::constant(sign(i as i64)));
        let u: Sym2 = [
            [NCPoly::zero(n), NCPoly::one(n)],
            [NCPoly::one(n), xi],
        ];
        prod = sym2_mul(&prod, &u);
    }
    let alt = |args: Vec<usize>| euler_poly_on(&args, n).specialize_q(&rat_int(-1));
    let signed = |p: NCPoly, s: i64| p.scale_q(&Poly::constant(sign(s)));
    let expected: Sym2 = [
        [
            signed(alt((2..n).collect()), floor_div2(ni - 2)),
            signed(alt((2..=n).collect()), floor_div2(ni - 1)),
        ],
        [
            signed(alt((1..n).collect()), floor_div2(ni)),
            signed(alt((1..=n).collect()), floor_div2(ni + 1)),
        ],
    ];
    for i in 0..2 {
        for j in 0..2 {
            push_identity(
                &mut report,
                format!("entry ({i},{j}) N={n}"),
                &prod[i][j],
                &expected[i][j],
            );
        }
    }
    report
}

/// The determinant-style identity
/// `E_N(x_1..x_N) E_N(x_{N+1}, x_N..x_2) - E_{N+1}(x_1..x_{N+1}) E_{N-1}(x_N..x_2) = (-q)^N`,
/// plus the renumbered (reversed-variable) form, as parametric identities.
pub fn verify_determinant_identity(n: usize) -> Report {
    assert!(n >= 1);
    let mut report = Report::new("euler-determinant-identity");
    let ambient = n + 1;
    let e = |args: Vec<usize>| euler_poly_on(&args, ambient);
    let minus_q_pow_n = NCPoly::term(
        ambient,
        Word::empty(),
        Poly::monomial(n).scale(&sign(n as i64)),
    );

    let lhs = e((1..=n).collect())
        .mul(&e(std::iter::once(n + 1).chain((2..=n).rev()).collect()))
        .unwrap()
        .sub(&e((1..=n + 1).collect()).mul(&e((2..=n).rev().collect())).unwrap())
        .unwrap();
    push_identity(&mut report, format!("direct N={n}"), &lhs, &minus_q_pow_n);

    // Renumbered form: E_N(x_{N+1}..x_2) E_N(x_1..x_N)
    //   - E_{N+1}(x_{N+1}..x_1) E_{N-1}(x_2..x_N) = (-q)^N.
    let lhs2 = e((2..=n + 1).rev().collect())
        .mul(&e((1..=n).collect()))
        .unwrap()
        .sub(&e((1..=n + 1).rev().collect()).mul(&e((2..=n).collect())).unwrap())
        .unwrap();
    push_identity(&mut report, format!("renumbered N={n}"), &lhs2, &minus_q_pow_n);

    report
}

// ---------------------------------------------------------------------------
// Fibonacci and Chebyshev polynomials
// ---------------------------------------------------------------------------

/// A polynomial in `(x, q)`: entry `k` is the `q`-polynomial coefficient of
/// `x^k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct XqPoly(pub Vec<Poly>);

impl XqPoly {
    /// Specialize `q = q0`, leaving a polynomial in `x` alone.
    pub fn at_q(&self, q0: &Rat) -> Poly {
        Poly::new(self.0.iter().map(|c| c.eval(q0)).collect())
    }
}

/// The 2-variable Fibonacci polynomial
/// `Phi_N(x, q) = sum_k C(N-k, k) x^{N-2k} q^k`.
pub fn fibonacci_poly(n: usize) -> XqPoly {
    let mut coeffs = vec![Poly::zero(); n + 1];
    for k in 0..=n / 2 {
        let c = binomial(n - k, k);
        let mut qc = vec![Rat::zero(); k + 1];
        qc[k] = Rat::from_integer(c);
        coeffs[n - 2 * k] = Poly::new(qc);
    }
    XqPoly(coeffs)
}

/// The rescaled Chebyshev polynomial `p_N(x) = U_N(x/2)`:
/// `p_0 = 1`, `p_1 = x`, `p_{N+1} = x p_N - p_{N-1}`.
pub fn chebyshev_u(n: usize) -> Poly {
    let mut p0 = Poly::one();
    if n == 0 {
        return p0;
    }
    let x = Poly::monomial(1);
    let mut p1 = x.clone();
    for _ in 1..n {
        let next = x.mul(&p1).sub(&p0);
        p0 = p1;
        p1 = next;
    }
    p1
}
