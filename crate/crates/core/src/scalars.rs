//! Exact scalar arithmetic and the exact matrix kernel.
//!
//! Scalars live in `Field::Rationals` or in a simple extension
//! `Q[x]/(p)` for a monic modulus `p`.  Elements of an extension are
//! residues of degree `< deg p`, stored lowest-degree-first.
//! Subspaces are canonicalized as reduced *column* echelon forms, so
//! subspace equality is bit-exact matrix comparison.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use std::fmt;

pub type Rat = num_rational::BigRational;

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Parse the canonical textual form "a/b" or "a".
pub fn parse_rat(s: &str) -> Result<Rat, ScalarError> {
    let s = s.trim();
    let bad = || ScalarError::Parse(s.to_string());
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(Rat::new(n, d))
        }
        None => {
            let n: BigInt = s.parse().map_err(|_| bad())?;
            Ok(Rat::from_integer(n))
        }
    }
}

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
pub enum ScalarError {
    #[error("inversion of a non-invertible element")]
    InversionOfNoninvertible,
    #[error("operands belong to different fields")]
    FieldMismatch,
    #[error("matrix shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("matrix is singular")]
    SingularMatrix,
    #[error("cannot parse scalar: {0}")]
    Parse(String),
}

// ---------------------------------------------------------------------------
// Univariate polynomials over Q (extension moduli, q-coefficients)
// ---------------------------------------------------------------------------

/// Dense univariate polynomial over Q, coefficients lowest-degree-first,
/// trailing coefficient nonzero unless the polynomial is zero.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Poly(Vec<Rat>);

impl Poly {
    pub fn new(mut coeffs: Vec<Rat>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Poly(coeffs)
    }

    pub fn zero() -> Self {
        Poly(Vec::new())
    }

    pub fn one() -> Self {
        Poly(vec![Rat::one()])
    }

    pub fn constant(c: Rat) -> Self {
        Poly::new(vec![c])
    }

    /// The monomial x^k.
    pub fn monomial(k: usize) -> Self {
        let mut v = vec![Rat::zero(); k + 1];
        v[k] = Rat::one();
        Poly(v)
    }

    pub fn coeffs(&self) -> &[Rat] {
        &self.0
    }

    pub fn coeff(&self, k: usize) -> Rat {
        self.0.get(k).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// Degree; 0 for the zero polynomial by convention of callers that check
    /// `is_zero` first.
    pub fn degree(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    pub fn is_monic(&self) -> bool {
        self.0.last().is_some_and(|c| c.is_one())
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.0.len().max(other.0.len());
        Poly::new((0..n).map(|k| self.coeff(k) + other.coeff(k)).collect())
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let n = self.0.len().max(other.0.len());
        Poly::new((0..n).map(|k| self.coeff(k) - other.coeff(k)).collect())
    }

    pub fn neg(&self) -> Poly {
        Poly(self.0.iter().map(|c| -c.clone()).collect())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![Rat::zero(); self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in other.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }

    pub fn scale(&self, c: &Rat) -> Poly {
        Poly::new(self.0.iter().map(|a| a * c).collect())
    }

    /// Euclidean division: returns (quotient, remainder) with divisor nonzero.
    pub fn div_rem(&self, divisor: &Poly) -> (Poly, Poly) {
        assert!(!divisor.is_zero(), "division by the zero polynomial");
        let mut rem = self.0.clone();
        let dd = divisor.degree();
        let lead = divisor.0.last().unwrap().clone();
        if rem.len() <= dd {
            return (Poly::zero(), Poly::new(rem));
        }
        let mut quot = vec![Rat::zero(); rem.len() - dd];
        while rem.len() > dd && !rem.is_empty() {
            let r_deg = rem.len() - 1;
            let top = rem.last().unwrap().clone();
            if top.is_zero() {
                rem.pop();
                continue;
            }
            let q = top / lead.clone();
            let shift = r_deg - dd;
            quot[shift] = q.clone();
            for (k, c) in divisor.0.iter().enumerate() {
                rem[shift + k] -= &q * c;
            }
            while rem.last().is_some_and(|c| c.is_zero()) {
                rem.pop();
            }
        }
        (Poly::new(quot), Poly::new(rem))
    }

    /// Evaluate at a rational point.
    pub fn eval(&self, x: &Rat) -> Rat {
        let mut acc = Rat::zero();
        for c in self.0.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poly{:?}", self.0.iter().map(|c| c.to_string()).collect::<Vec<_>>())
    }
}

// ---------------------------------------------------------------------------
// Fields and their elements
// ---------------------------------------------------------------------------

/// The ground field of a computation: the rationals or Q[x]/(p).
///
/// Irreducibility of the modulus is deliberately not checked; inverting a
/// zero divisor in a reducible quotient raises `InversionOfNoninvertible`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Field {
    Rationals,
    Extension {
        /// Monic modulus, coefficients lowest-degree-first.
        modulus: Vec<String>,
    },
}

impl Field {
    pub fn extension(modulus: Poly) -> Self {
        assert!(modulus.is_monic() && modulus.degree() >= 1, "modulus must be monic of degree >= 1");
        Field::Extension {
            modulus: modulus.coeffs().iter().map(|c| c.to_string()).collect(),
        }
    }

    /// Q[x]/(x^2 - d).
    pub fn quadratic(d: i64) -> Self {
        Field::extension(Poly::new(vec![rat_int(-d), Rat::zero(), Rat::one()]))
    }

    pub fn modulus(&self) -> Option<Poly> {
        match self {
            Field::Rationals => None,
            Field::Extension { modulus } => Some(Poly::new(
                modulus.iter().map(|s| parse_rat(s).expect("modulus coefficient")).collect(),
            )),
        }
    }

    pub fn ext_degree(&self) -> usize {
        self.modulus().map_or(1, |m| m.degree())
    }

    pub fn zero(&self) -> Elem {
        Elem(Poly::zero())
    }

    pub fn one(&self) -> Elem {
        Elem(Poly::one())
    }

    pub fn from_rat(&self, c: Rat) -> Elem {
        Elem(Poly::constant(c))
    }

    pub fn from_int(&self, n: i64) -> Elem {
        self.from_rat(rat_int(n))
    }

    /// The generator x of an extension (or 0 over the rationals, which has no
    /// generator; callers should not ask for it there).
    pub fn generator(&self) -> Elem {
        match self {
            Field::Rationals => panic!("the rationals have no extension generator"),
            Field::Extension { .. } => Elem(Poly::monomial(1)),
        }
    }

    fn reduce(&self, p: Poly) -> Elem {
        match self.modulus() {
            None => {
                assert!(p.degree() == 0 || p.is_zero(), "nonconstant element over the rationals");
                Elem(p)
            }
            Some(m) => Elem(p.div_rem(&m).1),
        }
    }

    pub fn add(&self, a: &Elem, b: &Elem) -> Elem {
        Elem(a.0.add(&b.0))
    }

    pub fn sub(&self, a: &Elem, b: &Elem) -> Elem {
        Elem(a.0.sub(&b.0))
    }

    pub fn neg(&self, a: &Elem) -> Elem {
        Elem(a.0.neg())
    }

    pub fn mul(&self, a: &Elem, b: &Elem) -> Elem {
        self.reduce(a.0.mul(&b.0))
    }

    pub fn inv(&self, a: &Elem) -> Result<Elem, ScalarError> {
        if a.is_zero() {
            return Err(ScalarError::InversionOfNoninvertible);
        }
        match self.modulus() {
            None => {
                let c = a.0.coeff(0);
                Ok(Elem(Poly::constant(Rat::one() / c)))
            }
            Some(m) => {
                // Extended Euclid: find u with u*a + v*m = gcd.
                let (mut r0, mut r1) = (m.clone(), a.0.clone());
                let (mut u0, mut u1) = (Poly::zero(), Poly::one());
                while !r1.is_zero() {
                    let (q, r) = r0.div_rem(&r1);
                    let u = u0.sub(&q.mul(&u1));
                    r0 = r1;
                    r1 = r;
                    u0 = u1;
                    u1 = u;
                }
                if r0.degree() > 0 {
                    // Nontrivial gcd with the modulus: zero divisor.
                    return Err(ScalarError::InversionOfNoninvertible);
                }
                let lead = r0.coeff(r0.degree());
                Ok(self.reduce(u0.scale(&(Rat::one() / lead))))
            }
        }
    }

    pub fn div(&self, a: &Elem, b: &Elem) -> Result<Elem, ScalarError> {
        Ok(self.mul(a, &self.inv(b)?))
    }

    /// Canonical textual form: rationals as "a/b" or "a"; extension elements
    /// as a coefficient array lowest-degree-first, e.g. "[0, 1/2]".
    pub fn fmt_elem(&self, a: &Elem) -> String {
        match self {
            Field::Rationals => a.0.coeff(0).to_string(),
            Field::Extension { .. } => {
                let d = self.ext_degree();
                let parts: Vec<String> = (0..d).map(|k| a.0.coeff(k).to_string()).collect();
                format!("[{}]", parts.join(", "))
            }
        }
    }

    pub fn parse_elem(&self, s: &str) -> Result<Elem, ScalarError> {
        let s = s.trim();
        if let Some(inner) = s.strip_prefix('[').and_then(|t| t.strip_suffix(']')) {
            let coeffs: Result<Vec<Rat>, _> = inner
                .split(',')
                .filter(|p| !p.trim().is_empty())
                .map(parse_rat)
                .collect();
            let p = Poly::new(coeffs?);
            if p.degree() >= self.ext_degree() && !p.is_zero() {
                return Err(ScalarError::Parse(s.to_string()));
            }
            Ok(self.reduce(p))
        } else {
            Ok(self.from_rat(parse_rat(s)?))
        }
    }
}

/// Element of a `Field`: a residue polynomial of degree below the modulus
/// degree (a constant over the rationals).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Elem(Poly);

impl Elem {
    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn coeffs(&self) -> &[Rat] {
        self.0.coeffs()
    }

    /// The rational part; panics on a genuinely algebraic element.
    pub fn to_rat(&self) -> Rat {
        assert!(self.0.degree() == 0 || self.0.is_zero());
        self.0.coeff(0)
    }
}

impl fmt::Debug for Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_zero() {
            write!(f, "0")
        } else if self.0.degree() == 0 {
            write!(f, "{}", self.0.coeff(0))
        } else {
            write!(f, "{:?}", self.0)
        }
    }
}

// ---------------------------------------------------------------------------
// Exact matrices
// ---------------------------------------------------------------------------

/// Dense matrix over a `Field`, row-major.
#[derive(Clone, PartialEq, Eq)]
pub struct Mat {
    pub field: Field,
    pub rows: usize,
    pub cols: usize,
    entries: Vec<Elem>,
}

impl fmt::Debug for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Mat {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| self.field.fmt_elem(self.get(i, j))).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

impl Mat {
    pub fn zero(field: Field, rows: usize, cols: usize) -> Self {
        let z = field.zero();
        Mat { field, rows, cols, entries: vec![z; rows * cols] }
    }

    pub fn identity(field: Field, n: usize) -> Self {
        let mut m = Mat::zero(field.clone(), n, n);
        let one = field.one();
        for i in 0..n {
            m.set(i, i, one.clone());
        }
        m
    }

    pub fn from_fn(field: Field, rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Elem) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j));
            }
        }
        Mat { field, rows, cols, entries }
    }

    /// Integer convenience constructor (row-major).
    pub fn from_int_rows(field: Field, rows: &[&[i64]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        Mat::from_fn(field.clone(), r, c, |i, j| field.from_int(rows[i][j]))
    }

    pub fn get(&self, i: usize, j: usize) -> &Elem {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Elem) {
        self.entries[i * self.cols + j] = v;
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|e| e.is_zero())
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    fn check_field(&self, other: &Mat) -> Result<(), ScalarError> {
        if self.field != other.field {
            return Err(ScalarError::FieldMismatch);
        }
        Ok(())
    }

    pub fn add(&self, other: &Mat) -> Result<Mat, ScalarError> {
        self.check_field(other)?;
        if self.rows != other.rows || self.cols != other.cols {
            return Err(ScalarError::ShapeMismatch(format!(
                "add {}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let f = &self.field;
        Ok(Mat {
            field: f.clone(),
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().zip(&other.entries).map(|(a, b)| f.add(a, b)).collect(),
        })
    }

    pub fn sub(&self, other: &Mat) -> Result<Mat, ScalarError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Mat {
        let f = &self.field;
        Mat {
            field: f.clone(),
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|a| f.neg(a)).collect(),
        }
    }

    pub fn scale(&self, c: &Elem) -> Mat {
        let f = &self.field;
        Mat {
            field: f.clone(),
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|a| f.mul(a, c)).collect(),
        }
    }

    pub fn mul(&self, other: &Mat) -> Result<Mat, ScalarError> {
        self.check_field(other)?;
        if self.cols != other.rows {
            return Err(ScalarError::ShapeMismatch(format!(
                "mul {}x{} * {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let f = &self.field;
        let mut out = Mat::zero(f.clone(), self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let v = f.add(out.get(i, j), &f.mul(a, b));
                    out.set(i, j, v);
                }
            }
        }
        Ok(out)
    }

    pub fn transpose(&self) -> Mat {
        Mat::from_fn(self.field.clone(), self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn hstack(&self, other: &Mat) -> Result<Mat, ScalarError> {
        self.check_field(other)?;
        if self.rows != other.rows {
            return Err(ScalarError::ShapeMismatch("hstack".into()));
        }
        Ok(Mat::from_fn(self.field.clone(), self.rows, self.cols + other.cols, |i, j| {
            if j < self.cols { self.get(i, j).clone() } else { other.get(i, j - self.cols).clone() }
        }))
    }

    pub fn vstack(&self, other: &Mat) -> Result<Mat, ScalarError> {
        self.check_field(other)?;
        if self.cols != other.cols {
            return Err(ScalarError::ShapeMismatch("vstack".into()));
        }
        Ok(Mat::from_fn(self.field.clone(), self.rows + other.rows, self.cols, |i, j| {
            if i < self.rows { self.get(i, j).clone() } else { other.get(i - self.rows, j).clone() }
        }))
    }

    pub fn submatrix(&self, rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> Mat {
        Mat::from_fn(self.field.clone(), rows.len(), cols.len(), |i, j| {
            self.get(rows.start + i, cols.start + j).clone()
        })
    }

    pub fn column(&self, j: usize) -> Mat {
        self.submatrix(0..self.rows, j..j + 1)
    }

    /// Kronecker product; row/column index of the product is (i1*r2+i2, j1*c2+j2).
    pub fn kron(&self, other: &Mat) -> Mat {
        let f = &self.field;
        Mat::from_fn(
            f.clone(),
            self.rows * other.rows,
            self.cols * other.cols,
            |i, j| {
                let a = self.get(i / other.rows, j / other.cols);
                let b = other.get(i % other.rows, j % other.cols);
                f.mul(a, b)
            },
        )
    }

    /// In-place row reduction to reduced row echelon form.
    /// Returns the pivot column indices (strictly increasing).
    fn rref_in_place(&mut self) -> Vec<usize> {
        let f = self.field.clone();
        let mut pivots = Vec::new();
        let mut r = 0usize;
        for c in 0..self.cols {
            if r >= self.rows {
                break;
            }
            let Some(pr) = (r..self.rows).find(|&i| !self.get(i, c).is_zero()) else {
                continue;
            };
            if pr != r {
                for j in 0..self.cols {
                    let a = self.get(r, j).clone();
                    let b = self.get(pr, j).clone();
                    self.set(r, j, b);
                    self.set(pr, j, a);
                }
            }
            let inv = f.inv(self.get(r, c)).expect("pivot is nonzero");
            for j in 0..self.cols {
                let v = f.mul(self.get(r, j), &inv);
                self.set(r, j, v);
            }
            for i in 0..self.rows {
                if i == r || self.get(i, c).is_zero() {
                    continue;
                }
                let factor = self.get(i, c).clone();
                for j in 0..self.cols {
                    let v = f.sub(self.get(i, j), &f.mul(&factor, self.get(r, j)));
                    self.set(i, j, v);
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    /// Reduced column echelon form together with the pivot row indices.
    /// Zero columns are dropped, so the result is canonical per column span.
    pub fn rcef(&self) -> (Mat, Vec<usize>) {
        let mut t = self.transpose();
        let pivots = t.rref_in_place();
        let rank = pivots.len();
        let reduced = t.submatrix(0..rank, 0..t.cols).transpose();
        (reduced, pivots)
    }

    pub fn rank(&self) -> usize {
        let mut t = self.clone();
        t.rref_in_place().len()
    }

    /// Canonical basis of the right kernel {v | M v = 0}, as the reduced
    /// column echelon form of the standard free-variable basis.
    pub fn nullspace(&self) -> Mat {
        let mut r = self.clone();
        let pivots = r.rref_in_place();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let f = &self.field;
        let mut basis = Mat::zero(f.clone(), self.cols, free.len());
        for (k, &fc) in free.iter().enumerate() {
            basis.set(fc, k, f.one());
            for (pi, &pc) in pivots.iter().enumerate() {
                basis.set(pc, k, f.neg(r.get(pi, fc)));
            }
        }
        basis.rcef().0
    }

    /// Solve `self * X = rhs` for a matrix with full column rank; fails with
    /// `SingularMatrix` if the columns are dependent or the system is
    /// inconsistent.
    pub fn solve(&self, rhs: &Mat) -> Result<Mat, ScalarError> {
        self.check_field(rhs)?;
        if self.rows != rhs.rows {
            return Err(ScalarError::ShapeMismatch(format!(
                "solve {}x{} vs rhs {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let k = self.cols;
        let mut aug = self.hstack(rhs)?;
        let pivots = aug.rref_in_place();
        // Full column rank means the pivots are exactly the first k columns.
        if pivots.len() < k || pivots.iter().take(k).enumerate().any(|(i, &p)| p != i) {
            return Err(ScalarError::SingularMatrix);
        }
        // Any pivot beyond column k signals inconsistency.
        if pivots.len() > k {
            return Err(ScalarError::SingularMatrix);
        }
        Ok(aug.submatrix(0..k, k..k + rhs.cols))
    }

    pub fn inverse(&self) -> Result<Mat, ScalarError> {
        if !self.is_square() {
            return Err(ScalarError::ShapeMismatch("inverse of non-square matrix".into()));
        }
        let n = self.rows;
        let mut aug = self.hstack(&Mat::identity(self.field.clone(), n))?;
        let pivots = aug.rref_in_place();
        if pivots.len() < n || pivots.iter().enumerate().any(|(i, &p)| p != i) {
            return Err(ScalarError::SingularMatrix);
        }
        Ok(aug.submatrix(0..n, n..2 * n))
    }

    pub fn det(&self) -> Elem {
        assert!(self.is_square());
        let f = self.field.clone();
        let n = self.rows;
        let mut m = self.clone();
        let mut det = f.one();
        for c in 0..n {
            let Some(pr) = (c..n).find(|&i| !m.get(i, c).is_zero()) else {
                return f.zero();
            };
            if pr != c {
                for j in 0..n {
                    let a = m.get(c, j).clone();
                    let b = m.get(pr, j).clone();
                    m.set(c, j, b);
                    m.set(pr, j, a);
                }
                det = f.neg(&det);
            }
            det = f.mul(&det, m.get(c, c));
            let inv = f.inv(m.get(c, c)).expect("nonzero pivot");
            for i in c + 1..n {
                if m.get(i, c).is_zero() {
                    continue;
                }
                let factor = f.mul(m.get(i, c), &inv);
                for j in c..n {
                    let v = f.sub(m.get(i, j), &f.mul(&factor, m.get(c, j)));
                    m.set(i, j, v);
                }
            }
        }
        det
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_inverse() {
        let f = Field::Rationals;
        let x = f.from_rat(rat(2, 3));
        assert_eq!(f.inv(&x).unwrap(), f.from_rat(rat(3, 2)));
        assert_eq!(f.inv(&f.zero()), Err(ScalarError::InversionOfNoninvertible));
    }

    #[test]
    fn extension_inverse_sqrt2() {
        // inv(x) in Q[x]/(x^2-2) is x/2; oracle: x * (x/2) == 1 mod x^2-2.
        let f = Field::quadratic(2);
        let x = f.generator();
        let inv = f.inv(&x).unwrap();
        assert_eq!(f.mul(&x, &inv), f.one());
        assert_eq!(inv.coeffs(), &[rat_int(0), rat(1, 2)]);
    }

    #[test]
    fn extension_additive_inverse() {
        // add(x, 1-x) in Q[x]/(x^2-3) -> 1
        let f = Field::quadratic(3);
        let x = f.generator();
        let one_minus_x = f.sub(&f.one(), &x);
        assert_eq!(f.add(&x, &one_minus_x), f.one());
    }

    #[test]
    fn zero_divisor_inversion_fails() {
        // Q[x]/(x^2-1) is reducible; x-1 is a zero divisor.
        let f = Field::quadratic(1);
        let zd = f.sub(&f.generator(), &f.one());
        assert_eq!(f.inv(&zd), Err(ScalarError::InversionOfNoninvertible));
    }

    #[test]
    fn rcef_examples() {
        let f = Field::Rationals;
        let id = Mat::identity(f.clone(), 3);
        let (r, p) = id.rcef();
        assert_eq!(r, id);
        assert_eq!(p, vec![0, 1, 2]);

        let m = Mat::from_int_rows(f.clone(), &[&[2], &[4]]);
        let (r, p) = m.rcef();
        assert_eq!(r, Mat::from_int_rows(f.clone(), &[&[1], &[2]]));
        assert_eq!(p, vec![0]);

        // rank-1 oracle by row reduction
        let m = Mat::from_int_rows(f.clone(), &[&[1, 1], &[1, 1]]);
        let (r, _) = m.rcef();
        assert_eq!(r, Mat::from_int_rows(f, &[&[1], &[1]]));
        assert_eq!(m.rank(), 1);
    }

    #[test]
    fn rcef_is_span_canonical_and_idempotent() {
        let f = Field::Rationals;
        let a = Mat::from_int_rows(f.clone(), &[&[1, 2], &[0, 1], &[3, 5]]);
        let b = Mat::from_int_rows(f.clone(), &[&[3, 1], &[1, 0], &[8, 3]]); // same span, mixed columns
        assert_eq!(a.rcef().0, b.rcef().0);
        let (r, _) = a.rcef();
        assert_eq!(r.rcef().0, r);
    }

    #[test]
    fn inverse_and_nullspace() {
        let f = Field::quadratic(2);
        let rho = f.generator();
        let m = Mat::from_fn(f.clone(), 2, 2, |i, j| match (i, j) {
            (0, 0) | (1, 1) => f.one(),
            (0, 1) => rho.clone(),
            _ => f.zero(),
        });
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv).unwrap(), Mat::identity(f.clone(), 2));
        assert_eq!(*inv.get(0, 1), f.neg(&rho));

        let z = Mat::zero(Field::Rationals, 2, 3);
        assert_eq!(z.nullspace(), Mat::identity(Field::Rationals, 3));

        let singular = Mat::from_int_rows(Field::Rationals, &[&[1, 1], &[1, 1]]);
        assert_eq!(singular.inverse(), Err(ScalarError::SingularMatrix));
    }

    #[test]
    fn canonical_text_roundtrip() {
        let f = Field::quadratic(2);
        let e = f.add(&f.generator(), &f.from_rat(rat(1, 2)));
        let s = f.fmt_elem(&e);
        assert_eq!(s, "[1/2, 1]");
        assert_eq!(f.parse_elem(&s).unwrap(), e);
        let q = Field::Rationals;
        assert_eq!(q.fmt_elem(&q.from_rat(rat(-7, 3))), "-7/3");
        assert_eq!(q.parse_elem("-7/3").unwrap(), q.from_rat(rat(-7, 3)));
    }
}
