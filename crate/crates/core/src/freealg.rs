//! Noncommutative polynomials in generators `x1..xN` over `Q[q]`.
//!
//! A polynomial is a map from words in the generators to `q`-polynomial
//! coefficients.  Words are ordered first by length, then lexicographically,
//! which makes serialization canonical: two equal polynomials always render
//! to the same string regardless of how they were built.

use crate::scalars::{Mat, Poly, Rat, ScalarError};
use num_traits::{One, Signed, Zero};
use std::collections::BTreeMap;
use std::fmt;

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
pub enum FreeAlgError {
    #[error("operands have different ambient generator counts: {0} vs {1}")]
    AmbientMismatch(usize, usize),
    #[error("the parameter q is still present; specialize it before evaluating")]
    UnspecializedParameter,
    #[error("evaluation is ill-typed: {0}")]
    ShapeMismatch(String),
    #[error("cannot parse polynomial: {0}")]
    Parse(String),
}

/// A word in the generators: a finite sequence of indices in `[1, N]`.
///
/// Derived ordering is length-then-lex because shorter `Vec`s with equal
/// prefixes compare smaller only under explicit length priority, so we wrap
/// the comparison ourselves.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Word(pub Vec<usize>);

use serde::{Deserialize, Serialize};

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn single(i: usize) -> Self {
        Word(vec![i])
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            write!(f, "1")
        } else {
            let parts: Vec<String> = self.0.iter().map(|i| format!("x{i}")).collect();
            write!(f, "{}", parts.join("*"))
        }
    }
}

/// Noncommutative polynomial over `Q[q]` in `ambient` generators.
#[derive(Clone, PartialEq, Eq)]
pub struct NCPoly {
    pub ambient: usize,
    /// Word -> q-polynomial coefficient; zero coefficients are never stored.
    pub terms: BTreeMap<Word, Poly>,
}

impl NCPoly {
    pub fn zero(ambient: usize) -> Self {
        NCPoly { ambient, terms: BTreeMap::new() }
    }

    pub fn one(ambient: usize) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(Word::empty(), Poly::one());
        NCPoly { ambient, terms }
    }

    /// The generator x_i (1-based).
    pub fn gen(ambient: usize, i: usize) -> Self {
        assert!((1..=ambient).contains(&i), "generator index out of range");
        let mut terms = BTreeMap::new();
        terms.insert(Word::single(i), Poly::one());
        NCPoly { ambient, terms }
    }

    /// The central parameter q (as q^1 times the empty word).
    pub fn q(ambient: usize) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(Word::empty(), Poly::monomial(1));
        NCPoly { ambient, terms }
    }

    pub fn constant(ambient: usize, c: Rat) -> Self {
        let mut p = NCPoly::zero(ambient);
        if !c.is_zero() {
            p.terms.insert(Word::empty(), Poly::constant(c));
        }
        p
    }

    /// A single term `coeff * x_I`.
    pub fn term(ambient: usize, word: Word, coeff: Poly) -> Self {
        let mut p = NCPoly::zero(ambient);
        if !coeff.is_zero() {
            p.terms.insert(word, coeff);
        }
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn check_ambient(&self, other: &NCPoly) -> Result<(), FreeAlgError> {
        if self.ambient != other.ambient {
            return Err(FreeAlgError::AmbientMismatch(self.ambient, other.ambient));
        }
        Ok(())
    }

    pub fn add(&self, other: &NCPoly) -> Result<NCPoly, FreeAlgError> {
        self.check_ambient(other)?;
        let mut out = self.clone();
        for (w, c) in &other.terms {
            let entry = out.terms.entry(w.clone()).or_insert_with(Poly::zero);
            *entry = entry.add(c);
            if entry.is_zero() {
                out.terms.remove(w);
            }
        }
        Ok(out)
    }

    pub fn sub(&self, other: &NCPoly) -> Result<NCPoly, FreeAlgError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> NCPoly {
        NCPoly {
            ambient: self.ambient,
            terms: self.terms.iter().map(|(w, c)| (w.clone(), c.neg())).collect(),
        }
    }

    pub fn mul(&self, other: &NCPoly) -> Result<NCPoly, FreeAlgError> {
        self.check_ambient(other)?;
        let mut out = NCPoly::zero(self.ambient);
        for (w1, c1) in &self.terms {
            for (w2, c2) in &other.terms {
                let w = w1.concat(w2);
                let c = c1.mul(c2);
                let entry = out.terms.entry(w.clone()).or_insert_with(Poly::zero);
                *entry = entry.add(&c);
                if entry.is_zero() {
                    out.terms.remove(&w);
                }
            }
        }
        Ok(out)
    }

    pub fn scale_q(&self, c: &Poly) -> NCPoly {
        let mut out = NCPoly::zero(self.ambient);
        for (w, coeff) in &self.terms {
            let p = coeff.mul(c);
            if !p.is_zero() {
                out.terms.insert(w.clone(), p);
            }
        }
        out
    }

    /// Substitute x_i -> x_{i+shift} (shift may be negative), adjusting the
    /// ambient count to `new_ambient`.
    pub fn reindex(&self, shift: isize, new_ambient: usize) -> NCPoly {
        let mut out = NCPoly::zero(new_ambient);
        for (w, c) in &self.terms {
            let nw = Word(
                w.0.iter()
                    .map(|&i| {
                        let j = i as isize + shift;
                        assert!(j >= 1 && j as usize <= new_ambient, "reindex out of range");
                        j as usize
                    })
                    .collect(),
            );
            out.terms.insert(nw, c.clone());
        }
        out
    }

    /// Substitute x_i -> x_{perm[i-1]} for an arbitrary index map (1-based values).
    pub fn rename(&self, map: &[usize], new_ambient: usize) -> NCPoly {
        let mut out = NCPoly::zero(new_ambient);
        for (w, c) in &self.terms {
            let nw = Word(w.0.iter().map(|&i| map[i - 1]).collect());
            let entry = out.terms.entry(nw.clone()).or_insert_with(Poly::zero);
            *entry = entry.add(c);
            if entry.is_zero() {
                out.terms.remove(&nw);
            }
        }
        out
    }

    /// Evaluate every q-coefficient at `q0`, dropping terms that vanish.
    pub fn specialize_q(&self, q0: &Rat) -> NCPoly {
        let mut out = NCPoly::zero(self.ambient);
        for (w, c) in &self.terms {
            let v = c.eval(q0);
            if !v.is_zero() {
                out.terms.insert(w.clone(), Poly::constant(v));
            }
        }
        out
    }

    pub fn has_q(&self) -> bool {
        self.terms.values().any(|c| c.degree() >= 1)
    }

    /// Evaluate at a tuple of matrices: `x_i` becomes `ops[i-1]`, a word is
    /// the left-to-right matrix product, and the empty word is the identity
    /// of the given square shape.  All terms must share one (rows, cols).
    pub fn nc_eval(&self, ops: &[Mat], identity_shape: (usize, usize)) -> Result<Mat, FreeAlgError> {
        if self.has_q() {
            return Err(FreeAlgError::UnspecializedParameter);
        }
        let field = ops
            .first()
            .map(|m| m.field.clone())
            .unwrap_or(crate::scalars::Field::Rationals);
        let mut shape: Option<(usize, usize)> = None;
        let mut acc: Option<Mat> = None;
        for (w, c) in &self.terms {
            let m = if w.is_empty() {
                let (r, cdim) = identity_shape;
                if r != cdim {
                    return Err(FreeAlgError::ShapeMismatch(
                        "empty word requires a square identity shape".into(),
                    ));
                }
                Mat::identity(field.clone(), r)
            } else {
                let mut it = w.0.iter();
                let first = *it.next().unwrap();
                if first > ops.len() {
                    return Err(FreeAlgError::ShapeMismatch(format!(
                        "generator x{first} has no operator assigned"
                    )));
                }
                let mut prod = ops[first - 1].clone();
                for &i in it {
                    if i > ops.len() {
                        return Err(FreeAlgError::ShapeMismatch(format!(
                            "generator x{i} has no operator assigned"
                        )));
                    }
                    prod = prod
                        .mul(&ops[i - 1])
                        .map_err(|e| FreeAlgError::ShapeMismatch(e.to_string()))?;
                }
                prod
            };
            match shape {
                None => shape = Some((m.rows, m.cols)),
                Some(s) if s != (m.rows, m.cols) => {
                    return Err(FreeAlgError::ShapeMismatch(format!(
                        "terms evaluate to different shapes: {:?} vs {:?}",
                        s,
                        (m.rows, m.cols)
                    )))
                }
                _ => {}
            }
            let scaled = m.scale(&field.from_rat(c.coeff(0)));
            acc = Some(match acc {
                None => scaled,
                Some(a) => a
                    .add(&scaled)
                    .map_err(|e: ScalarError| FreeAlgError::ShapeMismatch(e.to_string()))?,
            });
        }
        acc.ok_or_else(|| FreeAlgError::ShapeMismatch("cannot evaluate the zero polynomial without a shape".into()))
            .or_else(|e| {
                // The zero polynomial evaluates to the zero matrix of the identity shape.
                if self.is_zero() {
                    Ok(Mat::zero(field, identity_shape.0, identity_shape.1))
                } else {
                    Err(e)
                }
            })
    }

    /// Canonical textual rendering, e.g. "x1*x2*x3 - x1 - x3" or
    /// "x1*x2 + q" for parametric polynomials.
    pub fn render(&self) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut out = String::new();
        let mut first = true;
        for (w, c) in &self.terms {
            for (deg, r) in c.coeffs().iter().enumerate() {
                if r.is_zero() {
                    continue;
                }
                let mono = render_monomial(r, deg, w);
                if first {
                    out.push_str(&mono);
                    first = false;
                } else if let Some(stripped) = mono.strip_prefix('-') {
                    out.push_str(" - ");
                    out.push_str(stripped);
                } else {
                    out.push_str(" + ");
                    out.push_str(&mono);
                }
            }
        }
        out
    }

    /// Parse the textual rendering produced by `render` (and natural
    /// variants: whitespace-insensitive sums of `c*q^j*xi*...` monomials).
    pub fn parse(s: &str, ambient: usize) -> Result<NCPoly, FreeAlgError> {
        let bad = |msg: &str| FreeAlgError::Parse(format!("{msg}: {s}"));
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(bad("empty input"));
        }
        // Split into signed chunks at top-level + and -.
        let mut chunks: Vec<(bool, String)> = Vec::new();
        let mut cur = String::new();
        let mut neg = false;
        let mut chars = compact.chars().peekable();
        // Leading sign.
        if let Some(&c) = chars.peek() {
            if c == '+' || c == '-' {
                neg = c == '-';
                chars.next();
            }
        }
        let mut prev: Option<char> = None;
        for c in chars {
            if (c == '+' || c == '-') && !matches!(prev, Some('^') | Some('*') | Some('/') | None) {
                chunks.push((neg, std::mem::take(&mut cur)));
                neg = c == '-';
            } else {
                cur.push(c);
            }
            prev = Some(c);
        }
        chunks.push((neg, cur));

        let mut out = NCPoly::zero(ambient);
        for (negate, chunk) in chunks {
            if chunk.is_empty() {
                return Err(bad("dangling sign"));
            }
            let mut coeff = Poly::one();
            let mut word = Vec::new();
            for factor in chunk.split('*') {
                if factor.is_empty() {
                    return Err(bad("empty factor"));
                }
                if let Some(rest) = factor.strip_prefix('x') {
                    let idx: usize = rest.parse().map_err(|_| bad("bad generator"))?;
                    if idx == 0 || idx > ambient {
                        return Err(bad("generator index out of range"));
                    }
                    word.push(idx);
                } else if let Some(rest) = factor.strip_prefix('q') {
                    let power: usize = if rest.is_empty() {
                        1
                    } else {
                        rest.strip_prefix('^').ok_or_else(|| bad("bad q power"))?.parse().map_err(|_| bad("bad q power"))?
                    };
                    coeff = coeff.mul(&Poly::monomial(power));
                } else {
                    let r = crate::scalars::parse_rat(factor).map_err(|_| bad("bad coefficient"))?;
                    coeff = coeff.scale(&r);
                }
            }
            if negate {
                coeff = coeff.neg();
            }
            out = out
                .add(&NCPoly::term(ambient, Word(word), coeff))
                .expect("same ambient");
        }
        Ok(out)
    }

    /// JSON term-list form: `[{"word": [1,2], "coeff": ["0","1"]}, ...]`
    /// with q-coefficients lowest-degree-first as rational strings.
    pub fn to_json(&self) -> serde_json::Value {
        let terms: Vec<serde_json::Value> = self
            .terms
            .iter()
            .map(|(w, c)| {
                serde_json::json!({
                    "word": w.0,
                    "coeff": c.coeffs().iter().map(|x| x.to_string()).collect::<Vec<_>>(),
                })
            })
            .collect();
        serde_json::json!({ "ambient": self.ambient, "terms": terms })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<NCPoly, FreeAlgError> {
        let bad = || FreeAlgError::Parse(v.to_string());
        let ambient = v.get("ambient").and_then(|a| a.as_u64()).ok_or_else(bad)? as usize;
        let mut out = NCPoly::zero(ambient);
        for t in v.get("terms").and_then(|t| t.as_array()).ok_or_else(bad)? {
            let word: Vec<usize> = t
                .get("word")
                .and_then(|w| w.as_array())
                .ok_or_else(bad)?
                .iter()
                .map(|i| i.as_u64().map(|x| x as usize).ok_or_else(bad))
                .collect::<Result<_, _>>()?;
            let coeff: Vec<Rat> = t
                .get("coeff")
                .and_then(|c| c.as_array())
                .ok_or_else(bad)?
                .iter()
                .map(|s| {
                    s.as_str()
                        .ok_or_else(bad)
                        .and_then(|s| crate::scalars::parse_rat(s).map_err(|_| bad()))
                })
                .collect::<Result<_, _>>()?;
            out = out.add(&NCPoly::term(ambient, Word(word), Poly::new(coeff)))?;
        }
        Ok(out)
    }
}

fn render_monomial(r: &Rat, deg: usize, w: &Word) -> String {
    let mut factors = Vec::new();
    if !r.abs().is_one() {
        factors.push(r.abs().to_string());
    }
    if deg == 1 {
        factors.push("q".to_string());
    } else if deg > 1 {
        factors.push(format!("q^{deg}"));
    }
    if !w.is_empty() {
        factors.push(w.0.iter().map(|i| format!("x{i}")).collect::<Vec<_>>().join("*"));
    }
    if factors.is_empty() {
        factors.push(r.abs().to_string());
    }
    let body = factors.join("*");
    if r.is_negative() {
        format!("-{body}")
    } else {
        body
    }
}

impl fmt::Debug for NCPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}
