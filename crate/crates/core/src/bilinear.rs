//! Bilinear spaces with nondegenerate (possibly non-symmetric) forms:
//! Serre isometries, adjoints, orthogonals, semi-orthogonal decompositions,
//! gluing, mutations, orthogonal chains, and the periodicity criterion
//! linking chain periodicity to the vanishing of an evaluated continuant.
//!
//! All subspaces are kept in reduced column echelon form, so subspace
//! equality is plain matrix equality throughout.

use crate::continuants::euler_poly;
use crate::freealg::FreeAlgError;
use crate::report::Report;
use crate::scalars::{Elem, Field, Mat, ScalarError};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
pub enum BilinearError {
    #[error("subspace is degenerate for the restricted form")]
    DegenerateSubspace,
    #[error("the pair of subspaces is not a semi-orthogonal decomposition")]
    NotAnSOD,
    #[error("the form is degenerate and cannot define a bilinear space")]
    DegenerateForm,
    #[error("criterion inapplicable: odd N requires equal dimensions")]
    Inapplicable,
    #[error("objects live in different ambient spaces")]
    AmbientMismatch,
    #[error(transparent)]
    Scalar(#[from] ScalarError),
    #[error(transparent)]
    FreeAlg(#[from] FreeAlgError),
}

/// A finite-dimensional space with a nondegenerate bilinear form,
/// represented by its Gram matrix: entry `(i, j)` is `beta(e_i, e_j)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BilinearSpace {
    gram: Mat,
}

impl BilinearSpace {
    pub fn new(gram: Mat) -> Result<Self, BilinearError> {
        if !gram.is_square() {
            return Err(BilinearError::Scalar(ScalarError::ShapeMismatch(
                "Gram matrix must be square".into(),
            )));
        }
        if gram.rank() < gram.rows {
            return Err(BilinearError::DegenerateForm);
        }
        Ok(BilinearSpace { gram })
    }

    pub fn standard(field: Field, dim: usize) -> Self {
        BilinearSpace { gram: Mat::identity(field, dim) }
    }

    pub fn gram(&self) -> &Mat {
        &self.gram
    }

    pub fn dim(&self) -> usize {
        self.gram.rows
    }

    pub fn field(&self) -> &Field {
        &self.gram.field
    }

    /// `beta(x, y) = x^T G y` for coordinate columns x, y.
    pub fn pairing(&self, x: &Mat, y: &Mat) -> Elem {
        let v = x.transpose().mul(&self.gram).unwrap().mul(y).unwrap();
        v.get(0, 0).clone()
    }

    /// The Serre isometry: the unique `S` with `beta(x, y) = beta(y, Sx)`;
    /// in coordinates `S = G^{-1} G^T`.
    pub fn serre(&self) -> Operator {
        let s = self.gram.inverse().expect("nondegenerate").mul(&self.gram.transpose()).unwrap();
        Operator { source: self.clone(), target: self.clone(), matrix: s }
    }

    /// The whole space as a subspace of itself.
    pub fn full(&self) -> Subspace {
        Subspace { space: self.clone(), basis: Mat::identity(self.field().clone(), self.dim()) }
    }

    pub fn zero_subspace(&self) -> Subspace {
        Subspace { space: self.clone(), basis: Mat::zero(self.field().clone(), self.dim(), 0) }
    }

    pub fn subspace(&self, columns: Mat) -> Subspace {
        assert_eq!(columns.rows, self.dim(), "column height must match ambient dimension");
        Subspace { space: self.clone(), basis: columns.rcef().0 }
    }

    /// Coordinate subspace spanned by basis vectors `range`.
    pub fn coordinate_subspace(&self, range: std::ops::Range<usize>) -> Subspace {
        let cols = Mat::from_fn(self.field().clone(), self.dim(), range.len(), |i, j| {
            if i == range.start + j { self.field().one() } else { self.field().zero() }
        });
        self.subspace(cols)
    }
}

/// Which orthogonal / adjoint to take.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// A subspace in canonical (reduced column echelon) basis form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subspace {
    pub space: BilinearSpace,
    /// Canonical ambient-coordinate basis, one column per basis vector.
    pub basis: Mat,
}

impl Subspace {
    pub fn dim(&self) -> usize {
        self.basis.cols
    }

    /// Gram matrix of the restricted form on the canonical basis.
    pub fn restricted_gram(&self) -> Mat {
        self.basis
            .transpose()
            .mul(self.space.gram())
            .unwrap()
            .mul(&self.basis)
            .unwrap()
    }

    /// The restricted form as a bilinear space of its own; fails if the
    /// restriction is degenerate.
    pub fn restricted_space(&self) -> Result<BilinearSpace, BilinearError> {
        BilinearSpace::new(self.restricted_gram()).map_err(|_| BilinearError::DegenerateSubspace)
    }

    pub fn is_nondegenerate(&self) -> bool {
        self.restricted_gram().rank() == self.dim()
    }

    /// Right orthogonal `A^perp = { y : beta(a, y) = 0 }` or left
    /// orthogonal `perp-A = { y : beta(y, a) = 0 }`, canonical form.
    pub fn orthogonal(&self, side: Side) -> Subspace {
        let g = self.space.gram();
        let m = match side {
            Side::Right => self.basis.transpose().mul(g).unwrap(),
            Side::Left => self.basis.transpose().mul(&g.transpose()).unwrap(),
        };
        Subspace { space: self.space.clone(), basis: m.nullspace() }
    }

    pub fn contains(&self, other: &Subspace) -> bool {
        let joined = self.basis.hstack(&other.basis).unwrap();
        joined.rank() == self.dim()
    }

    /// Coordinates of ambient columns `v` in this subspace's basis;
    /// fails if `v` is not contained in the span.
    pub fn coordinates(&self, v: &Mat) -> Result<Mat, BilinearError> {
        Ok(self.basis.solve(v)?)
    }
}

/// A linear map between bilinear spaces, `matrix` of shape
/// `dim(target) x dim(source)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Operator {
    pub source: BilinearSpace,
    pub target: BilinearSpace,
    pub matrix: Mat,
}

impl Operator {
    pub fn new(source: BilinearSpace, target: BilinearSpace, matrix: Mat) -> Self {
        assert_eq!(matrix.rows, target.dim());
        assert_eq!(matrix.cols, source.dim());
        Operator { source, target, matrix }
    }

    pub fn identity(space: &BilinearSpace) -> Self {
        Operator {
            source: space.clone(),
            target: space.clone(),
            matrix: Mat::identity(space.field().clone(), space.dim()),
        }
    }

    /// `self` after `other`.
    pub fn compose(&self, other: &Operator) -> Operator {
        assert_eq!(self.source, other.target, "composition type mismatch");
        Operator {
            source: other.source.clone(),
            target: self.target.clone(),
            matrix: self.matrix.mul(&other.matrix).unwrap(),
        }
    }

    pub fn inverse(&self) -> Result<Operator, BilinearError> {
        Ok(Operator {
            source: self.target.clone(),
            target: self.source.clone(),
            matrix: self.matrix.inverse()?,
        })
    }

    pub fn neg(&self) -> Operator {
        Operator { source: self.source.clone(), target: self.target.clone(), matrix: self.matrix.neg() }
    }

    /// Right adjoint `f^*` with `beta_B(f a, b) = beta_A(a, f^* b)`, or left
    /// adjoint `*f` with `beta_B(b, f a) = beta_A(*f b, a)`.
    pub fn adjoint(&self, side: Side) -> Operator {
        let ga = self.source.gram();
        let gb = self.target.gram();
        let ft = self.matrix.transpose();
        let m = match side {
            // f^* = G_A^{-1} F^T G_B
            Side::Right => ga.inverse().unwrap().mul(&ft).unwrap().mul(gb).unwrap(),
            // *f = G_A^{-T} F^T G_B^T
            Side::Left => ga
                .transpose()
                .inverse()
                .unwrap()
                .mul(&ft)
                .unwrap()
                .mul(&gb.transpose())
                .unwrap(),
        };
        Operator { source: self.target.clone(), target: self.source.clone(), matrix: m }
    }

    /// `f^{(i)}`: `i > 0` applies right adjoints `i` times, `i < 0` left
    /// adjoints; `f^{(0)} = f`.
    pub fn iterated_adjoint(&self, i: i64) -> Operator {
        let mut out = self.clone();
        if i >= 0 {
            for _ in 0..i {
                out = out.adjoint(Side::Right);
            }
        } else {
            for _ in 0..(-i) {
                out = out.adjoint(Side::Left);
            }
        }
        out
    }

    /// Form preservation: `f` invertible and `F^T G_B F = G_A`.
    pub fn is_isometry(&self) -> bool {
        if self.matrix.rank() < self.matrix.rows.max(self.matrix.cols) || !self.matrix.is_square() {
            return false;
        }
        let pulled = self
            .matrix
            .transpose()
            .mul(self.target.gram())
            .unwrap()
            .mul(&self.matrix)
            .unwrap();
        pulled == *self.source.gram()
    }
}

// ---------------------------------------------------------------------------
// SODs, gluing, mutations
// ---------------------------------------------------------------------------

/// `(A, B)` is a semi-orthogonal decomposition of the common ambient space:
/// complementary and `beta(b, a) = 0` on all basis pairs.
pub fn is_sod(a: &Subspace, b: &Subspace) -> bool {
    if a.space != b.space {
        return false;
    }
    if a.dim() + b.dim() != a.space.dim() {
        return false;
    }
    let joined = a.basis.hstack(&b.basis).unwrap();
    if joined.rank() != a.space.dim() {
        return false;
    }
    let cross = b.basis.transpose().mul(a.space.gram()).unwrap().mul(&a.basis).unwrap();
    cross.is_zero()
}

/// Glue an SOD from `(A, B)` via `f: A -> B`: the Gram matrix is
/// `[[G_A, F^T G_B], [0, G_B]]`, realizing `beta(a, b) = beta_B(f a, b)`
/// and `beta(b, a) = 0`.  Returns the glued space with the two coordinate
/// embeddings.
pub fn glue(
    a: &BilinearSpace,
    b: &BilinearSpace,
    f: &Operator,
) -> Result<(BilinearSpace, Subspace, Subspace), BilinearError> {
    assert_eq!(&f.source, a);
    assert_eq!(&f.target, b);
    let (da, db) = (a.dim(), b.dim());
    let field = a.field().clone();
    let cross = f.matrix.transpose().mul(b.gram())?;
    let gram = Mat::from_fn(field, da + db, da + db, |i, j| {
        if i < da && j < da {
            a.gram().get(i, j).clone()
        } else if i < da && j >= da {
            cross.get(i, j - da).clone()
        } else if i >= da && j >= da {
            b.gram().get(i - da, j - da).clone()
        } else {
            a.field().zero()
        }
    });
    let c = BilinearSpace::new(gram)?;
    let emb_a = c.coordinate_subspace(0..da);
    let emb_b = c.coordinate_subspace(da..da + db);
    Ok((c, emb_a, emb_b))
}

/// The gluing operator of an SOD `(A, B)`: the unique `f` between the
/// restricted spaces with `beta(a, b) = beta_B(f a, b)`.
pub fn gluing_operator(a: &Subspace, b: &Subspace) -> Result<Operator, BilinearError> {
    if !is_sod(a, b) {
        return Err(BilinearError::NotAnSOD);
    }
    let a_space = a.restricted_space()?;
    let b_space = b.restricted_space()?;
    // cross_{ij} = beta(a_i, b_j) = (F^T G_B)_{ij}  =>  F = G_B^{-T} cross^T.
    let cross = a.basis.transpose().mul(a.space.gram())?.mul(&b.basis)?;
    let f = b_space.gram().transpose().inverse()?.mul(&cross.transpose())?;
    Ok(Operator { source: a_space, target: b_space, matrix: f })
}

/// The mutation isometry `M_A : A^perp -> perp-A`, projection along `A`,
/// between the restricted forms in canonical bases.
pub fn mutation(a: &Subspace) -> Result<Operator, BilinearError> {
    if !a.is_nondegenerate() {
        return Err(BilinearError::DegenerateSubspace);
    }
    let right = a.orthogonal(Side::Right);
    let left = a.orthogonal(Side::Left);
    // Decompose each basis vector of A^perp as (A-part) + (perp-A part).
    let frame = a.basis.hstack(&left.basis)?;
    let coords = frame.solve(&right.basis)?;
    let lambda = coords.submatrix(a.dim()..a.dim() + left.dim(), 0..right.dim());
    Ok(Operator {
        source: right.restricted_space()?,
        target: left.restricted_space()?,
        matrix: lambda,
    })
}

/// A 2x2 block of matrices modelling a map `P (+) Q -> R (+) S` in the
/// canonical bases of four subspaces.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockOp2x2 {
    pub blocks: [[Mat; 2]; 2],
}

impl BlockOp2x2 {
    pub fn assemble(&self) -> Mat {
        let top = self.blocks[0][0].hstack(&self.blocks[0][1]).unwrap();
        let bottom = self.blocks[1][0].hstack(&self.blocks[1][1]).unwrap();
        top.vstack(&bottom).unwrap()
    }

    pub fn from_mat(m: &Mat, row_split: usize, col_split: usize) -> Self {
        BlockOp2x2 {
            blocks: [
                [m.submatrix(0..row_split, 0..col_split), m.submatrix(0..row_split, col_split..m.cols)],
                [
                    m.submatrix(row_split..m.rows, 0..col_split),
                    m.submatrix(row_split..m.rows, col_split..m.cols),
                ],
            ],
        }
    }
}

/// The coordinate-change transformation `A (+) A^perp -> perp-A (+) A`
/// with blocks `[[0, M_A], [Id, -f^* M_A]]`, where `f` is the gluing
/// operator of the SOD `(A, perp-A)`.  Returns the block operator together
/// with the ambient basis-change matrix it must equal (they are asserted
/// equal in the verification suites).
pub fn coordinate_change(a: &Subspace) -> Result<(BlockOp2x2, Mat), BilinearError> {
    if !a.is_nondegenerate() {
        return Err(BilinearError::DegenerateSubspace);
    }
    let right = a.orthogonal(Side::Right);
    let left = a.orthogonal(Side::Left);
    let m_a = mutation(a)?;
    let f = gluing_operator(a, &left)?;
    let fs = f.adjoint(Side::Right);
    let field = a.space.field().clone();
    let blocks = BlockOp2x2 {
        blocks: [
            [Mat::zero(field.clone(), left.dim(), a.dim()), m_a.matrix.clone()],
            [
                Mat::identity(field, a.dim()),
                fs.compose(&m_a).matrix.neg(),
            ],
        ],
    };
    // Independent basis change: rewrite the [A | A^perp] frame in the
    // [perp-A | A] frame.
    let target_frame = left.basis.hstack(&a.basis)?;
    let source_frame = a.basis.hstack(&right.basis)?;
    let change = target_frame.solve(&source_frame)?;
    Ok((blocks, change))
}

/// `chain[i] = A^{perp(i)}` for `i = 0..=max_steps` (right orthogonals),
/// plus the least period `N >= 1` with `chain[N] = chain[0]`, if any.
pub fn orthogonal_chain(a: &Subspace, max_steps: usize) -> (Vec<Subspace>, Option<usize>) {
    let mut chain = vec![a.clone()];
    let mut period = None;
    for i in 1..=max_steps {
        let next = chain.last().unwrap().orthogonal(Side::Right);
        chain.push(next);
        if period.is_none() && chain[i].basis == chain[0].basis {
            period = Some(i);
        }
    }
    (chain, period)
}

// ---------------------------------------------------------------------------
// Periodicity criterion
// ---------------------------------------------------------------------------

/// Outcome of the periodicity criterion for `(A, B, f, N)`.
#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct CriterionReport {
    pub n: usize,
    /// The evaluated alternating continuant `E_{N-1}(f^*, ..., f^{(N-1)})`
    /// is the zero matrix.
    pub continuant_vanishes: bool,
    /// `A^{perp(N)} = A` in the glued space.
    pub chain_periodic: bool,
    /// The two booleans agree (the content of the criterion).
    pub biconditional_holds: bool,
    /// Least chain period found within `N` steps, if any.
    pub period: Option<usize>,
    /// When both sides hold: `E_{N-2}(f^{**}, ..., f^{(N-1)})` is an isometry.
    pub e_nm2_isometry: Option<bool>,
    /// When both sides hold: `E_N(f^*, ..., f^{(N)})` is an isometry.
    pub e_n_isometry: Option<bool>,
}

/// Evaluate `E_k` at the adjoint string `f^{(offset)}, f^{(offset+1)}, ...`
/// as an operator (variable `j` becomes `f^{(offset + j - 1)}`).
pub fn euler_evaluated(
    f: &Operator,
    k: usize,
    offset: i64,
    q0: i64,
) -> Result<Operator, BilinearError> {
    let a_space = f.source.clone();
    let b_space = f.target.clone();
    // f^{(i)} maps B -> A for odd i, A -> B for even i (i >= 0 and below).
    let space_of = |i: i64| if i.rem_euclid(2) == 1 { (&b_space, &a_space) } else { (&a_space, &b_space) };
    let ops: Vec<Mat> = (0..k as i64)
        .map(|j| f.iterated_adjoint(offset + j).matrix)
        .collect();
    // Source is dictated by the last variable, target by the first; the
    // empty word only occurs when these coincide.
    let (first_src, first_tgt) = space_of(offset);
    let (src, tgt) = if k == 0 {
        // E_0 = 1: identity on the space the surrounding computation uses;
        // by the parity rules this is the source of f^{(offset)}.
        (first_src.clone(), first_src.clone())
    } else {
        let (last_src, _) = space_of(offset + k as i64 - 1);
        (last_src.clone(), first_tgt.clone())
    };
    let poly = euler_poly(k).specialize_q(&crate::scalars::rat_int(q0));
    let matrix = if k == 0 {
        Mat::identity(src.field().clone(), src.dim())
    } else {
        poly.nc_eval(&ops, (tgt.dim(), tgt.dim()))?
    };
    Ok(Operator { source: src, target: tgt, matrix })
}

/// Prop-style periodicity criterion: continuant vanishing vs. chain
/// periodicity for the SOD glued from `(A, B)` via `f`.
pub fn periodicity_criterion(f: &Operator, n: usize) -> Result<CriterionReport, BilinearError> {
    assert!(n >= 2);
    if n % 2 == 1 && f.source.dim() != f.target.dim() {
        return Err(BilinearError::Inapplicable);
    }
    let e_nm1 = euler_evaluated(f, n - 1, 1, -1)?;
    let continuant_vanishes = e_nm1.matrix.is_zero();

    let (_c, emb_a, _emb_b) = glue(&f.source, &f.target, f)?;
    let (chain, period) = orthogonal_chain(&emb_a, n);
    let chain_periodic = chain[n].basis == chain[0].basis;

    let (e_nm2_isometry, e_n_isometry) = if continuant_vanishes && chain_periodic {
        let e_nm2 = euler_evaluated(f, n - 2, 2, -1)?;
        let e_n = euler_evaluated(f, n, 1, -1)?;
        (Some(e_nm2.is_isometry()), Some(e_n.is_isometry()))
    } else {
        (None, None)
    };

    Ok(CriterionReport {
        n,
        continuant_vanishes,
        chain_periodic,
        biconditional_holds: continuant_vanishes == chain_periodic,
        period,
        e_nm2_isometry,
        e_n_isometry,
    })
}

// ---------------------------------------------------------------------------
// W-matrix mechanism
// ---------------------------------------------------------------------------

/// Result of the W-matrix product: the assembled product, its 2x2 block
/// split, the recorded mutation ("straightening") factors, and a report of
/// the structural checks.
#[derive(Clone, Debug)]
pub struct WProduct {
    /// `W_1 ... W_N` assembled over the canonical bases.
    pub product: BlockOp2x2,
    /// The straightening isometries `u_j : (A or B) -> A^{perp(j)}`
    /// built from recorded mutation factors.
    pub straightening: Vec<Operator>,
    pub report: Report,
}

/// Builds `W_1 .. W_N` from the actual orthogonal chain of `A` and checks
/// the mechanism behind the periodicity criterion:
/// each `W_i` equals the ambient coordinate change, the product is block
/// triangular iff the chain is `N`-periodic, the diagonal blocks are then
/// isometries, and the bottom-left block is the mutation-conjugated
/// evaluated continuant `E_{N-1}` up to the stated sign.
pub fn mutation_matrix_product(a: &Subspace, n: usize) -> Result<WProduct, BilinearError> {
    assert!(n >= 2);
    if !a.is_nondegenerate() {
        return Err(BilinearError::DegenerateSubspace);
    }
    let mut report = Report::new("w-matrix-product");

    // chain[k] = A^{perp(k-1)} for k = 0.. (index shifted by one so that
    // chain[0] is the LEFT orthogonal perp-A).
    let mut chain = vec![a.orthogonal(Side::Left), a.clone()];
    for _ in 0..n {
        let next = chain.last().unwrap().orthogonal(Side::Right);
        chain.push(next);
    }
    let at = |i: i64| &chain[(i + 1) as usize]; // A^{perp(i)}

    let periodic = at(n as i64).basis == at(0).basis;

    // Assemble each W_i and validate it against the ambient basis change.
    let mut ws: Vec<Mat> = Vec::new();
    let mut mutations: Vec<Operator> = Vec::new();
    for i in 1..=n as i64 {
        let cur = at(i - 1);
        if !cur.is_nondegenerate() {
            return Err(BilinearError::DegenerateSubspace);
        }
        let m_i = mutation(cur)?; // A^{perp(i)} -> A^{perp(i-2)}
        let f_i = gluing_operator(cur, at(i - 2))?;
        let fs_m = f_i.adjoint(Side::Right).compose(&m_i);
        let field = a.space.field().clone();
        let w = BlockOp2x2 {
            blocks: [
                [Mat::zero(field.clone(), at(i - 2).dim(), cur.dim()), m_i.matrix.clone()],
                [Mat::identity(field, cur.dim()), fs_m.matrix.neg()],
            ],
        }
        .assemble();
        // Oracle: rewrite the [A^{perp(i-1)} | A^{perp(i)}] frame in the
        // [A^{perp(i-2)} | A^{perp(i-1)}] frame.
        let target_frame = at(i - 2).basis.hstack(&cur.basis)?;
        let source_frame = cur.basis.hstack(&at(i).basis)?;
        let change = target_frame.solve(&source_frame)?;
        report.record(format!("W_{i} equals ambient coordinate change"), w == change);
        ws.push(w);
        mutations.push(m_i);
    }

    let mut product = ws[0].clone();
    for w in &ws[1..] {
        product = product.mul(w)?;
    }
    let left_dim = at(-1).dim();
    let blocks = BlockOp2x2::from_mat(&product, left_dim, at((n - 1) as i64).dim());

    let off_diag_zero = blocks.blocks[0][0].is_zero() && blocks.blocks[1][1].is_zero();
    // In the source/target block order (A^{perp(N-1)}, A^{perp(N)}) ->
    // (perp-A, A), periodicity makes the product the identity, so the
    // "off-diagonal" blocks in the proof's sense are (0,0) and (1,1)
    // relative to the shifted identification; structurally we check:
    // bottom-left (A^{perp(N-1)} -> A component) zero iff periodic.
    let _ = off_diag_zero;
    let bl_zero = blocks.blocks[1][0].is_zero();
    let tr_zero = blocks.blocks[0][1].is_zero();
    report.record("block-triangular iff periodic", (bl_zero && tr_zero) == periodic);
    if periodic {
        let id_l = Mat::identity(a.space.field().clone(), left_dim);
        let id_a = Mat::identity(a.space.field().clone(), a.dim());
        report.record("periodic product is the identity", blocks.blocks[0][0] == id_l && blocks.blocks[1][1] == id_a);
    }

    // Straightening: u_0 = id on A, u_1 = M_1^{-1} on perp-A (the model of
    // B), u_j = M_j^{-1} u_{j-2}.  These record the mutation factors that
    // conjugate the continuant evaluation into the product's corner block.
    let a_res = a.restricted_space()?;
    let b_res = at(-1).restricted_space()?;
    let mut u: Vec<Operator> = Vec::new();
    u.push(Operator::identity(&a_res)); // u_0 : A -> A^{perp(0)}
    if n >= 2 {
        u.push(mutations[0].inverse()?); // u_1 : perp-A -> A^{perp(1)}
    }
    for j in 2..n {
        let uj = mutations[j - 1].inverse()?.compose(&u[j - 2]);
        u.push(uj);
    }

    // f: A -> B is the gluing operator of (A, perp-A); the evaluated
    // continuant E_{N-1}(f^*, .., f^{(N-1)}) maps (A or B) -> A.
    let f = gluing_operator(a, at(-1))?;
    let e_eval = euler_evaluated(&f, n - 1, 1, -1)?;
    let u_last = &u[n - 1];
    let conjugated = e_eval.matrix.mul(&u_last.matrix.inverse()?)?;
    // Sign pattern from the symbolic block identity: the (1, 0) entry of
    // the U-product carries (-1)^{floor(N/2)}.
    let sign = if (n / 2) % 2 == 0 { conjugated.clone() } else { conjugated.neg() };
    report.record("bottom-left equals signed conjugated continuant", blocks.blocks[1][0] == sign);

    if periodic {
        // Diagonal blocks as operators between restricted forms are
        // isometries (here: identities between equal forms).
        let top = Operator {
            source: at((n - 1) as i64).restricted_space()?,
            target: b_res.clone(),
            matrix: blocks.blocks[0][0].clone(),
        };
        let bottom = Operator {
            source: at(n as i64).restricted_space()?,
            target: a_res.clone(),
            matrix: blocks.blocks[1][1].clone(),
        };
        report.record("periodic diagonal blocks are isometries", top.is_isometry() && bottom.is_isometry());
    }

    Ok(WProduct { product: blocks, straightening: u, report })
}

// ---------------------------------------------------------------------------
// Seeded random instances
// ---------------------------------------------------------------------------

/// Deterministic instance generator: rejection-samples Gram matrices,
/// operators and subspaces with small entries from an explicit 64-bit seed.
pub struct InstanceGen {
    rng: ChaCha8Rng,
    pub field: Field,
}

impl InstanceGen {
    pub fn new(seed: u64, field: Field) -> Self {
        InstanceGen { rng: ChaCha8Rng::seed_from_u64(seed), field }
    }

    pub fn elem(&mut self) -> Elem {
        let deg = self.field.ext_degree();
        let coeffs: Vec<i64> = (0..deg).map(|_| self.rng.gen_range(-3..=3)).collect();
        let mut acc = self.field.zero();
        for (k, c) in coeffs.into_iter().enumerate() {
            if c == 0 {
                continue;
            }
            let mut term = self.field.from_int(c);
            for _ in 0..k {
                term = self.field.mul(&term, &self.field.generator());
            }
            acc = self.field.add(&acc, &term);
        }
        acc
    }

    pub fn matrix(&mut self, rows: usize, cols: usize) -> Mat {
        let mut entries = Vec::with_capacity(rows * cols);
        for _ in 0..rows * cols {
            entries.push(self.elem());
        }
        let mut k = 0;
        Mat::from_fn(self.field.clone(), rows, cols, |_, _| {
            let e = entries[k].clone();
            k += 1;
            e
        })
    }

    /// A nondegenerate Gram matrix of the given dimension.
    pub fn space(&mut self, dim: usize) -> BilinearSpace {
        loop {
            let g = self.matrix(dim, dim);
            if let Ok(s) = BilinearSpace::new(g) {
                return s;
            }
        }
    }

    pub fn operator(&mut self, source: &BilinearSpace, target: &BilinearSpace) -> Operator {
        let m = self.matrix(target.dim(), source.dim());
        Operator { source: source.clone(), target: target.clone(), matrix: m }
    }

    /// A nondegenerate subspace of the given dimension.
    pub fn nondegenerate_subspace(&mut self, space: &BilinearSpace, dim: usize) -> Subspace {
        loop {
            let cols = self.matrix(space.dim(), dim);
            if cols.rank() != dim {
                continue;
            }
            let s = space.subspace(cols);
            if s.is_nondegenerate() {
                return s;
            }
        }
    }

    /// A random isometry of a space, built as a product of elementary
    /// form-preserving reflections is hard in general; instead sample
    /// invertible `T` and use it to transport the form, giving an isometry
    /// `(C, T^T G T) -> (C, G)`.
    pub fn isometry_onto(&mut self, target: &BilinearSpace) -> Operator {
        loop {
            let t = self.matrix(target.dim(), target.dim());
            if t.rank() < target.dim() {
                continue;
            }
            let pulled = t.transpose().mul(target.gram()).unwrap().mul(&t).unwrap();
            let source = BilinearSpace::new(pulled).expect("congruent form is nondegenerate");
            return Operator { source, target: target.clone(), matrix: t };
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::{rat_int, Field};

    fn rho_space(rho_num: i64) -> BilinearSpace {
        let f = Field::Rationals;
        let gram = Mat::from_int_rows(f, &[&[1, rho_num], &[0, 1]]);
        BilinearSpace::new(gram).unwrap()
    }

    #[test]
    fn serre_examples() {
        let f = Field::Rationals;
        // Symmetric gram -> identity.
        let sym = BilinearSpace::new(Mat::from_int_rows(f.clone(), &[&[2, 1], &[1, 3]])).unwrap();
        assert_eq!(sym.serre().matrix, Mat::identity(f.clone(), 2));
        // Skew 2x2 -> minus identity.
        let skew = BilinearSpace::new(Mat::from_int_rows(f.clone(), &[&[0, 1], &[-1, 0]])).unwrap();
        assert_eq!(skew.serre().matrix, Mat::identity(f.clone(), 2).neg());
        // gram [[1, r], [0, 1]] -> S = [[1-r^2, -r], [r, 1]] and the defining
        // identity beta(e_i, e_j) = beta(e_j, S e_i) on all basis pairs.
        let r = 2i64;
        let c = rho_space(r);
        let s = c.serre();
        let expected =
            Mat::from_int_rows(f.clone(), &[&[1 - r * r, -r], &[r, 1]]);
        assert_eq!(s.matrix, expected);
        for i in 0..2 {
            for j in 0..2 {
                let ei = Mat::identity(f.clone(), 2).column(i);
                let ej = Mat::identity(f.clone(), 2).column(j);
                let lhs = c.pairing(&ei, &ej);
                let rhs = c.pairing(&ej, &s.matrix.mul(&ei).unwrap());
                assert_eq!(lhs, rhs);
            }
        }
        assert!(s.is_isometry());
    }

    #[test]
    fn adjoint_examples() {
        let f = Field::Rationals;
        let a = BilinearSpace::standard(f.clone(), 1);
        let op = Operator::new(a.clone(), a.clone(), Mat::from_int_rows(f.clone(), &[&[5]]));
        assert_eq!(op.adjoint(Side::Right).matrix, op.matrix);
        // Involution and isometry inverse on a random-ish instance.
        let mut gen = InstanceGen::new(7, f.clone());
        let s = gen.space(3);
        let t = gen.space(3);
        let g = gen.operator(&s, &t);
        let round = g.adjoint(Side::Right).adjoint(Side::Left);
        assert_eq!(round.matrix, g.matrix);
        let round2 = g.adjoint(Side::Left).adjoint(Side::Right);
        assert_eq!(round2.matrix, g.matrix);
        let iso = gen.isometry_onto(&t);
        assert!(iso.is_isometry());
        assert_eq!(iso.adjoint(Side::Right).matrix, iso.matrix.inverse().unwrap());
        assert_eq!(iso.adjoint(Side::Left).matrix, iso.matrix.inverse().unwrap());
    }

    #[test]
    fn orthogonal_examples() {
        let r = 2i64;
        let c = rho_space(r);
        let f = Field::Rationals;
        let a = c.coordinate_subspace(0..1);
        let left = a.orthogonal(Side::Left);
        assert_eq!(left.basis, Mat::from_int_rows(f.clone(), &[&[0], &[1]]));
        let right = a.orthogonal(Side::Right);
        assert_eq!(right.basis, Mat::from_int_rows(f.clone(), &[&[-r], &[1]]).rcef().0);
        // Zero subspace -> whole space.
        let z = c.zero_subspace();
        assert_eq!(z.orthogonal(Side::Right).dim(), 2);
        // Double orthogonal identities.
        assert_eq!(a.orthogonal(Side::Right).orthogonal(Side::Left), a);
        assert_eq!(a.orthogonal(Side::Left).orthogonal(Side::Right), a);
    }

    #[test]
    fn sod_glue_mutation_examples() {
        let f = Field::Rationals;
        let r = 2i64;
        let c = rho_space(r);
        let a = c.coordinate_subspace(0..1);
        let b = c.coordinate_subspace(1..2);
        assert!(is_sod(&a, &b));
        assert!(!is_sod(&a, &a));
        assert!(is_sod(&a, &a.orthogonal(Side::Left)));
        // Gluing-operator extraction.
        let g = gluing_operator(&a, &b).unwrap();
        assert_eq!(g.matrix, Mat::from_int_rows(f.clone(), &[&[r]]));
        // Glue round trip.
        let a1 = BilinearSpace::standard(f.clone(), 1);
        let b1 = BilinearSpace::standard(f.clone(), 1);
        let op = Operator::new(a1.clone(), b1.clone(), Mat::from_int_rows(f.clone(), &[&[r]]));
        let (c2, ea, eb) = glue(&a1, &b1, &op).unwrap();
        assert_eq!(c2.gram(), c.gram());
        let extracted = gluing_operator(&ea, &eb).unwrap();
        assert_eq!(extracted.matrix, op.matrix);
        // f = 0 -> block diagonal, orthogonal SOD, M_A = Id.
        let zero_op = Operator::new(a1.clone(), b1.clone(), Mat::zero(f.clone(), 1, 1));
        let (c0, ea0, _) = glue(&a1, &b1, &zero_op).unwrap();
        assert_eq!(c0.gram(), &Mat::identity(f.clone(), 2));
        let m = mutation(&ea0).unwrap();
        assert_eq!(m.matrix, Mat::identity(f.clone(), 1));
        // rho example: M_A maps (-r, 1) to (0, 1): in canonical bases this
        // is the 1x1 identity-like coordinate, check via decomposition.
        let m = mutation(&a).unwrap();
        // basis of A^perp is rcef of (-r, 1); decompose -r e1 + e2 = -r * e1 + e2.
        // The perp-A part is e2, whose canonical coordinate is 1.
        let right = a.orthogonal(Side::Right);
        let scale = right.basis.get(1, 0).clone(); // e2-coefficient of the canonical basis vector
        let expected = f.div(&scale, &f.one()).unwrap();
        assert_eq!(m.matrix.get(0, 0), &expected);
        assert!(m.is_isometry());
    }

    #[test]
    fn coordinate_change_example() {
        let r = 2i64;
        let c = rho_space(r);
        let a = c.coordinate_subspace(0..1);
        let (blocks, change) = coordinate_change(&a).unwrap();
        assert_eq!(blocks.assemble(), change);
        // Bottom-right block is (-f^* M_A); in the 1D rho example f^* acts
        // by r, so with the canonical A^perp basis (1, -1/r)... verify via
        // the ambient change instead: entry equals change(1,1).
        assert_eq!(&blocks.blocks[1][1], &change.submatrix(1..2, 1..2));
        // Prop-style consequence: gluing operator of (A^perp, A) equals
        // (-f^*) M_A.
        let right = a.orthogonal(Side::Right);
        let g2 = gluing_operator(&right, &a).unwrap();
        let f_op = gluing_operator(&a, &a.orthogonal(Side::Left)).unwrap();
        let m = mutation(&a).unwrap();
        let composed = f_op.adjoint(Side::Right).compose(&m).neg();
        assert_eq!(g2.matrix, composed.matrix);
    }

    #[test]
    fn chain_periods() {
        let f = Field::Rationals;
        // f = 0 -> period 2.
        let a1 = BilinearSpace::standard(f.clone(), 1);
        let zero_op = Operator::new(a1.clone(), a1.clone(), Mat::zero(f.clone(), 1, 1));
        let (_, ea, _) = glue(&a1, &a1, &zero_op).unwrap();
        let (_, period) = orthogonal_chain(&ea, 6);
        assert_eq!(period, Some(2));
        // rho = 1 -> period 3.
        let c = rho_space(1);
        let a = c.coordinate_subspace(0..1);
        let (_, period) = orthogonal_chain(&a, 6);
        assert_eq!(period, Some(3));
        // rho = sqrt 2 -> period 4.
        let ext = Field::quadratic(2);
        let rho = ext.generator();
        let gram = Mat::from_fn(ext.clone(), 2, 2, |i, j| match (i, j) {
            (0, 0) | (1, 1) => ext.one(),
            (0, 1) => rho.clone(),
            _ => ext.zero(),
        });
        let c = BilinearSpace::new(gram).unwrap();
        let a = c.coordinate_subspace(0..1);
        let (_, period) = orthogonal_chain(&a, 8);
        assert_eq!(period, Some(4));
    }

    #[test]
    fn criterion_positive_library() {
        let f = Field::Rationals;
        // f = 0, N = 2.
        let a1 = BilinearSpace::standard(f.clone(), 1);
        let zero_op = Operator::new(a1.clone(), a1.clone(), Mat::zero(f.clone(), 1, 1));
        let rep = periodicity_criterion(&zero_op, 2).unwrap();
        assert!(rep.continuant_vanishes && rep.chain_periodic && rep.biconditional_holds);
        assert_eq!(rep.e_nm2_isometry, Some(true));
        assert_eq!(rep.e_n_isometry, Some(true));

        // Isometry, N = 3; E_3 evaluates to -f^{-1}.
        let mut gen = InstanceGen::new(11, f.clone());
        let t = gen.space(2);
        let iso = gen.isometry_onto(&t);
        let rep = periodicity_criterion(&iso, 3).unwrap();
        assert!(rep.continuant_vanishes && rep.chain_periodic);
        assert_eq!(rep.e_nm2_isometry, Some(true));
        assert_eq!(rep.e_n_isometry, Some(true));
        let e3 = euler_evaluated(&iso, 3, 1, -1).unwrap();
        assert_eq!(e3.matrix, iso.matrix.inverse().unwrap().neg());

        // 1D rho = sqrt 3 over Q[x]/(x^2-3), N = 6.
        let ext = Field::quadratic(3);
        let a = BilinearSpace::standard(ext.clone(), 1);
        let rho_op = Operator::new(a.clone(), a.clone(), Mat::from_fn(ext.clone(), 1, 1, |_, _| ext.generator()));
        let rep = periodicity_criterion(&rho_op, 6).unwrap();
        assert!(rep.continuant_vanishes && rep.chain_periodic);
        assert_eq!(rep.e_nm2_isometry, Some(true));
        assert_eq!(rep.e_n_isometry, Some(true));

        // Root vector: A = Q, B = Q^2, v = (1,1), N = 4.
        let b2 = BilinearSpace::standard(f.clone(), 2);
        let v = Operator::new(a1.clone(), b2, Mat::from_int_rows(f.clone(), &[&[1], &[1]]));
        let rep = periodicity_criterion(&v, 4).unwrap();
        assert!(rep.continuant_vanishes && rep.chain_periodic);
        assert_eq!(rep.e_nm2_isometry, Some(true));
        assert_eq!(rep.e_n_isometry, Some(true));

        // Inapplicable: odd N with unequal dims.
        assert_eq!(periodicity_criterion(&v, 5), Err(BilinearError::Inapplicable));
    }

    #[test]
    fn criterion_biconditional_random() {
        let f = Field::Rationals;
        let mut gen = InstanceGen::new(42, f);
        for _ in 0..30 {
            let a = gen.space(2);
            let b = gen.space(2);
            let op = gen.operator(&a, &b);
            for n in [2usize, 3, 4, 5] {
                let rep = periodicity_criterion(&op, n).unwrap();
                assert!(rep.biconditional_holds, "N={n}: {rep:?}");
            }
        }
    }

    #[test]
    fn w_matrix_product_checks() {
        let f = Field::Rationals;
        // f = 0, N = 2: the product is the identity block matrix.
        let a1 = BilinearSpace::standard(f.clone(), 1);
        let zero_op = Operator::new(a1.clone(), a1.clone(), Mat::zero(f.clone(), 1, 1));
        let (_, ea, _) = glue(&a1, &a1, &zero_op).unwrap();
        let w = mutation_matrix_product(&ea, 2).unwrap();
        assert!(w.report.all_pass(), "{:?}", w.report.failures());
        assert_eq!(w.product.assemble(), Mat::identity(f.clone(), 2));

        // rho = 1, N = 3: periodic, diagonal (identity) blocks.
        let c = rho_space(1);
        let a = c.coordinate_subspace(0..1);
        let w = mutation_matrix_product(&a, 3).unwrap();
        assert!(w.report.all_pass(), "{:?}", w.report.failures());

        // Random non-periodic instances, several N.
        let mut gen = InstanceGen::new(3, f);
        for _ in 0..10 {
            let space = gen.space(3);
            let a = gen.nondegenerate_subspace(&space, 1);
            for n in [2usize, 3, 4, 5] {
                match mutation_matrix_product(&a, n) {
                    Ok(w) => assert!(w.report.all_pass(), "N={n}: {:?}", w.report.failures()),
                    Err(BilinearError::DegenerateSubspace) => {} // chain hit a degenerate step
                    Err(e) => panic!("unexpected error: {e}"),
                }
            }
        }
    }

    #[test]
    fn serre_connects_adjoints() {
        // f^* = S_A (*f) S_B^{-1} on random instances, over both fields.
        for field in [Field::Rationals, Field::quadratic(2)] {
            let mut gen = InstanceGen::new(5, field);
            for _ in 0..10 {
                let a = gen.space(2);
                let b = gen.space(3);
                let op = gen.operator(&a, &b);
                let lhs = op.adjoint(Side::Right).matrix;
                let rhs = a
                    .serre()
                    .matrix
                    .mul(&op.adjoint(Side::Left).matrix)
                    .unwrap()
                    .mul(&b.serre().matrix.inverse().unwrap())
                    .unwrap();
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn one_dimensional_phi_bridge() {
        // For f = (rho) between unit 1D spaces, chain period N iff
        // Phi_{N-1}(rho, -1) = 0.
        use crate::continuants::fibonacci_poly;
        let f = Field::Rationals;
        for rho in [-2i64, -1, 0, 1, 2, 3] {
            let a = BilinearSpace::standard(f.clone(), 1);
            let op = Operator::new(a.clone(), a.clone(), Mat::from_int_rows(f.clone(), &[&[rho]]));
            let (_, ea, _) = glue(&a, &a, &op).unwrap();
            let (chain, _) = orthogonal_chain(&ea, 8);
            for n in 2..=8 {
                let periodic = chain[n].basis == chain[0].basis;
                let phi = fibonacci_poly(n - 1).at_q(&rat_int(-1)).eval(&rat_int(rho));
                assert_eq!(periodic, phi == rat_int(0), "rho={rho} N={n}");
            }
        }
    }
}
