//! Coboundary bialgebra structures on flat models.
//!
//! A bivector on a [`FlatModel`] is written in blocks,
//!
//! ```text
//! r = Σ_{i<j} a_ij s_i∧s_j        + Σ b_ij s_i∧z_j
//!   + Σ c_ij s_i∧d_{2j-1}         + Σ e_ij s_i∧d_{2j}
//!   + Σ_{i<j} f_ij z_i∧z_j        + Σ g_ij z_i∧d_{2j-1} + Σ h_ij z_i∧d_{2j}
//!   + Σ_{i<j} m_ij d_{2i-1}∧d_{2j-1}
//!   + Σ_{i,j} n_ij d_{2i-1}∧d_{2j}
//!   + Σ_{i<j} p_ij d_{2i}∧d_{2j}
//! ```
//!
//! and [`StructuredBivector`] stores exactly these coefficients (0-based).
//! The `n` block is indexed by all ordered pairs; a term `n_ij` with
//! `i > j` lands on the canonical monomial `d_{2j} ∧ d_{2i-1}` with a minus
//! sign.
//!
//! The closed forms ([`xi_on_s`], [`xi_on_d`], [`schouten_structured`],
//! [`dualize`]) are independent of the generic routines in [`crate::lie`]
//! and [`crate::cocycle`]; the tests and the harness compare the two.
//!
//! In the degenerate case the coupling between the `n` coefficients is
//! `n_ji = ε_ij n_ij`.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::Zero;
use thiserror::Error;

use crate::cocycle::{coboundary, Cocycle};
use crate::exterior::{wedge, Multivector};
use crate::flat::{classify_degeneracy, DegeneracyReport, FlatModel, Sign, Slot};
use crate::geometry::{self, milnor_verify, MilnorReport, MilnorSplit};
use crate::lie::{ad_multivector, schouten, LieAlgebra, LieError};
use crate::linalg::Matrix;
use crate::scalar::{self, Scalar};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BialgebraError {
    #[error("block {block}: index ({i},{j}) outside {shape:?}")]
    IndexOutOfRange {
        block: Block,
        i: usize,
        j: usize,
        shape: (usize, usize),
    },
    #[error("block {block} is stored for i < j only, got ({i},{j})")]
    NotStrict { block: Block, i: usize, j: usize },
    #[error("bivector has dimensions {found:?}, model has {expected:?}")]
    ModelMismatch {
        expected: (usize, usize, usize),
        found: (usize, usize, usize),
    },
    #[error("index {index} out of range (limit {limit})")]
    Index { index: usize, limit: usize },
    #[error("closed-form bracket needs the {0} block to vanish")]
    UnsupportedBlock(Block),
    #[error("cocycle is not metaflat: {0}")]
    NotMetaflat(MetaflatReport),
    #[error(transparent)]
    Lie(#[from] LieError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Block {
    A,
    B,
    C,
    E,
    F,
    G,
    H,
    M,
    N,
    P,
}

impl Block {
    pub const ALL: [Block; 10] = [
        Block::A,
        Block::B,
        Block::C,
        Block::E,
        Block::F,
        Block::G,
        Block::H,
        Block::M,
        Block::N,
        Block::P,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Block::A => "a",
            Block::B => "b",
            Block::C => "c",
            Block::E => "e",
            Block::F => "f",
            Block::G => "g",
            Block::H => "h",
            Block::M => "m",
            Block::N => "n",
            Block::P => "p",
        }
    }

    pub fn from_name(name: &str) -> Option<Block> {
        Block::ALL.into_iter().find(|b| b.name() == name)
    }

    /// Blocks stored for `i < j` only.
    pub fn is_strict(self) -> bool {
        matches!(self, Block::A | Block::F | Block::M | Block::P)
    }

    pub fn shape(self, k0: usize, l0: usize, m: usize) -> (usize, usize) {
        match self {
            Block::A => (k0, k0),
            Block::B => (k0, l0),
            Block::C | Block::E => (k0, m),
            Block::F => (l0, l0),
            Block::G | Block::H => (l0, m),
            Block::M | Block::N | Block::P => (m, m),
        }
    }

    /// The two basis vectors `(x, y)` of the monomial `x ∧ y` carrying entry `(i, j)`.
    pub fn slots(self, model: &FlatModel, i: usize, j: usize) -> (usize, usize) {
        match self {
            Block::A => (model.s(i), model.s(j)),
            Block::B => (model.s(i), model.z(j)),
            Block::C => (model.s(i), model.d_odd(j)),
            Block::E => (model.s(i), model.d_even(j)),
            Block::F => (model.z(i), model.z(j)),
            Block::G => (model.z(i), model.d_odd(j)),
            Block::H => (model.z(i), model.d_even(j)),
            Block::M => (model.d_odd(i), model.d_odd(j)),
            Block::N => (model.d_odd(i), model.d_even(j)),
            Block::P => (model.d_even(i), model.d_even(j)),
        }
    }
}

impl std::fmt::Display for Block {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructuredBivector {
    dims: (usize, usize, usize),
    entries: BTreeMap<(Block, usize, usize), Scalar>,
}

impl StructuredBivector {
    pub fn zero(k0: usize, l0: usize, m: usize) -> Self {
        Self {
            dims: (k0, l0, m),
            entries: BTreeMap::new(),
        }
    }

    pub fn for_model(model: &FlatModel) -> Self {
        Self::zero(model.k0(), model.l0(), model.m())
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        self.dims
    }

    pub fn get(&self, block: Block, i: usize, j: usize) -> Scalar {
        self.entries.get(&(block, i, j)).cloned().unwrap_or_else(scalar::zero)
    }

    pub fn set(&mut self, block: Block, i: usize, j: usize, value: Scalar) -> Result<(), BialgebraError> {
        let (k0, l0, m) = self.dims;
        let shape = block.shape(k0, l0, m);
        if i >= shape.0 || j >= shape.1 {
            return Err(BialgebraError::IndexOutOfRange { block, i, j, shape });
        }
        if block.is_strict() && i >= j {
            return Err(BialgebraError::NotStrict { block, i, j });
        }
        if value.is_zero() {
            self.entries.remove(&(block, i, j));
        } else {
            self.entries.insert((block, i, j), value);
        }
        Ok(())
    }

    pub fn with(mut self, block: Block, i: usize, j: usize, value: Scalar) -> Result<Self, BialgebraError> {
        self.set(block, i, j, value)?;
        Ok(self)
    }

    /// Nonzero entries in block order.
    pub fn entries(&self) -> impl Iterator<Item = (Block, usize, usize, &Scalar)> + '_ {
        self.entries.iter().map(|(&(b, i, j), v)| (b, i, j, v))
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn block_is_zero(&self, block: Block) -> bool {
        !self.entries.keys().any(|k| k.0 == block)
    }

    fn check_model(&self, model: &FlatModel) -> Result<(), BialgebraError> {
        let expected = (model.k0(), model.l0(), model.m());
        if self.dims != expected {
            return Err(BialgebraError::ModelMismatch {
                expected,
                found: self.dims,
            });
        }
        Ok(())
    }

    pub fn to_multivector(&self, model: &FlatModel) -> Result<Multivector, BialgebraError> {
        self.check_model(model)?;
        let terms = self.entries().map(|(b, i, j, v)| {
            let (x, y) = b.slots(model, i, j);
            (vec![x, y], v.clone())
        });
        Ok(Multivector::from_terms(model.dim(), 2, terms).expect("slots in range"))
    }

    pub fn from_multivector(model: &FlatModel, r: &Multivector) -> Result<Self, BialgebraError> {
        if r.dim() != model.dim() || r.degree() != 2 {
            return Err(LieError::DimensionMismatch {
                algebra: model.dim(),
                argument: r.dim(),
            }
            .into());
        }
        let mut out = Self::for_model(model);
        for (blade, c) in r.terms() {
            let idx = blade.indices();
            let (block, i, j, neg) = match (model.slot(idx[0]), model.slot(idx[1])) {
                (Slot::S(i), Slot::S(j)) => (Block::A, i, j, false),
                (Slot::S(i), Slot::Z(j)) => (Block::B, i, j, false),
                (Slot::S(i), Slot::DOdd(j)) => (Block::C, i, j, false),
                (Slot::S(i), Slot::DEven(j)) => (Block::E, i, j, false),
                (Slot::Z(i), Slot::Z(j)) => (Block::F, i, j, false),
                (Slot::Z(i), Slot::DOdd(j)) => (Block::G, i, j, false),
                (Slot::Z(i), Slot::DEven(j)) => (Block::H, i, j, false),
                (Slot::DOdd(i), Slot::DOdd(j)) => (Block::M, i, j, false),
                (Slot::DOdd(i), Slot::DEven(j)) => (Block::N, i, j, false),
                // d_{2j} ∧ d_{2i-1} with j < i
                (Slot::DEven(j), Slot::DOdd(i)) => (Block::N, i, j, true),
                (Slot::DEven(i), Slot::DEven(j)) => (Block::P, i, j, false),
                _ => unreachable!("canonical monomials are ordered s < z < d"),
            };
            out.set(block, i, j, if neg { -c.clone() } else { c.clone() })?;
        }
        Ok(out)
    }
}

struct Terms {
    dim: usize,
    degree: usize,
    list: Vec<(Vec<usize>, Scalar)>,
}

impl Terms {
    fn new(dim: usize, degree: usize) -> Self {
        Self {
            dim,
            degree,
            list: Vec::new(),
        }
    }

    fn push(&mut self, idx: &[usize], c: Scalar) {
        if !c.is_zero() {
            self.list.push((idx.to_vec(), c));
        }
    }

    fn build(self) -> Multivector {
        Multivector::from_terms(self.dim, self.degree, self.list).expect("indices in range")
    }
}

/// `ξ(s_k) = ad_{s_k} r` from the block coefficients.
pub fn xi_on_s(model: &FlatModel, r: &StructuredBivector, k: usize) -> Result<Multivector, BialgebraError> {
    r.check_model(model)?;
    if k >= model.k0() {
        return Err(BialgebraError::Index {
            index: k,
            limit: model.k0(),
        });
    }
    let (k0, l0, m) = r.dims;
    let l = |j| model.lam(k, j);
    let mut t = Terms::new(model.dim(), 2);
    for i in 0..k0 {
        for j in 0..m {
            t.push(&[model.s(i), model.d_odd(j)], -(l(j) * r.get(Block::E, i, j)));
            t.push(&[model.s(i), model.d_even(j)], l(j) * r.get(Block::C, i, j));
        }
    }
    for i in 0..l0 {
        for j in 0..m {
            t.push(&[model.z(i), model.d_odd(j)], -(l(j) * r.get(Block::H, i, j)));
            t.push(&[model.z(i), model.d_even(j)], l(j) * r.get(Block::G, i, j));
        }
    }
    for i in 0..m {
        for j in i + 1..m {
            let (mij, pij) = (r.get(Block::M, i, j), r.get(Block::P, i, j));
            let (nij, nji) = (r.get(Block::N, i, j), r.get(Block::N, j, i));
            t.push(&[model.d_odd(i), model.d_odd(j)], l(i) * &nji - l(j) * &nij);
            t.push(&[model.d_odd(i), model.d_even(j)], l(j) * &mij - l(i) * &pij);
            t.push(&[model.d_odd(j), model.d_even(i)], l(j) * &pij - l(i) * &mij);
            t.push(&[model.d_even(i), model.d_even(j)], l(i) * &nij - l(j) * &nji);
        }
    }
    Ok(t.build())
}

/// `Φ_k`, including its `d` components.
pub fn phi(model: &FlatModel, r: &StructuredBivector, k: usize) -> Result<Multivector, BialgebraError> {
    r.check_model(model)?;
    if k >= model.m() {
        return Err(BialgebraError::Index {
            index: k,
            limit: model.m(),
        });
    }
    let (k0, l0, m) = r.dims;
    let l = |i| model.lam(i, k);
    let mut coords = vec![scalar::zero(); model.dim()];
    for p in 0..k0 {
        // symmetrically: Σ_{i<p} λ_ik a_ip − Σ_{j>p} λ_jk a_pj
        for i in 0..p {
            coords[model.s(p)] += l(i) * r.get(Block::A, i, p);
        }
        for j in p + 1..k0 {
            coords[model.s(p)] -= l(j) * r.get(Block::A, p, j);
        }
    }
    for i in 0..k0 {
        for j in 0..l0 {
            coords[model.z(j)] += l(i) * r.get(Block::B, i, j);
        }
        for j in 0..m {
            coords[model.d_odd(j)] += l(i) * r.get(Block::C, i, j);
            coords[model.d_even(j)] += l(i) * r.get(Block::E, i, j);
        }
    }
    Ok(Multivector::vector(&coords))
}

/// `(ξ(d_{2k-1}), ξ(d_{2k})) = (Φ_k ∧ d_{2k}, d_{2k-1} ∧ Φ_k)`.
pub fn xi_on_d(
    model: &FlatModel,
    r: &StructuredBivector,
    k: usize,
) -> Result<(Multivector, Multivector), BialgebraError> {
    let f = phi(model, r, k)?;
    let n = model.dim();
    let odd = Multivector::basis(n, model.d_odd(k));
    let even = Multivector::basis(n, model.d_even(k));
    Ok((wedge(&f, &even).expect("degree 2"), wedge(&odd, &f).expect("degree 2")))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MetaflatReport {
    Pass,
    /// `ad_{e_x} ad_{e_y} ξ(e_z) = value ≠ 0`, basis indices of the algebra.
    Fail {
        x: usize,
        y: usize,
        z: usize,
        value: Multivector,
    },
}

impl MetaflatReport {
    pub fn passed(&self) -> bool {
        matches!(self, MetaflatReport::Pass)
    }

    /// `ad_s² ξ(s) = -z∧d2` style rendering.
    pub fn describe(&self, labels: &[String]) -> String {
        match self {
            MetaflatReport::Pass => "metaflat".to_string(),
            MetaflatReport::Fail { x, y, z, value } => {
                let ad = if x == y {
                    format!("ad_{}²", labels[*x])
                } else {
                    format!("ad_{} ad_{}", labels[*x], labels[*y])
                };
                format!("{ad} ξ({}) = {}", labels[*z], value.display_with(labels))
            }
        }
    }
}

impl std::fmt::Display for MetaflatReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MetaflatReport::Pass => f.write_str("metaflat"),
            MetaflatReport::Fail { x, y, z, .. } => write!(f, "ad_{x} ad_{y} ξ({z}) ≠ 0"),
        }
    }
}

/// `ad_x ad_y ξ(z) = 0` for all `x, y, z` in the span of `s_indices`,
/// scanning `z`, then `y`, then `x`. With `mixed = false` only `x = y` is tried.
pub fn is_metaflat_on(xi: &Cocycle, s_indices: &[usize], mixed: bool) -> MetaflatReport {
    let alg = xi.algebra();
    let n = alg.dim();
    for &z in s_indices {
        let img = xi.image(z);
        if img.is_zero() {
            continue;
        }
        for &y in s_indices {
            let once = ad_multivector(alg, &Multivector::basis(n, y), &img).expect("dims");
            if once.is_zero() {
                continue;
            }
            for &x in s_indices {
                if !mixed && x != y {
                    continue;
                }
                let twice = ad_multivector(alg, &Multivector::basis(n, x), &once).expect("dims");
                if !twice.is_zero() {
                    return MetaflatReport::Fail { x, y, z, value: twice };
                }
            }
        }
    }
    MetaflatReport::Pass
}

/// The metaflatness condition over `s_1, ..., s_k0`, mixed pairs included.
pub fn is_metaflat(model: &FlatModel, xi: &Cocycle) -> MetaflatReport {
    is_metaflat_on(xi, &model.split().s, true)
}

/// Only `ad²_{s_l} ξ(s_k)`.
pub fn is_metaflat_diagonal(model: &FlatModel, xi: &Cocycle) -> MetaflatReport {
    is_metaflat_on(xi, &model.split().s, false)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NormalFormViolation {
    /// Entry `(i, j)` of `block` must be zero.
    MustVanish { block: Block, i: usize, j: usize },
    /// `p_ij = ε m_ij` (block `P`) or `n_ji = ε n_ij` (block `N`) fails, `i < j`.
    Coupling {
        block: Block,
        i: usize,
        j: usize,
        eps: Sign,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalFormReport {
    pub degeneracy: DegeneracyReport,
    pub violations: Vec<NormalFormViolation>,
}

impl NormalFormReport {
    pub fn conforming(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Whether `r` has the restricted shape that makes its coboundary metaflat.
///
/// The `c, e, g, h` blocks vanish. For each pair `i < j` of `λ` columns: if
/// `λ_{·i} = ε λ_{·j}` then `p_ij = ε m_ij` and `n_ji = ε n_ij`; otherwise
/// `m_ij = p_ij = n_ij = n_ji = 0`. The `a, b, f` blocks and `n_ii` are free.
/// In a nondegenerate model every pair takes the second branch.
pub fn metaflat_normal_form(model: &FlatModel, r: &StructuredBivector) -> Result<NormalFormReport, BialgebraError> {
    use NormalFormViolation::*;
    r.check_model(model)?;
    let mut violations = Vec::new();
    for (block, i, j, _) in r.entries() {
        if matches!(block, Block::C | Block::E | Block::G | Block::H) {
            violations.push(MustVanish { block, i, j });
        }
    }
    let m = model.m();
    for i in 0..m {
        for j in i + 1..m {
            let (mij, pij) = (r.get(Block::M, i, j), r.get(Block::P, i, j));
            let (nij, nji) = (r.get(Block::N, i, j), r.get(Block::N, j, i));
            match model.column_relation(i, j) {
                Some(eps) => {
                    if pij != eps.apply(&mij) {
                        violations.push(Coupling {
                            block: Block::P,
                            i,
                            j,
                            eps,
                        });
                    }
                    if nji != eps.apply(&nij) {
                        violations.push(Coupling {
                            block: Block::N,
                            i,
                            j,
                            eps,
                        });
                    }
                }
                None => {
                    for (block, a, b, v) in [
                        (Block::M, i, j, &mij),
                        (Block::P, i, j, &pij),
                        (Block::N, i, j, &nij),
                        (Block::N, j, i, &nji),
                    ] {
                        if !v.is_zero() {
                            violations.push(MustVanish { block, i: a, j: b });
                        }
                    }
                }
            }
        }
    }
    Ok(NormalFormReport {
        degeneracy: classify_degeneracy(model),
        violations,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CybeReport {
    Zero,
    Nonzero(Multivector),
}

impl CybeReport {
    pub fn is_zero(&self) -> bool {
        matches!(self, CybeReport::Zero)
    }
}

/// `[r, r] = 0`.
pub fn cybe_check(alg: &LieAlgebra, r: &Multivector) -> Result<CybeReport, LieError> {
    let rr = schouten(alg, r, r)?;
    Ok(if rr.is_zero() {
        CybeReport::Zero
    } else {
        CybeReport::Nonzero(rr)
    })
}

/// `[r, r]` as twice the sum of the six `Γ`-block contributions, with
/// `Γ^l_ij = λ_jl s_i − λ_il s_j`. Valid only when `c, e, g, h` vanish.
pub fn schouten_structured(model: &FlatModel, r: &StructuredBivector) -> Result<Multivector, BialgebraError> {
    r.check_model(model)?;
    for block in [Block::C, Block::E, Block::G, Block::H] {
        if !r.block_is_zero(block) {
            return Err(BialgebraError::UnsupportedBlock(block));
        }
    }
    let (k0, l0, m) = r.dims;
    let lam = |i, j| model.lam(i, j);
    let (od, ev) = (|j| model.d_odd(j), |j| model.d_even(j));
    let mut t = Terms::new(model.dim(), 3);
    // c · Γ^l_ij ∧ x ∧ y
    let gamma = |t: &mut Terms, i: usize, j: usize, l: usize, c: &Scalar, x: usize, y: usize| {
        t.push(&[model.s(i), x, y], c * lam(j, l));
        t.push(&[model.s(j), x, y], -(c * lam(i, l)));
    };
    for i in 0..k0 {
        for j in i + 1..k0 {
            let a = r.get(Block::A, i, j);
            if a.is_zero() {
                continue;
            }
            for k in 0..m {
                for l in 0..m {
                    let n = &a * r.get(Block::N, k, l);
                    if !n.is_zero() {
                        gamma(&mut t, i, j, l, &-n.clone(), od(k), od(l));
                        gamma(&mut t, i, j, k, &n, ev(k), ev(l));
                    }
                    if k >= l {
                        continue;
                    }
                    let mm = &a * r.get(Block::M, k, l);
                    if !mm.is_zero() {
                        gamma(&mut t, i, j, l, &mm, od(k), ev(l));
                        gamma(&mut t, i, j, k, &-mm.clone(), od(l), ev(k));
                    }
                    let p = &a * r.get(Block::P, k, l);
                    if !p.is_zero() {
                        gamma(&mut t, i, j, k, &-p.clone(), od(k), ev(l));
                        gamma(&mut t, i, j, l, &p, od(l), ev(k));
                    }
                }
            }
        }
    }
    for i in 0..k0 {
        for j in 0..l0 {
            let b = r.get(Block::B, i, j);
            if b.is_zero() {
                continue;
            }
            let z = model.z(j);
            for k in 0..m {
                for l in 0..m {
                    let n = &b * r.get(Block::N, k, l);
                    if !n.is_zero() {
                        t.push(&[z, od(k), od(l)], &n * lam(i, l));
                        t.push(&[z, ev(k), ev(l)], -(&n * lam(i, k)));
                    }
                    if k >= l {
                        continue;
                    }
                    let mm = &b * r.get(Block::M, k, l);
                    t.push(&[z, od(k), ev(l)], -(&mm * lam(i, l)));
                    t.push(&[z, od(l), ev(k)], &mm * lam(i, k));
                    let p = &b * r.get(Block::P, k, l);
                    t.push(&[z, od(k), ev(l)], &p * lam(i, k));
                    t.push(&[z, od(l), ev(k)], -(&p * lam(i, l)));
                }
            }
        }
    }
    Ok(t.build().scale(&scalar::int(2)))
}

/// The dual bialgebra of a metaflat coboundary structure.
#[derive(Debug, Clone)]
pub struct DualBialgebra {
    /// `𝔤*` on the basis `s*, z*, d*` (same order as the source model).
    pub algebra: LieAlgebra,
    /// `phi[k]`: the `s` then `z` coordinates of `Φ_k`.
    pub phi: Vec<Vec<Scalar>>,
    /// `psi[k][i] = λ_ik`, the coordinates of `Ψ_k` on `s*`.
    pub psi: Vec<Vec<Scalar>>,
    /// `ξ*` on [`Self::algebra`].
    pub cocycle: Cocycle,
    /// `𝔤*` as a flat model in its own adapted basis.
    pub model: FlatModel,
    /// `basis_map[a]` is the index in [`Self::algebra`] of basis vector `a` of [`Self::model`].
    pub basis_map: Vec<usize>,
    pub flat: bool,
    pub metaflat: MetaflatReport,
    pub milnor: MilnorReport,
}

impl DualBialgebra {
    /// The decomposition of [`Self::algebra`] induced by [`Self::model`].
    pub fn split(&self) -> MilnorSplit {
        let s = self.model.split();
        let map = |v: Vec<usize>| v.into_iter().map(|a| self.basis_map[a]).collect();
        MilnorSplit {
            s: map(s.s),
            z: map(s.z),
            d: map(s.d),
        }
    }

    /// `ξ*` transported to the basis of [`Self::model`], on `model.expand()`.
    pub fn model_cocycle(&self) -> Cocycle {
        let n = self.basis_map.len();
        let mut pos = vec![0; n];
        for (a, &x) in self.basis_map.iter().enumerate() {
            pos[x] = a;
        }
        let images: Vec<Multivector> = self
            .basis_map
            .iter()
            .map(|&x| {
                let img = self.cocycle.image(x);
                let terms = img
                    .terms()
                    .map(|(b, c)| (b.indices().into_iter().map(|i| pos[i]).collect(), c.clone()));
                Multivector::from_terms(n, 2, terms).expect("permutation")
            })
            .collect();
        Cocycle::from_images(Arc::new(self.model.expand()), &images).expect("shape")
    }
}

/// Builds `𝔤*` with its cocycle from the closed-form tables.
///
/// ```text
/// [u*, d*_{2j-1}] = -u*(Φ_j) d*_{2j}      [u*, d*_{2j}] = u*(Φ_j) d*_{2j-1}
/// ξ*(d*_{2k-1})   = -Ψ_k ∧ d*_{2k}        ξ*(d*_{2k})   = Ψ_k ∧ d*_{2k-1}
/// ```
///
/// for `u` ranging over `s` and `z`, and `ξ*` vanishing on `s*, z*`.
/// The dual model has as `s` block the `u*` with a nonzero row `u*(Φ_·)`;
/// the other `u*` and the `d*` pairs with `Φ_j = 0` form its center.
pub fn dualize(model: &FlatModel, r: &StructuredBivector) -> Result<DualBialgebra, BialgebraError> {
    let nf = metaflat_normal_form(model, r)?;
    if !nf.conforming() {
        let alg = Arc::new(model.expand());
        let xi = coboundary(&alg, &r.to_multivector(model)?)?;
        return Err(BialgebraError::NotMetaflat(is_metaflat(model, &xi)));
    }
    let (k0, l0, m) = r.dims;
    let n = model.dim();
    let sz = k0 + l0;
    let phi: Vec<Vec<Scalar>> = (0..m)
        .map(|k| {
            let f = phi(model, r, k).expect("checked").coords();
            f[..sz].to_vec()
        })
        .collect();
    let psi: Vec<Vec<Scalar>> = (0..m)
        .map(|k| (0..k0).map(|i| model.lam(i, k).clone()).collect())
        .collect();

    let mut entries = Vec::new();
    for (j, f) in phi.iter().enumerate() {
        for (u, c) in f.iter().enumerate() {
            if !c.is_zero() {
                entries.push((u, model.d_odd(j), model.d_even(j), -c.clone()));
                entries.push((u, model.d_even(j), model.d_odd(j), c.clone()));
            }
        }
    }
    let labels = model.labels().into_iter().map(|l| format!("{l}*")).collect();
    let algebra = LieAlgebra::from_constants(n, entries)?
        .with_metric(Matrix::identity(n))?
        .with_labels(labels);

    let mut images = vec![Multivector::zero(n, 2); n];
    for (k, p) in psi.iter().enumerate() {
        let mut odd = Terms::new(n, 2);
        let mut even = Terms::new(n, 2);
        for (i, c) in p.iter().enumerate() {
            odd.push(&[model.s(i), model.d_even(k)], -c.clone());
            even.push(&[model.s(i), model.d_odd(k)], c.clone());
        }
        images[model.d_odd(k)] = odd.build();
        images[model.d_even(k)] = even.build();
    }
    let shared = Arc::new(algebra.clone());
    let cocycle = Cocycle::from_images(Arc::clone(&shared), &images)?;

    let rows: Vec<usize> = (0..sz).filter(|&u| phi.iter().any(|f| !f[u].is_zero())).collect();
    let zero_rows: Vec<usize> = (0..sz).filter(|u| !rows.contains(u)).collect();
    let (cols, zero_cols): (Vec<usize>, Vec<usize>) = (0..m).partition(|&j| phi[j].iter().any(|c| !c.is_zero()));
    let lambda = Matrix::from_fn(rows.len(), cols.len(), |a, b| -phi[cols[b]][rows[a]].clone());
    let dual_model = FlatModel::new(rows.len(), zero_rows.len() + 2 * zero_cols.len(), cols.len(), lambda)
        .expect("nonzero columns by construction");
    let mut basis_map = rows.clone();
    basis_map.extend(&zero_rows);
    for &j in zero_cols.iter().chain(&cols) {
        basis_map.push(model.d_odd(j));
        basis_map.push(model.d_even(j));
    }

    let mut dual = DualBialgebra {
        flat: geometry::is_flat(&algebra).expect("identity metric"),
        metaflat: MetaflatReport::Pass,
        milnor: MilnorReport { violations: vec![] },
        algebra,
        phi,
        psi,
        cocycle,
        model: dual_model,
        basis_map,
    };
    let split = dual.split();
    dual.metaflat = is_metaflat_on(&dual.cocycle, &split.s, true);
    dual.milnor = milnor_verify(&dual.algebra, &split);
    Ok(dual)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TheoremViolation {
    CybeNonzero(Multivector),
    DualNotFlat,
    DualNotMetaflat(MetaflatReport),
    DualMilnor(MilnorReport),
    /// `dualize` refused although the coboundary is metaflat.
    NormalFormDisagrees(NormalFormReport),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TheoremReport {
    HypothesisNotMet(MetaflatReport),
    Verified,
    Violation(Vec<TheoremViolation>),
}

impl TheoremReport {
    pub fn is_violation(&self) -> bool {
        matches!(self, TheoremReport::Violation(_))
    }
}

/// Metaflat coboundary ⇒ `[r, r] = 0`, and the dual is flat and metaflat.
pub fn verify_main_theorem(model: &FlatModel, r: &StructuredBivector) -> Result<TheoremReport, BialgebraError> {
    let alg = Arc::new(model.expand());
    let rv = r.to_multivector(model)?;
    let xi = coboundary(&alg, &rv)?;
    let mf = is_metaflat(model, &xi);
    if !mf.passed() {
        return Ok(TheoremReport::HypothesisNotMet(mf));
    }
    let mut violations = Vec::new();
    if let CybeReport::Nonzero(t) = cybe_check(&alg, &rv)? {
        violations.push(TheoremViolation::CybeNonzero(t));
    }
    match dualize(model, r) {
        Ok(dual) => {
            if !dual.flat {
                violations.push(TheoremViolation::DualNotFlat);
            }
            if !dual.metaflat.passed() {
                violations.push(TheoremViolation::DualNotMetaflat(dual.metaflat));
            }
            if !dual.milnor.passed() {
                violations.push(TheoremViolation::DualMilnor(dual.milnor));
            }
        }
        Err(BialgebraError::NotMetaflat(_)) => {
            violations.push(TheoremViolation::NormalFormDisagrees(metaflat_normal_form(model, r)?));
        }
        Err(e) => return Err(e),
    }
    Ok(if violations.is_empty() {
        TheoremReport::Verified
    } else {
        TheoremReport::Violation(violations)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cocycle::{cocycle_check, dual_bracket, dual_cocycle};
    use crate::scalar::{int, ratio};

    fn model(k0: usize, l0: usize, m: usize, rows: &[&[i64]]) -> FlatModel {
        FlatModel::from_i64(k0, l0, m, rows).unwrap()
    }

    fn mono(n: usize, idx: &[usize], c: Scalar) -> Multivector {
        Multivector::monomial(n, idx, c).unwrap()
    }

    fn ex1(a: i64, b: i64, c: i64) -> (FlatModel, StructuredBivector) {
        let m = model(1, 0, 1, &[&[1]]);
        let r = StructuredBivector::for_model(&m)
            .with(Block::C, 0, 0, int(a))
            .unwrap()
            .with(Block::E, 0, 0, int(b))
            .unwrap()
            .with(Block::N, 0, 0, int(c))
            .unwrap();
        (m, r)
    }

    fn generic_xi(m: &FlatModel, r: &StructuredBivector) -> Cocycle {
        coboundary(&Arc::new(m.expand()), &r.to_multivector(m).unwrap()).unwrap()
    }

    #[test]
    fn roundtrip_with_reversed_n() {
        let m = model(1, 1, 2, &[&[1, 2]]);
        let r = StructuredBivector::for_model(&m)
            .with(Block::N, 1, 0, int(3))
            .unwrap()
            .with(Block::N, 0, 1, int(-1))
            .unwrap()
            .with(Block::B, 0, 0, ratio(1, 2))
            .unwrap();
        let v = r.to_multivector(&m).unwrap();
        // n_21 d3∧d2 = -n_21 d2∧d3
        assert_eq!(v.coeff(&[3, 4]), int(-3));
        assert_eq!(v.coeff(&[2, 5]), int(-1));
        assert_eq!(StructuredBivector::from_multivector(&m, &v).unwrap(), r);
    }

    #[test]
    fn strict_blocks() {
        let mut r = StructuredBivector::zero(2, 0, 2);
        assert!(r.set(Block::A, 1, 0, int(1)).is_err());
        assert!(r.set(Block::A, 0, 0, int(1)).is_err());
        assert!(r.set(Block::N, 1, 1, int(1)).is_ok());
        assert!(r.set(Block::B, 0, 0, int(1)).is_err());
    }

    #[test]
    fn example_one_closed_forms() {
        let (m, r) = ex1(1, 2, 3);
        let xs = xi_on_s(&m, &r, 0).unwrap();
        assert_eq!(xs, &mono(3, &[0, 1], int(-2)) + &mono(3, &[0, 2], int(1)));
        let (d1, d2) = xi_on_d(&m, &r, 0).unwrap();
        assert_eq!(d1, mono(3, &[1, 2], int(1)));
        assert_eq!(d2, mono(3, &[1, 2], int(2)));
        let xi = generic_xi(&m, &r);
        assert_eq!(xi.image(0), xs);
        assert_eq!(xi.image(1), d1);
        assert_eq!(xi.image(2), d2);
        let rr = cybe_check(xi.algebra(), &r.to_multivector(&m).unwrap()).unwrap();
        assert_eq!(rr, CybeReport::Nonzero(mono(3, &[0, 1, 2], int(10))));
    }

    #[test]
    fn example_one_metaflat_iff_ab_zero() {
        for (a, b, expect) in [(0, 0, true), (1, 0, false), (0, -1, false)] {
            let (m, r) = ex1(a, b, 5);
            assert_eq!(is_metaflat(&m, &generic_xi(&m, &r)).passed(), expect);
            assert_eq!(metaflat_normal_form(&m, &r).unwrap().conforming(), expect);
        }
        let (m, r) = ex1(0, 0, 1);
        assert_eq!(verify_main_theorem(&m, &r).unwrap(), TheoremReport::Verified);
    }

    #[test]
    fn example_two_witness() {
        let m = model(1, 1, 1, &[&[1]]);
        let r = StructuredBivector::for_model(&m).with(Block::G, 0, 0, int(1)).unwrap();
        let xi = generic_xi(&m, &r);
        assert_eq!(xi.image(0), mono(4, &[1, 3], int(1)));
        let rep = is_metaflat(&m, &xi);
        assert_eq!(
            rep,
            MetaflatReport::Fail {
                x: 0,
                y: 0,
                z: 0,
                value: mono(4, &[1, 3], int(-1))
            }
        );
        assert_eq!(rep.describe(&m.labels()), "ad_s² ξ(s) = -z∧d2");
        assert!(cybe_check(xi.algebra(), &r.to_multivector(&m).unwrap())
            .unwrap()
            .is_zero());
        assert!(matches!(
            verify_main_theorem(&m, &r).unwrap(),
            TheoremReport::HypothesisNotMet(_)
        ));
        assert!(matches!(dualize(&m, &r), Err(BialgebraError::NotMetaflat(_))));
    }

    #[test]
    fn pure_s_block_phi() {
        let m = model(2, 1, 2, &[&[1, 3], &[2, -1]]);
        let r = StructuredBivector::for_model(&m).with(Block::A, 0, 1, int(5)).unwrap();
        for k in 0..2 {
            let f = phi(&m, &r, k).unwrap();
            let expect = &Multivector::basis(m.dim(), 0).scale(&-(m.lam(1, k) * int(5)))
                + &Multivector::basis(m.dim(), 1).scale(&(m.lam(0, k) * int(5)));
            assert_eq!(f, expect);
        }
        assert!(xi_on_s(&m, &r, 0).unwrap().is_zero());
        let dual = dualize(&m, &r).unwrap();
        assert!(dual.flat && dual.metaflat.passed() && dual.milnor.passed());
    }

    #[test]
    fn normal_form_cases() {
        let nd = model(1, 0, 2, &[&[1, 2]]);
        let good = StructuredBivector::for_model(&nd)
            .with(Block::N, 0, 0, int(3))
            .unwrap()
            .with(Block::N, 1, 1, ratio(-1, 2))
            .unwrap();
        assert!(metaflat_normal_form(&nd, &good).unwrap().conforming());
        let bad = StructuredBivector::for_model(&nd).with(Block::M, 0, 1, int(1)).unwrap();
        let rep = metaflat_normal_form(&nd, &bad).unwrap();
        assert_eq!(
            rep.violations,
            vec![NormalFormViolation::MustVanish {
                block: Block::M,
                i: 0,
                j: 1
            }]
        );
        let dg = model(1, 0, 2, &[&[1, 1]]);
        let coupled = StructuredBivector::for_model(&dg)
            .with(Block::M, 0, 1, int(1))
            .unwrap()
            .with(Block::P, 0, 1, int(1))
            .unwrap();
        assert!(metaflat_normal_form(&dg, &coupled).unwrap().conforming());
        assert!(is_metaflat(&dg, &generic_xi(&dg, &coupled)).passed());
        let broken = coupled.clone().with(Block::P, 0, 1, int(-1)).unwrap();
        assert!(!metaflat_normal_form(&dg, &broken).unwrap().conforming());
        assert!(!is_metaflat(&dg, &generic_xi(&dg, &broken)).passed());
    }

    #[test]
    fn structured_schouten_matches_generic() {
        let m = model(2, 1, 3, &[&[1, 1, 2], &[0, 0, -1]]);
        let mut r = StructuredBivector::for_model(&m);
        let mut c = 1;
        for (b, i, j) in [
            (Block::A, 0, 1),
            (Block::B, 1, 0),
            (Block::M, 0, 1),
            (Block::M, 1, 2),
            (Block::N, 0, 2),
            (Block::N, 2, 0),
            (Block::N, 1, 1),
            (Block::P, 0, 2),
            (Block::P, 0, 1),
        ] {
            r.set(b, i, j, int(c)).unwrap();
            c += 1;
        }
        let alg = m.expand();
        let generic = schouten(&alg, &r.to_multivector(&m).unwrap(), &r.to_multivector(&m).unwrap()).unwrap();
        assert_eq!(schouten_structured(&m, &r).unwrap(), generic);
        assert!(!generic.is_zero());
    }

    #[test]
    fn example_four_dual_is_abelian() {
        let m = model(1, 1, 2, &[&[1, 2]]);
        let r = StructuredBivector::for_model(&m)
            .with(Block::N, 0, 0, int(3))
            .unwrap()
            .with(Block::N, 1, 1, ratio(-1, 2))
            .unwrap();
        let dual = dualize(&m, &r).unwrap();
        assert!(dual.algebra.is_abelian());
        assert_eq!(dual.model.k0(), 0);
        assert_eq!(dual.model.m(), 0);
        assert_eq!(dual.model.l0(), m.dim());
        assert!(cocycle_check(&dual.cocycle).passed());
    }

    #[test]
    fn dual_tables_match_generic() {
        let m = model(2, 1, 2, &[&[1, 1], &[2, 2]]);
        let r = StructuredBivector::for_model(&m)
            .with(Block::A, 0, 1, int(2))
            .unwrap()
            .with(Block::B, 1, 0, int(-1))
            .unwrap()
            .with(Block::M, 0, 1, int(3))
            .unwrap()
            .with(Block::P, 0, 1, int(3))
            .unwrap()
            .with(Block::N, 0, 1, int(1))
            .unwrap()
            .with(Block::N, 1, 0, int(1))
            .unwrap();
        let dual = dualize(&m, &r).unwrap();
        let generic = dual_bracket(&generic_xi(&m, &r)).unwrap();
        for i in 0..m.dim() {
            for j in 0..m.dim() {
                assert_eq!(dual.algebra.basis_bracket(i, j), generic.basis_bracket(i, j));
            }
        }
        assert_eq!(dual.cocycle.matrix(), dual_cocycle(&m.expand()).matrix());
        assert!(cocycle_check(&dual.cocycle).passed());
        assert!(dual.flat && dual.metaflat.passed() && dual.milnor.passed());
        let expanded = dual.model.expand();
        for a in 0..m.dim() {
            for b in 0..m.dim() {
                let got = dual.algebra.basis_bracket(dual.basis_map[a], dual.basis_map[b]);
                let want = expanded.basis_bracket(a, b);
                for c in 0..m.dim() {
                    assert_eq!(got.coeff(&[dual.basis_map[c]]), want.coeff(&[c]));
                }
            }
        }
        let mc = dual.model_cocycle();
        assert!(cocycle_check(&mc).passed());
        assert!(is_metaflat(&dual.model, &mc).passed());
    }
}
