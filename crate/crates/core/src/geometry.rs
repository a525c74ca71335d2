//! Infinitesimal Levi-Civita connection of a metric Lie algebra, its
//! curvature, and a verifier for orthogonal `𝔰 ⊕ 𝔷 ⊕ 𝔡` decompositions.
//!
//! **Curvature sign.** [`curvature`] returns
//! `R(x, y)z = ∇_{[x,y]} z − (∇_x ∇_y z − ∇_y ∇_x z)`,
//! which is the negative of the common `[∇_x, ∇_y] − ∇_{[x,y]}` convention.
//! Flatness does not depend on the choice, but nonzero components do.

use num_traits::Zero;
use thiserror::Error;

use crate::exterior::Multivector;
use crate::lie::{self, LieAlgebra};
use crate::linalg::{self, Matrix, MatrixError};
use crate::scalar::{self, Scalar};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GeometryError {
    #[error("algebra carries no metric")]
    MissingMetric,
    #[error("metric is degenerate: {0}")]
    DegenerateMetric(#[from] MatrixError),
}

/// `∇` as one operator per basis vector: column `j` of `ops[i]` holds the
/// coordinates of `∇_{e_i} e_j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Connection {
    ops: Vec<Matrix>,
}

impl Connection {
    pub fn dim(&self) -> usize {
        self.ops.len()
    }

    pub fn operator(&self, i: usize) -> &Matrix {
        &self.ops[i]
    }

    /// `∇_{e_i} e_j`.
    pub fn covariant(&self, i: usize, j: usize) -> Multivector {
        Multivector::vector(&self.ops[i].column(j))
    }

    /// `∇_x` for an arbitrary vector `x`.
    pub fn operator_along(&self, x: &Multivector) -> Matrix {
        let n = self.dim();
        let mut out = Matrix::zeros(n, n);
        for (b, c) in x.terms() {
            let m = &self.ops[b.indices()[0]];
            for r in 0..n {
                for col in 0..n {
                    if !m[(r, col)].is_zero() {
                        out[(r, col)] += c * &m[(r, col)];
                    }
                }
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.ops.iter().all(Matrix::is_zero)
    }

    /// `∇_x y − ∇_y x = [x, y]` on every basis pair.
    pub fn is_torsion_free(&self, alg: &LieAlgebra) -> bool {
        let n = self.dim();
        (0..n).all(|i| (0..n).all(|j| &self.covariant(i, j) - &self.covariant(j, i) == alg.basis_bracket(i, j)))
    }

    /// `⟨∇_x y, z⟩ + ⟨y, ∇_x z⟩ = 0` on every basis triple.
    pub fn is_metric_compatible(&self, metric: &Matrix) -> bool {
        let n = self.dim();
        // g·∇_i is antisymmetric exactly when ∇_i is skew for g
        (0..n).all(|i| {
            let gn = metric.mul(&self.ops[i]).expect("square");
            (0..n).all(|a| (0..=a).all(|b| gn[(a, b)] == -gn[(b, a)].clone()))
        })
    }
}

/// Solves `2⟨∇_x y, z⟩ = ⟨[x,y],z⟩ + ⟨[z,x],y⟩ + ⟨[z,y],x⟩` on the basis by
/// inverting the Gram matrix.
pub fn levi_civita(alg: &LieAlgebra) -> Result<Connection, GeometryError> {
    let g = alg.metric().ok_or(GeometryError::MissingMetric)?;
    let g_inv = g.inverse()?;
    let n = alg.dim();
    let half = scalar::ratio(1, 2);
    // lowered[i][j] = G · [e_i, e_j], i.e. l ↦ ⟨[e_i, e_j], e_l⟩
    let lowered: Vec<Vec<Vec<Scalar>>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| g.mul_vec(&alg.basis_bracket(i, j).coords()).expect("square"))
                .collect()
        })
        .collect();
    let mut ops = vec![Matrix::zeros(n, n); n];
    for i in 0..n {
        for j in 0..n {
            let k: Vec<Scalar> = (0..n)
                .map(|l| &lowered[i][j][l] + &lowered[l][i][j] + &lowered[l][j][i])
                .collect();
            if k.iter().all(Zero::is_zero) {
                continue;
            }
            let coords = g_inv.mul_vec(&k).expect("square");
            for (r, c) in coords.into_iter().enumerate() {
                ops[i][(r, j)] = c * &half;
            }
        }
    }
    Ok(Connection { ops })
}

/// Full curvature tensor; `op(i, j)` is the matrix of `z ↦ R(e_i, e_j) z`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Curvature {
    dim: usize,
    ops: Vec<Matrix>,
}

impl Curvature {
    pub fn op(&self, i: usize, j: usize) -> &Matrix {
        &self.ops[i * self.dim + j]
    }

    /// `R(e_i, e_j) e_k`.
    pub fn value(&self, i: usize, j: usize, k: usize) -> Multivector {
        Multivector::vector(&self.op(i, j).column(k))
    }

    /// Coordinate `l` of `R(e_i, e_j) e_k`.
    pub fn component(&self, i: usize, j: usize, k: usize, l: usize) -> &Scalar {
        &self.op(i, j)[(l, k)]
    }

    pub fn is_flat(&self) -> bool {
        self.ops.iter().all(Matrix::is_zero)
    }

    /// First `(i, j, k)` with `R(e_i, e_j) e_k ≠ 0`.
    pub fn first_nonzero(&self) -> Option<((usize, usize, usize), Multivector)> {
        let n = self.dim;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let v = self.value(i, j, k);
                    if !v.is_zero() {
                        return Some(((i, j, k), v));
                    }
                }
            }
        }
        None
    }
}

pub fn curvature(alg: &LieAlgebra, conn: &Connection) -> Curvature {
    let n = conn.dim();
    let mut ops = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let mut r = conn.operator_along(&alg.basis_bracket(i, j));
            let ab = conn.ops[i].mul(&conn.ops[j]).expect("square");
            let ba = conn.ops[j].mul(&conn.ops[i]).expect("square");
            for a in 0..n {
                for b in 0..n {
                    let d = &ab[(a, b)] - &ba[(a, b)];
                    if !d.is_zero() {
                        r[(a, b)] -= d;
                    }
                }
            }
            ops.push(r);
        }
    }
    Curvature { dim: n, ops }
}

/// Convenience: metric present and curvature identically zero.
pub fn is_flat(alg: &LieAlgebra) -> Result<bool, GeometryError> {
    Ok(curvature(alg, &levi_civita(alg)?).is_flat())
}

/// Basis index sets for a claimed `𝔰 ⊕ 𝔷 ⊕ 𝔡` decomposition.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MilnorSplit {
    pub s: Vec<usize>,
    pub z: Vec<usize>,
    pub d: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MilnorViolation {
    MissingMetric,
    NotPartition,
    NotOrthogonal(usize, usize),
    NotCentral(usize),
    SNotAbelian(usize, usize),
    DNotAbelian(usize, usize),
    DNotDerivedIdeal,
    DOddDimension(usize),
    AdIsNotNabla(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MilnorReport {
    pub violations: Vec<MilnorViolation>,
}

impl MilnorReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks every clause of the decomposition and lists each one that fails.
pub fn milnor_verify(alg: &LieAlgebra, split: &MilnorSplit) -> MilnorReport {
    use MilnorViolation::*;
    let n = alg.dim();
    let mut violations = Vec::new();
    let Some(g) = alg.metric() else {
        return MilnorReport {
            violations: vec![MissingMetric],
        };
    };
    let mut seen = vec![0u8; n];
    for &i in split.s.iter().chain(&split.z).chain(&split.d) {
        if i >= n {
            return MilnorReport {
                violations: vec![NotPartition],
            };
        }
        seen[i] += 1;
    }
    if seen.iter().any(|&c| c != 1) {
        return MilnorReport {
            violations: vec![NotPartition],
        };
    }
    let blocks = [&split.s, &split.z, &split.d];
    for (x, a) in blocks.iter().enumerate() {
        for b in blocks.iter().skip(x + 1) {
            for &i in a.iter() {
                for &j in b.iter() {
                    if !g[(i, j)].is_zero() {
                        violations.push(NotOrthogonal(i, j));
                    }
                }
            }
        }
    }
    for &z in &split.z {
        if (0..n).any(|j| !alg.basis_bracket(z, j).is_zero()) {
            violations.push(NotCentral(z));
        }
    }
    for (p, &a) in split.s.iter().enumerate() {
        for &b in &split.s[p + 1..] {
            if !alg.basis_bracket(a, b).is_zero() {
                violations.push(SNotAbelian(a, b));
            }
        }
    }
    for (p, &a) in split.d.iter().enumerate() {
        for &b in &split.d[p + 1..] {
            if !alg.basis_bracket(a, b).is_zero() {
                violations.push(DNotAbelian(a, b));
            }
        }
    }
    if split.d.len() % 2 == 1 {
        violations.push(DOddDimension(split.d.len()));
    }
    let derived = lie::derived_ideal(alg);
    let declared: Vec<Vec<Scalar>> = split.d.iter().map(|&i| Multivector::basis(n, i).coords()).collect();
    if !linalg::same_span(&derived, &declared, n) {
        violations.push(DNotDerivedIdeal);
    }
    match levi_civita(alg) {
        Ok(conn) => {
            for &x in split.s.iter().chain(&split.z) {
                let ex = Multivector::basis(n, x);
                if alg.ad_matrix(&ex).expect("dims") != *conn.operator(x) {
                    violations.push(AdIsNotNabla(x));
                }
            }
        }
        Err(_) => violations.push(MissingMetric),
    }
    MilnorReport { violations }
}
