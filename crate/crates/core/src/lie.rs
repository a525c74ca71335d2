//! Lie algebras given by structure constants, the adjoint action on
//! multivectors, and the Schouten–Nijenhuis bracket.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::Zero;
use thiserror::Error;

use crate::exterior::{self, Blade, ExteriorError, Multivector, MAX_DEGREE};
use crate::linalg::{Matrix, MatrixError};
use crate::scalar::{self, Scalar};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LieError {
    #[error(transparent)]
    Exterior(#[from] ExteriorError),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error("dimension mismatch: algebra has dimension {algebra}, argument has {argument}")]
    DimensionMismatch { algebra: usize, argument: usize },
    #[error("basis index {0} out of range")]
    IndexOutOfRange(usize),
    #[error("[e{0}, e{0}] must vanish")]
    DiagonalBracket(usize),
    #[error("bracket values must be vectors, got degree {0}")]
    BracketDegree(usize),
    #[error("metric must be a symmetric positive-definite {0}x{0} matrix")]
    BadMetric(usize),
    #[error("cocycle matrix is {found:?}, expected {expected:?}")]
    CocycleShape {
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("transpose of the cocycle violates Jacobi on dual basis triple {triple:?}")]
    DualNotLie {
        triple: (usize, usize, usize),
        jacobiator: Multivector,
    },
    #[error("Schouten bracket of degrees {0} and {1} exceeds degree 3")]
    SchoutenDegree(usize, usize),
}

/// Finite-dimensional Lie algebra over ℚ.
///
/// Brackets are stored for `i < j` only; `[e_j, e_i] = -[e_i, e_j]` and
/// `[e_i, e_i] = 0` hold by construction.
#[derive(Clone, PartialEq, Eq)]
pub struct LieAlgebra {
    dim: usize,
    table: BTreeMap<(usize, usize), Multivector>,
    metric: Option<Matrix>,
    labels: Vec<String>,
}

impl LieAlgebra {
    pub fn abelian(dim: usize) -> Self {
        Self {
            dim,
            table: BTreeMap::new(),
            metric: None,
            labels: exterior::default_labels(dim),
        }
    }

    /// Builds an algebra from `(i, j, [e_i, e_j])` entries in any order.
    /// Entries for `i > j` are stored negated; repeated pairs accumulate.
    pub fn from_brackets<I>(dim: usize, entries: I) -> Result<Self, LieError>
    where
        I: IntoIterator<Item = (usize, usize, Multivector)>,
    {
        let mut alg = Self::abelian(dim);
        for (i, j, v) in entries {
            alg.add_bracket(i, j, &v)?;
        }
        Ok(alg)
    }

    /// Convenience form of [`from_brackets`](Self::from_brackets) taking
    /// `(i, j, k, c)` meaning `c · e_k` is added to `[e_i, e_j]`.
    pub fn from_constants<I>(dim: usize, entries: I) -> Result<Self, LieError>
    where
        I: IntoIterator<Item = (usize, usize, usize, Scalar)>,
    {
        let mut alg = Self::abelian(dim);
        for (i, j, k, c) in entries {
            if k >= dim {
                return Err(LieError::IndexOutOfRange(k));
            }
            alg.add_bracket(i, j, &Multivector::basis(dim, k).scale(&c))?;
        }
        Ok(alg)
    }

    fn add_bracket(&mut self, i: usize, j: usize, v: &Multivector) -> Result<(), LieError> {
        if i >= self.dim || j >= self.dim {
            return Err(LieError::IndexOutOfRange(i.max(j)));
        }
        if v.dim() != self.dim {
            return Err(LieError::DimensionMismatch {
                algebra: self.dim,
                argument: v.dim(),
            });
        }
        if v.degree() != 1 {
            return Err(LieError::BracketDegree(v.degree()));
        }
        if i == j {
            return if v.is_zero() {
                Ok(())
            } else {
                Err(LieError::DiagonalBracket(i))
            };
        }
        let (key, val) = if i < j { ((i, j), v.clone()) } else { ((j, i), -v) };
        let slot = self.table.entry(key).or_insert_with(|| Multivector::zero(self.dim, 1));
        *slot += &val;
        if slot.is_zero() {
            self.table.remove(&key);
        }
        Ok(())
    }

    pub fn with_metric(mut self, metric: Matrix) -> Result<Self, LieError> {
        if metric.shape() != (self.dim, self.dim) || !metric.is_positive_definite() {
            return Err(LieError::BadMetric(self.dim));
        }
        self.metric = Some(metric);
        Ok(self)
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Self {
        assert_eq!(labels.len(), self.dim, "one label per basis vector");
        self.labels = labels;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn metric(&self) -> Option<&Matrix> {
        self.metric.as_ref()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn show(&self, m: &Multivector) -> String {
        m.display_with(&self.labels)
    }

    pub fn is_abelian(&self) -> bool {
        self.table.is_empty()
    }

    /// Nonzero brackets `[e_i, e_j]` with `i < j`.
    pub fn nonzero_brackets(&self) -> impl Iterator<Item = ((usize, usize), &Multivector)> + '_ {
        self.table.iter().map(|(k, v)| (*k, v))
    }

    /// `[e_i, e_j]`.
    pub fn basis_bracket(&self, i: usize, j: usize) -> Multivector {
        assert!(i < self.dim && j < self.dim, "basis index out of range");
        match i.cmp(&j) {
            std::cmp::Ordering::Equal => Multivector::zero(self.dim, 1),
            std::cmp::Ordering::Less => self
                .table
                .get(&(i, j))
                .cloned()
                .unwrap_or_else(|| Multivector::zero(self.dim, 1)),
            std::cmp::Ordering::Greater => self
                .table
                .get(&(j, i))
                .map(|v| -v)
                .unwrap_or_else(|| Multivector::zero(self.dim, 1)),
        }
    }

    /// Structure constant `c_{ij}^k`.
    pub fn constant(&self, i: usize, j: usize, k: usize) -> Scalar {
        self.basis_bracket(i, j).coeff(&[k])
    }

    /// Matrix of `ad_x` acting on coordinates: column `j` holds `[x, e_j]`.
    pub fn ad_matrix(&self, x: &Multivector) -> Result<Matrix, LieError> {
        self.check_vector(x)?;
        let mut m = Matrix::zeros(self.dim, self.dim);
        for ((i, j), v) in &self.table {
            let xi = x.coeff(&[*i]);
            let xj = x.coeff(&[*j]);
            for (b, c) in v.terms() {
                let k = b.indices()[0];
                // [x, e_j] gets x_i [e_i, e_j]; [x, e_i] gets x_j [e_j, e_i]
                if !xi.is_zero() {
                    m[(k, *j)] += &xi * c;
                }
                if !xj.is_zero() {
                    m[(k, *i)] -= &xj * c;
                }
            }
        }
        Ok(m)
    }

    pub fn trace_ad(&self, x: &Multivector) -> Result<Scalar, LieError> {
        let m = self.ad_matrix(x)?;
        Ok((0..self.dim).fold(Scalar::zero(), |acc, i| acc + &m[(i, i)]))
    }

    fn check_dim(&self, m: &Multivector) -> Result<(), LieError> {
        if m.dim() != self.dim {
            return Err(LieError::DimensionMismatch {
                algebra: self.dim,
                argument: m.dim(),
            });
        }
        Ok(())
    }

    fn check_vector(&self, m: &Multivector) -> Result<(), LieError> {
        self.check_dim(m)?;
        if m.degree() != 1 {
            return Err(ExteriorError::DegreeMismatch {
                expected: 1,
                found: m.degree(),
            }
            .into());
        }
        Ok(())
    }

    /// Re-expresses the algebra in the basis `f_a = Σ_i p[a][i] e_i`.
    /// The metric, if any, becomes `p g pᵀ`.
    pub fn change_basis(&self, p: &Matrix) -> Result<LieAlgebra, LieError> {
        if p.shape() != (self.dim, self.dim) {
            return Err(MatrixError::Shape {
                expected: (self.dim, self.dim),
                found: p.shape(),
            }
            .into());
        }
        let inv_t = p.inverse()?.transpose();
        let n = self.dim;
        let mut out = LieAlgebra::abelian(n);
        for a in 0..n {
            let fa = Multivector::vector(p.row(a));
            for b in a + 1..n {
                let fb = Multivector::vector(p.row(b));
                let v = bracket(self, &fa, &fb)?;
                let coords = inv_t.mul_vec(&v.coords())?;
                out.add_bracket(a, b, &Multivector::vector(&coords))?;
            }
        }
        if let Some(g) = &self.metric {
            let g2 = p.mul(g)?.mul(&p.transpose())?;
            out = out.with_metric(g2)?;
        }
        Ok(out)
    }

    /// Orthogonal direct sum; the metric is kept only if both summands carry one.
    pub fn direct_sum(&self, other: &LieAlgebra) -> LieAlgebra {
        let n = self.dim + other.dim;
        let mut out = LieAlgebra::abelian(n);
        let shift = |v: &Multivector, off: usize| {
            Multivector::from_terms(n, 1, v.terms().map(|(b, c)| (vec![b.indices()[0] + off], c.clone())))
                .expect("in range")
        };
        for ((i, j), v) in &self.table {
            out.table.insert((*i, *j), shift(v, 0));
        }
        for ((i, j), v) in &other.table {
            out.table.insert((i + self.dim, j + self.dim), shift(v, self.dim));
        }
        if let (Some(g1), Some(g2)) = (&self.metric, &other.metric) {
            let g = Matrix::from_fn(n, n, |r, c| {
                if r < self.dim && c < self.dim {
                    g1[(r, c)].clone()
                } else if r >= self.dim && c >= self.dim {
                    g2[(r - self.dim, c - self.dim)].clone()
                } else {
                    Scalar::zero()
                }
            });
            out.metric = Some(g);
        }
        out
    }

    /// `so(3)`: `[e1,e2]=e3`, `[e2,e3]=e1`, `[e3,e1]=e2` (0-based here).
    pub fn so3() -> Self {
        Self::from_constants(
            3,
            [
                (0, 1, 2, scalar::one()),
                (1, 2, 0, scalar::one()),
                (2, 0, 1, scalar::one()),
            ],
        )
        .expect("so(3) table")
    }

    /// `sl(2)` in the basis `h, e, f`.
    pub fn sl2() -> Self {
        Self::from_constants(
            3,
            [
                (0, 1, 1, scalar::int(2)),
                (0, 2, 2, scalar::int(-2)),
                (1, 2, 0, scalar::one()),
            ],
        )
        .expect("sl(2) table")
    }

    /// Three-dimensional Heisenberg algebra `[x, y] = z`.
    pub fn heisenberg() -> Self {
        Self::from_constants(3, [(0, 1, 2, scalar::one())]).expect("heisenberg table")
    }
}

impl fmt::Debug for LieAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LieAlgebra(dim={}", self.dim)?;
        for ((i, j), v) in &self.table {
            write!(f, ", [{},{}]={}", self.labels[*i], self.labels[*j], self.show(v))?;
        }
        if let Some(g) = &self.metric {
            write!(f, ", metric={g:?}")?;
        }
        write!(f, ")")
    }
}

/// `[x, y]` for vectors, by bilinear extension of the table.
pub fn bracket(alg: &LieAlgebra, x: &Multivector, y: &Multivector) -> Result<Multivector, LieError> {
    alg.check_vector(x)?;
    alg.check_vector(y)?;
    let mut out = Multivector::zero(alg.dim, 1);
    for ((i, j), v) in &alg.table {
        let c = x.coeff(&[*i]) * y.coeff(&[*j]) - x.coeff(&[*j]) * y.coeff(&[*i]);
        if !c.is_zero() {
            out += &v.scale(&c);
        }
    }
    Ok(out)
}

/// Adjoint action of a vector on a multivector, extended as a derivation of `∧`.
pub fn ad_multivector(alg: &LieAlgebra, x: &Multivector, w: &Multivector) -> Result<Multivector, LieError> {
    alg.check_vector(x)?;
    alg.check_dim(w)?;
    let mut out = Multivector::zero(alg.dim, w.degree());
    if w.degree() == 0 {
        return Ok(out);
    }
    let ad = alg.ad_matrix(x)?;
    for (blade, c) in w.terms() {
        let idx = blade.indices();
        for p in 0..idx.len() {
            for l in 0..alg.dim {
                let a = &ad[(l, idx[p])];
                if a.is_zero() {
                    continue;
                }
                let mut replaced = idx.clone();
                replaced[p] = l;
                if let Some((b, neg)) = Blade::from_indices(&replaced) {
                    let v = a * c;
                    out.add_term(b, if neg { -v } else { v });
                }
            }
        }
    }
    Ok(out)
}

/// Schouten–Nijenhuis bracket of two homogeneous multivectors, extended
/// bilinearly from decomposables:
///
/// `[X1∧…∧Xp, Y1∧…∧Yq] = Σ_{i,j} (-1)^{i+j} [Xi,Yj] ∧ X1…X̂i…Xp ∧ Y1…Ŷj…Yq`.
///
/// Degree-0 arguments bracket to zero. On two bivectors the result is a
/// trivector and the bracket is symmetric.
pub fn schouten(alg: &LieAlgebra, p: &Multivector, q: &Multivector) -> Result<Multivector, LieError> {
    alg.check_dim(p)?;
    alg.check_dim(q)?;
    let (dp, dq) = (p.degree(), q.degree());
    if dp == 0 || dq == 0 {
        return Ok(Multivector::zero(alg.dim, (dp + dq).saturating_sub(1)));
    }
    let degree = dp + dq - 1;
    if degree > MAX_DEGREE {
        return Err(LieError::SchoutenDegree(dp, dq));
    }
    let n = alg.dim;
    let mut out = Multivector::zero(n, degree);
    for (bx, cx) in p.terms() {
        let xs = bx.indices();
        for (by, cy) in q.terms() {
            let ys = by.indices();
            let coeff = cx * cy;
            for (i, &xi) in xs.iter().enumerate() {
                for (j, &yj) in ys.iter().enumerate() {
                    let br = alg.basis_bracket(xi, yj);
                    if br.is_zero() {
                        continue;
                    }
                    let rest: Vec<usize> = xs
                        .iter()
                        .enumerate()
                        .filter(|&(a, _)| a != i)
                        .map(|(_, &v)| v)
                        .chain(ys.iter().enumerate().filter(|&(b, _)| b != j).map(|(_, &v)| v))
                        .collect();
                    // (i + j) with 1-based positions has the same parity as 0-based
                    let negative = (i + j) % 2 == 1;
                    for (bk, ck) in br.terms() {
                        let mut full = vec![bk.indices()[0]];
                        full.extend_from_slice(&rest);
                        if let Some((b, neg)) = Blade::from_indices(&full) {
                            let v = &coeff * ck;
                            out.add_term(b, if neg ^ negative { -v } else { v });
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Spanning vectors (coordinates) of the derived ideal `[𝔤, 𝔤]`, in echelon form.
pub fn derived_ideal(alg: &LieAlgebra) -> Vec<Vec<Scalar>> {
    let rows: Vec<Vec<Scalar>> = alg.table.values().map(Multivector::coords).collect();
    if rows.is_empty() {
        return rows;
    }
    let mut m = Matrix::from_rows(rows).expect("uniform length");
    let rank = m.rref().len();
    (0..rank).map(|r| m.row(r).to_vec()).collect()
}

/// Basis (coordinates) of the center `{ x : [x, e_j] = 0 for all j }`.
pub fn center(alg: &LieAlgebra) -> Vec<Vec<Scalar>> {
    let n = alg.dim;
    // x ↦ ([x, e_0], …, [x, e_{n-1}]) stacked as an (n·n) × n system
    let mut m = Matrix::zeros(n * n, n);
    for i in 0..n {
        for j in 0..n {
            for (b, c) in alg.basis_bracket(i, j).terms() {
                m[(j * n + b.indices()[0], i)] = c.clone();
            }
        }
    }
    m.kernel()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum JacobiReport {
    Pass,
    /// First basis triple `(i, j, k)` (0-based) with a nonzero Jacobiator.
    Fail {
        triple: (usize, usize, usize),
        jacobiator: Multivector,
    },
}

impl JacobiReport {
    pub fn passed(&self) -> bool {
        matches!(self, JacobiReport::Pass)
    }
}

/// Exhaustive Jacobi check over basis triples `i < j < k`.
pub fn jacobi_check(alg: &LieAlgebra) -> JacobiReport {
    let n = alg.dim;
    let e = |i| Multivector::basis(n, i);
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let t1 = bracket(alg, &e(i), &alg.basis_bracket(j, k)).expect("dims");
                let t2 = bracket(alg, &e(j), &alg.basis_bracket(k, i)).expect("dims");
                let t3 = bracket(alg, &e(k), &alg.basis_bracket(i, j)).expect("dims");
                let jac = &(&t1 + &t2) + &t3;
                if !jac.is_zero() {
                    return JacobiReport::Fail {
                        triple: (i, j, k),
                        jacobiator: jac,
                    };
                }
            }
        }
    }
    JacobiReport::Pass
}
