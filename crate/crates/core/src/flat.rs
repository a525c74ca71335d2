//! Flat Lie algebras in their adapted orthonormal basis.
//!
//! A [`FlatModel`] `(k0, l0, m, λ)` stands for the algebra with basis
//! `s1..s_k0, z1..z_l0, d1..d_2m` and nonzero brackets
//!
//! ```text
//! [s_i, d_{2j-1}] =  λ_ij d_{2j}
//! [s_i, d_{2j}]   = -λ_ij d_{2j-1}
//! ```
//!
//! with the identity metric. All indices in this module are 0-based, so
//! `d_{2j-1}` and `d_{2j}` of the 1-based notation are
//! [`FlatModel::d_odd`]`(j - 1)` and [`FlatModel::d_even`]`(j - 1)`.

use num_traits::{One, Zero};
use thiserror::Error;

use crate::geometry::MilnorSplit;
use crate::lie::LieAlgebra;
use crate::linalg::Matrix;
use crate::scalar::{self, Scalar};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FlatError {
    #[error("lambda has shape {found:?}, expected {expected:?}")]
    LambdaShape {
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("lambda column {} is zero", .0 + 1)]
    ZeroColumn(usize),
    #[error("basis change must be an invertible {0}x{0} matrix")]
    BadBasisChange(usize),
}

/// Which block of the adapted basis an index falls in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Slot {
    S(usize),
    Z(usize),
    DOdd(usize),
    DEven(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlatModel {
    k0: usize,
    l0: usize,
    m: usize,
    lambda: Matrix,
}

impl FlatModel {
    pub fn new(k0: usize, l0: usize, m: usize, lambda: Matrix) -> Result<Self, FlatError> {
        if lambda.shape() != (k0, m) {
            return Err(FlatError::LambdaShape {
                expected: (k0, m),
                found: lambda.shape(),
            });
        }
        if let Some(j) = (0..m).find(|&j| (0..k0).all(|i| lambda[(i, j)].is_zero())) {
            return Err(FlatError::ZeroColumn(j));
        }
        Ok(Self { k0, l0, m, lambda })
    }

    pub fn from_i64(k0: usize, l0: usize, m: usize, rows: &[&[i64]]) -> Result<Self, FlatError> {
        let lambda = if k0 == 0 {
            Matrix::zeros(0, m)
        } else {
            Matrix::from_i64(rows)
        };
        Self::new(k0, l0, m, lambda)
    }

    pub fn k0(&self) -> usize {
        self.k0
    }

    pub fn l0(&self) -> usize {
        self.l0
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn lambda(&self) -> &Matrix {
        &self.lambda
    }

    pub fn lam(&self, i: usize, j: usize) -> &Scalar {
        &self.lambda[(i, j)]
    }

    pub fn dim(&self) -> usize {
        self.k0 + self.l0 + 2 * self.m
    }

    pub fn s(&self, i: usize) -> usize {
        debug_assert!(i < self.k0);
        i
    }

    pub fn z(&self, i: usize) -> usize {
        debug_assert!(i < self.l0);
        self.k0 + i
    }

    pub fn d_odd(&self, j: usize) -> usize {
        debug_assert!(j < self.m);
        self.k0 + self.l0 + 2 * j
    }

    pub fn d_even(&self, j: usize) -> usize {
        self.d_odd(j) + 1
    }

    pub fn slot(&self, idx: usize) -> Slot {
        let base = self.k0 + self.l0;
        if idx < self.k0 {
            Slot::S(idx)
        } else if idx < base {
            Slot::Z(idx - self.k0)
        } else if (idx - base) % 2 == 0 {
            Slot::DOdd((idx - base) / 2)
        } else {
            Slot::DEven((idx - base) / 2)
        }
    }

    /// `s`, `z` when the block has a single vector, otherwise `s1`, `s2`, ...;
    /// the `d` vectors are always numbered.
    pub fn labels(&self) -> Vec<String> {
        let numbered = |p: &str, n: usize| -> Vec<String> {
            if n == 1 {
                vec![p.to_string()]
            } else {
                (1..=n).map(|i| format!("{p}{i}")).collect()
            }
        };
        let mut out = numbered("s", self.k0);
        out.extend(numbered("z", self.l0));
        out.extend((1..=2 * self.m).map(|i| format!("d{i}")));
        out
    }

    pub fn split(&self) -> MilnorSplit {
        let base = self.k0 + self.l0;
        MilnorSplit {
            s: (0..self.k0).collect(),
            z: (self.k0..base).collect(),
            d: (base..self.dim()).collect(),
        }
    }

    /// The metric Lie algebra this model presents.
    pub fn expand(&self) -> LieAlgebra {
        let n = self.dim();
        let mut entries = Vec::new();
        for i in 0..self.k0 {
            for j in 0..self.m {
                let l = self.lam(i, j);
                if l.is_zero() {
                    continue;
                }
                entries.push((self.s(i), self.d_odd(j), self.d_even(j), l.clone()));
                entries.push((self.s(i), self.d_even(j), self.d_odd(j), -l.clone()));
            }
        }
        LieAlgebra::from_constants(n, entries)
            .expect("indices in range")
            .with_metric(Matrix::identity(n))
            .expect("identity is positive definite")
            .with_labels(self.labels())
    }

    /// `Some(ε)` when column `i` equals `ε ·` column `j`.
    pub fn column_relation(&self, i: usize, j: usize) -> Option<Sign> {
        let col = |c| (0..self.k0).map(move |k| &self.lambda[(k, c)]);
        if col(i).zip(col(j)).all(|(a, b)| a == b) {
            Some(Sign::Plus)
        } else if col(i).zip(col(j)).all(|(a, b)| *a == -b.clone()) {
            Some(Sign::Minus)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> Scalar {
        match self {
            Sign::Plus => Scalar::one(),
            Sign::Minus => -Scalar::one(),
        }
    }

    pub fn apply(self, x: &Scalar) -> Scalar {
        match self {
            Sign::Plus => x.clone(),
            Sign::Minus => -x.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DegeneracyReport {
    /// Columns `i < j` with `λ_{·i} = ε λ_{·j}`.
    Degenerate { i: usize, j: usize, eps: Sign },
    /// A basis change (rows are the new `s` vectors) under which every pair
    /// of columns is separated, with one separating row per pair.
    Nondegenerate {
        basis: Matrix,
        certificates: Vec<((usize, usize), usize)>,
    },
}

impl DegeneracyReport {
    pub fn is_degenerate(&self) -> bool {
        matches!(self, DegeneracyReport::Degenerate { .. })
    }

    /// Re-checks the witness or certificate against `model` by substitution.
    pub fn validate(&self, model: &FlatModel) -> bool {
        match self {
            DegeneracyReport::Degenerate { i, j, eps } => {
                (0..model.k0).all(|k| *model.lam(k, *i) == eps.apply(model.lam(k, *j)))
            }
            DegeneracyReport::Nondegenerate { basis, certificates } => {
                let Some(l2) = transformed(model, basis) else {
                    return false;
                };
                let m = model.m;
                certificates.len() == m * (m.saturating_sub(1)) / 2
                    && certificates
                        .iter()
                        .all(|&((i, j), k)| i < j && j < m && k < model.k0 && separates(&l2, k, i, j))
            }
        }
    }
}

fn separates(lambda: &Matrix, k: usize, i: usize, j: usize) -> bool {
    let a = &lambda[(k, i)];
    let b = &lambda[(k, j)];
    a * a != b * b
}

fn certificates(lambda: &Matrix) -> Option<Vec<((usize, usize), usize)>> {
    let (k0, m) = lambda.shape();
    let mut out = Vec::new();
    for i in 0..m {
        for j in i + 1..m {
            out.push(((i, j), (0..k0).find(|&k| separates(lambda, k, i, j))?));
        }
    }
    Some(out)
}

fn transformed(model: &FlatModel, basis: &Matrix) -> Option<Matrix> {
    let k0 = model.k0;
    if basis.shape() != (k0, k0) || (k0 > 0 && basis.determinant().ok()?.is_zero()) {
        return None;
    }
    basis.mul(&model.lambda).ok()
}

/// Decides degeneracy from the columns of `λ`.
///
/// A degenerate algebra has two columns with `λ_{·i} = ±λ_{·j}`. Otherwise
/// the identity basis is tried first. If it fails, the basis
/// `{Σ_p t^p s_p, s_2, ..., s_k0}` is used for the smallest positive integer
/// `t` that separates every pair.
pub fn classify_degeneracy(model: &FlatModel) -> DegeneracyReport {
    let m = model.m;
    for i in 0..m {
        for j in i + 1..m {
            if let Some(eps) = model.column_relation(i, j) {
                return DegeneracyReport::Degenerate { i, j, eps };
            }
        }
    }
    let k0 = model.k0;
    let identity = Matrix::identity(k0);
    if let Some(certificates) = certificates(&model.lambda) {
        return DegeneracyReport::Nondegenerate {
            basis: identity,
            certificates,
        };
    }
    // each pair rules out at most 2(k0 - 1) values of t
    let bound = (m * m * k0 + 1) as i64;
    for t in 1..=bound {
        let mut basis = identity.clone();
        let mut power = Scalar::one();
        for p in 0..k0 {
            basis[(0, p)] = power.clone();
            power *= scalar::int(t);
        }
        let lambda = basis.mul(&model.lambda).expect("square");
        if let Some(certificates) = certificates(&lambda) {
            return DegeneracyReport::Nondegenerate { basis, certificates };
        }
    }
    unreachable!("a separating moment basis exists for nondegenerate columns")
}

/// The nondegeneracy condition for the basis whose row `k` is the new
/// `s'_k = Σ_i B_ki s_i`, so that `λ' = B λ`: every pair of columns is
/// separated by some row of `λ'`.
pub fn check_ndeg_for_basis(model: &FlatModel, basis: &Matrix) -> Result<bool, FlatError> {
    let lambda = transformed(model, basis).ok_or(FlatError::BadBasisChange(model.k0))?;
    Ok(certificates(&lambda).is_some())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exterior::Multivector;
    use crate::geometry::{self, milnor_verify};
    use crate::lie::{bracket, jacobi_check};

    fn e(n: usize, i: usize) -> Multivector {
        Multivector::basis(n, i)
    }

    #[test]
    fn smallest_model() {
        let m = FlatModel::from_i64(1, 0, 1, &[&[1]]).unwrap();
        let g = m.expand();
        assert_eq!(bracket(&g, &e(3, 0), &e(3, 1)).unwrap(), e(3, 2));
        assert_eq!(bracket(&g, &e(3, 0), &e(3, 2)).unwrap(), -&e(3, 1));
        assert!(bracket(&g, &e(3, 1), &e(3, 2)).unwrap().is_zero());
        assert_eq!(m.labels(), ["s", "d1", "d2"]);
    }

    #[test]
    fn expanded_models_are_flat() {
        for m in [
            FlatModel::from_i64(1, 1, 1, &[&[1]]).unwrap(),
            FlatModel::from_i64(1, 0, 2, &[&[1, 2]]).unwrap(),
            FlatModel::from_i64(2, 1, 3, &[&[1, 0, 3], &[-2, 1, 0]]).unwrap(),
        ] {
            let g = m.expand();
            assert!(jacobi_check(&g).passed());
            assert!(geometry::is_flat(&g).unwrap());
            assert!(milnor_verify(&g, &m.split()).passed());
            for i in 0..g.dim() {
                assert!(g.trace_ad(&e(g.dim(), i)).unwrap().is_zero());
            }
        }
    }

    #[test]
    fn five_dim_example() {
        let g = FlatModel::from_i64(1, 0, 2, &[&[1, 2]]).unwrap().expand();
        assert_eq!(bracket(&g, &e(5, 0), &e(5, 3)).unwrap(), e(5, 4).scale(&scalar::int(2)));
        assert_eq!(
            bracket(&g, &e(5, 0), &e(5, 4)).unwrap(),
            e(5, 3).scale(&scalar::int(-2))
        );
    }

    #[test]
    fn zero_column_rejected() {
        assert_eq!(
            FlatModel::from_i64(2, 0, 2, &[&[1, 0], &[1, 0]]),
            Err(FlatError::ZeroColumn(1))
        );
        assert!(FlatModel::new(1, 0, 2, Matrix::zeros(2, 1)).is_err());
    }

    #[test]
    fn degeneracy_examples() {
        let a = FlatModel::from_i64(1, 0, 2, &[&[1, 2]]).unwrap();
        assert!(!classify_degeneracy(&a).is_degenerate());
        let b = FlatModel::from_i64(2, 0, 2, &[&[1, 0], &[0, 1]]).unwrap();
        let rb = classify_degeneracy(&b);
        assert!(!rb.is_degenerate() && rb.validate(&b));
        let c = FlatModel::from_i64(1, 0, 2, &[&[1, 1]]).unwrap();
        let rc = classify_degeneracy(&c);
        assert_eq!(
            rc,
            DegeneracyReport::Degenerate {
                i: 0,
                j: 1,
                eps: Sign::Plus
            }
        );
        assert!(rc.validate(&c));
    }

    #[test]
    fn basis_dependence() {
        let b = FlatModel::from_i64(2, 0, 2, &[&[1, 0], &[0, 1]]).unwrap();
        assert!(check_ndeg_for_basis(&b, &Matrix::identity(2)).unwrap());
        let mixed = Matrix::from_i64(&[&[1, 1], &[1, -1]]);
        assert!(!check_ndeg_for_basis(&b, &mixed).unwrap());
        let c = FlatModel::from_i64(1, 0, 2, &[&[1, 1]]).unwrap();
        for k in [1, -3, 7] {
            assert!(!check_ndeg_for_basis(&c, &Matrix::from_i64(&[&[k]])).unwrap());
        }
        assert!(check_ndeg_for_basis(&c, &Matrix::zeros(1, 1)).is_err());
        assert!(check_ndeg_for_basis(&c, &Matrix::identity(2)).is_err());
    }

    #[test]
    fn identity_basis_can_fail_for_nondegenerate() {
        let m = FlatModel::from_i64(2, 0, 2, &[&[1, 1], &[1, -1]]).unwrap();
        assert!(!check_ndeg_for_basis(&m, &Matrix::identity(2)).unwrap());
        let r = classify_degeneracy(&m);
        assert!(!r.is_degenerate());
        assert!(r.validate(&m));
        let DegeneracyReport::Nondegenerate { basis, .. } = r else {
            unreachable!()
        };
        assert!(check_ndeg_for_basis(&m, &basis).unwrap());
    }

    #[test]
    fn minus_sign_witness() {
        let m = FlatModel::from_i64(2, 0, 3, &[&[1, 2, -1], &[3, 0, -3]]).unwrap();
        assert_eq!(
            classify_degeneracy(&m),
            DegeneracyReport::Degenerate {
                i: 0,
                j: 2,
                eps: Sign::Minus
            }
        );
    }
}
