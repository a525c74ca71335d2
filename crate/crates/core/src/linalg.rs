//! Dense matrices over [`Scalar`] with exact Gaussian elimination.

use std::fmt;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::scalar::{self, Scalar};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatrixError {
    #[error("shape mismatch: expected {expected:?}, found {found:?}")]
    Shape {
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("matrix is not square ({0}x{1})")]
    NotSquare(usize, usize),
    #[error("matrix is singular")]
    Singular,
    #[error("ragged rows")]
    Ragged,
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    elems: Vec<Scalar>, // row-major
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            elems: vec![Scalar::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Scalar::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Scalar) -> Self {
        let mut elems = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                elems.push(f(r, c));
            }
        }
        Self { rows, cols, elems }
    }

    pub fn from_rows(rows: Vec<Vec<Scalar>>) -> Result<Self, MatrixError> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(MatrixError::Ragged);
        }
        let n = rows.len();
        Ok(Self {
            rows: n,
            cols,
            elems: rows.into_iter().flatten().collect(),
        })
    }

    /// Convenience constructor from small integers, mainly for tests and fixtures.
    pub fn from_i64(rows: &[&[i64]]) -> Self {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| scalar::int(x)).collect())
                .collect(),
        )
        .expect("ragged integer matrix")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn row(&self, r: usize) -> &[Scalar] {
        &self.elems[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<Scalar> {
        (0..self.rows).map(|r| self[(r, c)].clone()).collect()
    }

    pub fn row_vecs(&self) -> Vec<Vec<Scalar>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.elems.iter().all(Zero::is_zero)
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].clone())
    }

    pub fn mul(&self, rhs: &Matrix) -> Result<Matrix, MatrixError> {
        if self.cols != rhs.rows {
            return Err(MatrixError::Shape {
                expected: (self.cols, rhs.cols),
                found: rhs.shape(),
            });
        }
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = &rhs[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] += a * b;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[Scalar]) -> Result<Vec<Scalar>, MatrixError> {
        if v.len() != self.cols {
            return Err(MatrixError::Shape {
                expected: (self.cols, 1),
                found: (v.len(), 1),
            });
        }
        Ok((0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(v)
                    .filter(|(a, b)| !a.is_zero() && !b.is_zero())
                    .fold(Scalar::zero(), |acc, (a, b)| acc + a * b)
            })
            .collect())
    }

    pub fn is_symmetric(&self) -> bool {
        self.rows == self.cols && (0..self.rows).all(|i| (0..i).all(|j| self[(i, j)] == self[(j, i)]))
    }

    /// Reduced row echelon form; returns the pivot columns.
    pub fn rref(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..self.cols {
            if row == self.rows {
                break;
            }
            let Some(p) = (row..self.rows).find(|&r| !self[(r, col)].is_zero()) else {
                continue;
            };
            self.swap_rows(row, p);
            let inv = self[(row, col)].recip();
            for c in col..self.cols {
                let v = &self[(row, c)] * &inv;
                self[(row, c)] = v;
            }
            for r in 0..self.rows {
                if r == row || self[(r, col)].is_zero() {
                    continue;
                }
                let f = self[(r, col)].clone();
                for c in col..self.cols {
                    if self[(row, c)].is_zero() {
                        continue;
                    }
                    let v = &f * &self[(row, c)];
                    self[(r, c)] -= v;
                }
            }
            pivots.push(col);
            row += 1;
        }
        pivots
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.elems.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    pub fn rank(&self) -> usize {
        self.clone().rref().len()
    }

    pub fn determinant(&self) -> Result<Scalar, MatrixError> {
        if self.rows != self.cols {
            return Err(MatrixError::NotSquare(self.rows, self.cols));
        }
        let mut m = self.clone();
        let n = self.rows;
        let mut det = Scalar::one();
        for col in 0..n {
            let Some(p) = (col..n).find(|&r| !m[(r, col)].is_zero()) else {
                return Ok(Scalar::zero());
            };
            if p != col {
                m.swap_rows(p, col);
                det = -det;
            }
            let pivot = m[(col, col)].clone();
            det *= &pivot;
            for r in col + 1..n {
                if m[(r, col)].is_zero() {
                    continue;
                }
                let f = &m[(r, col)] / &pivot;
                for c in col..n {
                    let v = &f * &m[(col, c)];
                    m[(r, c)] -= v;
                }
            }
        }
        Ok(det)
    }

    pub fn inverse(&self) -> Result<Matrix, MatrixError> {
        if self.rows != self.cols {
            return Err(MatrixError::NotSquare(self.rows, self.cols));
        }
        let n = self.rows;
        let mut aug = Matrix::from_fn(n, 2 * n, |r, c| {
            if c < n {
                self[(r, c)].clone()
            } else if c - n == r {
                Scalar::one()
            } else {
                Scalar::zero()
            }
        });
        let pivots = aug.rref();
        if pivots.len() < n || pivots[n - 1] >= n {
            return Err(MatrixError::Singular);
        }
        Ok(Matrix::from_fn(n, n, |r, c| aug[(r, c + n)].clone()))
    }

    /// Leading principal minors all positive (Sylvester's criterion).
    pub fn is_positive_definite(&self) -> bool {
        if !self.is_symmetric() {
            return false;
        }
        (1..=self.rows).all(|k| {
            let minor = Matrix::from_fn(k, k, |r, c| self[(r, c)].clone());
            minor.determinant().map(|d| d > Scalar::zero()).unwrap_or(false)
        })
    }

    /// Basis of the null space `{ v : self * v = 0 }`.
    pub fn kernel(&self) -> Vec<Vec<Scalar>> {
        let mut m = self.clone();
        let pivots = m.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![Scalar::zero(); self.cols];
                v[f] = Scalar::one();
                for (row, &p) in pivots.iter().enumerate() {
                    v[p] = -m[(row, f)].clone();
                }
                v
            })
            .collect()
    }
}

/// Rank of a family of coordinate vectors of common length `dim`.
pub fn span_rank(vectors: &[Vec<Scalar>], dim: usize) -> usize {
    if vectors.is_empty() {
        return 0;
    }
    Matrix::from_rows(vectors.to_vec())
        .map(|m| m.rank())
        .unwrap_or_else(|_| panic!("vectors must all have length {dim}"))
}

/// Whether two families span the same subspace.
pub fn same_span(a: &[Vec<Scalar>], b: &[Vec<Scalar>], dim: usize) -> bool {
    let ra = span_rank(a, dim);
    let rb = span_rank(b, dim);
    let joint: Vec<Vec<Scalar>> = a.iter().chain(b).cloned().collect();
    ra == rb && span_rank(&joint, dim) == ra
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = Scalar;
    fn index(&self, (r, c): (usize, usize)) -> &Scalar {
        assert!(r < self.rows && c < self.cols, "index ({r},{c}) out of bounds");
        &self.elems[r * self.cols + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Scalar {
        assert!(r < self.rows && c < self.cols, "index ({r},{c}) out of bounds");
        &mut self.elems[r * self.cols + c]
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for r in 0..self.rows {
            if r > 0 {
                write!(f, "; ")?;
            }
            let row: Vec<String> = self.row(r).iter().map(scalar::format).collect();
            write!(f, "{}", row.join(", "))?;
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, ratio};

    #[test]
    fn inverse_roundtrip() {
        let m = Matrix::from_i64(&[&[2, 1, 0], &[1, 3, 1], &[0, 1, 4]]);
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv).unwrap(), Matrix::identity(3));
        assert_eq!(m.determinant().unwrap(), int(18));
    }

    #[test]
    fn singular_and_kernel() {
        let m = Matrix::from_i64(&[&[1, 2], &[2, 4]]);
        assert_eq!(m.inverse(), Err(MatrixError::Singular));
        assert_eq!(m.rank(), 1);
        let k = m.kernel();
        assert_eq!(k, vec![vec![int(-2), int(1)]]);
        assert_eq!(m.mul_vec(&k[0]).unwrap(), vec![int(0), int(0)]);
    }

    #[test]
    fn positive_definite() {
        assert!(Matrix::identity(4).is_positive_definite());
        assert!(Matrix::from_i64(&[&[2, 1], &[1, 2]]).is_positive_definite());
        assert!(!Matrix::from_i64(&[&[1, 2], &[2, 1]]).is_positive_definite());
        assert!(!Matrix::from_i64(&[&[1, 1], &[0, 1]]).is_positive_definite());
    }

    #[test]
    fn spans() {
        let a = vec![vec![int(1), int(0)], vec![int(1), int(1)]];
        let b = vec![vec![int(0), ratio(1, 2)], vec![int(3), int(0)]];
        assert!(same_span(&a, &b, 2));
        assert!(!same_span(&a[..1], &b[..1], 2));
    }
}
