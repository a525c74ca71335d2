//! Graded multivectors of degree 0..=3 over exact rationals.
//!
//! A basis monomial `e_{i1} ∧ ... ∧ e_{ik}` is stored as a [`Blade`], a bitmask
//! of its indices; the canonical ordering of a monomial is the strictly
//! increasing index tuple. Inputs given in another order are normalized with
//! the sign of the sorting permutation, and monomials with a repeated index
//! vanish. No zero coefficient is ever stored, so two multivectors are equal
//! exactly when their term maps are equal.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Neg, Sub, SubAssign};

use num_traits::{One, Zero};
use thiserror::Error;

use crate::linalg::Matrix;
use crate::scalar::{self, Scalar};

/// Highest degree a multivector may carry.
pub const MAX_DEGREE: usize = 3;
/// Largest ambient dimension representable by a [`Blade`].
pub const MAX_DIM: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExteriorError {
    #[error("ambient dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("degree {0} exceeds the supported maximum of 3")]
    DegreeOverflow(usize),
    #[error("degree mismatch: expected {expected}, found {found}")]
    DegreeMismatch { expected: usize, found: usize },
    #[error("basis index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("ambient dimension {0} exceeds {MAX_DIM}")]
    DimensionTooLarge(usize),
    #[error("linear map is {rows}x{cols}, expected {dim}x{dim}")]
    MapShape { rows: usize, cols: usize, dim: usize },
}

/// A canonical basis monomial, stored as the bitmask of its indices.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Blade(u64);

impl Blade {
    pub const EMPTY: Blade = Blade(0);

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn degree(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn contains(self, i: usize) -> bool {
        i < MAX_DIM && self.0 >> i & 1 == 1
    }

    /// Strictly increasing index tuple.
    pub fn indices(self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.degree());
        let mut b = self.0;
        while b != 0 {
            out.push(b.trailing_zeros() as usize);
            b &= b - 1;
        }
        out
    }

    /// Normalizes an index tuple into a blade and the sign of the sorting
    /// permutation; `None` when an index repeats.
    pub fn from_indices(indices: &[usize]) -> Option<(Blade, bool)> {
        let mut bits = 0u64;
        let mut negative = false;
        for &i in indices {
            assert!(i < MAX_DIM, "index {i} exceeds {MAX_DIM}");
            if bits >> i & 1 == 1 {
                return None;
            }
            // every already-present larger index is one transposition
            negative ^= (bits >> i).count_ones() % 2 == 1;
            bits |= 1 << i;
        }
        Some((Blade(bits), negative))
    }

    /// `self ∧ other` as a blade with its sign, or `None` if they share an index.
    pub fn wedge(self, other: Blade) -> Option<(Blade, bool)> {
        if self.0 & other.0 != 0 {
            return None;
        }
        let mut swaps = 0u32;
        let mut b = other.0;
        while b != 0 {
            let j = b.trailing_zeros();
            swaps += (self.0 >> j).count_ones();
            b &= b - 1;
        }
        Some((Blade(self.0 | other.0), swaps % 2 == 1))
    }
}

// Lexicographic order on index tuples of equal length.
impl Ord for Blade {
    fn cmp(&self, other: &Self) -> Ordering {
        if self.0 == other.0 {
            return Ordering::Equal;
        }
        let p = (self.0 ^ other.0).trailing_zeros();
        if self.0 >> p & 1 == 1 {
            Ordering::Less
        } else {
            Ordering::Greater
        }
    }
}

impl PartialOrd for Blade {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Blade {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.indices())
    }
}

/// Homogeneous element of `Λ^degree` of an `dim`-dimensional space.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Multivector {
    dim: usize,
    degree: usize,
    terms: BTreeMap<Blade, Scalar>,
}

impl Multivector {
    pub fn zero(dim: usize, degree: usize) -> Self {
        assert!(dim <= MAX_DIM, "dimension {dim} exceeds {MAX_DIM}");
        assert!(degree <= MAX_DEGREE, "degree {degree} exceeds {MAX_DEGREE}");
        Self {
            dim,
            degree,
            terms: BTreeMap::new(),
        }
    }

    pub fn scalar(dim: usize, value: Scalar) -> Self {
        let mut out = Self::zero(dim, 0);
        out.add_term(Blade::EMPTY, value);
        out
    }

    /// The basis vector `e_i`.
    pub fn basis(dim: usize, i: usize) -> Self {
        assert!(i < dim, "basis index {i} out of range for dimension {dim}");
        let mut out = Self::zero(dim, 1);
        out.terms.insert(Blade(1 << i), Scalar::one());
        out
    }

    pub fn vector(coords: &[Scalar]) -> Self {
        let mut out = Self::zero(coords.len(), 1);
        for (i, c) in coords.iter().enumerate() {
            out.add_term(Blade(1 << i), c.clone());
        }
        out
    }

    /// Builds a multivector from index tuples in any order, normalizing signs.
    pub fn from_terms<I>(dim: usize, degree: usize, terms: I) -> Result<Self, ExteriorError>
    where
        I: IntoIterator<Item = (Vec<usize>, Scalar)>,
    {
        if dim > MAX_DIM {
            return Err(ExteriorError::DimensionTooLarge(dim));
        }
        if degree > MAX_DEGREE {
            return Err(ExteriorError::DegreeOverflow(degree));
        }
        let mut out = Self::zero(dim, degree);
        for (idx, c) in terms {
            if idx.len() != degree {
                return Err(ExteriorError::DegreeMismatch {
                    expected: degree,
                    found: idx.len(),
                });
            }
            if let Some(&bad) = idx.iter().find(|&&i| i >= dim) {
                return Err(ExteriorError::IndexOutOfRange { index: bad, dim });
            }
            if let Some((blade, neg)) = Blade::from_indices(&idx) {
                out.add_term(blade, if neg { -c } else { c });
            }
        }
        Ok(out)
    }

    /// A single monomial `coeff · e_{i1} ∧ ... ∧ e_{ik}`.
    pub fn monomial(dim: usize, indices: &[usize], coeff: Scalar) -> Result<Self, ExteriorError> {
        Self::from_terms(dim, indices.len(), [(indices.to_vec(), coeff)])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (Blade, &Scalar)> + '_ {
        self.terms.iter().map(|(b, c)| (*b, c))
    }

    /// Coefficient of the monomial with the given indices, with the sign of
    /// the requested ordering applied.
    pub fn coeff(&self, indices: &[usize]) -> Scalar {
        if indices.len() != self.degree {
            return Scalar::zero();
        }
        match Blade::from_indices(indices) {
            None => Scalar::zero(),
            Some((blade, neg)) => {
                let c = self.terms.get(&blade).cloned().unwrap_or_else(Scalar::zero);
                if neg {
                    -c
                } else {
                    c
                }
            }
        }
    }

    pub fn blade_coeff(&self, blade: Blade) -> Option<&Scalar> {
        self.terms.get(&blade)
    }

    /// Coordinates of a degree-1 multivector.
    pub fn coords(&self) -> Vec<Scalar> {
        assert_eq!(self.degree, 1, "coords() requires a vector");
        let mut out = vec![Scalar::zero(); self.dim];
        for (b, c) in &self.terms {
            out[b.0.trailing_zeros() as usize] = c.clone();
        }
        out
    }

    pub(crate) fn add_term(&mut self, blade: Blade, coeff: Scalar) {
        if coeff.is_zero() {
            return;
        }
        debug_assert_eq!(blade.degree(), self.degree);
        match self.terms.entry(blade) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += coeff;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    fn check_same_shape(&self, other: &Self) -> Result<(), ExteriorError> {
        if self.dim != other.dim {
            return Err(ExteriorError::DimensionMismatch(self.dim, other.dim));
        }
        if self.degree != other.degree {
            return Err(ExteriorError::DegreeMismatch {
                expected: self.degree,
                found: other.degree,
            });
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self, ExteriorError> {
        self.check_same_shape(other)?;
        let mut out = self.clone();
        for (b, c) in &other.terms {
            out.add_term(*b, c.clone());
        }
        Ok(out)
    }

    pub fn scale(&self, k: &Scalar) -> Self {
        if k.is_zero() {
            return Self::zero(self.dim, self.degree);
        }
        Self {
            dim: self.dim,
            degree: self.degree,
            terms: self.terms.iter().map(|(b, c)| (*b, c * k)).collect(),
        }
    }

    /// Rebuilds the term map from scratch; a no-op on canonical values.
    pub fn normalized(&self) -> Self {
        Self::from_terms(
            self.dim,
            self.degree,
            self.terms.iter().map(|(b, c)| (b.indices(), c.clone())),
        )
        .expect("stored terms are in range")
    }

    pub fn is_canonical(&self) -> bool {
        self.terms
            .iter()
            .all(|(b, c)| b.degree() == self.degree && !c.is_zero() && scalar::is_canonical(c))
            && self.terms.keys().all(|b| b.indices().iter().all(|&i| i < self.dim))
    }

    /// Renders with custom basis labels, e.g. `["s", "d1", "d2"]`.
    pub fn display_with(&self, labels: &[String]) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (n, (b, c)) in self.terms.iter().enumerate() {
            let negative = c < &Scalar::zero();
            let mag = if negative { -c.clone() } else { c.clone() };
            if n == 0 {
                if negative {
                    out.push('-');
                }
            } else {
                out.push_str(if negative { " - " } else { " + " });
            }
            let mono: Vec<&str> = b.indices().iter().map(|&i| labels[i].as_str()).collect();
            if mono.is_empty() {
                out.push_str(&scalar::format(&mag));
            } else {
                if !mag.is_one() {
                    out.push_str(&scalar::format(&mag));
                    out.push('·');
                }
                out.push_str(&mono.join("∧"));
            }
        }
        out
    }
}

/// Exterior product `u ∧ v`.
pub fn wedge(u: &Multivector, v: &Multivector) -> Result<Multivector, ExteriorError> {
    if u.dim != v.dim {
        return Err(ExteriorError::DimensionMismatch(u.dim, v.dim));
    }
    let degree = u.degree + v.degree;
    if degree > MAX_DEGREE {
        return Err(ExteriorError::DegreeOverflow(degree));
    }
    let mut out = Multivector::zero(u.dim, degree);
    for (a, x) in &u.terms {
        for (b, y) in &v.terms {
            if let Some((blade, neg)) = a.wedge(*b) {
                let p = x * y;
                out.add_term(blade, if neg { -p } else { p });
            }
        }
    }
    Ok(out)
}

/// Image of a vector under the linear map whose matrix acts on coordinates.
pub fn apply_linear(map: &Matrix, v: &Multivector) -> Result<Multivector, ExteriorError> {
    if v.degree != 1 {
        return Err(ExteriorError::DegreeMismatch {
            expected: 1,
            found: v.degree,
        });
    }
    if map.shape() != (v.dim, v.dim) {
        return Err(ExteriorError::MapShape {
            rows: map.rows(),
            cols: map.cols(),
            dim: v.dim,
        });
    }
    let image = map.mul_vec(&v.coords()).expect("shape checked");
    Ok(Multivector::vector(&image))
}

pub fn default_labels(dim: usize) -> Vec<String> {
    (0..dim).map(|i| format!("e{i}")).collect()
}

impl fmt::Debug for Multivector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.display_with(&default_labels(self.dim)))
    }
}

impl fmt::Display for Multivector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.display_with(&default_labels(self.dim)))
    }
}

impl Add for &Multivector {
    type Output = Multivector;
    fn add(self, rhs: &Multivector) -> Multivector {
        self.checked_add(rhs).expect("multivector shape mismatch in +")
    }
}

impl Sub for &Multivector {
    type Output = Multivector;
    fn sub(self, rhs: &Multivector) -> Multivector {
        self.checked_add(&-rhs).expect("multivector shape mismatch in -")
    }
}

impl Neg for &Multivector {
    type Output = Multivector;
    fn neg(self) -> Multivector {
        Multivector {
            dim: self.dim,
            degree: self.degree,
            terms: self.terms.iter().map(|(b, c)| (*b, -c.clone())).collect(),
        }
    }
}

impl Neg for Multivector {
    type Output = Multivector;
    fn neg(self) -> Multivector {
        -&self
    }
}

impl AddAssign<&Multivector> for Multivector {
    fn add_assign(&mut self, rhs: &Multivector) {
        self.check_same_shape(rhs).expect("multivector shape mismatch in +=");
        for (b, c) in &rhs.terms {
            self.add_term(*b, c.clone());
        }
    }
}

impl SubAssign<&Multivector> for Multivector {
    fn sub_assign(&mut self, rhs: &Multivector) {
        self.check_same_shape(rhs).expect("multivector shape mismatch in -=");
        for (b, c) in &rhs.terms {
            self.add_term(*b, -c.clone());
        }
    }
}
