//! 1-cocycles `ξ: 𝔤 → Λ²𝔤`, coboundaries, and bialgebra dualization.
//!
//! A cocycle is stored as a dense `n × C(n,2)` matrix: row `x` holds the
//! coefficients of `ξ(e_x)` on the canonical monomials `e_i ∧ e_j`, `i < j`,
//! in lexicographic order. The pairing `⟨e_i* ∧ e_j*, e_i ∧ e_j⟩ = 1` fixes
//! every transpose below.

use std::sync::Arc;

use num_traits::Zero;

use crate::exterior::{Blade, Multivector};
use crate::lie::{ad_multivector, jacobi_check, JacobiReport, LieAlgebra, LieError};
use crate::linalg::Matrix;

/// Lexicographic position of the pair `(i, j)`, `i < j`, among all pairs of `0..n`.
pub fn pair_index(i: usize, j: usize, n: usize) -> usize {
    assert!(i < j && j < n, "pair ({i},{j}) invalid for dimension {n}");
    i * (2 * n - i - 1) / 2 + (j - i - 1)
}

pub fn pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect()
}

#[derive(Clone, PartialEq, Eq)]
pub struct Cocycle {
    algebra: Arc<LieAlgebra>,
    matrix: Matrix,
    generator: Option<Multivector>,
}

impl std::fmt::Debug for Cocycle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut d = f.debug_struct("Cocycle");
        for x in 0..self.dim() {
            let label = format!("ξ({})", self.algebra.labels()[x]);
            d.field(&label, &self.algebra.show(&self.image(x)));
        }
        if let Some(r) = &self.generator {
            d.field("generator", &self.algebra.show(r));
        }
        d.finish()
    }
}

impl Cocycle {
    pub fn zero(algebra: Arc<LieAlgebra>) -> Self {
        let n = algebra.dim();
        Self {
            matrix: Matrix::zeros(n, n * n.saturating_sub(1) / 2),
            algebra,
            generator: None,
        }
    }

    pub fn from_matrix(algebra: Arc<LieAlgebra>, matrix: Matrix) -> Result<Self, LieError> {
        let n = algebra.dim();
        let expected = (n, n * n.saturating_sub(1) / 2);
        if matrix.shape() != expected {
            return Err(LieError::CocycleShape {
                expected,
                found: matrix.shape(),
            });
        }
        Ok(Self {
            algebra,
            matrix,
            generator: None,
        })
    }

    /// Builds a cocycle from the bivectors `ξ(e_0), …, ξ(e_{n-1})`.
    pub fn from_images(algebra: Arc<LieAlgebra>, images: &[Multivector]) -> Result<Self, LieError> {
        let n = algebra.dim();
        if images.len() != n {
            return Err(LieError::DimensionMismatch {
                algebra: n,
                argument: images.len(),
            });
        }
        let mut matrix = Matrix::zeros(n, n * n.saturating_sub(1) / 2);
        for (x, img) in images.iter().enumerate() {
            if img.dim() != n {
                return Err(LieError::DimensionMismatch {
                    algebra: n,
                    argument: img.dim(),
                });
            }
            if img.degree() != 2 {
                return Err(LieError::BracketDegree(img.degree()));
            }
            for (b, c) in img.terms() {
                let idx = b.indices();
                matrix[(x, pair_index(idx[0], idx[1], n))] = c.clone();
            }
        }
        Ok(Self {
            algebra,
            matrix,
            generator: None,
        })
    }

    pub fn algebra(&self) -> &LieAlgebra {
        &self.algebra
    }

    pub fn algebra_arc(&self) -> Arc<LieAlgebra> {
        Arc::clone(&self.algebra)
    }

    pub fn dim(&self) -> usize {
        self.algebra.dim()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn generator(&self) -> Option<&Multivector> {
        self.generator.as_ref()
    }

    pub fn is_zero(&self) -> bool {
        self.matrix.is_zero()
    }

    /// `ξ(e_x)`.
    pub fn image(&self, x: usize) -> Multivector {
        let n = self.dim();
        let mut out = Multivector::zero(n, 2);
        for (p, (i, j)) in pairs(n).into_iter().enumerate() {
            let c = &self.matrix[(x, p)];
            if !c.is_zero() {
                let (b, _) = Blade::from_indices(&[i, j]).expect("distinct");
                out.add_term(b, c.clone());
            }
        }
        out
    }

    /// `ξ(v)` for an arbitrary vector.
    pub fn apply(&self, v: &Multivector) -> Result<Multivector, LieError> {
        if v.dim() != self.dim() || v.degree() != 1 {
            return Err(LieError::DimensionMismatch {
                algebra: self.dim(),
                argument: v.dim(),
            });
        }
        let mut out = Multivector::zero(self.dim(), 2);
        for (b, c) in v.terms() {
            out += &self.image(b.indices()[0]).scale(c);
        }
        Ok(out)
    }

    /// Reattaches the same matrix to another algebra of equal dimension.
    pub fn rebind(&self, algebra: Arc<LieAlgebra>) -> Result<Self, LieError> {
        if algebra.dim() != self.dim() {
            return Err(LieError::DimensionMismatch {
                algebra: algebra.dim(),
                argument: self.dim(),
            });
        }
        Ok(Self {
            algebra,
            matrix: self.matrix.clone(),
            generator: self.generator.clone(),
        })
    }

    /// Recomputes `ad_x r` for the recorded generator and compares.
    pub fn generator_consistent(&self) -> Option<bool> {
        let r = self.generator.as_ref()?;
        let n = self.dim();
        Some(
            (0..n).all(|x| ad_multivector(&self.algebra, &Multivector::basis(n, x), r).expect("dims") == self.image(x)),
        )
    }
}

/// The coboundary `ξ(x) = ad_x r`.
pub fn coboundary(algebra: &Arc<LieAlgebra>, r: &Multivector) -> Result<Cocycle, LieError> {
    let n = algebra.dim();
    if r.dim() != n {
        return Err(LieError::DimensionMismatch {
            algebra: n,
            argument: r.dim(),
        });
    }
    if r.degree() != 2 {
        return Err(LieError::BracketDegree(r.degree()));
    }
    let images = (0..n)
        .map(|x| ad_multivector(algebra, &Multivector::basis(n, x), r))
        .collect::<Result<Vec<_>, _>>()?;
    let mut c = Cocycle::from_images(Arc::clone(algebra), &images)?;
    c.generator = Some(r.clone());
    Ok(c)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CocycleReport {
    Pass,
    /// First basis pair `(x, y)`, `x < y`, where `ξ([x,y]) ≠ ad_x ξ(y) − ad_y ξ(x)`.
    Fail {
        pair: (usize, usize),
        lhs: Multivector,
        rhs: Multivector,
    },
}

impl CocycleReport {
    pub fn passed(&self) -> bool {
        matches!(self, CocycleReport::Pass)
    }
}

/// Exhaustive check of `ξ([x,y]) = ad_x ξ(y) − ad_y ξ(x)` over basis pairs.
pub fn cocycle_check(xi: &Cocycle) -> CocycleReport {
    let alg = xi.algebra();
    let n = alg.dim();
    let images: Vec<Multivector> = (0..n).map(|x| xi.image(x)).collect();
    for (x, y) in pairs(n) {
        let ex = Multivector::basis(n, x);
        let ey = Multivector::basis(n, y);
        let lhs = xi.apply(&alg.basis_bracket(x, y)).expect("dims");
        let rhs =
            &ad_multivector(alg, &ex, &images[y]).expect("dims") - &ad_multivector(alg, &ey, &images[x]).expect("dims");
        if lhs != rhs {
            return CocycleReport::Fail { pair: (x, y), lhs, rhs };
        }
    }
    CocycleReport::Pass
}

/// The transpose bracket on `𝔤*`: `[e_a*, e_b*] = Σ_x ξ(e_x)_{ab} e_x*`.
///
/// The result is checked for the Jacobi identity. If the source algebra has a
/// metric `g`, the dual carries `g⁻¹` (the scalar product transported along
/// `x ↦ ⟨x, ·⟩`).
pub fn dual_bracket(xi: &Cocycle) -> Result<LieAlgebra, LieError> {
    let n = xi.dim();
    let mut entries = Vec::new();
    for (p, (a, b)) in pairs(n).into_iter().enumerate() {
        for x in 0..n {
            let c = &xi.matrix()[(x, p)];
            if !c.is_zero() {
                entries.push((a, b, x, c.clone()));
            }
        }
    }
    let mut dual = LieAlgebra::from_constants(n, entries)?;
    if let JacobiReport::Fail { triple, jacobiator } = jacobi_check(&dual) {
        return Err(LieError::DualNotLie { triple, jacobiator });
    }
    if let Some(g) = xi.algebra().metric() {
        dual = dual.with_metric(g.inverse()?)?;
    }
    let labels = xi.algebra().labels().iter().map(|l| format!("{l}*")).collect();
    Ok(dual.with_labels(labels))
}

/// `ξ*(α)(x ∧ y) = α([x, y])`, as a cocycle on the dual basis.
///
/// The returned cocycle is attached to the abelian algebra on `𝔤*`; use
/// [`Cocycle::rebind`] to attach it to a dual bracket.
pub fn dual_cocycle(algebra: &LieAlgebra) -> Cocycle {
    let n = algebra.dim();
    let mut matrix = Matrix::zeros(n, n * n.saturating_sub(1) / 2);
    for ((i, j), v) in algebra.nonzero_brackets() {
        let p = pair_index(i, j, n);
        for (b, c) in v.terms() {
            matrix[(b.indices()[0], p)] = c.clone();
        }
    }
    let labels = algebra.labels().iter().map(|l| format!("{l}*")).collect();
    let dual = Arc::new(LieAlgebra::abelian(n).with_labels(labels));
    Cocycle::from_matrix(dual, matrix).expect("shape")
}

/// `⟨α ∧ β, w⟩` for covectors `α, β` (given by coordinates) and a bivector `w`.
pub fn pairing(alpha: &Multivector, beta: &Multivector, w: &Multivector) -> crate::scalar::Scalar {
    // ⟨α∧β, u∧v⟩ = α(u)β(v) − α(v)β(u), extended linearly over the monomials of w
    let mut acc = crate::scalar::zero();
    for (b, c) in w.terms() {
        let idx = b.indices();
        let (u, v) = (idx[0], idx[1]);
        let d = alpha.coeff(&[u]) * beta.coeff(&[v]) - alpha.coeff(&[v]) * beta.coeff(&[u]);
        acc += d * c;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::int;

    fn rot3() -> Arc<LieAlgebra> {
        Arc::new(
            LieAlgebra::from_constants(3, [(0, 1, 2, int(1)), (0, 2, 1, int(-1))])
                .unwrap()
                .with_labels(vec!["s".into(), "d1".into(), "d2".into()]),
        )
    }

    fn bv(n: usize, terms: &[(usize, usize, i64)]) -> Multivector {
        Multivector::from_terms(n, 2, terms.iter().map(|&(i, j, c)| (vec![i, j], int(c)))).unwrap()
    }

    #[test]
    fn pair_indexing() {
        let n = 5;
        for (p, (i, j)) in pairs(n).into_iter().enumerate() {
            assert_eq!(pair_index(i, j, n), p);
        }
        assert_eq!(pairs(4).len(), 6);
    }

    #[test]
    fn zero_generator_gives_zero_cocycle() {
        let g = rot3();
        let xi = coboundary(&g, &Multivector::zero(3, 2)).unwrap();
        assert!(xi.is_zero());
        assert!(cocycle_check(&xi).passed());
        assert!(dual_bracket(&xi).unwrap().is_abelian());
    }

    #[test]
    fn cocycle_check_failure() {
        // ξ(s)=0, ξ(d1)=s∧d1, ξ(d2)=0 fails on (s, d1)
        let g = rot3();
        let xi = Cocycle::from_images(
            Arc::clone(&g),
            &[Multivector::zero(3, 2), bv(3, &[(0, 1, 1)]), Multivector::zero(3, 2)],
        )
        .unwrap();
        match cocycle_check(&xi) {
            CocycleReport::Fail { pair, lhs, rhs } => {
                assert_eq!(pair, (0, 1));
                assert!(lhs.is_zero());
                assert_eq!(rhs, bv(3, &[(0, 2, 1)]));
            }
            CocycleReport::Pass => panic!("expected failure"),
        }
    }

    #[test]
    fn dual_cocycle_is_transposed_bracket() {
        let g = rot3();
        let xs = dual_cocycle(&g);
        // [s, d1] = d2  ⇒  ξ*(d2*) has coefficient 1 on s*∧d1*
        assert_eq!(xs.image(2).coeff(&[0, 1]), int(1));
        assert_eq!(xs.image(1).coeff(&[0, 2]), int(-1));
        assert!(xs.image(0).is_zero());
        assert!(dual_cocycle(&LieAlgebra::abelian(4)).is_zero());
    }

    #[test]
    fn dual_of_dual_cocycle_recovers_bracket() {
        let g = LieAlgebra::sl2();
        let back = dual_bracket(&dual_cocycle(&g)).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(back.basis_bracket(i, j), g.basis_bracket(i, j));
            }
        }
    }

    #[test]
    fn dual_bracket_rejects_non_lie_transpose() {
        // [e0*,e1*] = e1*, [e1*,e2*] = e0*: the Jacobiator of (e0*,e1*,e2*) is -e0*
        let g = Arc::new(LieAlgebra::abelian(3));
        let xi = Cocycle::from_images(g, &[bv(3, &[(1, 2, 1)]), bv(3, &[(0, 1, 1)]), Multivector::zero(3, 2)]).unwrap();
        assert!(matches!(dual_bracket(&xi), Err(LieError::DualNotLie { .. })));
    }

    #[test]
    fn pairing_matches_matrix_convention() {
        let g = rot3();
        let r = bv(3, &[(0, 1, 2), (1, 2, -3)]);
        let xi = coboundary(&g, &r).unwrap();
        let e = |i| Multivector::basis(3, i);
        for x in 0..3 {
            for (a, b) in pairs(3) {
                assert_eq!(
                    pairing(&e(a), &e(b), &xi.image(x)),
                    xi.matrix()[(x, pair_index(a, b, 3))]
                );
            }
        }
        assert_eq!(xi.generator_consistent(), Some(true));
    }
}
