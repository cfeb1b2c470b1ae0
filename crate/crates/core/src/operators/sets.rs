use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{solve_linear, Matrix, Vector};

/// Closed convex subsets of ℝⁿ with closed-form Euclidean projections.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ConvexSetSpec {
    Box { lo: Vector, hi: Vector },
    Ball { center: Vector, radius: f64 },
    /// `{x : ⟨normal, x⟩ ≤ offset}`.
    Halfspace { normal: Vector, offset: f64 },
    /// `{x : M x = rhs}`; `M` must have full row rank.
    Affine { m: Matrix, rhs: Vector },
    WholeSpace,
}

impl ConvexSetSpec {
    pub fn ball(center: Vector, radius: f64) -> Result<Self> {
        if !(radius >= 0.0) {
            return Err(Error::InvalidParameter("ball radius must be nonnegative".into()));
        }
        Ok(ConvexSetSpec::Ball { center, radius })
    }

    pub fn boxed(lo: Vector, hi: Vector) -> Result<Self> {
        lo.check_dim(hi.dim())?;
        if lo.iter().zip(hi.iter()).any(|(l, h)| !(l <= h)) {
            return Err(Error::InvalidParameter("box needs lo ≤ hi componentwise".into()));
        }
        Ok(ConvexSetSpec::Box { lo, hi })
    }

    pub fn halfspace(normal: Vector, offset: f64) -> Result<Self> {
        if normal.norm() == 0.0 {
            return Err(Error::InvalidParameter("halfspace normal must be nonzero".into()));
        }
        Ok(ConvexSetSpec::Halfspace { normal, offset })
    }

    pub fn dim(&self) -> Option<usize> {
        match self {
            ConvexSetSpec::Box { lo, .. } => Some(lo.dim()),
            ConvexSetSpec::Ball { center, .. } => Some(center.dim()),
            ConvexSetSpec::Halfspace { normal, .. } => Some(normal.dim()),
            ConvexSetSpec::Affine { m, .. } => Some(m.cols()),
            ConvexSetSpec::WholeSpace => None,
        }
    }

    pub fn project(&self, v: &Vector) -> Result<Vector> {
        if let Some(n) = self.dim() {
            v.check_dim(n)?;
        }
        Ok(match self {
            ConvexSetSpec::Box { lo, hi } => Vector::from_fn(v.dim(), |i| v[i].clamp(lo[i], hi[i])),
            ConvexSetSpec::Ball { center, radius } => {
                let d = v - center;
                let r = d.norm();
                if r <= *radius {
                    v.clone()
                } else {
                    center.axpy(radius / r, &d)
                }
            }
            ConvexSetSpec::Halfspace { normal, offset } => {
                let excess = normal.dot(v) - offset;
                if excess <= 0.0 {
                    v.clone()
                } else {
                    v.axpy(-excess / normal.norm_sq(), normal)
                }
            }
            ConvexSetSpec::Affine { m, rhs } => {
                // v − Mᵀ (M Mᵀ)⁻¹ (M v − rhs)
                let gram = m.matmul(&m.transpose())?;
                let r = &m.mul_vec(v) - rhs;
                let y = solve_linear(&gram, &r, 1e-12)?;
                v - &m.transpose().mul_vec(&y)
            }
            ConvexSetSpec::WholeSpace => v.clone(),
        })
    }

    pub fn contains(&self, v: &Vector, tol: f64) -> Result<bool> {
        Ok((&self.project(v)? - v).norm() <= tol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn projection_examples() {
        let ball = ConvexSetSpec::ball(Vector::zeros(2), 1.0).unwrap();
        assert_eq!(ball.project(&[2.0, 0.0].into()).unwrap(), Vector::from([1.0, 0.0]));

        let bx = ConvexSetSpec::boxed(Vector::zeros(2), Vector::from([1.0, 1.0])).unwrap();
        assert_eq!(bx.project(&[-1.0, 0.5].into()).unwrap(), Vector::from([0.0, 0.5]));

        let hs = ConvexSetSpec::halfspace(Vector::from([1.0, 0.0]), 0.0).unwrap();
        assert_eq!(hs.project(&[2.0, 3.0].into()).unwrap(), Vector::from([0.0, 3.0]));
    }

    #[test]
    fn affine_projection_lands_on_the_plane() {
        let m = Matrix::from_rows(&[&[1.0, 1.0, 1.0]]).unwrap();
        let set = ConvexSetSpec::Affine { m: m.clone(), rhs: Vector::from([1.0]) };
        let p = set.project(&[3.0, -1.0, 2.0].into()).unwrap();
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        assert!((&p - &Vector::from([2.0, -2.0, 1.0])).norm() < 1e-14);
    }

    fn sets() -> Vec<ConvexSetSpec> {
        vec![
            ConvexSetSpec::ball(Vector::from([0.5, -0.5, 0.0]), 1.5).unwrap(),
            ConvexSetSpec::boxed(Vector::from([-1.0, 0.0, -2.0]), Vector::from([1.0, 0.5, 2.0])).unwrap(),
            ConvexSetSpec::halfspace(Vector::from([1.0, 2.0, -1.0]), 0.3).unwrap(),
            ConvexSetSpec::Affine {
                m: Matrix::from_rows(&[&[1.0, 0.0, 1.0], &[0.0, 1.0, -1.0]]).unwrap(),
                rhs: Vector::from([0.5, 1.0]),
            },
            ConvexSetSpec::WholeSpace,
        ]
    }

    proptest! {
        #[test]
        fn projection_is_idempotent_and_firmly_nonexpansive(
            a in prop::collection::vec(-5.0..5.0f64, 3),
            b in prop::collection::vec(-5.0..5.0f64, 3),
        ) {
            let (a, b) = (Vector::new(a), Vector::new(b));
            for set in sets() {
                let pa = set.project(&a).unwrap();
                let pb = set.project(&b).unwrap();
                prop_assert!((&set.project(&pa).unwrap() - &pa).norm() <= 1e-12);
                // ⟨Pa − Pb, a − b⟩ ≥ |Pa − Pb|²
                let d = &pa - &pb;
                prop_assert!(d.dot(&(&a - &b)) >= d.norm_sq() - 1e-10);
            }
        }
    }
}
