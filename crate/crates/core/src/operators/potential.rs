use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};

/// A convex differentiable potential with closed-form value and gradient.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PotentialSpec {
    Zero,
    /// `½⟨Q(x − c), x − c⟩` with `Q` symmetric positive semidefinite.
    Quadratic { q: Matrix, center: Vector },
    /// `Σ wᵢ |xᵢ|^p / p` with `wᵢ ≥ 0` and `p ≥ 2`.
    SeparablePower { weights: Vector, exponent: f64 },
    Sum { terms: Vec<PotentialSpec> },
    /// `s · base`, `s > 0`.
    Scaled { factor: f64, base: Box<PotentialSpec> },
    /// Acts blockwise on consecutive coordinate blocks of the listed sizes.
    Block { sizes: Vec<usize>, parts: Vec<PotentialSpec> },
}

impl PotentialSpec {
    pub fn quadratic(q: Matrix, center: Vector) -> Result<Self> {
        if !q.is_square() || q.rows() != center.dim() {
            return Err(Error::dims(center.dim(), q.rows()));
        }
        if !q.is_symmetric(1e-12) {
            return Err(Error::InvalidParameter("quadratic form must be symmetric".into()));
        }
        let ev = q.symmetric_eigenvalues()?;
        if ev[0] < -1e-12 * (1.0 + ev[ev.len() - 1].abs()) {
            return Err(Error::InvalidParameter(format!(
                "quadratic form is not positive semidefinite (eigenvalue {})",
                ev[0]
            )));
        }
        Ok(PotentialSpec::Quadratic { q, center })
    }

    /// `½|x − c|²`.
    pub fn half_sq_distance(center: Vector) -> Self {
        let n = center.dim();
        PotentialSpec::Quadratic { q: Matrix::identity(n), center }
    }

    pub fn separable_power(weights: Vector, exponent: f64) -> Result<Self> {
        if !(exponent >= 2.0) || weights.iter().any(|w| !(*w >= 0.0)) {
            return Err(Error::InvalidParameter(
                "separable power needs exponent ≥ 2 and nonnegative weights".into(),
            ));
        }
        Ok(PotentialSpec::SeparablePower { weights, exponent })
    }

    pub fn scaled(factor: f64, base: PotentialSpec) -> Result<Self> {
        if !(factor > 0.0) {
            return Err(Error::InvalidParameter("scale factor must be positive".into()));
        }
        Ok(PotentialSpec::Scaled { factor, base: Box::new(base) })
    }

    /// Dimension the potential is defined on, when it carries one.
    pub fn dim(&self) -> Option<usize> {
        match self {
            PotentialSpec::Zero => None,
            PotentialSpec::Quadratic { center, .. } => Some(center.dim()),
            PotentialSpec::SeparablePower { weights, .. } => Some(weights.dim()),
            PotentialSpec::Sum { terms } => terms.iter().find_map(|t| t.dim()),
            PotentialSpec::Scaled { base, .. } => base.dim(),
            PotentialSpec::Block { sizes, .. } => Some(sizes.iter().sum()),
        }
    }

    fn check(&self, x: &Vector) -> Result<()> {
        match self.dim() {
            Some(n) => x.check_dim(n),
            None => Ok(()),
        }
    }

    pub fn value(&self, x: &Vector) -> Result<f64> {
        self.check(x)?;
        Ok(match self {
            PotentialSpec::Zero => 0.0,
            PotentialSpec::Quadratic { q, center } => {
                let d = x - center;
                0.5 * q.mul_vec(&d).dot(&d)
            }
            PotentialSpec::SeparablePower { weights, exponent } => weights
                .iter()
                .zip(x.iter())
                .map(|(w, xi)| w * xi.abs().powf(*exponent) / exponent)
                .sum(),
            PotentialSpec::Sum { terms } => {
                let mut s = 0.0;
                for t in terms {
                    s += t.value(x)?;
                }
                s
            }
            PotentialSpec::Scaled { factor, base } => factor * base.value(x)?,
            PotentialSpec::Block { sizes, parts } => {
                let mut s = 0.0;
                let mut start = 0;
                for (n, p) in sizes.iter().zip(parts) {
                    s += p.value(&x.block(start, *n))?;
                    start += n;
                }
                s
            }
        })
    }

    pub fn grad(&self, x: &Vector) -> Result<Vector> {
        self.check(x)?;
        Ok(match self {
            PotentialSpec::Zero => Vector::zeros(x.dim()),
            PotentialSpec::Quadratic { q, center } => q.mul_vec(&(x - center)),
            PotentialSpec::SeparablePower { weights, exponent } => Vector::from_fn(x.dim(), |i| {
                let xi = x[i];
                weights[i] * xi.abs().powf(exponent - 1.0) * xi.signum()
            }),
            PotentialSpec::Sum { terms } => {
                let mut g = Vector::zeros(x.dim());
                for t in terms {
                    g += &t.grad(x)?;
                }
                g
            }
            PotentialSpec::Scaled { factor, base } => base.grad(x)?.scale(*factor),
            PotentialSpec::Block { sizes, parts } => {
                let mut out = Vec::with_capacity(x.dim());
                let mut start = 0;
                for (n, p) in sizes.iter().zip(parts) {
                    out.extend(p.grad(&x.block(start, *n))?.into_inner());
                    start += n;
                }
                Vector::new(out)
            }
        })
    }

    /// `inf φ` over ℝⁿ when known in closed form.
    pub fn infimum(&self) -> Option<f64> {
        match self {
            PotentialSpec::Zero | PotentialSpec::Quadratic { .. } | PotentialSpec::SeparablePower { .. } => {
                Some(0.0)
            }
            // the infimum of a sum is not the sum of infima unless minimizers coincide
            PotentialSpec::Sum { .. } => None,
            PotentialSpec::Scaled { factor, base } => base.infimum().map(|v| factor * v),
            PotentialSpec::Block { parts, .. } => parts.iter().map(|p| p.infimum()).sum(),
        }
    }

    /// Global Lipschitz constant of the gradient, when one exists.
    pub fn lipschitz(&self) -> Option<f64> {
        match self {
            PotentialSpec::Zero => Some(0.0),
            PotentialSpec::Quadratic { q, .. } => q.symmetric_eigenvalues().ok()?.last().copied(),
            PotentialSpec::SeparablePower { weights, exponent } => {
                if *exponent == 2.0 {
                    Some(weights.max_abs())
                } else if weights.iter().all(|w| *w == 0.0) {
                    Some(0.0)
                } else {
                    None
                }
            }
            PotentialSpec::Sum { terms } => terms.iter().map(|t| t.lipschitz()).sum(),
            PotentialSpec::Scaled { factor, base } => base.lipschitz().map(|l| factor * l),
            PotentialSpec::Block { parts, .. } => parts
                .iter()
                .map(|p| p.lipschitz())
                .try_fold(0.0f64, |m, l| l.map(|l| m.max(l))),
        }
    }

    /// Affine form `∇φ(x) = Mx + b` on ℝⁿ, when the gradient is affine.
    pub fn affine_gradient(&self, dim: usize) -> Option<(Matrix, Vector)> {
        match self {
            PotentialSpec::Zero => Some((Matrix::zeros(dim, dim), Vector::zeros(dim))),
            PotentialSpec::Quadratic { q, center } => {
                if q.rows() != dim {
                    return None;
                }
                Some((q.clone(), -&q.mul_vec(center)))
            }
            PotentialSpec::SeparablePower { weights, exponent } if *exponent == 2.0 => {
                Some((Matrix::diagonal(weights.as_slice()), Vector::zeros(dim)))
            }
            PotentialSpec::SeparablePower { .. } => None,
            PotentialSpec::Sum { terms } => {
                let mut m = Matrix::zeros(dim, dim);
                let mut b = Vector::zeros(dim);
                for t in terms {
                    let (mt, bt) = t.affine_gradient(dim)?;
                    m = m.add(&mt).ok()?;
                    b += &bt;
                }
                Some((m, b))
            }
            PotentialSpec::Scaled { factor, base } => {
                let (m, b) = base.affine_gradient(dim)?;
                Some((m.scale(*factor), b.scale(*factor)))
            }
            PotentialSpec::Block { sizes, parts } => {
                if sizes.iter().sum::<usize>() != dim {
                    return None;
                }
                let mut m: Option<Matrix> = None;
                let mut b = Vec::new();
                for (n, p) in sizes.iter().zip(parts) {
                    let (mp, bp) = p.affine_gradient(*n)?;
                    m = Some(match m {
                        None => mp,
                        Some(acc) => Matrix::block_diag(&acc, &mp),
                    });
                    b.extend(bp.into_inner());
                }
                Some((m?, Vector::new(b)))
            }
        }
    }

    /// Resolvent of the gradient, `(I + λ∇φ)⁻¹ v`, for kinds with a direct
    /// solution. Returns `None` when no closed form is available.
    pub(crate) fn gradient_resolvent(&self, lambda: f64, v: &Vector, tol: f64) -> Option<Result<Vector>> {
        match self {
            PotentialSpec::SeparablePower { weights, exponent } => {
                let out = (0..v.dim())
                    .map(|i| scalar_power_resolvent(lambda * weights[i], *exponent, v[i], tol))
                    .collect::<Vec<f64>>();
                Some(Ok(Vector::new(out)))
            }
            _ => None,
        }
    }
}

/// Solves `x + c·|x|^{p−1} sign(x) = v` for `c ≥ 0`.
fn scalar_power_resolvent(c: f64, p: f64, v: f64, tol: f64) -> f64 {
    if c == 0.0 || v == 0.0 {
        return v;
    }
    // the root lies between 0 and v; the map is increasing, so bisect with Newton steps
    let f = |x: f64| x + c * x.abs().powf(p - 1.0) * x.signum() - v;
    let (mut lo, mut hi) = if v > 0.0 { (0.0, v) } else { (v, 0.0) };
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let fx = f(x);
        if fx.abs() <= 0.1 * tol {
            break;
        }
        if fx > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let df = 1.0 + c * (p - 1.0) * x.abs().powf(p - 2.0);
        let newton = x - fx / df;
        x = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_grad(p: &PotentialSpec, x: &Vector, h: f64) -> Vector {
        Vector::from_fn(x.dim(), |i| {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[i] += h;
            xm[i] -= h;
            (p.value(&xp).unwrap() - p.value(&xm).unwrap()) / (2.0 * h)
        })
    }

    #[test]
    fn grad_examples() {
        let p = PotentialSpec::half_sq_distance(Vector::zeros(2));
        assert_eq!(p.grad(&[1.0, 2.0].into()).unwrap(), Vector::from([1.0, 2.0]));

        let z = PotentialSpec::Zero;
        assert_eq!(z.grad(&[3.0, -1.0].into()).unwrap(), Vector::zeros(2));

        let q = Matrix::from_rows(&[&[2.0, 0.0], &[0.0, 0.0]]).unwrap();
        let p = PotentialSpec::quadratic(q, Vector::zeros(2)).unwrap();
        let x = Vector::from([1.0, 1.0]);
        let g = p.grad(&x).unwrap();
        assert_eq!(g, Vector::from([2.0, 0.0]));
        assert!((&fd_grad(&p, &x, 1e-6) - &g).norm() < 1e-6);
    }

    #[test]
    fn rejects_indefinite_quadratic() {
        let q = Matrix::from_rows(&[&[1.0, 0.0], &[0.0, -1.0]]).unwrap();
        assert!(PotentialSpec::quadratic(q, Vector::zeros(2)).is_err());
        let q = Matrix::from_rows(&[&[1.0, 1.0], &[0.0, 1.0]]).unwrap();
        assert!(PotentialSpec::quadratic(q, Vector::zeros(2)).is_err());
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let p = PotentialSpec::half_sq_distance(Vector::zeros(3));
        assert!(matches!(p.grad(&[1.0].into()), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn block_potential_acts_per_block() {
        let f1 = PotentialSpec::half_sq_distance(Vector::from([1.0]));
        let f2 = PotentialSpec::separable_power(Vector::from([1.0, 2.0]), 4.0).unwrap();
        let p = PotentialSpec::Block { sizes: vec![1, 2], parts: vec![f1, f2] };
        let x = Vector::from([3.0, 1.0, -1.0]);
        assert_eq!(p.value(&x).unwrap(), 2.0 + 0.25 + 0.5);
        assert_eq!(p.grad(&x).unwrap(), Vector::from([2.0, 1.0, -2.0]));
    }

    #[test]
    fn power_resolvent_solves_its_equation() {
        let p = PotentialSpec::separable_power(Vector::from([1.0, 3.0]), 4.0).unwrap();
        let v = Vector::from([2.0, -1.5]);
        let x = p.gradient_resolvent(0.7, &v, 1e-13).unwrap().unwrap();
        let r = &(&x + &p.grad(&x).unwrap().scale(0.7)) - &v;
        assert!(r.norm() < 1e-12);
    }

    #[test]
    fn affine_gradient_matches_grad() {
        let q = Matrix::from_rows(&[&[2.0, 1.0], &[1.0, 3.0]]).unwrap();
        let p = PotentialSpec::Sum {
            terms: vec![
                PotentialSpec::quadratic(q, Vector::from([1.0, -2.0])).unwrap(),
                PotentialSpec::scaled(2.0, PotentialSpec::half_sq_distance(Vector::from([0.5, 0.5]))).unwrap(),
            ],
        };
        let (m, b) = p.affine_gradient(2).unwrap();
        let x = Vector::from([0.3, -0.8]);
        assert!((&(&m.mul_vec(&x) + &b) - &p.grad(&x).unwrap()).norm() < 1e-14);
    }
}
