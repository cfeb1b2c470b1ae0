use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};

/// Quadratic-bilinear convex-concave function on `X₁ × X₂`:
///
/// `L(x₁, x₂) = ½⟨Q₁x₁, x₁⟩ − ½⟨Q₂x₂, x₂⟩ + ⟨R x₁, x₂⟩ + ⟨a, x₁⟩ + ⟨b, x₂⟩`
///
/// with `Q₁`, `Q₂` symmetric positive semidefinite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SaddleSpec {
    pub q1: Matrix,
    pub q2: Matrix,
    /// `R : X₁ → X₂`, shape `n₂ × n₁`.
    pub coupling: Matrix,
    pub lin1: Vector,
    pub lin2: Vector,
}

impl SaddleSpec {
    pub fn new(q1: Matrix, q2: Matrix, coupling: Matrix, lin1: Vector, lin2: Vector) -> Result<Self> {
        let (n1, n2) = (q1.rows(), q2.rows());
        if !q1.is_square() || !q2.is_square() {
            return Err(Error::InvalidParameter("saddle curvature blocks must be square".into()));
        }
        if coupling.rows() != n2 || coupling.cols() != n1 {
            return Err(Error::dims(n1 * n2, coupling.rows() * coupling.cols()));
        }
        lin1.check_dim(n1)?;
        lin2.check_dim(n2)?;
        for (name, q) in [("Q1", &q1), ("Q2", &q2)] {
            if !q.is_symmetric(1e-12) || q.symmetric_eigenvalues()?[0] < -1e-12 {
                return Err(Error::InvalidParameter(format!("{name} must be symmetric PSD")));
            }
        }
        Ok(SaddleSpec { q1, q2, coupling, lin1, lin2 })
    }

    /// Pure bilinear coupling `⟨R x₁, x₂⟩`.
    pub fn bilinear(coupling: Matrix) -> Result<Self> {
        let (n2, n1) = (coupling.rows(), coupling.cols());
        SaddleSpec::new(Matrix::zeros(n1, n1), Matrix::zeros(n2, n2), coupling, Vector::zeros(n1), Vector::zeros(n2))
    }

    pub fn zero(n1: usize, n2: usize) -> Self {
        SaddleSpec {
            q1: Matrix::zeros(n1, n1),
            q2: Matrix::zeros(n2, n2),
            coupling: Matrix::zeros(n2, n1),
            lin1: Vector::zeros(n1),
            lin2: Vector::zeros(n2),
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.q1.rows(), self.q2.rows())
    }

    fn split(&self, x: &Vector) -> Result<(Vector, Vector)> {
        let (n1, n2) = self.dims();
        x.check_dim(n1 + n2)?;
        Ok((x.block(0, n1), x.block(n1, n2)))
    }

    pub fn value(&self, x1: &Vector, x2: &Vector) -> Result<f64> {
        let q1x = self.q1.apply(x1)?;
        let q2x = self.q2.apply(x2)?;
        let rx = self.coupling.apply(x1)?;
        Ok(0.5 * q1x.dot(x1) - 0.5 * q2x.dot(x2) + rx.dot(x2) + self.lin1.dot(x1) + self.lin2.dot(x2))
    }

    /// `∇ₓ₁L`.
    pub fn grad1(&self, x1: &Vector, x2: &Vector) -> Result<Vector> {
        Ok(&(&self.q1.apply(x1)? + &self.coupling.transpose().apply(x2)?) + &self.lin1)
    }

    /// `∇ₓ₂L`.
    pub fn grad2(&self, x1: &Vector, x2: &Vector) -> Result<Vector> {
        Ok(&(&self.coupling.apply(x1)? - &self.q2.apply(x2)?) + &self.lin2)
    }

    /// The saddle operator `(∇ₓ₁L, −∇ₓ₂L)` at the stacked point.
    pub fn operator(&self, x: &Vector) -> Result<Vector> {
        let (x1, x2) = self.split(x)?;
        Ok(self.grad1(&x1, &x2)?.concat(&-&self.grad2(&x1, &x2)?))
    }

    /// Affine form `(M, c)` of the saddle operator: `x ↦ Mx + c`.
    pub fn affine_form(&self) -> (Matrix, Vector) {
        let (n1, n2) = self.dims();
        let n = n1 + n2;
        let rt = self.coupling.transpose();
        let m = Matrix::from_fn(n, n, |i, j| match (i < n1, j < n1) {
            (true, true) => self.q1.get(i, j),
            (true, false) => rt.get(i, j - n1),
            (false, true) => -self.coupling.get(i - n1, j),
            (false, false) => self.q2.get(i - n1, j - n1),
        });
        (m, self.lin1.concat(&-&self.lin2))
    }
}
