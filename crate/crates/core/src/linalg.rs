//! Dense real vectors and matrices.
//!
//! Everything in this crate lives in ℝⁿ with the Euclidean inner product. The
//! Hilbert-space statements the dynamics are modeled on (weak convergence in
//! particular) are reported here as norm convergence, which is equivalent in
//! finite dimension.

use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point of ℝⁿ.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Vector(Vec<f64>);

impl Vector {
    pub fn new(entries: Vec<f64>) -> Self {
        Vector(entries)
    }

    pub fn zeros(dim: usize) -> Self {
        Vector(vec![0.0; dim])
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize) -> f64) -> Self {
        Vector((0..dim).map(f).collect())
    }

    /// Unit vector along axis `i`.
    pub fn basis(dim: usize, i: usize) -> Self {
        Vector::from_fn(dim, |j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.0.iter()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn norm_sq(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn scale(&self, s: f64) -> Vector {
        Vector(self.0.iter().map(|x| s * x).collect())
    }

    /// `self + s * other`.
    pub fn axpy(&self, s: f64, other: &Vector) -> Vector {
        assert_same_dim(self, other);
        Vector(self.0.iter().zip(&other.0).map(|(a, b)| a + s * b).collect())
    }

    pub fn dot(&self, other: &Vector) -> f64 {
        assert_same_dim(self, other);
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn check_dim(&self, expected: usize) -> Result<()> {
        if self.dim() == expected {
            Ok(())
        } else {
            Err(Error::dims(expected, self.dim()))
        }
    }

    /// Concatenation `(self, other)` in a product space.
    pub fn concat(&self, other: &Vector) -> Vector {
        let mut out = self.0.clone();
        out.extend_from_slice(&other.0);
        Vector(out)
    }

    /// Entries `[start, start + len)`.
    pub fn block(&self, start: usize, len: usize) -> Vector {
        Vector(self.0[start..start + len].to_vec())
    }

    pub fn map(&self, f: impl FnMut(&f64) -> f64) -> Vector {
        Vector(self.0.iter().map(f).collect())
    }
}

fn assert_same_dim(a: &Vector, b: &Vector) {
    assert_eq!(a.dim(), b.dim(), "vector dimension mismatch");
}

impl fmt::Debug for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.0).finish()
    }
}

impl From<Vec<f64>> for Vector {
    fn from(v: Vec<f64>) -> Self {
        Vector(v)
    }
}

impl<const N: usize> From<[f64; N]> for Vector {
    fn from(v: [f64; N]) -> Self {
        Vector(v.to_vec())
    }
}

impl Index<usize> for Vector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for Vector {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

impl Add for &Vector {
    type Output = Vector;
    fn add(self, rhs: &Vector) -> Vector {
        self.axpy(1.0, rhs)
    }
}

impl Sub for &Vector {
    type Output = Vector;
    fn sub(self, rhs: &Vector) -> Vector {
        self.axpy(-1.0, rhs)
    }
}

impl Add for Vector {
    type Output = Vector;
    fn add(self, rhs: Vector) -> Vector {
        &self + &rhs
    }
}

impl Sub for Vector {
    type Output = Vector;
    fn sub(self, rhs: Vector) -> Vector {
        &self - &rhs
    }
}

impl AddAssign<&Vector> for Vector {
    fn add_assign(&mut self, rhs: &Vector) {
        assert_same_dim(self, rhs);
        for (a, b) in self.0.iter_mut().zip(&rhs.0) {
            *a += b;
        }
    }
}

impl SubAssign<&Vector> for Vector {
    fn sub_assign(&mut self, rhs: &Vector) {
        assert_same_dim(self, rhs);
        for (a, b) in self.0.iter_mut().zip(&rhs.0) {
            *a -= b;
        }
    }
}

impl Mul<&Vector> for f64 {
    type Output = Vector;
    fn mul(self, rhs: &Vector) -> Vector {
        rhs.scale(self)
    }
}

impl Neg for &Vector {
    type Output = Vector;
    fn neg(self) -> Vector {
        self.scale(-1.0)
    }
}

/// Checked inner product.
pub fn inner(a: &Vector, b: &Vector) -> Result<f64> {
    b.check_dim(a.dim())?;
    Ok(a.dot(b))
}

pub fn norm(a: &Vector) -> f64 {
    a.norm()
}

/// Dense row-major matrix.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let owned: Vec<Vec<f64>> = rows.iter().map(|r| r.to_vec()).collect();
        Matrix::try_from(owned)
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidParameter("matrix must be non-empty".into()));
        }
        if data.len() != rows * cols {
            return Err(Error::dims(rows * cols, data.len()));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix::from_fn(rows, cols, |_, _| 0.0)
    }

    pub fn identity(n: usize) -> Self {
        Matrix::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn diagonal(d: &[f64]) -> Self {
        Matrix::from_fn(d.len(), d.len(), |i, j| if i == j { d[i] } else { 0.0 })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    fn set(&mut self, i: usize, j: usize, x: f64) {
        self.data[i * self.cols + j] = x;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn apply(&self, x: &Vector) -> Result<Vector> {
        x.check_dim(self.cols)?;
        Ok(self.mul_vec(x))
    }

    /// Unchecked product; panics on dimension mismatch.
    pub fn mul_vec(&self, x: &Vector) -> Vector {
        assert_eq!(x.dim(), self.cols, "matrix-vector dimension mismatch");
        Vector::from_fn(self.rows, |i| {
            self.row(i).iter().zip(x.iter()).map(|(a, b)| a * b).sum()
        })
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::dims(self.cols, other.rows));
        }
        Ok(Matrix::from_fn(self.rows, other.cols, |i, j| {
            (0..self.cols).map(|k| self.get(i, k) * other.get(k, j)).sum()
        }))
    }

    pub fn scale(&self, s: f64) -> Matrix {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| s * x).collect() }
    }

    pub fn add(&self, other: &Matrix) -> Result<Matrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::dims(self.rows * self.cols, other.rows * other.cols));
        }
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn sub(&self, other: &Matrix) -> Result<Matrix> {
        self.add(&other.scale(-1.0))
    }

    /// Symmetric part `(M + Mᵀ)/2`.
    pub fn symmetric_part(&self) -> Matrix {
        Matrix::from_fn(self.rows, self.cols, |i, j| 0.5 * (self.get(i, j) + self.get(j, i)))
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| (0..i).all(|j| (self.get(i, j) - self.get(j, i)).abs() <= tol))
    }

    /// Block-diagonal assembly `diag(a, b)`.
    pub fn block_diag(a: &Matrix, b: &Matrix) -> Matrix {
        let (r, c) = (a.rows + b.rows, a.cols + b.cols);
        Matrix::from_fn(r, c, |i, j| {
            if i < a.rows && j < a.cols {
                a.get(i, j)
            } else if i >= a.rows && j >= a.cols {
                b.get(i - a.rows, j - a.cols)
            } else {
                0.0
            }
        })
    }

    /// Horizontal concatenation `[a | b]`.
    pub fn hstack(a: &Matrix, b: &Matrix) -> Result<Matrix> {
        if a.rows != b.rows {
            return Err(Error::dims(a.rows, b.rows));
        }
        Ok(Matrix::from_fn(a.rows, a.cols + b.cols, |i, j| {
            if j < a.cols {
                a.get(i, j)
            } else {
                b.get(i, j - a.cols)
            }
        }))
    }

    /// Eigenvalues of the symmetric part, ascending.
    pub fn symmetric_eigenvalues(&self) -> Result<Vec<f64>> {
        if !self.is_square() {
            return Err(Error::dims(self.rows, self.cols));
        }
        let sym = self.symmetric_part();
        let m = nalgebra::DMatrix::from_row_slice(sym.rows, sym.cols, &sym.data);
        let mut ev: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        Ok(ev)
    }

    /// Eigenpairs of the symmetric part, ascending; eigenvectors as columns.
    pub fn symmetric_eigenpairs(&self) -> Result<Vec<(f64, Vector)>> {
        if !self.is_square() {
            return Err(Error::dims(self.rows, self.cols));
        }
        let sym = self.symmetric_part();
        let m = nalgebra::DMatrix::from_row_slice(sym.rows, sym.cols, &sym.data);
        let eig = m.symmetric_eigen();
        let mut pairs: Vec<(f64, Vector)> = (0..self.rows)
            .map(|k| (eig.eigenvalues[k], Vector::new(eig.eigenvectors.column(k).iter().copied().collect())))
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(pairs)
    }

    /// Spectral norm, `sqrt(λmax(MᵀM))`.
    pub fn operator_norm(&self) -> f64 {
        let gram = self.transpose().matmul(self).expect("square gram");
        let ev = gram.symmetric_eigenvalues().expect("gram is square");
        ev.last().copied().unwrap_or(0.0).max(0.0).sqrt()
    }

    /// Inverse via column-wise solves.
    pub fn inverse(&self, tol: f64) -> Result<Matrix> {
        let n = self.rows;
        let mut inv = Matrix::zeros(n, n);
        for j in 0..n {
            let col = solve_linear(self, &Vector::basis(n, j), tol)?;
            for i in 0..n {
                inv.set(i, j, col[i]);
            }
        }
        Ok(inv)
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<&[f64]> = (0..self.rows).map(|i| self.row(i)).collect();
        f.debug_list().entries(rows).finish()
    }
}

impl TryFrom<Vec<Vec<f64>>> for Matrix {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map(|row| row.len()).unwrap_or(0);
        if let Some(bad) = rows.iter().find(|row| row.len() != c) {
            return Err(Error::dims(c, bad.len()));
        }
        Matrix::from_row_major(r, c, rows.into_iter().flatten().collect())
    }
}

impl From<Matrix> for Vec<Vec<f64>> {
    fn from(m: Matrix) -> Self {
        (0..m.rows).map(|i| m.row(i).to_vec()).collect()
    }
}

/// Solves `M x = b` by Gaussian elimination with partial pivoting.
///
/// The result is accepted only if `|Mx − b| ≤ tol·(1 + |b|)`; otherwise the
/// achieved residual is reported in [`Error::Singular`].
pub fn solve_linear(m: &Matrix, b: &Vector, tol: f64) -> Result<Vector> {
    if !m.is_square() {
        return Err(Error::dims(m.rows, m.cols));
    }
    b.check_dim(m.rows)?;
    let n = m.rows;
    let scale = m.data.iter().fold(0.0f64, |s, x| s.max(x.abs()));
    let mut a = m.data.clone();
    let mut rhs = b.as_slice().to_vec();

    for k in 0..n {
        let (piv, piv_val) = (k..n)
            .map(|i| (i, a[i * n + k].abs()))
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .expect("non-empty pivot range");
        if piv_val <= f64::EPSILON * scale * n as f64 || piv_val == 0.0 {
            // elimination broke down; report the residual of the zero guess
            return Err(Error::Singular { residual: b.norm() });
        }
        if piv != k {
            for j in 0..n {
                a.swap(k * n + j, piv * n + j);
            }
            rhs.swap(k, piv);
        }
        let d = a[k * n + k];
        for i in k + 1..n {
            let f = a[i * n + k] / d;
            if f == 0.0 {
                continue;
            }
            for j in k..n {
                a[i * n + j] -= f * a[k * n + j];
            }
            rhs[i] -= f * rhs[k];
        }
    }

    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| a[i * n + j] * x[j]).sum();
        x[i] = (rhs[i] - s) / a[i * n + i];
    }
    let x = Vector::new(x);
    let residual = (&m.mul_vec(&x) - b).norm();
    if !x.is_finite() || residual > tol * (1.0 + b.norm()) {
        return Err(Error::Singular { residual });
    }
    Ok(x)
}
