//! Closed-form analysis of `ü + γu̇ + B_λ u = 0` in the plane, where `B_λ`
//! is the Yosida approximation of the π/2 rotation
//! `B = [[0, −1], [1, 0]]`.
//!
//! `B_λ = H/(1 + λ²)` with `H = [[λ, −1], [1, λ]]` is `λ`-cocoercive, and the
//! characteristic equation is `r² + γr + (λ − i)/(1 + λ²) = 0`. With
//! `D = γ² − 4λ/(1 + λ²)` the roots are `a₁ − ib` and `a₂ + ib` where
//!
//! ```text
//! x = (1/√2)(D + √(D² + 16/(1+λ²)²))^{1/2}     a₁ = (−γ − x)/2
//! y = (1/√2)(−D + √(D² + 16/(1+λ²)²))^{1/2}    a₂ = (−γ + x)/2,  b = y/2
//! ```
//!
//! Solutions fail to converge iff `a₂ ≥ 0`, equivalently
//! `√(γ⁴ − 8γ²λ/(1+λ²) + 16/(1+λ²)) ≥ γ² + 4λ/(1+λ²)`, equivalently
//! `γ⁴(1 − θ) ≥ θ³` with `θ = λγ²`.
//!
//! The last form depends on `γ`: for `θ < 1` and `γ⁴ < θ³/(1 − θ)` the
//! system converges. Verdicts therefore report the plain `θ < 1` claim next
//! to the computed classification and flag grid points where they differ.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{solve_linear, Matrix, Vector};

/// Floating-point dust allowed in the radicands before clamping.
pub const RADICAND_DUST: f64 = 1e-14;
/// Margins closer to zero than this are treated as on the boundary.
pub const AGREEMENT_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RotationCase {
    pub gamma: f64,
    pub lambda: f64,
    /// `λγ²`.
    pub theta: f64,
}

impl RotationCase {
    pub fn new(gamma: f64, lambda: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite() && lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidParameter(format!("need γ > 0 and λ > 0, got γ = {gamma}, λ = {lambda}")));
        }
        Ok(RotationCase { gamma, lambda, theta: lambda * gamma * gamma })
    }

    /// Case with `λ = θ/γ²`.
    pub fn from_theta(gamma: f64, theta: f64) -> Result<Self> {
        RotationCase::new(gamma, theta / (gamma * gamma))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CharacteristicRoots {
    pub x: f64,
    pub y: f64,
    pub a1: f64,
    pub a2: f64,
    pub b: f64,
}

/// `B_λ = H/(1 + λ²)`.
pub fn yosida_rotation_matrix(lambda: f64) -> Result<Matrix> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParameter(format!("λ must be positive, got {lambda}")));
    }
    let s = 1.0 + lambda * lambda;
    Matrix::from_rows(&[&[lambda / s, -1.0 / s], &[1.0 / s, lambda / s]])
}

fn clamped_sqrt(what: &str, v: f64) -> Result<f64> {
    if v < -RADICAND_DUST {
        return Err(Error::Inconsistent(format!("negative radicand {v:e} in {what}")));
    }
    Ok(v.max(0.0).sqrt())
}

pub fn characteristic_roots(case: &RotationCase) -> Result<CharacteristicRoots> {
    let (g, l) = (case.gamma, case.lambda);
    let s = 1.0 + l * l;
    let d = g * g - 4.0 * l / s;
    let r = clamped_sqrt("√(D² + 16/(1+λ²)²)", d * d + 16.0 / (s * s))?;
    let x = clamped_sqrt("x", d + r)? / 2f64.sqrt();
    let y = clamped_sqrt("y", -d + r)? / 2f64.sqrt();
    Ok(CharacteristicRoots { x, y, a1: (-g - x) / 2.0, a2: (-g + x) / 2.0, b: y / 2.0 })
}

/// Residual of `r² + γr + (λ − i)/(1 + λ²)` at `r = re + i·im`, as `|·|`.
pub fn characteristic_residual(case: &RotationCase, re: f64, im: f64) -> f64 {
    let s = 1.0 + case.lambda * case.lambda;
    let real = re * re - im * im + case.gamma * re + case.lambda / s;
    let imag = 2.0 * re * im + case.gamma * im - 1.0 / s;
    real.hypot(imag)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stability {
    Converging,
    NonConverging,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityVerdict {
    pub case: RotationCase,
    pub roots: CharacteristicRoots,
    pub verdict: Stability,
    pub a2_nonnegative: bool,
    /// `√(γ⁴ − 8γ²λ/(1+λ²) + 16/(1+λ²)) ≥ γ² + 4λ/(1+λ²)`.
    pub cir1_holds: bool,
    /// `γ⁴(1 − θ) ≥ θ³`.
    pub theta_form_holds: bool,
    pub cir1_margin: f64,
    pub theta_form_margin: f64,
    /// Non-convergence as predicted by `θ < 1` alone.
    pub theta_claim_nonconverging: bool,
    /// The `θ < 1` prediction differs from the computed verdict.
    pub claim_disagrees: bool,
}

pub fn classify(case: &RotationCase) -> Result<StabilityVerdict> {
    let roots = characteristic_roots(case)?;
    let (g, l, th) = (case.gamma, case.lambda, case.theta);
    let s = 1.0 + l * l;
    let cir1_margin = clamped_sqrt("(cir1)", g.powi(4) - 8.0 * g * g * l / s + 16.0 / s)? - (g * g + 4.0 * l / s);
    let theta_form_margin = g.powi(4) * (1.0 - th) - th.powi(3);

    let criteria = [(roots.a2, "a₂ ≥ 0"), (cir1_margin, "(cir1)"), (theta_form_margin, "γ⁴(1−θ) ≥ θ³")];
    let decided: Vec<_> = criteria.iter().filter(|(m, _)| m.abs() > AGREEMENT_TOL).collect();
    if let Some(first) = decided.first() {
        if let Some(other) = decided.iter().find(|(m, _)| (*m >= 0.0) != (first.0 >= 0.0)) {
            return Err(Error::Inconsistent(format!(
                "{} (margin {:e}) and {} (margin {:e}) disagree at γ = {g}, λ = {l}",
                first.1, first.0, other.1, other.0
            )));
        }
    }

    let a2_nonnegative = roots.a2 >= 0.0;
    let verdict = if a2_nonnegative { Stability::NonConverging } else { Stability::Converging };
    let theta_claim_nonconverging = th < 1.0;
    Ok(StabilityVerdict {
        case: *case,
        roots,
        verdict,
        a2_nonnegative,
        cir1_holds: cir1_margin >= 0.0,
        theta_form_holds: theta_form_margin >= 0.0,
        cir1_margin,
        theta_form_margin,
        theta_claim_nonconverging,
        claim_disagrees: theta_claim_nonconverging != a2_nonnegative,
    })
}

/// `(re, im)` pair arithmetic for the complex form `z = u₁ + iu₂`.
#[derive(Clone, Copy)]
struct Pair(f64, f64);

impl Pair {
    fn mul(self, o: Pair) -> Pair {
        Pair(self.0 * o.0 - self.1 * o.1, self.0 * o.1 + self.1 * o.0)
    }
    fn add(self, o: Pair) -> Pair {
        Pair(self.0 + o.0, self.1 + o.1)
    }
    fn exp_t(self, t: f64) -> Pair {
        let m = (self.0 * t).exp();
        Pair(m * (self.1 * t).cos(), m * (self.1 * t).sin())
    }
}

/// `Σ cᵢUᵢ` and its first two derivatives at `t`, where
///
/// ```text
/// U₁ = e^{a₁t}(cos bt, sin bt)     U₂ = e^{a₁t}(−sin bt, cos bt)
/// U₃ = e^{a₂t}(cos bt, −sin bt)    U₄ = e^{a₂t}(sin bt, cos bt)
/// ```
///
/// In complex form `U₁ + iU₂`-type pairs are `e^{ρ₁t}` with `ρ₁ = a₁ + ib`
/// and `e^{ρ₂t}` with `ρ₂ = a₂ − ib`, so derivatives multiply by `ρ`.
fn basis_derivatives(roots: &CharacteristicRoots, c: &[f64; 4], t: f64) -> [Vector; 3] {
    let rho1 = Pair(roots.a1, roots.b);
    let rho2 = Pair(roots.a2, -roots.b);
    let z1 = Pair(c[0], c[1]).mul(rho1.exp_t(t));
    let z2 = Pair(c[2], c[3]).mul(rho2.exp_t(t));
    let mut out = [Vector::zeros(2), Vector::zeros(2), Vector::zeros(2)];
    let (mut w1, mut w2) = (z1, z2);
    for slot in out.iter_mut() {
        let z = w1.add(w2);
        *slot = Vector::from([z.0, z.1]);
        w1 = w1.mul(rho1);
        w2 = w2.mul(rho2);
    }
    out
}

/// Position and velocity of `c₁U₁ + c₂U₂ + c₃U₃ + c₄U₄` at `t`.
pub fn closed_form_solution(case: &RotationCase, coeffs: &[f64; 4], t: f64) -> Result<(Vector, Vector)> {
    let roots = characteristic_roots(case)?;
    let [u, v, _] = basis_derivatives(&roots, coeffs, t);
    Ok((u, v))
}

/// Second derivative of the closed form at `t`.
pub fn closed_form_acceleration(case: &RotationCase, coeffs: &[f64; 4], t: f64) -> Result<Vector> {
    let roots = characteristic_roots(case)?;
    let [_, _, a] = basis_derivatives(&roots, coeffs, t);
    Ok(a)
}

/// Coefficients matching `(u₀, v₀)` at `t = 0`.
pub fn fit_coefficients(case: &RotationCase, u0: &Vector, v0: &Vector) -> Result<[f64; 4]> {
    u0.check_dim(2)?;
    v0.check_dim(2)?;
    let CharacteristicRoots { a1, a2, b, .. } = characteristic_roots(case)?;
    let m = Matrix::from_rows(&[
        &[1.0, 0.0, 1.0, 0.0],
        &[0.0, 1.0, 0.0, 1.0],
        &[a1, -b, a2, b],
        &[b, a1, -b, a2],
    ])?;
    let rhs = Vector::from([u0[0], u0[1], v0[0], v0[1]]);
    let c = solve_linear(&m, &rhs, 1e-12).map_err(|_| {
        Error::Inconsistent(format!(
            "solution basis is degenerate at γ = {}, λ = {} (a₁ = {a1}, a₂ = {a2}, b = {b})",
            case.gamma, case.lambda
        ))
    })?;
    Ok([c[0], c[1], c[2], c[3]])
}

/// One row of a `(γ, λ)` classification sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub gamma: f64,
    pub lambda: f64,
    pub theta: f64,
    pub a1: f64,
    pub a2: f64,
    pub b: f64,
    pub verdict: Stability,
    pub a2_nonnegative: bool,
    pub cir1_holds: bool,
    pub theta_form_holds: bool,
    pub theta_claim_nonconverging: bool,
    pub claim_disagrees: bool,
}

impl From<&StabilityVerdict> for SweepRow {
    fn from(v: &StabilityVerdict) -> Self {
        SweepRow {
            gamma: v.case.gamma,
            lambda: v.case.lambda,
            theta: v.case.theta,
            a1: v.roots.a1,
            a2: v.roots.a2,
            b: v.roots.b,
            verdict: v.verdict,
            a2_nonnegative: v.a2_nonnegative,
            cir1_holds: v.cir1_holds,
            theta_form_holds: v.theta_form_holds,
            theta_claim_nonconverging: v.theta_claim_nonconverging,
            claim_disagrees: v.claim_disagrees,
        }
    }
}

/// `n` evenly spaced points on `[lo, hi]` (just `lo` when `n = 1`).
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// Classification over the `γ × θ` grid, `λ = θ/γ²`, rows ordered by `γ`
/// then `θ`.
pub fn sweep(gammas: &[f64], thetas: &[f64]) -> Result<Vec<StabilityVerdict>> {
    let mut out = Vec::with_capacity(gammas.len() * thetas.len());
    for &g in gammas {
        for &th in thetas {
            out.push(classify(&RotationCase::from_theta(g, th)?)?);
        }
    }
    Ok(out)
}

/// Per `γ`: the `θ = 1` curve `λ = 1/γ²` and the true stability boundary
/// `θ*` solving `γ⁴(1 − θ) = θ³`, with `λ* = θ*/γ²`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPoint {
    pub gamma: f64,
    pub lambda_theta_one: f64,
    pub theta_star: f64,
    pub lambda_star: f64,
}

pub fn boundary_curve(gammas: &[f64]) -> Vec<BoundaryPoint> {
    gammas
        .iter()
        .map(|&g| {
            let g4 = g.powi(4);
            // f(θ) = γ⁴(1 − θ) − θ³ is decreasing on [0, 1] with f(0) > 0 ≥ f(1)
            let (mut lo, mut hi) = (0.0f64, 1.0f64);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if g4 * (1.0 - mid) - mid.powi(3) >= 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let theta_star = 0.5 * (lo + hi);
            BoundaryPoint { gamma: g, lambda_theta_one: 1.0 / (g * g), theta_star, lambda_star: theta_star / (g * g) }
        })
        .collect()
}
