//! Lyapunov functions and convergence certificates evaluated along
//! trajectories.
//!
//! The convergence statements are asymptotic. What is computed here are
//! finite-horizon surrogates: final velocity, L² tail of the velocity,
//! oscillation of `|u(t) − p|` over the last half of the run, and the
//! equilibrium residual at the final state. In ℝⁿ weak and norm convergence
//! coincide, so the limit estimate is simply the final position.

use serde::{Deserialize, Serialize};

use crate::dynamics::{PhaseState, SystemSpec, Trajectory};
use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};
use crate::operators::{MonotoneSpec, PotentialSpec};
use crate::sampling;

pub const DEFAULT_EQUILIBRIUM_TOL: f64 = 1e-10;
const MAX_PROXIMAL_STEPS: usize = 200_000;

/// Certificate quantities at one sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsSample {
    pub t: f64,
    /// `½|u − p|²`.
    pub h: f64,
    /// `⟨u − p, u̇⟩`.
    pub h_dot: f64,
    pub gamma0: Option<f64>,
    pub gamma1: Option<f64>,
    /// `⟨∇φ(u) − ∇φ(p), u − p⟩`.
    pub w: f64,
    /// `|A(u) − A(p)|`.
    pub a_residual: f64,
    /// `|ü + ∇φ(u) + ε∇Θ(u) + Ap|²`.
    pub d_term: f64,
    /// `|∇φ(u) + A(u) + ε(t)∇Θ(u)|`.
    pub eq_residual: f64,
}

/// A point of `S = (∇φ + A)⁻¹(0)` up to the achieved residual.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnchorPoint {
    pub p: Vector,
    pub residual: f64,
}

impl AnchorPoint {
    /// Anchor at a user-supplied point, with its residual evaluated.
    pub fn at(sys: &SystemSpec, p: Vector) -> Result<Self> {
        let residual = sys.equilibrium_map(&p)?.norm();
        Ok(AnchorPoint { p, residual })
    }
}

/// Proximal-point iteration `p ← J_μ^{∇φ+A}(p)` with growing `μ`, stopped
/// once `|∇φ(p) + A(p)| ≤ tol`.
pub fn find_equilibrium(sys: &SystemSpec, guess: &Vector, tol: f64) -> Result<AnchorPoint> {
    guess.check_dim(sys.dim)?;
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter("equilibrium tolerance must be positive".into()));
    }
    let total = MonotoneSpec::sum(vec![MonotoneSpec::gradient(sys.potential.clone()), sys.operator.clone()]);
    let mut p = guess.clone();
    let mut residual = sys.equilibrium_map(&p)?.norm();
    let mut best = residual;
    let mut mu = 1.0;
    for it in 0..MAX_PROXIMAL_STEPS {
        if residual <= tol {
            return Ok(AnchorPoint { p, residual });
        }
        // solve the inner problem well below the outer tolerance
        let inner = (1e-3 * tol * mu).max(1e-15 * (1.0 + p.norm()));
        p = match total.resolvent(mu, &p, inner) {
            Ok(x) => x,
            Err(Error::NoConvergence { .. }) if mu > 1.0 => {
                mu /= 4.0;
                continue;
            }
            Err(e) => return Err(e),
        };
        residual = sys.equilibrium_map(&p)?.norm();
        best = best.min(residual);
        if it % 8 == 7 {
            mu = (mu * 2.0).min(1e8);
        }
    }
    Err(Error::NoConvergence { what: "equilibrium search", iterations: MAX_PROXIMAL_STEPS, residual: best })
}

fn require_lambda(sys: &SystemSpec) -> Result<f64> {
    sys.lambda().ok_or_else(|| Error::InvalidParameter("Lyapunov function needs a cocoercivity constant λ".into()))
}

/// `ḣ + γh + λγ(|u̇|² + 2φ(u) − 2⟨u − p, ∇φ(p)⟩)`.
pub fn gamma0(sys: &SystemSpec, p: &AnchorPoint, s: &PhaseState) -> Result<f64> {
    if sys.tikhonov.is_some() {
        return Err(Error::Unsupported("Γ₀ is defined for systems without a Tikhonov term".into()));
    }
    let lambda = require_lambda(sys)?;
    let g = sys.damping;
    let d = &s.u - &p.p;
    let h = 0.5 * d.norm_sq();
    let h_dot = d.dot(&s.v);
    let phi = sys.potential.value(&s.u)?;
    let lin = d.dot(&sys.potential.grad(&p.p)?);
    Ok(h_dot + g * h + lambda * g * (s.v.norm_sq() + 2.0 * phi - 2.0 * lin))
}

/// `ḣ + γh + λγ(|u̇|² + 2(φ(u) − ⟨u − p, ∇φ(p)⟩) + 2ε(t)(Θ(u) − inf Θ))`.
pub fn gamma1(sys: &SystemSpec, p: &AnchorPoint, s: &PhaseState) -> Result<f64> {
    let tk = sys
        .tikhonov
        .as_ref()
        .ok_or_else(|| Error::Unsupported("Γ₁ needs a Tikhonov term".into()))?;
    let lambda = require_lambda(sys)?;
    let inf = tk
        .regularizer
        .infimum()
        .ok_or_else(|| Error::Unsupported("Θ has no closed-form infimum".into()))?;
    let g = sys.damping;
    let d = &s.u - &p.p;
    let h = 0.5 * d.norm_sq();
    let h_dot = d.dot(&s.v);
    let phi = sys.potential.value(&s.u)?;
    let lin = d.dot(&sys.potential.grad(&p.p)?);
    let theta = tk.regularizer.value(&s.u)? - inf;
    let eps = tk.schedule.value(s.t);
    Ok(h_dot + g * h + lambda * g * (s.v.norm_sq() + 2.0 * (phi - lin) + 2.0 * eps * theta))
}

/// Certificate quantities at one state; `ü` comes from the vector field.
pub fn sample_diagnostics(sys: &SystemSpec, p: &AnchorPoint, s: &PhaseState) -> Result<DiagnosticsSample> {
    let field = sys.compile()?;
    sample_with(&field, sys, p, s)
}

fn sample_with(
    field: &crate::dynamics::Field<'_>,
    sys: &SystemSpec,
    p: &AnchorPoint,
    s: &PhaseState,
) -> Result<DiagnosticsSample> {
    s.u.check_dim(sys.dim)?;
    p.p.check_dim(sys.dim)?;
    let d = &s.u - &p.p;
    let grad_u = field.grad_potential(&s.u)?;
    let grad_p = field.grad_potential(&p.p)?;
    let a_u = field.operator(&s.u)?;
    let a_p = field.operator(&p.p)?;
    let tik = field.tikhonov(s.t, &s.u)?;
    let acc = field.acceleration(s.t, &s.u, &s.v)?;

    let gamma0 = match (sys.tikhonov.is_none(), sys.lambda()) {
        (true, Some(_)) => Some(gamma0(sys, p, s)?),
        _ => None,
    };
    let gamma1 = match &sys.tikhonov {
        Some(tk) if sys.lambda().is_some() && tk.regularizer.infimum().is_some() => Some(gamma1(sys, p, s)?),
        _ => None,
    };
    let equation = &(&grad_u + &a_u) + &tik;
    Ok(DiagnosticsSample {
        t: s.t,
        h: 0.5 * d.norm_sq(),
        h_dot: d.dot(&s.v),
        gamma0,
        gamma1,
        w: (&grad_u - &grad_p).dot(&d),
        a_residual: (&a_u - &a_p).norm(),
        d_term: (&(&(&acc + &grad_u) + &tik) + &a_p).norm_sq(),
        eq_residual: equation.norm(),
    })
}

/// Returns the trajectory with a [`DiagnosticsSample`] at every sample.
pub fn attach_diagnostics(traj: &Trajectory, sys: &SystemSpec, p: &AnchorPoint) -> Result<Trajectory> {
    if traj.meta.dim != sys.dim {
        return Err(Error::dims(sys.dim, traj.meta.dim));
    }
    if traj.meta.system_hash != sys.hash() {
        return Err(Error::Inconsistent("trajectory was produced by a different system".into()));
    }
    let field = sys.compile()?;
    let diagnostics = traj.samples.iter().map(|s| sample_with(&field, sys, p, s)).collect::<Result<Vec<_>>>()?;
    let mut out = traj.clone();
    out.diagnostics = Some(diagnostics);
    Ok(out)
}

/// Thresholds for the finite-horizon surrogates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub velocity: f64,
    pub l2_tail: f64,
    pub gamma0_step: f64,
    pub anchor_oscillation: f64,
    pub residual: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { velocity: 1e-5, l2_tail: 1e-4, gamma0_step: 1e-8, anchor_oscillation: 1e-5, residual: 1e-5 }
    }
}

/// Pass/fail per convergence item.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    /// Final state is an equilibrium to tolerance.
    pub limit_in_s: bool,
    /// `|u̇(T)|` and the L² tail of `u̇` are small.
    pub velocity_vanishes: bool,
    /// Tail integral of `D(t)` is small.
    pub d_term_integrable: bool,
    /// `|u(t) − p|` settles over the last half of the run.
    pub anchor_distance_settles: bool,
    /// `Γ₀` nonincreasing to tolerance; `None` when `Γ₀` is undefined.
    pub gamma0_nonincreasing: Option<bool>,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub anchor: Vector,
    pub horizon: f64,
    pub final_velocity_norm: f64,
    /// `∫ |u̇|²` over the last 20% of the horizon.
    pub l2_velocity_tail: f64,
    /// Trapezoid `∫ D` over the last 20% of the horizon, on the samples.
    pub d_term_tail: f64,
    pub final_anchor_distance: f64,
    /// Largest rise of `|u(t) − p|` above its running minimum over the last half.
    pub anchor_oscillation: f64,
    /// `max − min` of `|u(t) − p|` over the last half.
    pub anchor_spread: f64,
    /// Largest increase of `Γ₀` between consecutive samples.
    pub gamma0_monotonicity_defect: Option<f64>,
    pub final_w: f64,
    pub final_a_residual: f64,
    pub limit_estimate: Vector,
    /// `|∇φ(u(T)) + A(u(T))|`.
    pub limit_residual: f64,
    pub tolerances: Tolerances,
    pub verdict: Verdict,
}

/// Finite-horizon surrogate of the convergence theorem on a trajectory with
/// diagnostics attached.
pub fn convergence_report(traj: &Trajectory, sys: &SystemSpec, p: &AnchorPoint, tol: &Tolerances) -> Result<ConvergenceReport> {
    let diag = traj
        .diagnostics
        .as_ref()
        .ok_or_else(|| Error::InvalidParameter("attach diagnostics before reporting".into()))?;
    traj.validate()?;
    let last = traj.last();
    let t0 = traj.samples[0].t;
    let horizon = last.t - t0;

    let l2_velocity_tail = traj.running_l2_velocity.last().copied().unwrap_or(0.0) - traj.l2_at(t0 + 0.8 * horizon);
    let l2_velocity_tail = l2_velocity_tail.max(0.0);

    let mut d_term_tail = 0.0;
    for w in diag.windows(2) {
        if w[0].t >= t0 + 0.8 * horizon - 1e-12 {
            d_term_tail += 0.5 * (w[1].t - w[0].t) * (w[0].d_term + w[1].d_term);
        }
    }

    let (mut oscillation, mut lo, mut hi, mut running_min) = (0.0f64, f64::INFINITY, 0.0f64, f64::INFINITY);
    for d in diag.iter().filter(|d| d.t >= t0 + 0.5 * horizon) {
        let r = (2.0 * d.h).sqrt();
        running_min = running_min.min(r);
        oscillation = oscillation.max(r - running_min);
        lo = lo.min(r);
        hi = hi.max(r);
    }
    let anchor_spread = (hi - lo).max(0.0);

    let gamma0_monotonicity_defect = if diag.iter().all(|d| d.gamma0.is_some()) {
        Some(
            diag.windows(2)
                .map(|w| w[1].gamma0.unwrap_or(0.0) - w[0].gamma0.unwrap_or(0.0))
                .fold(0.0f64, f64::max),
        )
    } else {
        None
    };

    let final_diag = diag.last().expect("nonempty");
    let limit_residual = sys.equilibrium_map(&last.u)?.norm();
    let final_velocity_norm = last.v.norm();

    let velocity_vanishes = final_velocity_norm < tol.velocity && l2_velocity_tail < tol.l2_tail;
    let limit_in_s = limit_residual < tol.residual;
    let d_term_integrable = d_term_tail < tol.l2_tail;
    let anchor_distance_settles = oscillation <= tol.anchor_oscillation;
    let gamma0_nonincreasing = gamma0_monotonicity_defect.map(|d| d <= tol.gamma0_step);
    let pass = velocity_vanishes
        && limit_in_s
        && d_term_integrable
        && anchor_distance_settles
        && gamma0_nonincreasing.unwrap_or(true);

    Ok(ConvergenceReport {
        anchor: p.p.clone(),
        horizon,
        final_velocity_norm,
        l2_velocity_tail,
        d_term_tail,
        final_anchor_distance: (2.0 * final_diag.h).sqrt(),
        anchor_oscillation: oscillation,
        anchor_spread,
        gamma0_monotonicity_defect,
        final_w: final_diag.w,
        final_a_residual: final_diag.a_residual,
        limit_estimate: last.u.clone(),
        limit_residual,
        tolerances: *tol,
        verdict: Verdict {
            limit_in_s,
            velocity_vanishes,
            d_term_integrable,
            anchor_distance_settles,
            gamma0_nonincreasing,
            pass,
        },
    })
}

/// `max_v max(0, −⟨∇Θ(u*), v − u*⟩)` over the probe set; zero when the
/// variational inequality holds on the probes.
pub fn vi_residual(theta: &PotentialSpec, probes: &[Vector], u_star: &Vector) -> Result<f64> {
    if probes.is_empty() {
        return Err(Error::InvalidParameter("empty probe set".into()));
    }
    let g = theta.grad(u_star)?;
    let mut worst = 0.0f64;
    for v in probes {
        v.check_dim(u_star.dim())?;
        worst = worst.max(-g.dot(&(v - u_star)));
    }
    Ok(worst)
}

/// Empirical infimum of `⟨Fu − Fv, u − v⟩ / |u − v|²` for `F = ∇φ + A` over
/// sampled pairs in the ball; affine `F` also gets the eigenvectors of its
/// symmetric part.
pub fn strong_monotonicity_estimate(sys: &SystemSpec, samples: usize, radius: f64, seed: u64) -> Result<f64> {
    if samples < 2 {
        return Err(Error::InvalidParameter("need at least 2 samples".into()));
    }
    let n = sys.dim;
    let ratio = |u: &Vector, v: &Vector| -> Result<Option<f64>> {
        let d = u - v;
        let dn = d.norm_sq();
        if dn.sqrt() < 1e-12 {
            return Ok(None);
        }
        Ok(Some((&sys.equilibrium_map(u)? - &sys.equilibrium_map(v)?).dot(&d) / dn))
    };
    let mut rng = sampling::rng(seed);
    let mut best: Option<f64> = None;
    let mut fold = |r: Option<f64>| {
        if let Some(r) = r {
            best = Some(best.map_or(r, |b: f64| b.min(r)));
        }
    };
    for _ in 0..samples {
        let u = sampling::point_in_ball(&mut rng, n, radius);
        let v = sampling::point_in_ball(&mut rng, n, radius);
        fold(ratio(&u, &v)?);
    }
    let affine = sys
        .potential
        .affine_gradient(n)
        .zip(sys.operator.affine_form(n))
        .map(|((m1, _), (m2, _))| m1.add(&m2))
        .transpose()?;
    if let Some(m) = affine {
        let sym: Matrix = m.symmetric_part();
        for (_, e) in sym.symmetric_eigenpairs()? {
            fold(ratio(&e.scale(0.5 * radius), &Vector::zeros(n))?);
        }
    }
    best.ok_or_else(|| Error::DegenerateSample("all sampled pairs coincide".into()))
}

#[cfg(test)]
mod tests;
