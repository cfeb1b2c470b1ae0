//! The evolution system as a first-order phase-space vector field, and a
//! fixed-step RK4 integrator for it.

pub mod io;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::diagnostics::DiagnosticsSample;
use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};
use crate::operators::{MonotoneSpec, PotentialSpec};
use crate::sampling;

pub const DEFAULT_STEP: f64 = 1e-3;
pub const DEFAULT_HORIZON: f64 = 50.0;
pub const DEFAULT_SAMPLE_EVERY: usize = 100;

/// States with any component above this magnitude abort the integration.
pub const BLOW_UP: f64 = 1e12;

/// Vanishing Tikhonov weight `ε(t)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum EpsilonSchedule {
    Zero,
    /// `c / (1 + t)^p`.
    Power { c: f64, p: f64 },
    /// `c e^{−at}`.
    Exponential { c: f64, a: f64 },
}

impl EpsilonSchedule {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            EpsilonSchedule::Zero => true,
            EpsilonSchedule::Power { c, p } => c > 0.0 && p > 0.0 && c.is_finite() && p.is_finite(),
            EpsilonSchedule::Exponential { c, a } => c > 0.0 && a > 0.0 && c.is_finite() && a.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "ε schedule {self:?} is not positive and decreasing"
            )))
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        match *self {
            EpsilonSchedule::Zero => 0.0,
            EpsilonSchedule::Power { c, p } => c / (1.0 + t).powf(p),
            EpsilonSchedule::Exponential { c, a } => c * (-a * t).exp(),
        }
    }

    pub fn derivative(&self, t: f64) -> f64 {
        match *self {
            EpsilonSchedule::Zero => 0.0,
            EpsilonSchedule::Power { c, p } => -c * p / (1.0 + t).powf(p + 1.0),
            EpsilonSchedule::Exponential { c, a } => -a * c * (-a * t).exp(),
        }
    }

    /// `∫₀^∞ ε = ∞`.
    pub fn slow_decay(&self) -> bool {
        matches!(*self, EpsilonSchedule::Power { p, .. } if p <= 1.0)
    }
}

/// The vanishing viscosity term `ε(t)∇Θ(u)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tikhonov {
    pub regularizer: PotentialSpec,
    /// `η` with `∇Θ` `η`-strongly monotone.
    pub strong_monotonicity: f64,
    /// `δ` with `∇Θ` `δ`-Lipschitz.
    pub lipschitz: f64,
    pub schedule: EpsilonSchedule,
}

impl Tikhonov {
    /// Sampled check of strong monotonicity and Lipschitz continuity of `∇Θ`.
    pub fn verify_regularizer(&self, dim: usize, samples: usize, seed: u64) -> Result<()> {
        let mut rng = sampling::rng(seed);
        for _ in 0..samples {
            let u = sampling::point_in_ball(&mut rng, dim, 10.0);
            let v = sampling::point_in_ball(&mut rng, dim, 10.0);
            let d = &u - &v;
            let dn = d.norm_sq();
            if dn < 1e-20 {
                continue;
            }
            let g = &self.regularizer.grad(&u)? - &self.regularizer.grad(&v)?;
            let slack = 1e-10 * dn;
            if g.dot(&d) < self.strong_monotonicity * dn - slack {
                return Err(Error::InvalidParameter(format!(
                    "∇Θ is not {}-strongly monotone on the sample",
                    self.strong_monotonicity
                )));
            }
            if g.norm_sq() > self.lipschitz.powi(2) * dn + slack {
                return Err(Error::InvalidParameter(format!("∇Θ is not {}-Lipschitz on the sample", self.lipschitz)));
            }
        }
        Ok(())
    }
}

/// `ü + γu̇ + ∇φ(u) + A(u) (+ ε(t)∇Θ(u)) = 0` on ℝⁿ.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemSpec {
    pub dim: usize,
    pub damping: f64,
    pub potential: PotentialSpec,
    pub operator: MonotoneSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tikhonov: Option<Tikhonov>,
    /// `λγ²`, recorded when `A` has a cocoercivity constant.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub condition_product: Option<f64>,
}

impl SystemSpec {
    pub fn new(dim: usize, damping: f64, potential: PotentialSpec, operator: MonotoneSpec) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("dimension must be at least 1".into()));
        }
        if !(damping > 0.0 && damping.is_finite()) {
            return Err(Error::InvalidParameter(format!("damping γ must be positive, got {damping}")));
        }
        for d in [potential.dim(), operator.dim()].into_iter().flatten() {
            if d != dim {
                return Err(Error::dims(dim, d));
            }
        }
        let condition_product = operator.cocoercivity().map(|l| l * damping * damping);
        Ok(SystemSpec { dim, damping, potential, operator, tikhonov: None, condition_product })
    }

    /// Attaches a Tikhonov term after checking it by sampling.
    pub fn with_tikhonov(mut self, tikhonov: Tikhonov) -> Result<Self> {
        if self.tikhonov.is_some() {
            return Err(Error::InvalidParameter("system already has a Tikhonov term".into()));
        }
        tikhonov.schedule.validate()?;
        if let Some(d) = tikhonov.regularizer.dim() {
            if d != self.dim {
                return Err(Error::dims(self.dim, d));
            }
        }
        tikhonov.verify_regularizer(self.dim, 200, 0)?;
        self.tikhonov = Some(tikhonov);
        Ok(self)
    }

    /// Cocoercivity constant `λ` of `A`.
    pub fn lambda(&self) -> Option<f64> {
        self.operator.cocoercivity()
    }

    /// `λγ² > 1`.
    pub fn condition_holds(&self) -> bool {
        self.condition_product.is_some_and(|p| p > 1.0)
    }

    pub fn epsilon(&self, t: f64) -> f64 {
        self.tikhonov.as_ref().map_or(0.0, |tk| tk.schedule.value(t))
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("system serializes");
        hex::encode(Sha256::digest(&json))
    }

    /// `∇φ(u) + A(u)`.
    pub fn equilibrium_map(&self, u: &Vector) -> Result<Vector> {
        Ok(&self.potential.grad(u)? + &self.operator.apply(u)?)
    }

    /// Precomputes affine parts so repeated evaluations avoid rebuilding them.
    pub fn compile(&self) -> Result<Field<'_>> {
        let potential = self.potential.affine_gradient(self.dim);
        let operator = self.operator.affine_form(self.dim);
        Ok(Field { sys: self, potential, operator })
    }
}

/// The vector field of a [`SystemSpec`] with affine parts pre-assembled.
pub struct Field<'a> {
    sys: &'a SystemSpec,
    potential: Option<(Matrix, Vector)>,
    operator: Option<(Matrix, Vector)>,
}

impl Field<'_> {
    pub fn grad_potential(&self, u: &Vector) -> Result<Vector> {
        match &self.potential {
            Some((m, c)) => Ok(&m.mul_vec(u) + c),
            None => self.sys.potential.grad(u),
        }
    }

    pub fn operator(&self, u: &Vector) -> Result<Vector> {
        match &self.operator {
            Some((m, c)) => Ok(&m.mul_vec(u) + c),
            None => self.sys.operator.apply(u),
        }
    }

    /// `ε(t)∇Θ(u)`, zero without a Tikhonov term.
    pub fn tikhonov(&self, t: f64, u: &Vector) -> Result<Vector> {
        match &self.sys.tikhonov {
            Some(tk) => Ok(tk.regularizer.grad(u)?.scale(tk.schedule.value(t))),
            None => Ok(Vector::zeros(u.dim())),
        }
    }

    /// `ü = −γu̇ − ∇φ(u) − A(u) − ε(t)∇Θ(u)`.
    pub fn acceleration(&self, t: f64, u: &Vector, v: &Vector) -> Result<Vector> {
        let mut force = &self.grad_potential(u)? + &self.operator(u)?;
        if self.sys.tikhonov.is_some() {
            force += &self.tikhonov(t, u)?;
        }
        Ok(-&(&v.scale(self.sys.damping) + &force))
    }

    pub fn eval(&self, s: &PhaseState) -> Result<(Vector, Vector)> {
        s.u.check_dim(self.sys.dim)?;
        s.v.check_dim(self.sys.dim)?;
        Ok((s.v.clone(), self.acceleration(s.t, &s.u, &s.v)?))
    }
}

/// A phase-space sample `(t, u, u̇)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseState {
    pub t: f64,
    pub u: Vector,
    pub v: Vector,
}

impl PhaseState {
    pub fn new(t: f64, u: Vector, v: Vector) -> Result<Self> {
        v.check_dim(u.dim())?;
        if !(t >= 0.0) {
            return Err(Error::InvalidParameter(format!("time must be nonnegative, got {t}")));
        }
        Ok(PhaseState { t, u, v })
    }

    /// `(p, 0)` at time 0.
    pub fn at_rest(u: Vector) -> Self {
        let n = u.dim();
        PhaseState { t: 0.0, u, v: Vector::zeros(n) }
    }

    fn is_sane(&self) -> bool {
        self.u.is_finite() && self.v.is_finite() && self.u.max_abs() <= BLOW_UP && self.v.max_abs() <= BLOW_UP
    }
}

/// `(u̇, −γu̇ − ∇φ(u) − A(u) − ε(t)∇Θ(u))`.
pub fn vector_field(sys: &SystemSpec, s: &PhaseState) -> Result<(Vector, Vector)> {
    sys.compile()?.eval(s)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryMeta {
    pub system_hash: String,
    pub dim: usize,
    pub step: f64,
    pub sample_every: usize,
    pub t_start: f64,
    pub t_end: f64,
    pub samples: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub condition_product: Option<f64>,
}

/// Time-ordered samples with `∫₀^t |u̇|²` at each sample.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<PhaseState>,
    pub running_l2_velocity: Vec<f64>,
    pub diagnostics: Option<Vec<DiagnosticsSample>>,
    pub meta: TrajectoryMeta,
}

impl Trajectory {
    pub fn last(&self) -> &PhaseState {
        self.samples.last().expect("trajectory has at least one sample")
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.t)
    }

    /// Sample nearest to `t` (ties go to the earlier one).
    pub fn nearest(&self, t: f64) -> &PhaseState {
        let i = self.samples.partition_point(|s| s.t < t);
        match (i.checked_sub(1), self.samples.get(i)) {
            (Some(j), Some(s)) if (self.samples[j].t - t).abs() <= (s.t - t).abs() => &self.samples[j],
            (_, Some(s)) => s,
            (Some(j), None) => &self.samples[j],
            (None, None) => unreachable!("trajectory is never empty"),
        }
    }

    /// Running `∫|u̇|²` at the sample nearest to `t`.
    pub fn l2_at(&self, t: f64) -> f64 {
        let s = self.nearest(t);
        let i = self.samples.iter().position(|x| std::ptr::eq(x, s)).expect("sample from self");
        self.running_l2_velocity[i]
    }

    /// Checks strictly increasing times and a nondecreasing integral.
    pub fn validate(&self) -> Result<()> {
        if self.samples.is_empty() || self.samples.len() != self.running_l2_velocity.len() {
            return Err(Error::Format("trajectory sample and integral counts differ".into()));
        }
        for (i, w) in self.samples.windows(2).enumerate() {
            if !(w[1].t > w[0].t) {
                return Err(Error::Format(format!("sample {} does not advance time", i + 1)));
            }
        }
        if self.running_l2_velocity.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Format("running velocity integral decreases".into()));
        }
        if let Some(d) = &self.diagnostics {
            if d.len() != self.samples.len() {
                return Err(Error::Format("diagnostics length differs from samples".into()));
            }
        }
        Ok(())
    }
}

/// Number of steps and the time of step `i`, with the last step landing on `t_end`.
fn step_grid(t0: f64, t_end: f64, step: f64) -> usize {
    let r = (t_end - t0) / step;
    let n = if (r - r.round()).abs() <= 1e-9 * r.max(1.0) { r.round() } else { r.ceil() };
    (n as usize).max(1)
}

/// Classical RK4 at a fixed step. Samples are kept every `sample_every` steps
/// plus the final state; `∫|u̇|²` is accumulated by the trapezoid rule at
/// every step.
pub fn integrate(sys: &SystemSpec, init: &PhaseState, t_end: f64, step: f64, sample_every: usize) -> Result<Trajectory> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidParameter(format!("step must be positive, got {step}")));
    }
    if !(t_end > init.t) || !t_end.is_finite() {
        return Err(Error::InvalidParameter(format!("t_end = {t_end} must exceed the initial time {}", init.t)));
    }
    if sample_every == 0 {
        return Err(Error::InvalidParameter("sample_every must be at least 1".into()));
    }
    init.u.check_dim(sys.dim)?;
    init.v.check_dim(sys.dim)?;
    if !init.is_sane() {
        return Err(Error::InvalidParameter("initial state is not finite".into()));
    }

    let field = sys.compile()?;
    let n = step_grid(init.t, t_end, step);
    let time = |i: usize| if i == n { t_end } else { init.t + i as f64 * step };

    let mut samples = vec![init.clone()];
    let mut l2 = vec![0.0];
    let mut integral = 0.0;
    let mut state = init.clone();

    for i in 0..n {
        let t = time(i);
        let h = time(i + 1) - t;
        let (u, v) = (&state.u, &state.v);

        let k1u = v.clone();
        let k1v = field.acceleration(t, u, v)?;
        let u2 = u.axpy(0.5 * h, &k1u);
        let v2 = v.axpy(0.5 * h, &k1v);
        let k2v = field.acceleration(t + 0.5 * h, &u2, &v2)?;
        let k2u = v2;
        let u3 = u.axpy(0.5 * h, &k2u);
        let v3 = v.axpy(0.5 * h, &k2v);
        let k3v = field.acceleration(t + 0.5 * h, &u3, &v3)?;
        let k3u = v3;
        let u4 = u.axpy(h, &k3u);
        let v4 = v.axpy(h, &k3v);
        let k4v = field.acceleration(t + h, &u4, &v4)?;
        let k4u = v4;

        let du = &(&k1u + &k2u.scale(2.0)) + &(&k3u.scale(2.0) + &k4u);
        let dv = &(&k1v + &k2v.scale(2.0)) + &(&k3v.scale(2.0) + &k4v);
        let next = PhaseState { t: time(i + 1), u: u.axpy(h / 6.0, &du), v: v.axpy(h / 6.0, &dv) };
        if !next.is_sane() {
            return Err(Error::BlowUp { last_finite: Box::new(state) });
        }
        integral += 0.5 * h * (state.v.norm_sq() + next.v.norm_sq());
        state = next;

        if (i + 1) % sample_every == 0 || i + 1 == n {
            samples.push(state.clone());
            l2.push(integral);
        }
    }

    let meta = TrajectoryMeta {
        system_hash: sys.hash(),
        dim: sys.dim,
        step,
        sample_every,
        t_start: init.t,
        t_end,
        samples: samples.len(),
        condition_product: sys.condition_product,
    };
    Ok(Trajectory { samples, running_l2_velocity: l2, diagnostics: None, meta })
}

/// The system in rescaled time `s = t/k`: damping `γk`, potential `k²φ`,
/// operator `k²A` with cocoercivity `λ/k²`. The recorded `λγ²` is carried
/// over unchanged since `(λ/k²)(γk)² = λγ²`.
pub fn time_rescale(sys: &SystemSpec, k: f64) -> Result<SystemSpec> {
    if sys.tikhonov.is_some() {
        return Err(Error::Unsupported("time rescaling of a system with a Tikhonov term".into()));
    }
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::InvalidParameter(format!("rescale factor must be positive, got {k}")));
    }
    if k == 1.0 {
        return Ok(sys.clone());
    }
    let k2 = k * k;
    let potential = match &sys.potential {
        PotentialSpec::Zero => PotentialSpec::Zero,
        p => PotentialSpec::scaled(k2, p.clone())?,
    };
    let mut operator = match &sys.operator.kind {
        crate::operators::MonotoneKind::Zero => sys.operator.clone(),
        _ => MonotoneSpec::scaled(k2, sys.operator.clone())?,
    };
    operator.cocoercivity = sys.lambda().map(|l| l / k2);
    operator.lipschitz = sys.operator.lipschitz.map(|l| l * k2);
    Ok(SystemSpec {
        dim: sys.dim,
        damping: sys.damping * k,
        potential,
        operator,
        tikhonov: None,
        condition_product: sys.condition_product,
    })
}
