//! Packaged problems built on the damped dynamic: constrained minimization
//! through the projection residual, Tikhonov viscosity selection, and
//! two-player games with a continuous and a discrete best-response scheme.
//!
//! [`run_scenario`] drives the built-in catalog end to end.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::diagnostics::{
    attach_diagnostics, convergence_report, find_equilibrium, vi_residual, AnchorPoint, ConvergenceReport, Tolerances,
    DEFAULT_EQUILIBRIUM_TOL,
};
use crate::dynamics::{
    integrate, time_rescale, EpsilonSchedule, PhaseState, SystemSpec, Tikhonov, Trajectory, DEFAULT_HORIZON,
    DEFAULT_SAMPLE_EVERY, DEFAULT_STEP,
};
use crate::error::{Error, Result};
use crate::linalg::{solve_linear, Matrix, Vector};
use crate::operators::{
    epi_hypo_regularize, rotation, saddle_operator, ContractionSpec, ConvexSetSpec, MonotoneSpec, PotentialSpec,
    SaddleSpec,
};
use crate::sharpness::{classify, RotationCase, Stability};

/// Minimize `g` over `C` via the zeros of `v ↦ v − P_C(v − μ∇g(v))`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstrainedProblem {
    pub g: PotentialSpec,
    pub set: ConvexSetSpec,
    pub mu: f64,
    /// Lipschitz constant of `∇g`.
    pub lipschitz: f64,
}

impl ConstrainedProblem {
    pub fn new(g: PotentialSpec, set: ConvexSetSpec, mu: f64) -> Result<Self> {
        let lipschitz = g
            .lipschitz()
            .ok_or_else(|| Error::InvalidParameter("objective gradient has no global Lipschitz constant".into()))?;
        if !(mu > 0.0 && (lipschitz == 0.0 || mu < 2.0 / lipschitz)) {
            return Err(Error::InvalidParameter(format!(
                "step μ = {mu} must lie in (0, 2/L) = (0, {}) for the residual to be ½-cocoercive",
                2.0 / lipschitz
            )));
        }
        Ok(ConstrainedProblem { g, set, mu, lipschitz })
    }

    pub fn dim(&self) -> Option<usize> {
        self.g.dim().or(self.set.dim())
    }

    /// `|v − P_C(v − μ∇g(v))|`.
    pub fn fixed_point_residual(&self, v: &Vector) -> Result<f64> {
        let moved = v.axpy(-self.mu, &self.g.grad(v)?);
        Ok((v - &self.set.project(&moved)?).norm())
    }
}

/// `ü + γu̇ + u − P_C(u − μ∇g(u)) = 0`, claiming `λ = ½`; needs `γ > √2`.
pub fn build_gradient_projection_system(p: &ConstrainedProblem, gamma: f64) -> Result<SystemSpec> {
    if !(gamma > 2f64.sqrt()) {
        return Err(Error::InvalidParameter(format!(
            "γ = {gamma} must exceed √2 so that λγ² > 1 with λ = ½"
        )));
    }
    let dim = p
        .dim()
        .ok_or_else(|| Error::InvalidParameter("cannot infer the dimension of the constrained problem".into()))?;
    let a = MonotoneSpec::projection_residual(p.g.clone(), p.set.clone(), p.mu)?.claim(0.5);
    SystemSpec::new(dim, gamma, PotentialSpec::Zero, a)
}

/// Attaches `ε(t)∇Θ` with `Θ = ½|x − c|²` (`η = δ = 1`).
pub fn build_tikhonov_system(base: &SystemSpec, center: Vector, schedule: EpsilonSchedule) -> Result<SystemSpec> {
    center.check_dim(base.dim)?;
    base.clone().with_tikhonov(Tikhonov {
        regularizer: PotentialSpec::half_sq_distance(center),
        strong_monotonicity: 1.0,
        lipschitz: 1.0,
        schedule,
    })
}

/// Two players on `X₁ × X₂` with payoffs `fᵢ`, coupling
/// `Φ(x) = ½|L₁x₁ − L₂x₂|²` and a convex-concave `L`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameSpec {
    pub f1: PotentialSpec,
    pub f2: PotentialSpec,
    pub l1: Matrix,
    pub l2: Matrix,
    pub saddle: SaddleSpec,
    pub lambda_saddle: f64,
}

impl GameSpec {
    pub fn new(
        f1: PotentialSpec,
        f2: PotentialSpec,
        l1: Matrix,
        l2: Matrix,
        saddle: SaddleSpec,
        lambda_saddle: f64,
    ) -> Result<Self> {
        let (n1, n2) = saddle.dims();
        if l1.rows() != l2.rows() {
            return Err(Error::InvalidParameter(format!(
                "coupling maps disagree on their codomain: {} vs {}",
                l1.rows(),
                l2.rows()
            )));
        }
        if l1.cols() != n1 {
            return Err(Error::dims(n1, l1.cols()));
        }
        if l2.cols() != n2 {
            return Err(Error::dims(n2, l2.cols()));
        }
        for (f, n) in [(&f1, n1), (&f2, n2)] {
            if let Some(d) = f.dim() {
                if d != n {
                    return Err(Error::dims(n, d));
                }
            }
        }
        if !(lambda_saddle > 0.0 && lambda_saddle.is_finite()) {
            return Err(Error::InvalidParameter(format!("λ_saddle must be positive, got {lambda_saddle}")));
        }
        Ok(GameSpec { f1, f2, l1, l2, saddle, lambda_saddle })
    }

    pub fn dims(&self) -> (usize, usize) {
        self.saddle.dims()
    }

    /// `φ(x) = f₁(x₁) + f₂(x₂) + ½|L₁x₁ − L₂x₂|²`.
    pub fn potential(&self) -> Result<PotentialSpec> {
        let (n1, n2) = self.dims();
        let k = Matrix::hstack(&self.l1, &self.l2.scale(-1.0))?;
        let coupling = PotentialSpec::quadratic(k.transpose().matmul(&k)?, Vector::zeros(n1 + n2))?;
        Ok(PotentialSpec::Sum {
            terms: vec![PotentialSpec::Block { sizes: vec![n1, n2], parts: vec![self.f1.clone(), self.f2.clone()] }, coupling],
        })
    }

    fn split(&self, x: &Vector) -> Result<(Vector, Vector)> {
        let (n1, n2) = self.dims();
        x.check_dim(n1 + n2)?;
        Ok((x.block(0, n1), x.block(n1, n2)))
    }
}

/// Product-space system with `A` the epi-hypo regularization of `L`.
pub fn build_game_system(game: &GameSpec, gamma: f64) -> Result<SystemSpec> {
    let theta = game.lambda_saddle * gamma * gamma;
    if !(theta > 1.0) {
        return Err(Error::InvalidParameter(format!(
            "λ_saddle·γ² = {theta} must exceed 1 (λ_saddle = {}, γ = {gamma})",
            game.lambda_saddle
        )));
    }
    let (n1, n2) = game.dims();
    SystemSpec::new(n1 + n2, gamma, game.potential()?, epi_hypo_regularize(&game.saddle, game.lambda_saddle)?)
}

/// Norm of the stacked stationarity system with the saddle part taken
/// through the regularized operator the dynamics uses.
pub fn nash_residual(game: &GameSpec, x: &Vector) -> Result<f64> {
    game.split(x)?;
    let a = epi_hypo_regularize(&game.saddle, game.lambda_saddle)?;
    Ok((&game.potential()?.grad(x)? + &a.apply(x)?).norm())
}

/// The same residual with the unregularized saddle operator.
pub fn unregularized_nash_residual(game: &GameSpec, x: &Vector) -> Result<f64> {
    game.split(x)?;
    Ok((&game.potential()?.grad(x)? + &saddle_operator(&game.saddle).apply(x)?).norm())
}

/// Constant proximal steps `α`, `ν` and extrapolation `β`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BestResponseParams {
    pub alpha: f64,
    pub nu: f64,
    pub beta: f64,
    pub iterations: usize,
}

impl BestResponseParams {
    pub fn new(alpha: f64, nu: f64, beta: f64, iterations: usize) -> Result<Self> {
        if !(alpha > 0.0 && nu > 0.0 && alpha.is_finite() && nu.is_finite()) {
            return Err(Error::InvalidParameter(format!("steps must be positive, got α = {alpha}, ν = {nu}")));
        }
        if !(0.0..1.0).contains(&beta) {
            return Err(Error::InvalidParameter(format!("β = {beta} must lie in [0, 1)")));
        }
        Ok(BestResponseParams { alpha, nu, beta, iterations })
    }
}

fn affine_payoff(f: &PotentialSpec, n: usize, who: &str) -> Result<(Matrix, Vector)> {
    f.affine_gradient(n)
        .ok_or_else(|| Error::Unsupported(format!("best response needs a quadratic payoff for {who}")))
}

/// Inertial alternating best response. Starting from `(x_prev, x_cur)` in
/// the product space, each step sets anchors `xᵢ + β(xᵢ − xᵢ_prev)` and
///
/// ```text
/// x₁ ← argmin_ξ f₁(ξ) + Φ(ξ, x₂) + L(ξ, x₂) + |ξ − anchor₁|²/(2α)
/// x₂ ← argmin_η f₂(η) + Φ(x₁, η) − L(x₁, η) + |η − anchor₂|²/(2ν)
/// ```
///
/// with the fresh `x₁` in the second update. Returns `x_cur` followed by
/// every iterate.
pub fn best_response_discrete(
    game: &GameSpec,
    params: &BestResponseParams,
    x_prev: &Vector,
    x_cur: &Vector,
) -> Result<Vec<Vector>> {
    let params = BestResponseParams::new(params.alpha, params.nu, params.beta, params.iterations)?;
    let (n1, n2) = game.dims();
    let (mut p1, mut p2) = game.split(x_prev)?;
    let (mut c1, mut c2) = game.split(x_cur)?;
    let (qf1, gf1) = affine_payoff(&game.f1, n1, "player 1")?;
    let (qf2, gf2) = affine_payoff(&game.f2, n2, "player 2")?;
    let s = &game.saddle;
    let (l1t, l2t) = (game.l1.transpose(), game.l2.transpose());
    let (r, rt) = (&s.coupling, s.coupling.transpose());

    let h1 = qf1
        .add(&l1t.matmul(&game.l1)?)?
        .add(&s.q1)?
        .add(&Matrix::identity(n1).scale(1.0 / params.alpha))?;
    let h2 = qf2
        .add(&l2t.matmul(&game.l2)?)?
        .add(&s.q2)?
        .add(&Matrix::identity(n2).scale(1.0 / params.nu))?;
    let l1t_l2 = l1t.matmul(&game.l2)?;
    let l2t_l1 = l2t.matmul(&game.l1)?;

    let mut out = Vec::with_capacity(params.iterations + 1);
    out.push(c1.concat(&c2));
    for _ in 0..params.iterations {
        let anchor1 = c1.axpy(params.beta, &(&c1 - &p1));
        let anchor2 = c2.axpy(params.beta, &(&c2 - &p2));

        let rhs1 = &(&(&(-&gf1) + &l1t_l2.mul_vec(&c2)) - &rt.mul_vec(&c2)) - &s.lin1;
        let n1_next = solve_linear(&h1, &rhs1.axpy(1.0 / params.alpha, &anchor1), 1e-12)?;

        let rhs2 = &(&(&(-&gf2) + &l2t_l1.mul_vec(&n1_next)) + &r.mul_vec(&n1_next)) + &s.lin2;
        let n2_next = solve_linear(&h2, &rhs2.axpy(1.0 / params.nu, &anchor2), 1e-12)?;

        p1 = std::mem::replace(&mut c1, n1_next);
        p2 = std::mem::replace(&mut c2, n2_next);
        let x = c1.concat(&c2);
        if !x.is_finite() {
            return Err(Error::Inconsistent("best-response iterates became non-finite".into()));
        }
        out.push(x);
    }
    Ok(out)
}

/// `f₁ = ½x₁²`, `f₂ = ½x₂²`, `L₁ = L₂ = 1`, `L = β x₁x₂`.
pub fn scalar_game(coupling: f64, lambda_saddle: f64) -> Result<GameSpec> {
    let one = Matrix::identity(1);
    GameSpec::new(
        PotentialSpec::half_sq_distance(Vector::zeros(1)),
        PotentialSpec::half_sq_distance(Vector::zeros(1)),
        one.clone(),
        one,
        SaddleSpec::bilinear(Matrix::from_rows(&[&[coupling]])?)?,
        lambda_saddle,
    )
}

/// Scenario parameter overrides; every field is optional and each scenario
/// accepts a subset.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    pub gamma: Option<f64>,
    pub lambda: Option<f64>,
    /// `λγ²`; sets `λ = θ/γ²`.
    pub theta: Option<f64>,
    pub mu: Option<f64>,
    pub epsilon: Option<EpsilonSchedule>,
    pub horizon: Option<f64>,
    pub step: Option<f64>,
    pub sample_every: Option<usize>,
    pub seed: Option<u64>,
    pub u0: Option<Vec<f64>>,
    pub v0: Option<Vec<f64>>,
    /// Time rescale factor.
    pub k: Option<f64>,
    pub alpha: Option<f64>,
    pub nu: Option<f64>,
    pub beta: Option<f64>,
    pub iterations: Option<usize>,
}

impl Overrides {
    fn set_keys(&self) -> Vec<&'static str> {
        let mut keys = Vec::new();
        let mut add = |set: bool, key| {
            if set {
                keys.push(key)
            }
        };
        add(self.gamma.is_some(), "gamma");
        add(self.lambda.is_some(), "lambda");
        add(self.theta.is_some(), "theta");
        add(self.mu.is_some(), "mu");
        add(self.epsilon.is_some(), "epsilon");
        add(self.k.is_some(), "k");
        add(self.alpha.is_some(), "alpha");
        add(self.nu.is_some(), "nu");
        add(self.beta.is_some(), "beta");
        add(self.iterations.is_some(), "iterations");
        keys
    }
}

const COMMON_KEYS: [&str; 6] = ["horizon", "step", "sample_every", "seed", "u0", "v0"];

pub struct ScenarioInfo {
    pub name: &'static str,
    pub description: &'static str,
    /// Scenario-specific override keys, on top of the integrator and
    /// initial-data keys every scenario takes.
    pub keys: &'static [&'static str],
}

pub const SCENARIOS: [ScenarioInfo; 9] = [
    ScenarioInfo {
        name: "heavy-ball",
        description: "heavy ball on ½⟨Q(x − c), x − c⟩, Q = diag(1, 2), A = 0",
        keys: &["gamma", "lambda"],
    },
    ScenarioInfo {
        name: "contraction-fixed-point",
        description: "A = I − T for a linear nonexpansive T on ℝ³ with a line of fixed points",
        keys: &["gamma"],
    },
    ScenarioInfo {
        name: "yosida-rotation",
        description: "A = Yosida approximation of the π/2 rotation",
        keys: &["gamma", "lambda", "theta"],
    },
    ScenarioInfo {
        name: "gradient-projection",
        description: "minimize ½|x − (2, 0)|² over the unit ball through the projection residual",
        keys: &["gamma", "mu"],
    },
    ScenarioInfo {
        name: "tikhonov-min-norm",
        description: "φ = ½x₁² on ℝ², A = 0, Θ = ½|x|²: selection of the minimal-norm equilibrium",
        keys: &["gamma", "epsilon"],
    },
    ScenarioInfo {
        name: "game-continuous",
        description: "scalar two-player quadratic game, regularized bilinear coupling",
        keys: &["gamma", "lambda"],
    },
    ScenarioInfo {
        name: "game-discrete",
        description: "inertial best response on the scalar game, compared with the continuous limit",
        keys: &["gamma", "lambda", "alpha", "nu", "beta", "iterations"],
    },
    ScenarioInfo {
        name: "rescale-check",
        description: "time rescaling s = t/k of the Yosida-rotation system against the original",
        keys: &["gamma", "lambda", "k"],
    },
    ScenarioInfo {
        name: "sharpness-sweep",
        description: "closed-form stability classification at one (γ, λ), checked against a simulation",
        keys: &["gamma", "lambda", "theta"],
    },
];

pub fn scenario_info(name: &str) -> Result<&'static ScenarioInfo> {
    SCENARIOS.iter().find(|s| s.name == name).ok_or_else(|| {
        let known: Vec<_> = SCENARIOS.iter().map(|s| s.name).collect();
        Error::InvalidParameter(format!("unknown scenario `{name}` (known: {})", known.join(", ")))
    })
}

/// Scenario outcome in JSON-friendly form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSummary {
    pub scenario: String,
    pub parameters: BTreeMap<String, f64>,
    pub limit: Vector,
    pub residuals: BTreeMap<String, f64>,
    pub flags: BTreeMap<String, bool>,
    pub pass: bool,
}

#[derive(Clone, Debug)]
pub struct ScenarioRun {
    pub system: SystemSpec,
    /// With diagnostics attached.
    pub trajectory: Trajectory,
    pub anchor: AnchorPoint,
    pub report: ConvergenceReport,
    pub summary: ScenarioSummary,
}

struct Setup {
    system: SystemSpec,
    u0: Vector,
    v0: Vector,
    horizon: f64,
    step: f64,
    sample_every: usize,
    seed: u64,
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::InvalidParameter(format!("override `{name}` must be positive, got {v}")))
    }
}

fn initial(o: &Overrides, dim: usize, u0: Vector) -> Result<(Vector, Vector)> {
    let pick = |name: &str, given: &Option<Vec<f64>>, default: Vector| -> Result<Vector> {
        match given {
            None => Ok(default),
            Some(v) if v.len() == dim => Ok(Vector::new(v.clone())),
            Some(v) => Err(Error::InvalidParameter(format!(
                "override `{name}` has {} entries, scenario dimension is {dim}",
                v.len()
            ))),
        }
    };
    Ok((pick("u0", &o.u0, u0)?, pick("v0", &o.v0, Vector::zeros(dim))?))
}

fn setup(system: SystemSpec, o: &Overrides, u0: Vector, horizon: f64, step: f64, sample_every: usize) -> Result<Setup> {
    let (u0, v0) = initial(o, system.dim, u0)?;
    let sample_every = o.sample_every.unwrap_or(sample_every);
    if sample_every == 0 {
        return Err(Error::InvalidParameter("override `sample_every` must be at least 1".into()));
    }
    Ok(Setup {
        system,
        u0,
        v0,
        horizon: positive("horizon", o.horizon.unwrap_or(horizon))?,
        step: positive("step", o.step.unwrap_or(step))?,
        sample_every,
        seed: o.seed.unwrap_or(42),
    })
}

fn rotation_lambda(o: &Overrides, gamma: f64, default: f64) -> Result<f64> {
    match (o.lambda, o.theta) {
        (Some(_), Some(_)) => Err(Error::InvalidParameter("set `lambda` or `theta`, not both".into())),
        (Some(l), None) => positive("lambda", l),
        (None, Some(th)) => Ok(positive("theta", th)? / (gamma * gamma)),
        (None, None) => Ok(default),
    }
}

fn yosida_rotation_system(gamma: f64, lambda: f64) -> Result<SystemSpec> {
    let a = MonotoneSpec::yosida_of(MonotoneSpec::linear(rotation())?, lambda)?;
    SystemSpec::new(2, gamma, PotentialSpec::Zero, a)
}

fn classification_into(
    residuals: &mut BTreeMap<String, f64>,
    flags: &mut BTreeMap<String, bool>,
    case: &RotationCase,
) -> Result<bool> {
    let v = classify(case)?;
    residuals.insert("a1".into(), v.roots.a1);
    residuals.insert("a2".into(), v.roots.a2);
    residuals.insert("b".into(), v.roots.b);
    flags.insert("nonconverging".into(), v.verdict == Stability::NonConverging);
    flags.insert("cir1_holds".into(), v.cir1_holds);
    flags.insert("theta_form_holds".into(), v.theta_form_holds);
    flags.insert("theta_claim_nonconverging".into(), v.theta_claim_nonconverging);
    flags.insert("claim_disagrees".into(), v.claim_disagrees);
    Ok(v.verdict == Stability::Converging)
}

fn scalar_game_from(o: &Overrides) -> Result<(GameSpec, f64)> {
    let gamma = positive("gamma", o.gamma.unwrap_or(2.0))?;
    let game = scalar_game(0.5, positive("lambda", o.lambda.unwrap_or(1.0))?)?;
    Ok((game, gamma))
}

fn run(setup: Setup, anchor: Option<AnchorPoint>) -> Result<(Trajectory, AnchorPoint, ConvergenceReport)> {
    let sys = &setup.system;
    let anchor = match anchor {
        Some(a) => a,
        None => find_equilibrium(sys, &setup.u0, DEFAULT_EQUILIBRIUM_TOL)?,
    };
    let init = PhaseState::new(0.0, setup.u0.clone(), setup.v0.clone())?;
    let traj = integrate(sys, &init, setup.horizon, setup.step, setup.sample_every)?;
    let traj = attach_diagnostics(&traj, sys, &anchor)?;
    let report = convergence_report(&traj, sys, &anchor, &Tolerances::default())?;
    Ok((traj, anchor, report))
}

/// Build, integrate, diagnose and summarize one catalog scenario.
pub fn run_scenario(name: &str, o: &Overrides) -> Result<ScenarioRun> {
    let info = scenario_info(name)?;
    if let Some(bad) = o.set_keys().into_iter().find(|k| !info.keys.contains(k) && !COMMON_KEYS.contains(k)) {
        return Err(Error::InvalidParameter(format!("scenario `{name}` does not take override `{bad}`")));
    }
    let mut params = BTreeMap::new();
    let mut residuals = BTreeMap::new();
    let mut flags = BTreeMap::new();
    let mut anchor = None;
    let mut extra_pass = true;

    let s = match name {
        "heavy-ball" => {
            let gamma = positive("gamma", o.gamma.unwrap_or(2.0))?;
            let lambda = positive("lambda", o.lambda.unwrap_or(1.0))?;
            let phi = PotentialSpec::quadratic(Matrix::diagonal(&[1.0, 2.0]), Vector::from([1.0, -1.0]))?;
            let sys = SystemSpec::new(2, gamma, phi, MonotoneSpec::zero().claim(lambda))?;
            params.insert("lambda".into(), lambda);
            setup(sys, o, Vector::from([-2.0, 3.0]), DEFAULT_HORIZON, DEFAULT_STEP, DEFAULT_SAMPLE_EVERY)?
        }
        "contraction-fixed-point" => {
            let gamma = positive("gamma", o.gamma.unwrap_or(2.0))?;
            let m = Matrix::from_rows(&[&[1.0, 0.0, 0.0], &[0.0, 0.0, -0.5], &[0.0, 0.5, 0.0]])?;
            let sys = SystemSpec::new(3, gamma, PotentialSpec::Zero, MonotoneSpec::contraction_residual(ContractionSpec::linear(m)?))?;
            setup(sys, o, Vector::from([1.0, 1.0, 1.0]), DEFAULT_HORIZON, DEFAULT_STEP, DEFAULT_SAMPLE_EVERY)?
        }
        "yosida-rotation" | "sharpness-sweep" => {
            let gamma = positive("gamma", o.gamma.unwrap_or(if name == "yosida-rotation" { 1.0 } else { 2.0 }))?;
            let lambda = rotation_lambda(o, gamma, if name == "yosida-rotation" { 3.0 } else { 1.0 })?;
            params.insert("lambda".into(), lambda);
            let sys = yosida_rotation_system(gamma, lambda)?;
            anchor = Some(AnchorPoint::at(&sys, Vector::zeros(2))?);
            setup(sys, o, Vector::from([1.0, 0.0]), DEFAULT_HORIZON, DEFAULT_STEP, DEFAULT_SAMPLE_EVERY)?
        }
        "gradient-projection" => {
            let gamma = o.gamma.unwrap_or(1.5);
            let mu = o.mu.unwrap_or(1.0);
            let p = ConstrainedProblem::new(
                PotentialSpec::half_sq_distance(Vector::from([2.0, 0.0])),
                ConvexSetSpec::ball(Vector::zeros(2), 1.0)?,
                mu,
            )?;
            params.insert("mu".into(), mu);
            let sys = build_gradient_projection_system(&p, gamma)?;
            setup(sys, o, Vector::from([-0.5, 0.5]), DEFAULT_HORIZON, DEFAULT_STEP, DEFAULT_SAMPLE_EVERY)?
        }
        "tikhonov-min-norm" => {
            let gamma = positive("gamma", o.gamma.unwrap_or(2.0))?;
            let schedule = o.epsilon.unwrap_or(EpsilonSchedule::Power { c: 1.0, p: 1.0 });
            let phi = PotentialSpec::quadratic(Matrix::diagonal(&[1.0, 0.0]), Vector::zeros(2))?;
            let base = SystemSpec::new(2, gamma, phi, MonotoneSpec::zero().claim(1.0))?;
            let sys = build_tikhonov_system(&base, Vector::zeros(2), schedule)?;
            flags.insert("selection_claimed".into(), schedule.slow_decay());
            anchor = Some(AnchorPoint::at(&sys, Vector::zeros(2))?);
            setup(sys, o, Vector::from([1.0, 1.0]), 200.0, DEFAULT_STEP, DEFAULT_SAMPLE_EVERY)?
        }
        "game-continuous" | "game-discrete" => {
            let (game, gamma) = scalar_game_from(o)?;
            params.insert("lambda".into(), game.lambda_saddle);
            let sys = build_game_system(&game, gamma)?;
            setup(sys, o, Vector::from([1.0, -0.5]), DEFAULT_HORIZON, DEFAULT_STEP, DEFAULT_SAMPLE_EVERY)?
        }
        "rescale-check" => {
            let gamma = positive("gamma", o.gamma.unwrap_or(1.0))?;
            let lambda = positive("lambda", o.lambda.unwrap_or(3.0))?;
            params.insert("lambda".into(), lambda);
            let sys = yosida_rotation_system(gamma, lambda)?;
            anchor = Some(AnchorPoint::at(&sys, Vector::zeros(2))?);
            setup(sys, o, Vector::from([1.0, 0.0]), 10.0, 1e-4, DEFAULT_SAMPLE_EVERY)?
        }
        _ => unreachable!("scenario_info accepted {name}"),
    };
    params.insert("gamma".into(), s.system.damping);
    params.insert("horizon".into(), s.horizon);
    params.insert("step".into(), s.step);
    if let Some(p) = s.system.condition_product {
        params.insert("condition_product".into(), p);
    }
    if !s.system.operator.is_zero() {
        residuals.insert(
            "cocoercivity_estimate".into(),
            s.system.operator.cocoercivity_estimate(s.system.dim, 200, 2.0, s.seed)?,
        );
    }

    let (system, trajectory, anchor, report) = match name {
        "rescale-check" => {
            let k = o.k.unwrap_or(2.0);
            if !(k >= 1.0 && k.fract() == 0.0) {
                return Err(Error::InvalidParameter(format!("override `k` must be a positive integer, got {k}")));
            }
            params.insert("k".into(), k);
            let original = s.system.clone();
            let init = PhaseState::new(0.0, s.u0.clone(), s.v0.clone())?;
            let long = integrate(&original, &init, s.horizon, s.step, s.sample_every * k as usize)?;
            let rescaled = time_rescale(&original, k)?;
            let setup_r = Setup {
                system: rescaled.clone(),
                u0: s.u0.clone(),
                v0: s.v0.scale(k),
                horizon: s.horizon / k,
                step: s.step,
                sample_every: s.sample_every,
                seed: s.seed,
            };
            let anchor = anchor.expect("origin anchor");
            let (traj, anchor, report) = run(setup_r, Some(AnchorPoint::at(&rescaled, anchor.p)?))?;
            let sup = traj
                .samples
                .iter()
                .zip(&long.samples)
                .map(|(a, b)| (&a.u - &b.u).max_abs())
                .fold(0.0, f64::max);
            residuals.insert("rescale_sup_error".into(), sup);
            let same = original.condition_product.map(f64::to_bits) == rescaled.condition_product.map(f64::to_bits);
            flags.insert("condition_product_bit_identical".into(), same);
            extra_pass = same;
            (rescaled, traj, anchor, report)
        }
        _ => {
            let system = s.system.clone();
            let (traj, anchor, report) = run(s, anchor)?;
            (system, traj, anchor, report)
        }
    };
    let limit = trajectory.last().u.clone();
    residuals.insert("equilibrium_residual".into(), report.limit_residual);
    residuals.insert("final_velocity".into(), report.final_velocity_norm);

    match name {
        "contraction-fixed-point" => {
            let m = Matrix::from_rows(&[&[1.0, 0.0, 0.0], &[0.0, 0.0, -0.5], &[0.0, 0.5, 0.0]])?;
            residuals.insert("fixed_point_residual".into(), (&limit - &m.mul_vec(&limit)).norm());
        }
        "gradient-projection" => {
            let p = ConstrainedProblem::new(
                PotentialSpec::half_sq_distance(Vector::from([2.0, 0.0])),
                ConvexSetSpec::ball(Vector::zeros(2), 1.0)?,
                params["mu"],
            )?;
            residuals.insert("fixed_point_residual".into(), p.fixed_point_residual(&limit)?);
        }
        "tikhonov-min-norm" => {
            let probes: Vec<Vector> = [-1.0, -0.5, 0.0, 0.5, 1.0].iter().map(|y| Vector::from([0.0, *y])).collect();
            let theta = PotentialSpec::half_sq_distance(Vector::zeros(2));
            residuals.insert("distance_to_min_norm".into(), limit.norm());
            residuals.insert("vi_residual".into(), vi_residual(&theta, &probes, &limit)?);
        }
        "game-continuous" | "game-discrete" => {
            let (game, _) = scalar_game_from(o)?;
            residuals.insert("nash_residual".into(), nash_residual(&game, &limit)?);
            residuals.insert("unregularized_nash_residual".into(), unregularized_nash_residual(&game, &limit)?);
            if name == "game-discrete" {
                let bp = BestResponseParams::new(
                    o.alpha.unwrap_or(0.5),
                    o.nu.unwrap_or(0.5),
                    o.beta.unwrap_or(0.2),
                    o.iterations.unwrap_or(200),
                )?;
                params.insert("alpha".into(), bp.alpha);
                params.insert("nu".into(), bp.nu);
                params.insert("beta".into(), bp.beta);
                params.insert("iterations".into(), bp.iterations as f64);
                let u0 = &trajectory.samples[0].u;
                let iterates = best_response_discrete(&game, &bp, u0, u0)?;
                let last = iterates.last().expect("initial iterate");
                residuals.insert("discrete_nash_residual".into(), nash_residual(&game, last)?);
                residuals.insert("discrete_continuous_gap".into(), (last - &limit).norm());
                residuals.insert("discrete_limit_norm".into(), last.norm());
            }
        }
        "yosida-rotation" | "sharpness-sweep" => {
            let case = RotationCase::new(params["gamma"], params["lambda"])?;
            let converging = classification_into(&mut residuals, &mut flags, &case)?;
            if name == "sharpness-sweep" {
                let agrees = converging == report.verdict.pass;
                flags.insert("simulation_agrees".into(), agrees);
            }
        }
        _ => {}
    }

    let pass = report.verdict.pass && extra_pass;
    let summary = ScenarioSummary { scenario: name.to_string(), parameters: params, limit, residuals, flags, pass };
    Ok(ScenarioRun { system, trajectory, anchor, report, summary })
}

#[cfg(test)]
mod tests;
