//! Monotone operators: gradients of convex potentials, cocoercive maps,
//! contraction residuals `I − T`, resolvents and Yosida approximations,
//! projections and convex-concave saddle operators.
//!
//! Every operator here is single-valued and continuous on ℝⁿ, so monotonicity
//! already gives maximality; no separate maximality check exists.
//!
//! Cocoercivity is tracked in two ways: each [`MonotoneKind`] derives the
//! constant it is known to satisfy (`1/L` for gradients with `L`-Lipschitz
//! gradient, `½` for `I − T` with `T` nonexpansive, `λ` for a Yosida
//! approximation of index `λ`), and a [`MonotoneSpec`] may carry an explicit
//! claim that overrides the derived one. [`MonotoneSpec::cocoercivity_estimate`]
//! is an empirical witness on sampled pairs, never a certificate.

mod potential;
mod saddle;
mod sets;

pub use potential::PotentialSpec;
pub use saddle::SaddleSpec;
pub use sets::ConvexSetSpec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{solve_linear, Matrix, Vector};
use crate::sampling;

/// Tolerance used when a Yosida approximation is evaluated inside another
/// computation (relative to `1 + |v|`).
pub const INNER_TOL: f64 = 1e-13;

/// Iteration cap for iterative resolvents.
pub const MAX_RESOLVENT_ITERATIONS: usize = 10_000;

/// Pairs closer than this in operator value are skipped by the sampled
/// estimators.
pub const DEGENERATE_PAIR: f64 = 1e-12;

/// A nonexpansive map `T`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ContractionSpec {
    /// `T v = M v` with `‖M‖₂ ≤ 1`.
    Linear { m: Matrix },
    /// `T v = P_C(v − μ∇g(v))`, nonexpansive for `0 ≤ μ ≤ 2/L`.
    ProjectedGradient { objective: PotentialSpec, set: ConvexSetSpec, step: f64 },
}

impl ContractionSpec {
    pub fn linear(m: Matrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::dims(m.rows(), m.cols()));
        }
        let norm = m.operator_norm();
        if norm > 1.0 + 1e-12 {
            return Err(Error::InvalidParameter(format!("linear map has operator norm {norm} > 1")));
        }
        Ok(ContractionSpec::Linear { m })
    }

    pub fn projected_gradient(objective: PotentialSpec, set: ConvexSetSpec, step: f64) -> Result<Self> {
        check_projection_step(&objective, step)?;
        Ok(ContractionSpec::ProjectedGradient { objective, set, step })
    }

    pub fn apply(&self, v: &Vector) -> Result<Vector> {
        match self {
            ContractionSpec::Linear { m } => m.apply(v),
            ContractionSpec::ProjectedGradient { objective, set, step } => {
                set.project(&v.axpy(-step, &objective.grad(v)?))
            }
        }
    }

    /// Lipschitz bound of `T`, in `[0, 1]`.
    pub fn lipschitz_bound(&self) -> f64 {
        match self {
            ContractionSpec::Linear { m } => m.operator_norm().min(1.0),
            ContractionSpec::ProjectedGradient { .. } => 1.0,
        }
    }

    fn dim(&self) -> Option<usize> {
        match self {
            ContractionSpec::Linear { m } => Some(m.cols()),
            ContractionSpec::ProjectedGradient { objective, set, .. } => objective.dim().or(set.dim()),
        }
    }
}

fn check_projection_step(objective: &PotentialSpec, step: f64) -> Result<()> {
    let lip = objective.lipschitz().ok_or_else(|| {
        Error::InvalidParameter("projection step needs an objective with Lipschitz gradient".into())
    })?;
    if !(step > 0.0) || (lip > 0.0 && !(step < 2.0 / lip)) {
        return Err(Error::InvalidParameter(format!(
            "projection step μ = {step} must lie in (0, 2/L) with L = {lip}"
        )));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MonotoneKind {
    Zero,
    Linear { m: Matrix },
    Gradient { potential: PotentialSpec },
    /// `I − T`.
    ContractionResidual { contraction: ContractionSpec },
    /// `A_λ = (I − J_λ^A)/λ`.
    YosidaOf { base: Box<MonotoneSpec>, lambda: f64 },
    /// `v ↦ v − P_C(v − μ∇g(v))`.
    ProjectionResidual { objective: PotentialSpec, set: ConvexSetSpec, step: f64 },
    Saddle { saddle: SaddleSpec },
    Scaled { factor: f64, base: Box<MonotoneSpec> },
    Sum { terms: Vec<MonotoneSpec> },
}

/// A single-valued monotone operator on ℝⁿ, optionally with an explicit
/// cocoercivity claim and a Lipschitz hint for iterative resolvents.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonotoneSpec {
    #[serde(flatten)]
    pub kind: MonotoneKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cocoercivity: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lipschitz: Option<f64>,
}

impl From<MonotoneKind> for MonotoneSpec {
    fn from(kind: MonotoneKind) -> Self {
        MonotoneSpec { kind, cocoercivity: None, lipschitz: None }
    }
}

impl MonotoneSpec {
    pub fn zero() -> Self {
        MonotoneKind::Zero.into()
    }

    pub fn linear(m: Matrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::dims(m.rows(), m.cols()));
        }
        Ok(MonotoneKind::Linear { m }.into())
    }

    pub fn gradient(potential: PotentialSpec) -> Self {
        MonotoneKind::Gradient { potential }.into()
    }

    pub fn contraction_residual(contraction: ContractionSpec) -> Self {
        MonotoneKind::ContractionResidual { contraction }.into()
    }

    pub fn yosida_of(base: MonotoneSpec, lambda: f64) -> Result<Self> {
        check_positive("Yosida index", lambda)?;
        Ok(MonotoneKind::YosidaOf { base: Box::new(base), lambda }.into())
    }

    pub fn projection_residual(objective: PotentialSpec, set: ConvexSetSpec, step: f64) -> Result<Self> {
        check_projection_step(&objective, step)?;
        Ok(MonotoneKind::ProjectionResidual { objective, set, step }.into())
    }

    pub fn scaled(factor: f64, base: MonotoneSpec) -> Result<Self> {
        check_positive("scale factor", factor)?;
        Ok(MonotoneKind::Scaled { factor, base: Box::new(base) }.into())
    }

    /// Sum of operators; zero terms are dropped.
    pub fn sum(terms: Vec<MonotoneSpec>) -> Self {
        let mut terms: Vec<MonotoneSpec> =
            terms.into_iter().filter(|t| !matches!(t.kind, MonotoneKind::Zero)).collect();
        match terms.len() {
            0 => MonotoneSpec::zero(),
            1 => terms.pop().expect("one term"),
            _ => MonotoneKind::Sum { terms }.into(),
        }
    }

    /// Attach an explicit cocoercivity claim.
    pub fn claim(mut self, lambda: f64) -> Self {
        self.cocoercivity = Some(lambda);
        self
    }

    pub fn with_lipschitz(mut self, lip: f64) -> Self {
        self.lipschitz = Some(lip);
        self
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.kind, MonotoneKind::Zero)
    }

    pub fn dim(&self) -> Option<usize> {
        match &self.kind {
            MonotoneKind::Zero => None,
            MonotoneKind::Linear { m } => Some(m.cols()),
            MonotoneKind::Gradient { potential } => potential.dim(),
            MonotoneKind::ContractionResidual { contraction } => contraction.dim(),
            MonotoneKind::YosidaOf { base, .. } | MonotoneKind::Scaled { base, .. } => base.dim(),
            MonotoneKind::ProjectionResidual { objective, set, .. } => objective.dim().or(set.dim()),
            MonotoneKind::Saddle { saddle } => {
                let (a, b) = saddle.dims();
                Some(a + b)
            }
            MonotoneKind::Sum { terms } => terms.iter().find_map(|t| t.dim()),
        }
    }

    /// Cocoercivity constant: the explicit claim, else what the kind implies.
    pub fn cocoercivity(&self) -> Option<f64> {
        self.cocoercivity.or_else(|| self.derived_cocoercivity())
    }

    fn derived_cocoercivity(&self) -> Option<f64> {
        match &self.kind {
            MonotoneKind::Zero | MonotoneKind::Saddle { .. } => None,
            MonotoneKind::Linear { m } => {
                // symmetric PSD M satisfies ⟨Mz, z⟩ ≥ |Mz|²/λmax
                if m.is_symmetric(1e-12) {
                    let ev = m.symmetric_eigenvalues().ok()?;
                    let top = *ev.last()?;
                    (ev[0] >= -1e-12 && top > 0.0).then(|| 1.0 / top)
                } else {
                    None
                }
            }
            MonotoneKind::Gradient { potential } => {
                potential.lipschitz().filter(|l| *l > 0.0).map(|l| 1.0 / l)
            }
            MonotoneKind::ContractionResidual { .. } | MonotoneKind::ProjectionResidual { .. } => Some(0.5),
            MonotoneKind::YosidaOf { lambda, .. } => Some(*lambda),
            MonotoneKind::Scaled { factor, base } => base.cocoercivity().map(|l| l / factor),
            MonotoneKind::Sum { terms } => {
                let mut inv = 0.0;
                for t in terms {
                    inv += 1.0 / t.cocoercivity()?;
                }
                Some(1.0 / inv)
            }
        }
    }

    /// Lipschitz bound: the hint, else derived from the kind and the
    /// cocoercivity claim (`λ`-cocoercive implies `1/λ`-Lipschitz).
    pub fn lipschitz_bound(&self) -> Option<f64> {
        if self.lipschitz.is_some() {
            return self.lipschitz;
        }
        let from_claim = self.cocoercivity().map(|l| 1.0 / l);
        let derived = match &self.kind {
            MonotoneKind::Zero => Some(0.0),
            MonotoneKind::Linear { m } => Some(m.operator_norm()),
            MonotoneKind::Gradient { potential } => potential.lipschitz(),
            MonotoneKind::ContractionResidual { contraction } => Some(1.0 + contraction.lipschitz_bound()),
            MonotoneKind::ProjectionResidual { .. } => Some(2.0),
            MonotoneKind::YosidaOf { lambda, .. } => Some(1.0 / lambda),
            MonotoneKind::Saddle { saddle } => Some(saddle.affine_form().0.operator_norm()),
            MonotoneKind::Scaled { factor, base } => base.lipschitz_bound().map(|l| factor * l),
            MonotoneKind::Sum { terms } => terms.iter().map(|t| t.lipschitz_bound()).sum(),
        };
        match (derived, from_claim) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        }
    }

    fn check(&self, x: &Vector) -> Result<()> {
        match self.dim() {
            Some(n) => x.check_dim(n),
            None => Ok(()),
        }
    }

    /// Evaluates the operator at `x`.
    pub fn apply(&self, x: &Vector) -> Result<Vector> {
        self.check(x)?;
        match &self.kind {
            MonotoneKind::Zero => Ok(Vector::zeros(x.dim())),
            MonotoneKind::Linear { m } => m.apply(x),
            MonotoneKind::Gradient { potential } => potential.grad(x),
            MonotoneKind::ContractionResidual { contraction } => Ok(x - &contraction.apply(x)?),
            MonotoneKind::YosidaOf { base, lambda } => {
                let j = base.resolvent(*lambda, x, INNER_TOL * (1.0 + x.norm()))?;
                Ok((x - &j).scale(1.0 / lambda))
            }
            MonotoneKind::ProjectionResidual { objective, set, step } => {
                Ok(x - &set.project(&x.axpy(-step, &objective.grad(x)?))?)
            }
            MonotoneKind::Saddle { saddle } => saddle.operator(x),
            MonotoneKind::Scaled { factor, base } => Ok(base.apply(x)?.scale(*factor)),
            MonotoneKind::Sum { terms } => {
                let mut out = Vector::zeros(x.dim());
                for t in terms {
                    out += &t.apply(x)?;
                }
                Ok(out)
            }
        }
    }

    /// Affine representation `x ↦ Mx + c`, for kinds that are affine.
    pub fn affine_form(&self, dim: usize) -> Option<(Matrix, Vector)> {
        if self.dim().is_some_and(|n| n != dim) {
            return None;
        }
        match &self.kind {
            MonotoneKind::Zero => Some((Matrix::zeros(dim, dim), Vector::zeros(dim))),
            MonotoneKind::Linear { m } => Some((m.clone(), Vector::zeros(dim))),
            MonotoneKind::Gradient { potential } => potential.affine_gradient(dim),
            MonotoneKind::ContractionResidual { contraction: ContractionSpec::Linear { m } } => {
                Some((Matrix::identity(dim).sub(m).ok()?, Vector::zeros(dim)))
            }
            MonotoneKind::ContractionResidual { .. } | MonotoneKind::ProjectionResidual { .. } => None,
            MonotoneKind::YosidaOf { base, lambda } => {
                let (m, c) = base.affine_form(dim)?;
                // J(x) = (I + λM)⁻¹(x − λc);  A_λ x = ((I − (I + λM)⁻¹)/λ) x + (I + λM)⁻¹ c
                let inv = Matrix::identity(dim).add(&m.scale(*lambda)).ok()?.inverse(1e-12).ok()?;
                let lin = Matrix::identity(dim).sub(&inv).ok()?.scale(1.0 / lambda);
                Some((lin, inv.mul_vec(&c)))
            }
            MonotoneKind::Saddle { saddle } => Some(saddle.affine_form()),
            MonotoneKind::Scaled { factor, base } => {
                let (m, c) = base.affine_form(dim)?;
                Some((m.scale(*factor), c.scale(*factor)))
            }
            MonotoneKind::Sum { terms } => {
                let mut m = Matrix::zeros(dim, dim);
                let mut c = Vector::zeros(dim);
                for t in terms {
                    let (mt, ct) = t.affine_form(dim)?;
                    m = m.add(&mt).ok()?;
                    c += &ct;
                }
                Some((m, c))
            }
        }
    }

    fn resolvent_residual(&self, lambda: f64, v: &Vector, x: &Vector) -> Result<f64> {
        Ok((&x.axpy(lambda, &self.apply(x)?) - v).norm())
    }

    /// Resolvent `J_λ^A v = (I + λA)⁻¹ v`: returns `x` with
    /// `|x + λAx − v| ≤ tol`.
    ///
    /// Affine kinds are solved directly. Gradients of separable powers use a
    /// per-coordinate scalar solve, `I − T` kinds iterate the contraction
    /// `x ← (v + λTx)/(1 + λ)`, and everything else falls back to the damped
    /// fixed point `x ← x − τ(x + λAx − v)` with `τ = 1/(1 + λ·Lip(A))²`.
    pub fn resolvent(&self, lambda: f64, v: &Vector, tol: f64) -> Result<Vector> {
        check_positive("resolvent index", lambda)?;
        self.check(v)?;
        let n = v.dim();

        if let Some((m, c)) = self.affine_form(n) {
            let lhs = Matrix::identity(n).add(&m.scale(lambda))?;
            let rhs = v.axpy(-lambda, &c);
            let mut x = solve_linear(&lhs, &rhs, 1e-10)?;
            // iterative refinement for the absolute tolerance
            for _ in 0..3 {
                let r = &rhs - &lhs.mul_vec(&x);
                if r.norm() <= 0.5 * tol {
                    break;
                }
                x += &solve_linear(&lhs, &r, 1e-10)?;
            }
            return self.accept(lambda, v, x, tol, 0);
        }

        match &self.kind {
            MonotoneKind::Gradient { potential } => {
                if let Some(x) = potential.gradient_resolvent(lambda, v, tol) {
                    return self.accept(lambda, v, x?, tol, 0);
                }
            }
            MonotoneKind::Scaled { factor, base } => {
                let x = base.resolvent(lambda * factor, v, tol / (1.0 + lambda * factor).max(1.0))?;
                return self.accept(lambda, v, x, tol, 0);
            }
            MonotoneKind::ContractionResidual { .. } | MonotoneKind::ProjectionResidual { .. } => {
                return self.contraction_resolvent(lambda, v, tol);
            }
            _ => {}
        }
        self.damped_resolvent(lambda, v, tol)
    }

    fn accept(&self, lambda: f64, v: &Vector, x: Vector, tol: f64, iterations: usize) -> Result<Vector> {
        let residual = self.resolvent_residual(lambda, v, &x)?;
        if residual <= tol {
            Ok(x)
        } else {
            Err(Error::NoConvergence { what: "resolvent", iterations, residual })
        }
    }

    fn contraction_resolvent(&self, lambda: f64, v: &Vector, tol: f64) -> Result<Vector> {
        // x + λ(x − Tx) = v  ⇔  x = (v + λTx)/(1 + λ), a contraction of factor λ/(1 + λ)
        let t_of = |x: &Vector| -> Result<Vector> { Ok(x - &self.apply(x)?) };
        let mut x = v.clone();
        let mut best = f64::INFINITY;
        for it in 0..MAX_RESOLVENT_ITERATIONS {
            let residual = self.resolvent_residual(lambda, v, &x)?;
            best = best.min(residual);
            if residual <= tol {
                return Ok(x);
            }
            x = v.axpy(lambda, &t_of(&x)?).scale(1.0 / (1.0 + lambda));
            if it > 0 && !x.is_finite() {
                break;
            }
        }
        Err(Error::NoConvergence { what: "resolvent", iterations: MAX_RESOLVENT_ITERATIONS, residual: best })
    }

    fn damped_resolvent(&self, lambda: f64, v: &Vector, tol: f64) -> Result<Vector> {
        let lip = self.lipschitz_bound().ok_or_else(|| {
            Error::InvalidParameter("iterative resolvent needs a Lipschitz bound or cocoercivity claim".into())
        })?;
        let tau = 1.0 / (1.0 + lambda * lip).powi(2);
        let mut x = v.clone();
        let mut best = f64::INFINITY;
        for _ in 0..MAX_RESOLVENT_ITERATIONS {
            let r = &x.axpy(lambda, &self.apply(&x)?) - v;
            let residual = r.norm();
            best = best.min(residual);
            if residual <= tol {
                return Ok(x);
            }
            x = x.axpy(-tau, &r);
        }
        Err(Error::NoConvergence { what: "resolvent", iterations: MAX_RESOLVENT_ITERATIONS, residual: best })
    }

    /// Yosida approximation `A_λ v = (v − J_λ^A v)/λ`.
    pub fn yosida(&self, lambda: f64, v: &Vector, tol: f64) -> Result<Vector> {
        let j = self.resolvent(lambda, v, tol)?;
        Ok((v - &j).scale(1.0 / lambda))
    }

    /// `J_μ^{A_λ} v` through the resolvent identity
    /// `λ/(λ+μ)·v + μ/(λ+μ)·J_{λ+μ}^A v`.
    pub fn resolvent_of_yosida(&self, lambda: f64, mu: f64, v: &Vector, tol: f64) -> Result<Vector> {
        check_positive("Yosida index", lambda)?;
        check_positive("resolvent index", mu)?;
        let s = lambda + mu;
        let j = self.resolvent(s, v, tol)?;
        Ok(v.scale(lambda / s).axpy(mu / s, &j))
    }

    /// Empirical cocoercivity witness: the infimum over sampled pairs in the
    /// ball of `⟨Au − Av, u − v⟩ / |Au − Av|²`.
    ///
    /// This is an upper bound on the true constant restricted to the sample.
    /// For affine kinds the sample also includes pairs along the eigenvectors
    /// of the symmetric part of `M` and of `MᵀM`.
    pub fn cocoercivity_estimate(&self, dim: usize, samples: usize, radius: f64, seed: u64) -> Result<f64> {
        let ratio = |u: &Vector, v: &Vector| -> Result<Option<f64>> {
            let d = &self.apply(u)? - &self.apply(v)?;
            let dn = d.norm_sq();
            if dn.sqrt() < DEGENERATE_PAIR {
                return Ok(None);
            }
            Ok(Some(d.dot(&(u - v)) / dn))
        };
        pairwise_infimum(dim, samples, radius, seed, self.affine_form(dim).map(|(m, _)| m), ratio)
            .and_then(|r| r.ok_or_else(|| Error::DegenerateSample("operator constant on sample".into())))
    }
}

/// Infimum of `ratio` over `samples` random pairs in the ball of `radius`,
/// plus eigen-direction pairs when a linear part is known. `None` when every
/// pair was skipped.
pub(crate) fn pairwise_infimum(
    dim: usize,
    samples: usize,
    radius: f64,
    seed: u64,
    linear_part: Option<Matrix>,
    ratio: impl Fn(&Vector, &Vector) -> Result<Option<f64>>,
) -> Result<Option<f64>> {
    if samples < 2 {
        return Err(Error::InvalidParameter("need at least 2 samples".into()));
    }
    let mut rng = sampling::rng(seed);
    let mut best: Option<f64> = None;
    let mut fold = |r: Option<f64>| {
        if let Some(r) = r {
            best = Some(best.map_or(r, |b: f64| b.min(r)));
        }
    };
    for _ in 0..samples {
        let u = sampling::point_in_ball(&mut rng, dim, radius);
        let v = sampling::point_in_ball(&mut rng, dim, radius);
        fold(ratio(&u, &v)?);
    }
    if let Some(m) = linear_part {
        let gram = m.transpose().matmul(&m)?;
        let origin = Vector::zeros(dim);
        for src in [&m, &gram] {
            for (_, e) in src.symmetric_eigenpairs()? {
                fold(ratio(&e.scale(0.5 * radius), &origin)?);
            }
        }
    }
    Ok(best)
}

fn check_positive(what: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{what} must be positive, got {x}")))
    }
}

/// The monotone operator `(∇ₓ₁L, −∇ₓ₂L)` of a convex-concave function. No
/// cocoercivity is claimed.
pub fn saddle_operator(saddle: &SaddleSpec) -> MonotoneSpec {
    MonotoneKind::Saddle { saddle: saddle.clone() }.into()
}

/// Epi-hypo Moreau–Yosida regularization of a convex-concave function, in
/// operator form: the Yosida approximation of its saddle operator, claimed
/// `λ`-cocoercive.
pub fn epi_hypo_regularize(saddle: &SaddleSpec, lambda: f64) -> Result<MonotoneSpec> {
    Ok(MonotoneSpec::yosida_of(saddle_operator(saddle), lambda)?.claim(lambda))
}

/// The planar π/2 rotation `[[0, −1], [1, 0]]`.
pub fn rotation() -> Matrix {
    Matrix::from_rows(&[&[0.0, -1.0], &[1.0, 0.0]]).expect("2x2")
}

/// Deterministic catalog of monotone operators on ℝⁿ, one per kind family.
pub fn catalog(dim: usize, seed: u64) -> Vec<(&'static str, MonotoneSpec)> {
    let mut rng = sampling::rng(seed);
    let mut random = |rows: usize, cols: usize| {
        Matrix::from_fn(rows, cols, |_, _| sampling::uniform(&mut rng, -1.0, 1.0))
    };

    let g = random(dim, dim);
    let psd = g.transpose().matmul(&g).expect("square").add(&Matrix::identity(dim).scale(0.1)).expect("square");
    let skew_seed = random(dim, dim);
    let skew = skew_seed.sub(&skew_seed.transpose()).expect("square");
    let shifted = skew.add(&Matrix::identity(dim).scale(0.5)).expect("square");
    let center = Vector::from_fn(dim, |i| 0.3 * i as f64 - 0.5);
    let contraction_seed = random(dim, dim);
    let contraction_m = contraction_seed.scale(0.95 / contraction_seed.operator_norm().max(1e-12));
    let objective = PotentialSpec::quadratic(psd.clone(), center.clone()).expect("psd");
    let lip = objective.lipschitz().expect("quadratic");
    let ball = ConvexSetSpec::ball(Vector::zeros(dim), 1.0).expect("radius");
    let boxed = ConvexSetSpec::boxed(Vector::from_fn(dim, |_| -0.5), Vector::from_fn(dim, |_| 0.75)).expect("box");

    vec![
        ("zero", MonotoneSpec::zero()),
        ("identity", MonotoneSpec::linear(Matrix::identity(dim)).expect("square")),
        ("psd-linear", MonotoneSpec::linear(psd.clone()).expect("square")),
        ("skew-plus-shift", MonotoneSpec::linear(shifted).expect("square")),
        ("skew", MonotoneSpec::linear(skew).expect("square")),
        ("gradient-quadratic", MonotoneSpec::gradient(objective.clone())),
        (
            "gradient-power",
            MonotoneSpec::gradient(
                PotentialSpec::separable_power(Vector::from_fn(dim, |i| 0.5 + 0.25 * i as f64), 4.0).expect("valid"),
            ),
        ),
        (
            "contraction-residual-linear",
            MonotoneSpec::contraction_residual(ContractionSpec::linear(contraction_m).expect("norm < 1")),
        ),
        (
            "contraction-residual-projection",
            MonotoneSpec::contraction_residual(
                ContractionSpec::projected_gradient(PotentialSpec::Zero, boxed, 1.0).expect("zero objective"),
            ),
        ),
        (
            "projection-residual",
            MonotoneSpec::projection_residual(objective, ball, 1.5 / lip).expect("step in range"),
        ),
    ]
}

/// Catalog of nonexpansive maps on ℝⁿ.
pub fn contraction_catalog(dim: usize, seed: u64) -> Vec<(&'static str, ContractionSpec)> {
    let mut rng = sampling::rng(seed ^ 0x5eed);
    let raw = Matrix::from_fn(dim, dim, |_, _| sampling::uniform(&mut rng, -1.0, 1.0));
    let g = Matrix::from_fn(dim, dim, |_, _| sampling::uniform(&mut rng, -1.0, 1.0));
    let q = g.transpose().matmul(&g).expect("square");
    let objective = PotentialSpec::quadratic(q, Vector::from_fn(dim, |i| i as f64 * 0.2)).expect("psd");
    let lip = objective.lipschitz().expect("quadratic").max(1e-9);
    vec![
        ("identity", ContractionSpec::linear(Matrix::identity(dim)).expect("norm 1")),
        ("scaled-random", ContractionSpec::linear(raw.scale(1.0 / raw.operator_norm())).expect("norm 1")),
        (
            "projection-ball",
            ContractionSpec::projected_gradient(
                PotentialSpec::Zero,
                ConvexSetSpec::ball(Vector::zeros(dim), 0.7).expect("radius"),
                1.0,
            )
            .expect("zero objective"),
        ),
        (
            "projected-gradient",
            ContractionSpec::projected_gradient(
                objective,
                ConvexSetSpec::halfspace(Vector::from_fn(dim, |i| 1.0 + i as f64), 0.25).expect("normal"),
                1.9 / lip,
            )
            .expect("step in range"),
        ),
    ]
}
