use super::*;
use crate::dynamics::{integrate, EpsilonSchedule, Tikhonov};
use crate::operators::rotation;

fn half_sq(dim: usize) -> PotentialSpec {
    PotentialSpec::half_sq_distance(Vector::zeros(dim))
}

fn b1() -> MonotoneSpec {
    MonotoneSpec::yosida_of(MonotoneSpec::linear(rotation()).unwrap(), 1.0).unwrap()
}

fn flat_valley() -> PotentialSpec {
    PotentialSpec::quadratic(Matrix::diagonal(&[1.0, 0.0]), Vector::zeros(2)).unwrap()
}

fn heavy_ball(gamma: f64) -> SystemSpec {
    SystemSpec::new(2, gamma, half_sq(2), MonotoneSpec::zero().claim(1.0)).unwrap()
}

fn origin() -> AnchorPoint {
    AnchorPoint { p: Vector::zeros(2), residual: 0.0 }
}

#[test]
fn find_equilibrium_examples() {
    let a = find_equilibrium(&heavy_ball(2.0), &Vector::from([5.0, 5.0]), 1e-10).unwrap();
    assert!(a.p.norm() <= 1e-10 && a.residual <= 1e-10);

    let sys = SystemSpec::new(2, 2.0, PotentialSpec::Zero, b1()).unwrap();
    let a = find_equilibrium(&sys, &Vector::from([1.0, -3.0]), 1e-10).unwrap();
    assert!(a.p.norm() <= 1e-9);

    let sys = SystemSpec::new(2, 2.0, flat_valley(), MonotoneSpec::zero().claim(1.0)).unwrap();
    let tol = 1e-10;
    let a = find_equilibrium(&sys, &Vector::from([1.0, 0.7]), tol).unwrap();
    assert!(a.p[0].abs() <= tol);
    assert!((a.p[1] - 0.7).abs() < 1e-12);
}

#[test]
fn find_equilibrium_with_nonlinear_operator() {
    // g = ½|x − (2, 0)|² over the unit ball: the projection residual vanishes at (1, 0)
    let g = PotentialSpec::half_sq_distance(Vector::from([2.0, 0.0]));
    let c = crate::operators::ConvexSetSpec::ball(Vector::zeros(2), 1.0).unwrap();
    let a = MonotoneSpec::projection_residual(g, c, 1.0).unwrap();
    let sys = SystemSpec::new(2, 1.5, PotentialSpec::Zero, a).unwrap();
    let eq = find_equilibrium(&sys, &Vector::from([-0.3, 0.4]), 1e-10).unwrap();
    assert!((&eq.p - &Vector::from([1.0, 0.0])).norm() < 1e-9);
}

#[test]
fn gamma0_examples() {
    let sys = heavy_ball(2.0);
    let s = PhaseState::at_rest(Vector::from([1.0, 0.0]));
    assert!((gamma0(&sys, &origin(), &s).unwrap() - 3.0).abs() < 1e-15);

    // at (p, 0): 2λγ φ(p)
    let phi = PotentialSpec::half_sq_distance(Vector::from([1.0, 1.0]));
    let sys = SystemSpec::new(2, 1.5, phi.clone(), MonotoneSpec::zero().claim(0.8)).unwrap();
    let p = AnchorPoint { p: Vector::from([0.2, -0.4]), residual: 0.0 };
    let at_p = gamma0(&sys, &p, &PhaseState::at_rest(p.p.clone())).unwrap();
    assert!((at_p - 2.0 * 0.8 * 1.5 * phi.value(&p.p).unwrap()).abs() < 1e-14);

    let no_lambda = SystemSpec::new(2, 1.0, half_sq(2), MonotoneSpec::zero()).unwrap();
    assert!(gamma0(&no_lambda, &origin(), &s).is_err());
}

#[test]
fn gamma1_examples() {
    let tk = |sched| Tikhonov { regularizer: half_sq(2), strong_monotonicity: 1.0, lipschitz: 1.0, schedule: sched };
    let base = SystemSpec::new(2, 2.0, PotentialSpec::Zero, MonotoneSpec::zero().claim(1.0)).unwrap();

    let constant = EpsilonSchedule::Exponential { c: 1.0, a: 1e-300 };
    let sys = base.clone().with_tikhonov(tk(constant)).unwrap();
    let s = PhaseState::at_rest(Vector::from([1.0, 0.0]));
    assert!((gamma1(&sys, &origin(), &s).unwrap() - 3.0).abs() < 1e-14);
    assert_eq!(gamma1(&sys, &origin(), &PhaseState::at_rest(Vector::zeros(2))).unwrap(), 0.0);

    // ε ≡ 0: Γ₁ is Γ₀ term by term
    let hb = heavy_ball(1.3);
    let hb_tk = hb.clone().with_tikhonov(tk(EpsilonSchedule::Zero)).unwrap();
    let s = PhaseState::new(0.4, Vector::from([0.3, -1.2]), Vector::from([0.5, 0.25])).unwrap();
    let p = AnchorPoint { p: Vector::from([0.1, 0.1]), residual: 0.0 };
    assert_eq!(gamma1(&hb_tk, &p, &s).unwrap(), gamma0(&hb, &p, &s).unwrap());

    assert!(gamma1(&hb, &p, &s).is_err());
    assert!(gamma0(&hb_tk, &p, &s).is_err());
}

#[test]
fn stationary_trajectory_has_zero_defects() {
    let sys = SystemSpec::new(2, 2.0, half_sq(2), b1()).unwrap();
    let traj = integrate(&sys, &PhaseState::at_rest(Vector::zeros(2)), 5.0, 1e-2, 10).unwrap();
    let traj = attach_diagnostics(&traj, &sys, &origin()).unwrap();
    for d in traj.diagnostics.as_ref().unwrap() {
        assert_eq!((d.h, d.w, d.a_residual), (0.0, 0.0, 0.0));
    }
    let r = convergence_report(&traj, &sys, &origin(), &Tolerances::default()).unwrap();
    assert_eq!(r.anchor_oscillation, 0.0);
    assert_eq!(r.gamma0_monotonicity_defect, Some(0.0));
    assert_eq!(r.l2_velocity_tail, 0.0);
    assert!(r.verdict.pass);
}

#[test]
fn heavy_ball_certificates() {
    let phi = PotentialSpec::quadratic(Matrix::diagonal(&[1.0, 2.0]), Vector::from([1.0, -1.0])).unwrap();
    let sys = SystemSpec::new(2, 2.0, phi, MonotoneSpec::zero().claim(1.0)).unwrap();
    let p = find_equilibrium(&sys, &Vector::zeros(2), 1e-12).unwrap();
    let traj = integrate(&sys, &PhaseState::at_rest(Vector::from([-2.0, 3.0])), 30.0, 1e-3, 100).unwrap();
    let traj = attach_diagnostics(&traj, &sys, &p).unwrap();
    let diag = traj.diagnostics.as_ref().unwrap();
    for d in diag {
        assert!(d.w >= 0.0 && d.d_term >= 0.0 && d.h >= 0.0);
    }
    assert!(diag.last().unwrap().w < 1e-8);
    // w = ⟨Q(u − p), u − p⟩ decays with the closed-form envelope; check it against the state directly
    for (d, s) in diag.iter().zip(&traj.samples) {
        let e = &s.u - &p.p;
        assert!((d.w - (e[0] * e[0] + 2.0 * e[1] * e[1])).abs() < 1e-12);
    }
    let r = convergence_report(&traj, &sys, &p, &Tolerances::default()).unwrap();
    assert!(r.verdict.pass, "{r:?}");
    assert!(r.gamma0_monotonicity_defect.unwrap() < 1e-8);
    assert!(r.anchor_oscillation < 1e-8);
}

#[test]
fn yosida_rotation_operator_residual_tracks_the_state() {
    // B₁ = ½[[1, −1], [1, 1]] scales every vector by 1/√2
    let sys = SystemSpec::new(2, 2.0, PotentialSpec::Zero, b1()).unwrap();
    let traj = integrate(&sys, &PhaseState::at_rest(Vector::from([1.0, 0.0])), 30.0, 1e-3, 500).unwrap();
    let traj = attach_diagnostics(&traj, &sys, &origin()).unwrap();
    let diag = traj.diagnostics.as_ref().unwrap();
    for (d, s) in diag.iter().zip(&traj.samples) {
        assert!((d.a_residual - s.u.norm() / 2f64.sqrt()).abs() < 1e-12);
    }
    assert!(diag.last().unwrap().a_residual < diag[diag.len() / 2].a_residual);
}

#[test]
fn non_convergent_run_fails_the_verdict() {
    // γ = 1, λ = 0.5: λγ² = 0.5 and the slow root has positive real part
    let a = MonotoneSpec::yosida_of(MonotoneSpec::linear(rotation()).unwrap(), 0.5).unwrap();
    let sys = SystemSpec::new(2, 1.0, PotentialSpec::Zero, a).unwrap();
    let traj = integrate(&sys, &PhaseState::at_rest(Vector::from([1.0, 0.0])), 30.0, 1e-3, 100).unwrap();
    let traj = attach_diagnostics(&traj, &sys, &origin()).unwrap();
    let r = convergence_report(&traj, &sys, &origin(), &Tolerances::default()).unwrap();
    assert!(!r.verdict.velocity_vanishes);
    assert!(!r.verdict.anchor_distance_settles);
    assert!(!r.verdict.pass);
}

#[test]
fn attach_rejects_foreign_trajectory() {
    let a = heavy_ball(2.0);
    let b = heavy_ball(3.0);
    let traj = integrate(&a, &PhaseState::at_rest(Vector::from([1.0, 0.0])), 1.0, 1e-2, 10).unwrap();
    assert!(matches!(attach_diagnostics(&traj, &b, &origin()), Err(Error::Inconsistent(_))));
    assert!(convergence_report(&traj, &a, &origin(), &Tolerances::default()).is_err());
}

#[test]
fn vi_residual_examples() {
    let theta = half_sq(2);
    let p = Vector::from([0.4, -0.2]);
    assert_eq!(vi_residual(&theta, &[p.clone()], &p).unwrap(), 0.0);

    let probes: Vec<Vector> = [-1.0, -0.5, 0.0, 0.5, 1.0].iter().map(|y| Vector::from([0.0, *y])).collect();
    assert_eq!(vi_residual(&theta, &probes, &Vector::zeros(2)).unwrap(), 0.0);
    assert!((vi_residual(&theta, &probes, &Vector::from([0.0, 1.0])).unwrap() - 2.0).abs() < 1e-15);
    assert!(vi_residual(&theta, &[], &p).is_err());
}

#[test]
fn strong_monotonicity_examples() {
    let est = strong_monotonicity_estimate(&heavy_ball(2.0), 100, 2.0, 1).unwrap();
    assert!((est - 1.0).abs() < 1e-12);

    let flat = SystemSpec::new(2, 2.0, flat_valley(), MonotoneSpec::zero()).unwrap();
    assert!(strong_monotonicity_estimate(&flat, 100, 2.0, 2).unwrap().abs() < 1e-12);

    let rot = SystemSpec::new(2, 2.0, PotentialSpec::Zero, b1()).unwrap();
    assert!((strong_monotonicity_estimate(&rot, 100, 2.0, 3).unwrap() - 0.5).abs() < 1e-9);

    let both = SystemSpec::new(2, 2.0, half_sq(2), b1()).unwrap();
    assert!((strong_monotonicity_estimate(&both, 100, 2.0, 4).unwrap() - 1.5).abs() < 1e-9);
}
