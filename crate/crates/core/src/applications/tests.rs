use super::*;
use crate::dynamics::vector_field;
use crate::sampling;

fn gp_problem(set: ConvexSetSpec) -> ConstrainedProblem {
    ConstrainedProblem::new(PotentialSpec::half_sq_distance(Vector::from([2.0, 0.0])), set, 1.0).unwrap()
}

fn close(a: &Vector, b: &Vector, tol: f64) -> bool {
    (a - b).max_abs() <= tol
}

#[test]
fn gradient_projection_examples() {
    let ball = ConvexSetSpec::ball(Vector::zeros(2), 1.0).unwrap();
    let sys = build_gradient_projection_system(&gp_problem(ball), 1.5).unwrap();
    let eq = find_equilibrium(&sys, &Vector::zeros(2), 1e-12).unwrap();
    assert!(close(&eq.p, &Vector::from([1.0, 0.0]), 1e-10));
    assert_eq!(sys.lambda(), Some(0.5));

    let sys = build_gradient_projection_system(&gp_problem(ConvexSetSpec::WholeSpace), 1.5).unwrap();
    let eq = find_equilibrium(&sys, &Vector::zeros(2), 1e-12).unwrap();
    assert!(close(&eq.p, &Vector::from([2.0, 0.0]), 1e-10));

    let g = PotentialSpec::half_sq_distance(Vector::zeros(2));
    assert!(ConstrainedProblem::new(g, ConvexSetSpec::WholeSpace, 3.0).is_err());
    let ball = ConvexSetSpec::ball(Vector::zeros(2), 1.0).unwrap();
    assert!(build_gradient_projection_system(&gp_problem(ball), 1.4).is_err());
}

#[test]
fn gradient_projection_limit_is_a_fixed_point() {
    let r = run_scenario("gradient-projection", &Overrides::default()).unwrap();
    assert!(r.summary.residuals["fixed_point_residual"] <= 1e-6, "{:?}", r.summary);
    assert!(close(&r.summary.limit, &Vector::from([1.0, 0.0]), 1e-6));
}

#[test]
fn tikhonov_examples() {
    let phi = PotentialSpec::quadratic(Matrix::diagonal(&[1.0, 0.0]), Vector::zeros(2)).unwrap();
    let base = SystemSpec::new(2, 2.0, phi, MonotoneSpec::zero().claim(1.0)).unwrap();
    let sched = EpsilonSchedule::Power { c: 1.0, p: 1.0 };
    let tk = build_tikhonov_system(&base, Vector::zeros(2), sched).unwrap();
    let off = build_tikhonov_system(&base, Vector::zeros(2), EpsilonSchedule::Zero).unwrap();

    let mut rng = sampling::rng(3);
    for _ in 0..50 {
        let t = sampling::uniform(&mut rng, 0.0, 10.0);
        let u = sampling::point_in_ball(&mut rng, 2, 3.0);
        let v = sampling::point_in_ball(&mut rng, 2, 3.0);
        let s = PhaseState::new(t, u.clone(), v).unwrap();
        let (_, acc_base) = vector_field(&base, &s).unwrap();
        let (_, acc_tk) = vector_field(&tk, &s).unwrap();
        // c = 0: the extra term is ε(t)u
        assert!(close(&(&acc_base - &acc_tk), &u.scale(sched.value(t)), 1e-12));
        assert_eq!(vector_field(&off, &s).unwrap(), vector_field(&base, &s).unwrap());
    }

    assert!(build_tikhonov_system(&tk, Vector::zeros(2), sched).is_err());
    assert!(build_tikhonov_system(&base, Vector::zeros(2), EpsilonSchedule::Power { c: 1.0, p: -1.0 }).is_err());
}

#[test]
fn tikhonov_trajectory_drifts_toward_the_minimal_norm_point() {
    // slow ε keeps pulling the free coordinate in; the decay is algebraic
    let r = run_scenario("tikhonov-min-norm", &Overrides { horizon: Some(60.0), ..Default::default() }).unwrap();
    assert_eq!(r.summary.flags["selection_claimed"], true);
    let samples = &r.trajectory.samples;
    let second: Vec<f64> = samples.iter().filter(|s| s.t >= 10.0).map(|s| s.u[1]).collect();
    assert!(second.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    assert!(r.trajectory.last().u[0].abs() < 1e-6);
    assert!(r.trajectory.last().u[1] < 0.5 * samples[0].u[1]);
}

#[test]
fn game_equilibria() {
    let game = scalar_game(0.5, 1.0).unwrap();
    let sys = build_game_system(&game, 2.0).unwrap();
    assert_eq!(sys.equilibrium_map(&Vector::zeros(2)).unwrap(), Vector::zeros(2));
    assert!(build_game_system(&game, 0.9).is_err());

    // potential team game: equilibria minimize φ
    let team = GameSpec::new(
        PotentialSpec::half_sq_distance(Vector::from([1.0])),
        PotentialSpec::half_sq_distance(Vector::from([-1.0])),
        Matrix::identity(1),
        Matrix::identity(1),
        SaddleSpec::zero(1, 1),
        1.0,
    )
    .unwrap();
    let sys = build_game_system(&team, 2.0).unwrap();
    let eq = find_equilibrium(&sys, &Vector::zeros(2), 1e-12).unwrap();
    // φ = ½(x₁ − 1)² + ½(x₂ + 1)² + ½(x₁ − x₂)² is minimized at (1/3, −1/3)
    assert!(close(&eq.p, &Vector::from([1.0 / 3.0, -1.0 / 3.0]), 1e-10));

    let zero_sum = GameSpec::new(
        PotentialSpec::Zero,
        PotentialSpec::Zero,
        Matrix::zeros(1, 1),
        Matrix::zeros(1, 1),
        SaddleSpec::bilinear(Matrix::from_rows(&[&[1.0]]).unwrap()).unwrap(),
        1.0,
    )
    .unwrap();
    let sys = build_game_system(&zero_sum, 2.0).unwrap();
    let eq = find_equilibrium(&sys, &Vector::from([0.5, 0.5]), 1e-12).unwrap();
    assert!(eq.p.norm() <= 1e-10);

    assert!(GameSpec::new(
        PotentialSpec::Zero,
        PotentialSpec::Zero,
        Matrix::zeros(2, 1),
        Matrix::zeros(1, 1),
        SaddleSpec::zero(1, 1),
        1.0
    )
    .is_err());
}

#[test]
fn nash_residual_examples() {
    let game = scalar_game(0.5, 1.0).unwrap();
    assert!(nash_residual(&game, &Vector::zeros(2)).unwrap() <= 1e-12);
    // ∇f + ∇Φ = (1 + 1, 0 − 1); regularized saddle operator [[0.2, 0.4], [−0.4, 0.2]] gives (0.2, −0.4)
    let r = nash_residual(&game, &Vector::from([1.0, 0.0])).unwrap();
    assert!((r - 6.8f64.sqrt()).abs() < 1e-12);
    // unregularized: (0.5x₂, −0.5x₁) = (0, −0.5)
    let r = unregularized_nash_residual(&game, &Vector::from([1.0, 0.0])).unwrap();
    assert!((r - (4.0f64 + 2.25).sqrt()).abs() < 1e-12);

    let zero = GameSpec::new(
        PotentialSpec::Zero,
        PotentialSpec::Zero,
        Matrix::zeros(1, 1),
        Matrix::zeros(1, 1),
        SaddleSpec::zero(1, 1),
        1.0,
    )
    .unwrap();
    let mut rng = sampling::rng(4);
    for _ in 0..20 {
        assert_eq!(nash_residual(&zero, &sampling::point_in_ball(&mut rng, 2, 5.0)).unwrap(), 0.0);
    }
}

/// Scalar-game best response written out by hand.
fn scalar_best_response(alpha: f64, nu: f64, beta: f64, prev: (f64, f64), cur: (f64, f64), n: usize) -> (f64, f64) {
    let (mut p, mut c) = (prev, cur);
    for _ in 0..n {
        let a1 = c.0 + beta * (c.0 - p.0);
        let a2 = c.1 + beta * (c.1 - p.1);
        // ξ + (ξ − x₂) + 0.5x₂ + (ξ − a₁)/α = 0
        let x1 = (0.5 * c.1 + a1 / alpha) / (2.0 + 1.0 / alpha);
        // η − (x₁ − η) − 0.5x₁ + (η − a₂)/ν = 0
        let x2 = (1.5 * x1 + a2 / nu) / (2.0 + 1.0 / nu);
        p = c;
        c = (x1, x2);
    }
    c
}

#[test]
fn best_response_matches_hand_written_iteration() {
    let game = scalar_game(0.5, 1.0).unwrap();
    for beta in [0.0, 0.2, 0.7] {
        let params = BestResponseParams::new(0.5, 0.8, beta, 25).unwrap();
        let (prev, cur) = (Vector::from([0.3, -1.0]), Vector::from([1.0, 2.0]));
        let it = best_response_discrete(&game, &params, &prev, &cur).unwrap();
        assert_eq!(it.len(), 26);
        let want = scalar_best_response(0.5, 0.8, beta, (0.3, -1.0), (1.0, 2.0), 25);
        assert!(close(it.last().unwrap(), &Vector::from([want.0, want.1]), 1e-12));
    }
}

#[test]
fn best_response_fixed_at_equilibrium() {
    let game = scalar_game(0.5, 1.0).unwrap();
    let params = BestResponseParams::new(0.5, 0.5, 0.2, 10).unwrap();
    let it = best_response_discrete(&game, &params, &Vector::zeros(2), &Vector::zeros(2)).unwrap();
    assert!(it.iter().all(|x| x.max_abs() == 0.0));
    assert!(BestResponseParams::new(0.5, 0.5, 1.0, 10).is_err());
    assert!(BestResponseParams::new(0.0, 0.5, 0.1, 10).is_err());
}

#[test]
fn best_response_converges_with_spectral_radius_below_one() {
    let game = scalar_game(0.5, 1.0).unwrap();
    let one = BestResponseParams::new(0.5, 0.5, 0.2, 1).unwrap();
    // iteration matrix on (x_prev, x_cur) ∈ ℝ⁴, column by column
    let m = Matrix::from_fn(4, 4, |i, j| {
        let e = Vector::basis(4, j);
        let (prev, cur) = (e.block(0, 2), e.block(2, 2));
        let next = best_response_discrete(&game, &one, &prev, &cur).unwrap().pop().unwrap();
        cur.concat(&next)[i]
    });
    let mut power = m.clone();
    for _ in 0..6 {
        power = power.matmul(&power).unwrap();
    }
    let rho = power.operator_norm().powf(1.0 / 64.0);
    assert!(rho < 1.0, "spectral radius estimate {rho}");

    let params = BestResponseParams::new(0.5, 0.5, 0.2, 200).unwrap();
    let x0 = Vector::from([1.0, -0.5]);
    let it = best_response_discrete(&game, &params, &x0, &x0).unwrap();
    assert!(it.last().unwrap().max_abs() <= 1e-8);
}

#[test]
fn zero_coupling_separates_the_players() {
    let f1 = PotentialSpec::quadratic(Matrix::diagonal(&[1.0, 3.0]), Vector::from([0.5, -1.0])).unwrap();
    let f2 = PotentialSpec::half_sq_distance(Vector::from([2.0]));
    let game = GameSpec::new(
        f1.clone(),
        f2.clone(),
        Matrix::zeros(1, 2),
        Matrix::zeros(1, 1),
        SaddleSpec::zero(2, 1),
        1.0,
    )
    .unwrap();
    let gamma = 1.7;
    let product = build_game_system(&game, gamma).unwrap();
    let one = SystemSpec::new(2, gamma, f1, MonotoneSpec::zero()).unwrap();
    let two = SystemSpec::new(1, gamma, f2, MonotoneSpec::zero()).unwrap();
    let (u1, u2) = (Vector::from([1.0, 1.0]), Vector::from([-1.0]));
    let run = |sys: &SystemSpec, u: Vector| {
        let n = u.dim();
        integrate(sys, &PhaseState::at_rest(u), 10.0, 1e-3, 50).unwrap().samples.into_iter().map(move |s| {
            assert_eq!(s.u.dim(), n);
            s
        })
    };
    let joint: Vec<_> = run(&product, u1.concat(&u2)).collect();
    for ((j, a), b) in joint.iter().zip(run(&one, u1)).zip(run(&two, u2)) {
        assert!(close(&j.u, &a.u.concat(&b.u), 1e-12));
        assert!(close(&j.v, &a.v.concat(&b.v), 1e-12));
    }
}

#[test]
fn discrete_and_continuous_limits_agree() {
    let r = run_scenario("game-discrete", &Overrides::default()).unwrap();
    assert!(r.summary.residuals["discrete_continuous_gap"] <= 1e-4, "{:?}", r.summary);
    assert!(r.summary.residuals["nash_residual"] <= 1e-6);
    assert!(r.summary.residuals["discrete_nash_residual"] <= 1e-6);
    assert!(r.summary.pass);
}

#[test]
fn scenario_examples() {
    let hb = run_scenario("heavy-ball", &Overrides::default()).unwrap();
    assert!(hb.report.verdict.pass, "{:?}", hb.report);
    assert!(hb.summary.pass);

    let o = Overrides { gamma: Some(1.0), lambda: Some(0.5), ..Default::default() };
    let rot = run_scenario("yosida-rotation", &o).unwrap();
    assert!(!rot.summary.pass);
    assert!(rot.summary.flags["nonconverging"]);
    assert!(rot.summary.residuals["a2"] >= 0.0);

    let cfp = run_scenario("contraction-fixed-point", &Overrides::default()).unwrap();
    assert!(cfp.summary.residuals["fixed_point_residual"] <= 1e-5);
    assert!(close(&cfp.summary.limit, &Vector::from([1.0, 0.0, 0.0]), 1e-5));
}

#[test]
fn scenario_errors() {
    assert!(matches!(run_scenario("no-such", &Overrides::default()), Err(Error::InvalidParameter(m)) if m.contains("no-such")));
    let bad = Overrides { mu: Some(0.5), ..Default::default() };
    assert!(matches!(run_scenario("heavy-ball", &bad), Err(Error::InvalidParameter(m)) if m.contains("`mu`")));
    let both = Overrides { lambda: Some(1.0), theta: Some(1.0), ..Default::default() };
    assert!(run_scenario("yosida-rotation", &both).is_err());
    let wrong_dim = Overrides { u0: Some(vec![1.0]), ..Default::default() };
    assert!(run_scenario("heavy-ball", &wrong_dim).is_err());
    let infeasible = Overrides { mu: Some(3.0), ..Default::default() };
    assert!(run_scenario("gradient-projection", &infeasible).is_err());
}

#[test]
fn rescale_scenario_matches() {
    let o = Overrides { horizon: Some(4.0), step: Some(1e-3), ..Default::default() };
    let r = run_scenario("rescale-check", &o).unwrap();
    assert!(r.summary.flags["condition_product_bit_identical"]);
    assert!(r.summary.residuals["rescale_sup_error"] <= 1e-6, "{:?}", r.summary.residuals);
}

#[test]
fn sharpness_scenario_reports_classification() {
    let r = run_scenario("sharpness-sweep", &Overrides::default()).unwrap();
    assert!(!r.summary.flags["nonconverging"]);
    let o = Overrides { gamma: Some(1.0), theta: Some(0.5), ..Default::default() };
    let r = run_scenario("sharpness-sweep", &o).unwrap();
    assert!(r.summary.flags["nonconverging"] && r.summary.flags["simulation_agrees"]);
    assert!(!r.summary.pass);
}
