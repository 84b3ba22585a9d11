use dampwave::exponents::regime_constants;
use dampwave::functionals::*;
use dampwave::radial::{solve_transformed, SolverConfig};
use dampwave::specfun::Clock;
use dampwave::transform::build_transformed_profile;
use dampwave::{DataProfile, LambdaWeight, ModelParams, PhiFunction, RadialField, RadialGrid};
use proptest::prelude::*;
use std::f64::consts::PI;

fn bump3(count: usize) -> RadialField {
    RadialField::from_fn(RadialGrid::new(count, 2.0).unwrap(), |r| (1.0 - r * r).max(0.0).powi(3)).unwrap()
}

#[test]
fn f_matches_closed_form_and_converges() {
    let exact = 4.0 * PI * 16.0 / 315.0;
    let errs: Vec<f64> = [257, 513, 1025].iter().map(|&c| (functional_f(&bump3(c), 3) - exact).abs()).collect();
    assert!(errs[2] / exact < 1e-4);
    for w in errs.windows(2) {
        // at least second order; the smooth vanishing at r = 1 gives more
        let ratio = w[0] / w[1];
        assert!(ratio > 3.0, "ratio {ratio}");
    }
}

#[test]
fn f1_matches_direct_sum_at_t0() {
    let rc = regime_constants(0.5).unwrap();
    let weight = LambdaWeight::from_regime(&rc, Clock::Bracket).unwrap();
    let phi = PhiFunction::with_default_nodes(3).unwrap();
    let field = bump3(201);
    let table = PhiTable::new(&phi, field.grid).unwrap();
    let got = functional_f1(&field, rc.t0, &weight, &table, 3).unwrap();
    let w = field.grid.volume_weights(3);
    let direct: f64 = (0..field.grid.count).map(|i| w[i] * field.values[i] * phi.eval(field.grid.r(i)).unwrap()).sum();
    // λ(t₀) = 1
    assert!(((got - direct) / direct).abs() < 1e-12, "{got} vs {direct}");
    assert!(PhiTable::new(&PhiFunction::with_default_nodes(2).unwrap(), RadialGrid::new(64, 1.0).unwrap())
        .map(|t| functional_f1(&field, rc.t0, &weight, &t, 3).is_err())
        .unwrap());
}

#[test]
fn weighted_integral_ratio_settles() {
    for (n, p, mu) in [(2, 2.0, 0.5), (2, 2.0, 1.5), (3, 2.0, 0.5)] {
        let params = ModelParams::new(n, mu, p, 1.0, 1.0).unwrap();
        let rc = regime_constants(mu).unwrap();
        let weight = LambdaWeight::from_regime(&rc, Clock::Bracket).unwrap();
        let phi = PhiFunction::with_default_nodes(n).unwrap();
        let r: Vec<f64> = [10.0, 20.0, 40.0].iter().map(|&t| lemma22_ratio(t, &params, &weight, &phi).unwrap().ratio).collect();
        assert!(r.iter().all(|x| x.is_finite() && *x > 0.0));
        // successive doublings change the ratio by less and less
        assert!((r[2] / r[1] - 1.0).abs() <= (r[1] / r[0] - 1.0).abs() + 1e-3, "{n} {mu}: {r:?}");
    }
}

fn transformed_run(mu: f64, eps: f64, source: bool) -> (FunctionalTrace, dampwave::Trajectory) {
    let params = ModelParams::new(2, mu, 2.0, eps, 1.0).unwrap();
    let tp = build_transformed_profile(&params, &DataProfile::default()).unwrap();
    let cfg = SolverConfig { count: 257, t_max: 6.0, frame_interval: Some(0.25), source_enabled: source, ..Default::default() };
    let traj = solve_transformed(&tp, &cfg).unwrap();
    let rc = regime_constants(mu).unwrap();
    let weight = LambdaWeight::from_regime(&rc, Clock::Bracket).unwrap();
    let phi = PhiFunction::with_default_nodes(2).unwrap();
    (FunctionalTrace::from_trajectory(&traj, &tp, &weight, &phi).unwrap(), traj)
}

#[test]
fn linear_traces_scale_with_epsilon() {
    let (a, _) = transformed_run(0.5, 1.0, false);
    let (b, _) = transformed_run(0.5, 0.25, false);
    for k in 0..a.len() {
        assert!((0.25 * a.f[k] - b.f[k]).abs() <= 1e-12 * a.f[k].abs().max(1.0));
        assert!((0.25 * a.f1[k] - b.f1[k]).abs() <= 1e-12 * a.f1[k].abs().max(1.0));
    }
}

#[test]
fn f1_stays_positive_after_the_threshold() {
    for mu in [0.5, 1.5] {
        let (trace, _) = transformed_run(mu, 0.5, true);
        let win = check_f1_lower(&trace, 0.5).unwrap();
        assert!(win.frames > 0);
        assert!(win.minimum > 0.0, "mu {mu}: {win:?}");
    }
}

#[test]
fn holder_chain_holds_on_the_grid() {
    for mu in [0.5, 1.5] {
        let (trace, traj) = transformed_run(mu, 0.5, true);
        let rep = check_chain(&trace, &traj).unwrap();
        assert!(rep.frames_used > 0);
        assert!(rep.holder_ok, "mu {mu}: {rep:?}");
        assert!(rep.holder_f_max <= 1.0 + HOLDER_TOLERANCE);
        assert!(rep.holder_f1_max <= 1.0 + HOLDER_TOLERANCE);
        assert!(rep.c1_min > 0.0 && rep.c2_min > 0.0);
    }
}

#[test]
fn f_is_convex_for_nonnegative_data() {
    let (trace, _) = transformed_run(0.5, 0.5, true);
    assert!((0..trace.len()).all(|k| trace.second_derivative(k) > 0.0));
    assert!(trace.f.windows(2).take(4).all(|w| w[1] > w[0]));
}

proptest! {
    #[test]
    fn f_is_linear(a in -5.0f64..5.0, b in -5.0f64..5.0) {
        let g = RadialGrid::new(129, 3.0).unwrap();
        let u = RadialField::from_fn(g, |r| (-r * r).exp()).unwrap();
        let v = RadialField::from_fn(g, |r| (1.0 - r).max(0.0)).unwrap();
        let mix = RadialField::new(g, u.values.iter().zip(&v.values).map(|(x, y)| a * x + b * y).collect()).unwrap();
        let lhs = functional_f(&mix, 2);
        let rhs = a * functional_f(&u, 2) + b * functional_f(&v, 2);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
    }
}
