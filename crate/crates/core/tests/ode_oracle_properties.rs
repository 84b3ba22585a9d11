use dampwave::ode_oracle::*;
use dampwave::ModelParams;
use proptest::prelude::*;

fn fixture() -> KatoProblem {
    KatoProblem::on_envelope(3.0, 1.0, 0.0, 1.0, 1.0, 0.1, 0.0).unwrap()
}

#[test]
fn cubic_family_blowup_time() {
    for delta in [0.5, 1.0, 2.0] {
        let rep = integrate_blowup(&KatoProblem::cubic_exact(delta).unwrap(), 1e6, 100.0).unwrap();
        let exact = 2f64.sqrt() / delta;
        assert!(((rep.lifespan().unwrap() - exact) / exact).abs() < 0.01);
    }
}

#[test]
fn shifted_cubic_solution() {
    // f = √2/(2 − t) from f(0) = √2/2, f'(0) = √2/4
    let mut prob = KatoProblem::cubic_exact(2f64.sqrt() / 2.0).unwrap();
    assert!((prob.fprime_init - 2f64.sqrt() / 4.0).abs() < 1e-15);
    prob.radius = 1.0;
    let t = integrate_blowup(&prob, 1e6, 100.0).unwrap().lifespan().unwrap();
    assert!((t - 2.0).abs() < 0.02);
}

#[test]
fn exact_family_sweep_has_unit_slope() {
    let deltas = [0.1, 0.2, 0.5, 1.0, 2.0];
    let ts: Vec<f64> = deltas
        .iter()
        .map(|&d| integrate_blowup(&KatoProblem::cubic_exact(d).unwrap(), 1e6, 1e3).unwrap().lifespan().unwrap())
        .collect();
    let fit = dampwave::PowerLawFit::fit(&deltas, &ts).unwrap();
    assert!((fit.slope + 1.0).abs() < 0.02);
}

#[test]
fn threshold_independence() {
    for delta in [0.01, 0.1, 1.0] {
        let prob = fixture().with_delta(delta).unwrap();
        let a = integrate_blowup(&prob, 1e6, 1e4).unwrap().lifespan().unwrap();
        let b = integrate_blowup(&prob, 1e9, 1e4).unwrap().lifespan().unwrap();
        assert!(((a - b) / a).abs() < 1e-3);
    }
}

#[test]
fn refinement_changes_less_than_uncertainty() {
    let prob = fixture();
    let coarse = integrate_blowup(&prob, 1e6, 1e4).unwrap();
    let opts = OracleOptions { rtol: 0.5e-10, atol: 0.5e-12, ..Default::default() };
    let fine = integrate_blowup_with(&prob, 1e6, 1e4, opts).unwrap();
    let shift = (coarse.lifespan().unwrap() - fine.lifespan().unwrap()).abs();
    assert!(shift <= coarse.t_uncertainty.unwrap(), "{shift} vs {:?}", coarse.t_uncertainty);
}

#[test]
fn sweep_is_monotone_with_negative_slope() {
    let deltas: Vec<f64> = (0..5).map(|i| 0.01 * 10f64.powf(i as f64 / 2.0)).collect();
    let s = sweep_delta(&fixture(), &deltas, 1e6, 1e4, 2).unwrap();
    assert!(s.monotone);
    assert!(s.fit.slope < 0.0);
    assert!((s.expected_slope + 0.5).abs() < 1e-15);
    let serial = sweep_delta(&fixture(), &deltas, 1e6, 1e4, 1).unwrap();
    assert_eq!(serial, s);
}

#[test]
fn sweep_preconditions() {
    assert!(sweep_delta(&fixture(), &[0.1, 0.2, 0.3], 1e6, 1e4, 1).is_err());
    assert!(sweep_delta(&fixture(), &[0.1, 0.2, 0.3, 0.5], 1e6, 1e4, 1).is_err());
    assert!(sweep_delta(&fixture(), &[0.2, 0.1, 0.3, 5.0], 1e6, 1e4, 1).is_err());
    // short horizon: no blow-up
    let err = sweep_delta(&fixture(), &[0.01, 0.1, 0.5, 1.0], 1e6, 2.0, 1).unwrap_err();
    assert!(matches!(err, dampwave::Error::NoBlowup { value, .. } if value == 0.01));
}

#[test]
fn kato_link_for_three_dimensions() {
    // (a, q) = (3, 4): the equality ODE has the separatrix 2(t+R)^2, so the
    // envelope data only blows up once it starts above it
    let params = ModelParams::new(3, 0.5, 2.0, 0.5, 1.0).unwrap();
    let low = verify_kato_link(&params, 1.0, 1e6, 1e12).unwrap();
    assert!((low.ode_exponent - 2.0).abs() < 1e-12);
    assert!(low.identity_error < 1e-12);
    assert!(!low.report.blew_up);
    let high = verify_kato_link(&params, 16.0, 1e6, 1e12).unwrap();
    assert!(high.report.blew_up, "{:?}", high.report);
}

proptest! {
    #[test]
    fn larger_delta_blows_up_no_later(d1 in 0.02f64..1.0, factor in 1.05f64..3.0) {
        let a = integrate_blowup(&fixture().with_delta(d1).unwrap(), 1e6, 1e4).unwrap().lifespan().unwrap();
        let b = integrate_blowup(&fixture().with_delta(d1 * factor).unwrap(), 1e6, 1e4).unwrap().lifespan().unwrap();
        prop_assert!(b <= a);
    }
}
