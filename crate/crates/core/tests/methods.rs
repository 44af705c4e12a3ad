use tfilter::problems::{cubic, decay, fast_sine, ScalarReference};
use tfilter::verify::{
    a_stability_probe, characteristic_roots, check_equivalence, consistency_rates, filtered_local_errors, fit_slope,
    Smooth,
};
use tfilter::{integrate, DriverConfig, Mode};

fn final_error(reference: &ScalarReference, mode: Mode, dt: f64, t_end: f64) -> f64 {
    let cfg = DriverConfig::constant(mode, dt, reference.t0, t_end);
    let (traj, _) = integrate(&reference.problem, &reference.y0, reference.t0, t_end, &cfg).unwrap();
    (traj.final_state - (reference.exact)(t_end)).abs()
}

const DTS: [f64; 4] = [0.1, 0.05, 0.025, 0.0125];

#[test]
fn decay_convergence_orders() {
    let p = decay();
    let slope = |mode| {
        let errs: Vec<f64> = DTS.iter().map(|&dt| final_error(&p, mode, dt, 1.0)).collect();
        fit_slope(&DTS, &errs)
    };
    let be = slope(Mode::ConstantOrder1);
    let filtered = slope(Mode::ConstantOrder2);
    let double = slope(Mode::ConstantDoubleFilter);
    assert!((0.9..=1.1).contains(&be), "{be}");
    assert!((1.9..=2.1).contains(&filtered), "{filtered}");
    assert!((1.9..=2.1).contains(&double), "{double}");
}

#[test]
fn double_filter_wins_when_third_derivative_dominates() {
    let p = fast_sine();
    for &dt in &DTS {
        let single = final_error(&p, Mode::ConstantOrder2, dt, 1.0);
        let double = final_error(&p, Mode::ConstantDoubleFilter, dt, 1.0);
        assert!(double < single, "dt={dt}: {double} vs {single}");
    }
    // Local errors from exact history show the leading term removed.
    let local: Vec<_> = [0.02, 0.01, 0.005]
        .iter()
        .map(|&dt| filtered_local_errors(&p.problem, p.exact, 1.0, dt).unwrap())
        .collect();
    for e in &local {
        assert!(e.double < e.single);
    }
}

#[test]
fn filtered_and_one_leg_forms_agree() {
    for reference in [decay(), cubic()] {
        let tol = reference.problem.solver.tol;
        let report = check_equivalence(&reference.problem, 0.0, reference.y0, 0.01, 100).unwrap();
        assert!(report.state <= 10.0 * tol, "{}: {:?}", reference.name, report);
        assert!(report.pressure_a <= 10.0 * tol, "{}: {:?}", reference.name, report);
        assert!(report.pressure_b <= 10.0 * tol, "{}: {:?}", reference.name, report);
    }
}

#[test]
fn stencil_consistency_on_sine() {
    let dts = [0.1, 0.05, 0.025, 0.0125, 0.00625];
    let report = consistency_rates(Smooth::SINE, 1.0, &dts);
    assert!((1.9..=2.1).contains(&report.d_gap.slope), "{}", report.d_gap.slope);
    assert!((1.9..=2.1).contains(&report.i_gap.slope), "{}", report.i_gap.slope);
    assert!(report.within_bounds());
}

#[test]
fn stiff_limit_ratio_matches_characteristic_root() {
    let z = -1e6;
    let [(re, im), _] = characteristic_roots(z);
    let modulus = re.hypot(im);
    assert!((modulus - (1.0f64 / 3.0).sqrt()).abs() < 1e-5);
    let probe = a_stability_probe(z, 100).unwrap();
    assert!(probe.monotone && probe.bounded);
    assert!(
        (probe.fitted_ratio - (1.0f64 / 3.0).sqrt()).abs() < 1e-3,
        "{}",
        probe.fitted_ratio
    );
}

#[test]
fn characteristic_roots_stay_in_unit_disk() {
    for k in 0..200 {
        let z = -10f64.powf(-4.0 + 0.05 * k as f64);
        for (re, im) in characteristic_roots(z) {
            assert!(re.hypot(im) < 1.0, "z={z}");
        }
    }
}

#[test]
fn adaptive_run_meets_tolerance_on_decay() {
    let p = decay();
    let mut last = f64::INFINITY;
    for tol in [1e-3, 1e-5, 1e-7] {
        let cfg = DriverConfig::adaptive(tol, 0.0, 2.0);
        let (traj, stats) = integrate(&p.problem, &p.y0, 0.0, 2.0, &cfg).unwrap();
        let err = (traj.final_state - (p.exact)(2.0)).abs();
        assert!(err < last);
        // Error per step control: the global error grows at most with the step count.
        assert!(err < 5.0 * stats.accepted as f64 * tol, "tol={tol} err={err}");
        assert!(stats.accepted_order2 > 0);
        last = err;
    }
}
