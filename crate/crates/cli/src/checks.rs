//! The `verify` command: algebraic identities, estimator exactness,
//! equivalence of the two formulations, stencil consistency and the
//! stiff-limit probe, each reported as a value against a threshold.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tfilter::problems::{cubic, decay};
use tfilter::verify::{
    a_stability_probe, check_equivalence, check_g_form, check_identity, consistency_rates, g_energy, Smooth, G_MATRIX,
};
use tfilter::{est2, Est2Weights, StepRatios};

use crate::error::CliError;
use crate::table::Table;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl Check {
    fn at_most(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            value,
            threshold,
            pass: value <= threshold,
        }
    }

    fn within(name: impl Into<String>, value: f64, lo: f64, hi: f64) -> Self {
        Self {
            name: name.into(),
            value,
            threshold: if value < lo { lo } else { hi },
            pass: (lo..=hi).contains(&value),
        }
    }
}

pub fn checks_table(checks: &[Check]) -> Table {
    let mut t = Table::new(&["check", "value", "threshold", "pass"]);
    for c in checks {
        t.push(vec![
            c.name.clone().into(),
            c.value.into(),
            c.threshold.into(),
            c.pass.into(),
        ]);
    }
    t
}

/// Worst scaled residuals of the stencil identity and of the G-form over
/// random arguments, plus the exact G entries.
pub fn identity_checks(trials: usize, seed: u64) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst_identity = 0.0f64;
    let mut worst_g = 0.0f64;
    for _ in 0..trials {
        let [a, b, c]: [f64; 3] = std::array::from_fn(|_| rng.random_range(-10.0..10.0));
        worst_identity = worst_identity.max(check_identity(a, b, c) / (1.0 + a * a + b * b + c * c));
        let dim = rng.random_range(1..8usize);
        let u: Vec<f64> = (0..dim).map(|_| rng.random_range(-5.0..5.0)).collect();
        let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-5.0..5.0)).collect();
        let scale = 1.0 + g_energy(&u, &v).expect("same length");
        worst_g = worst_g.max(check_g_form(&u, &v).expect("same length") / scale);
    }
    let g_exact = G_MATRIX == [[1.5, -0.75], [-0.75, 0.5]];
    vec![
        Check::at_most("stencil identity residual", worst_identity, 1e-12),
        Check::at_most("g-form residual", worst_g, 1e-12),
        Check {
            name: "g matrix entries".into(),
            value: if g_exact { 0.0 } else { 1.0 },
            threshold: 0.0,
            pass: g_exact,
        },
    ]
}

/// EST2 on quadratic data over random variable-step histories, and the
/// constant-step prefactor.
pub fn estimator_checks(trials: usize, seed: u64) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let r = rng.random_range(0.1..5.0);
        let q = rng.random_range(0.1..5.0);
        let dt = rng.random_range(1e-3..1.0);
        let [a, b, c]: [f64; 3] = std::array::from_fn(|_| rng.random_range(-3.0..3.0));
        let y = |t: f64| a + b * t + c * t * t;
        let ts = [1.0, 1.0 - dt, 1.0 - dt - dt / r, 1.0 - dt - dt / r - dt / (r * q)];
        let ys = ts.map(y);
        let e = est2(
            &ys[0],
            &ys[1],
            &ys[2],
            &ys[3],
            StepRatios::new(r, q).expect("positive ratios"),
        )
        .expect("scalar");
        let scale: f64 = ys.iter().map(|v| v.abs()).sum::<f64>().max(1e-300);
        worst = worst.max(e.abs() / scale);
    }
    let prefactor = Est2Weights::new(StepRatios::constant()).expect("unit ratios").prefactor;
    vec![
        Check::at_most("est2 on quadratics", worst, 1e-12),
        Check::at_most(
            "est2 constant-step prefactor - 2/11",
            (prefactor - 2.0 / 11.0).abs(),
            1e-16,
        ),
    ]
}

/// Filtered backward Euler against the one-leg form over 100 steps.
pub fn equivalence_checks() -> Result<Vec<Check>, CliError> {
    let mut out = Vec::new();
    for reference in [decay(), cubic()] {
        let tol = 10.0 * reference.problem.solver.tol;
        let report = check_equivalence(&reference.problem, reference.t0, reference.y0, 0.01, 100)
            .map_err(|e| CliError::numerical(e, None))?;
        out.push(Check::at_most(
            format!("equivalence state {}", reference.name),
            report.state,
            tol,
        ));
        out.push(Check::at_most(
            format!("equivalence option A {}", reference.name),
            report.pressure_a,
            tol,
        ));
        out.push(Check::at_most(
            format!("equivalence option B {}", reference.name),
            report.pressure_b,
            tol,
        ));
    }
    Ok(out)
}

/// Stencil gaps for `sin t` with their slopes and integral bounds.
pub fn consistency_checks() -> Vec<Check> {
    let dts = [0.1, 0.05, 0.025, 0.0125, 0.00625];
    let r = consistency_rates(Smooth::SINE, 1.0, &dts);
    let mut out = vec![
        Check::within("difference stencil slope", r.d_gap.slope, 1.9, 2.1),
        Check::within("interpolation stencil slope", r.i_gap.slope, 1.9, 2.1),
    ];
    for (i, dt) in dts.iter().enumerate() {
        out.push(Check::at_most(
            format!("difference gap squared at dt={dt}"),
            r.d_gap.errors[i].powi(2),
            r.d_bound[i],
        ));
        out.push(Check::at_most(
            format!("interpolation gap squared at dt={dt}"),
            r.i_gap.errors[i].powi(2),
            r.i_bound[i],
        ));
    }
    out
}

/// `y' = λy` at `λ dt = -1e6` for 100 steps.
pub fn stability_checks() -> Result<Vec<Check>, CliError> {
    let probe = a_stability_probe(-1e6, 100).map_err(|e| CliError::numerical(e, None))?;
    let target = (1.0f64 / 3.0).sqrt();
    let flag = |name: &str, ok: bool| Check {
        name: name.into(),
        value: if ok { 1.0 } else { 0.0 },
        threshold: 1.0,
        pass: ok,
    };
    Ok(vec![
        flag("stiff energies monotone", probe.monotone),
        flag("stiff iterates bounded", probe.bounded),
        Check::at_most("stiff ratio - sqrt(1/3)", (probe.fitted_ratio - target).abs(), 1e-3),
    ])
}

pub fn all_checks(trials: usize, seed: u64) -> Result<Vec<Check>, CliError> {
    let mut out = identity_checks(trials, seed);
    out.extend(estimator_checks(trials, seed.wrapping_add(1)));
    out.extend(equivalence_checks()?);
    out.extend(consistency_checks());
    out.extend(stability_checks()?);
    Ok(out)
}
