//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if
//! any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use tfilter::ControllerConfig;
use tfilter_cli::adaptive::{
    adaptive_run, constant_step_sizes, rejections_in_windows, work_precision, TransitionProblem,
};
use tfilter_cli::checks::{
    consistency_checks, equivalence_checks, estimator_checks, identity_checks, stability_checks, Check,
};
use tfilter_cli::flow::{nse_convergence, nse_energy, overhead};
use tfilter_cli::ode::ode_convergence;
use tfilter_cli::CliError;
use tfilter_spectral::PressureOption;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Result<Verdict, CliError> {
    Ok(Verdict { pass, detail })
}

fn in_range(x: f64, lo: f64, hi: f64) -> bool {
    (lo..=hi).contains(&x)
}

fn from_checks(checks: Vec<Check>) -> Result<Verdict, CliError> {
    let failed: Vec<String> = checks
        .iter()
        .filter(|c| !c.pass)
        .map(|c| format!("{} = {:.3e} (limit {:.3e})", c.name, c.value, c.threshold))
        .collect();
    let worst = if checks.len() <= 6 {
        checks
            .iter()
            .map(|c| format!("{} {:.2e}", c.name, c.value))
            .collect::<Vec<_>>()
            .join(", ")
    } else {
        let slopes: Vec<String> = checks
            .iter()
            .filter(|c| c.name.ends_with("slope"))
            .map(|c| format!("{} {:.4}", c.name, c.value))
            .collect();
        let margin = checks
            .iter()
            .filter(|c| !c.name.ends_with("slope"))
            .map(|c| c.value / c.threshold)
            .fold(0.0f64, f64::max);
        format!(
            "{}; {} checks, largest value/limit {margin:.3}",
            slopes.join(", "),
            checks.len()
        )
    };
    if failed.is_empty() {
        verdict(true, worst)
    } else {
        verdict(false, failed.join("; "))
    }
}

fn within(limit: Duration, elapsed: Duration) -> bool {
    elapsed <= limit
}

fn ode_convergence_criterion() -> Result<Verdict, CliError> {
    let clock = Instant::now();
    let dts = [0.1, 0.05, 0.025, 0.0125];
    let decay = ode_convergence("decay", &dts, 1.0)?;
    let [b, f, d] = decay.slopes();
    let sine = ode_convergence("fast-sine", &dts, 1.0)?;
    let smaller = sine.double.iter().zip(&sine.filtered).all(|(d, s)| d < s);
    let ratio = sine.filtered.last().unwrap() / sine.double.last().unwrap();
    let elapsed = clock.elapsed();
    verdict(
        in_range(b, 0.9, 1.1) && in_range(f, 1.9, 2.1) && in_range(d, 1.9, 2.1) && smaller && within(Duration::from_secs(1), elapsed),
        format!(
            "orders be {b:.4}, filtered {f:.4}, double {d:.4}; fast-sine single/double error at dt=0.0125 {ratio:.2}; {:.3}s",
            elapsed.as_secs_f64()
        ),
    )
}

fn taylor_green_criterion() -> Result<Verdict, CliError> {
    let clock = Instant::now();
    let dts: Vec<f64> = (0..5).map(|k| 0.05 / f64::from(1u32 << k)).collect();
    let s = nse_convergence(64, 1.0, 0.5, &dts)?;
    let [ub, uf, pa, pb] = s.slopes();
    let ordered = s.pressure_a.iter().zip(&s.pressure_b).all(|(a, b)| a <= b);
    let elapsed = clock.elapsed();
    verdict(
        in_range(ub, 0.8, 1.2)
            && in_range(uf, 1.8, 2.2)
            && in_range(pa, 1.8, 2.2)
            && in_range(pb, 1.8, 2.2)
            && ordered
            && within(Duration::from_secs(300), elapsed),
        format!(
            "velocity be {ub:.4}, filtered {uf:.4}; pressure A {pa:.4}, B {pb:.4}; A <= B at every dt: {ordered}; {:.1}s",
            elapsed.as_secs_f64()
        ),
    )
}

fn energy_criterion() -> Result<Verdict, CliError> {
    let mut worst = [0.0f64; 2];
    for (k, forced) in [false, true].into_iter().enumerate() {
        for option in [PressureOption::A, PressureOption::B] {
            let ledger = nse_energy(32, 0.1, 0.01, 50, forced, option, 7)?;
            worst[k] = worst[k].max(ledger.relative_residual());
        }
    }
    verdict(
        worst.iter().all(|&r| r <= 1e-9),
        format!("relative residual unforced {:.2e}, forced {:.2e}", worst[0], worst[1]),
    )
}

fn adaptivity_criterion() -> Result<Verdict, CliError> {
    let clock = Instant::now();
    let t_end = 10.0;
    let problem = TransitionProblem::new(16, 0.01)?;
    let mut base = ControllerConfig::for_span(1e-3, 0.0, t_end);
    base.dt_max = 0.1;
    let run = adaptive_run(&problem, base.clone(), t_end)?;
    let share = rejections_in_windows(&problem, &run.trajectory).unwrap_or(0.0);

    let tols = [1e-4, 1e-5, 1e-6, 1e-7];
    let wp = work_precision(&problem, &base, &tols, &constant_step_sizes(t_end), t_end)?;
    let mut below = true;
    let mut factors = Vec::new();
    for p in &wp.adaptive {
        match wp.constant_error_at(p.steps) {
            Some(c) => {
                below &= p.error < c;
                factors.push(format!("{:.0e}: {:.1}x", p.parameter, c / p.error));
            }
            None => {
                below = false;
                factors.push(format!("{:.0e}: outside constant-step range", p.parameter));
            }
        }
    }
    let elapsed = clock.elapsed();
    verdict(
        share >= 0.6 && below && within(Duration::from_secs(600), elapsed),
        format!(
            "{} of {} rejections in transition windows ({:.0}%); constant/adaptive error at equal steps {}; {:.1}s",
            (share * run.rejected as f64).round(),
            run.rejected,
            100.0 * share,
            factors.join(", "),
            elapsed.as_secs_f64()
        ),
    )
}

fn overhead_criterion() -> Result<Verdict, CliError> {
    let o = overhead(64, 0.01, 0.01, 50, PressureOption::B, 3)?;
    verdict(
        o.fraction() <= 0.05,
        format!(
            "filter {:.4}s vs solve {:.4}s ({:.2}%)",
            o.filter_time.as_secs_f64(),
            o.solve_time.as_secs_f64(),
            100.0 * o.fraction()
        ),
    )
}

fn main() -> ExitCode {
    type Criterion = fn() -> Result<Verdict, CliError>;
    let criteria: [(&str, Criterion); 10] = [
        ("ODE convergence", ode_convergence_criterion),
        ("Taylor-Green temporal convergence", taylor_green_criterion),
        ("energy equality", energy_criterion),
        ("algebraic identities", || from_checks(identity_checks(1000, 2024))),
        ("equivalence", || from_checks(equivalence_checks()?)),
        ("estimator exactness", || from_checks(estimator_checks(1000, 2025))),
        ("A-stability probe", || from_checks(stability_checks()?)),
        ("adaptivity", adaptivity_criterion),
        ("overhead", overhead_criterion),
        ("consistency bounds", || from_checks(consistency_checks())),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let v = run().unwrap_or_else(|e| Verdict {
            pass: false,
            detail: format!("error: {e}"),
        });
        if !v.pass {
            failures += 1;
        }
        println!(
            "criterion {:>2} {:<34} {}  {}",
            i + 1,
            name,
            if v.pass { "PASS" } else { "FAIL" },
            v.detail
        );
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failures,
        criteria.len()
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
