//! The forced transition problem: a Taylor–Green mode whose amplitude
//! follows smooth plateaus, so the solution is quiet except near the
//! switches. Used for rejection placement and work-precision studies.

use std::sync::Arc;

use rayon::prelude::*;
use tfilter::problems::Plateaus;
use tfilter::{difference, integrate, ControllerConfig, DriverConfig, LinearSpace, Mode, Trajectory};
use tfilter_spectral::{forced_tg_problem, tg_mode, Grid, NseSolver, VelocityField};

use crate::error::CliError;
use crate::table::Table;

/// Width of the windows after each rise and before each fall of the
/// forcing amplitude.
pub const WINDOW: f64 = 0.5;

#[derive(Debug, Clone)]
pub struct TransitionProblem {
    pub grid: Grid,
    pub nu: f64,
    pub plateaus: Plateaus,
    pub solver: NseSolver,
}

impl TransitionProblem {
    pub fn new(n: usize, nu: f64) -> Result<Self, CliError> {
        let grid = Grid::new(n).map_err(|e| CliError::config(e.to_string()))?;
        let plateaus = Plateaus::default();
        let (f, df) = (plateaus.clone(), plateaus.clone());
        let solver = forced_tg_problem(
            grid.clone(),
            nu,
            Arc::new(move |t| f.value(t)),
            Arc::new(move |t| df.derivative(t)),
        );
        Ok(Self {
            grid,
            nu,
            plateaus,
            solver,
        })
    }

    /// The exact velocity, `F(t)` times the mode.
    pub fn exact(&self, t: f64) -> VelocityField {
        tg_mode(&self.grid).scaled(self.plateaus.value(t))
    }

    pub fn initial(&self) -> VelocityField {
        self.exact(0.0)
    }

    /// Relative discrete `l2(L2)` error over the accepted steps:
    /// `sqrt(Σ dt |u_n - u(t_n)|² / Σ dt |u(t_n)|²)`.
    pub fn relative_error(&self, traj: &Trajectory<VelocityField>) -> f64 {
        let (mut num, mut den) = (0.0, 0.0);
        for (step, u) in traj.steps.iter().zip(&traj.states) {
            let exact = self.exact(step.t);
            num += step.dt * difference(u, &exact).expect("matching fields").norm().powi(2);
            den += step.dt * exact.norm().powi(2);
        }
        (num / den).sqrt()
    }

    /// Whether `[t, t + dt]` meets a transition window.
    pub fn in_window(&self, t: f64, dt: f64) -> bool {
        self.plateaus.windows(WINDOW).iter().any(|&(a, b)| t < b && t + dt > a)
    }
}

/// One run with the counts that make up its cost.
#[derive(Debug, Clone)]
pub struct AdaptiveRun {
    pub trajectory: Trajectory<VelocityField>,
    pub accepted: usize,
    pub rejected: usize,
    pub error: f64,
}

impl AdaptiveRun {
    /// Steps taken, rejected ones included.
    pub fn steps_taken(&self) -> usize {
        self.accepted + self.rejected
    }
}

fn run(problem: &TransitionProblem, cfg: &DriverConfig, t_end: f64) -> Result<AdaptiveRun, CliError> {
    let y0 = problem.initial();
    match integrate(&problem.solver, &y0, 0.0, t_end, cfg) {
        Ok((trajectory, stats)) => Ok(AdaptiveRun {
            error: problem.relative_error(&trajectory),
            trajectory,
            accepted: stats.accepted,
            rejected: stats.rejected,
        }),
        Err(failure) => {
            let partial = attempts_table(problem, &failure.trajectory);
            Err(CliError::numerical(failure.to_string(), Some(partial)))
        }
    }
}

/// Adaptive run with the given controller.
pub fn adaptive_run(
    problem: &TransitionProblem,
    controller: ControllerConfig,
    t_end: f64,
) -> Result<AdaptiveRun, CliError> {
    let mut cfg = DriverConfig::adaptive(controller.tol, 0.0, t_end);
    cfg.controller = controller;
    run(problem, &cfg, t_end)
}

/// Constant-step run in a fixed mode.
pub fn constant_run(problem: &TransitionProblem, mode: Mode, dt: f64, t_end: f64) -> Result<AdaptiveRun, CliError> {
    run(problem, &DriverConfig::constant(mode, dt, 0.0, t_end), t_end)
}

/// Fraction of rejected attempts whose interval meets a transition
/// window; `None` without rejections.
pub fn rejections_in_windows(problem: &TransitionProblem, traj: &Trajectory<VelocityField>) -> Option<f64> {
    let rejected: Vec<_> = traj.attempts.iter().filter(|a| !a.accepted).collect();
    if rejected.is_empty() {
        return None;
    }
    let inside = rejected.iter().filter(|a| problem.in_window(a.t, a.dt)).count();
    Some(inside as f64 / rejected.len() as f64)
}

pub fn attempts_table(problem: &TransitionProblem, traj: &Trajectory<VelocityField>) -> Table {
    let mut t = Table::new(&["t", "dt", "accepted", "order", "est1", "est2", "in_window"]);
    for a in &traj.attempts {
        t.push(vec![
            a.t.into(),
            a.dt.into(),
            a.accepted.into(),
            a.order.map_or(crate::table::Cell::Empty, |o| usize::from(o).into()),
            a.est1.into(),
            a.est2.into(),
            problem.in_window(a.t, a.dt).into(),
        ]);
    }
    t
}

/// One point of a work-precision curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorkPoint {
    /// Tolerance (adaptive) or step size (constant).
    pub parameter: f64,
    pub steps: usize,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorkPrecision {
    pub adaptive: Vec<WorkPoint>,
    pub constant: Vec<WorkPoint>,
}

impl WorkPrecision {
    pub fn table(&self) -> Table {
        let mut t = Table::new(&["method", "parameter", "steps", "error"]);
        for (name, pts) in [("vsvo12", &self.adaptive), ("constant2", &self.constant)] {
            for p in pts {
                t.push(vec![name.into(), p.parameter.into(), p.steps.into(), p.error.into()]);
            }
        }
        t
    }

    /// The constant-step error at `steps`, interpolated linearly in
    /// log-log; `None` outside the sampled range.
    pub fn constant_error_at(&self, steps: usize) -> Option<f64> {
        let mut pts: Vec<(f64, f64)> = self
            .constant
            .iter()
            .map(|p| ((p.steps as f64).ln(), p.error.ln()))
            .collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let x = (steps as f64).ln();
        pts.windows(2).find(|w| w[0].0 <= x && x <= w[1].0).map(|w| {
            let s = if w[1].0 > w[0].0 {
                (x - w[0].0) / (w[1].0 - w[0].0)
            } else {
                0.0
            };
            (w[0].1 + s * (w[1].1 - w[0].1)).exp()
        })
    }
}

/// Step counts for the constant-step curve: roughly geometric from 40 to
/// 40 · 2^9.
pub fn constant_step_sizes(t_end: f64) -> Vec<f64> {
    (0..10).map(|k| t_end / (40.0 * 2f64.powi(k))).collect()
}

pub fn work_precision(
    problem: &TransitionProblem,
    base: &ControllerConfig,
    tols: &[f64],
    dts: &[f64],
    t_end: f64,
) -> Result<WorkPrecision, CliError> {
    let adaptive: Vec<Result<WorkPoint, CliError>> = tols
        .par_iter()
        .map(|&tol| {
            let c = ControllerConfig { tol, ..base.clone() };
            let r = adaptive_run(problem, c, t_end)?;
            Ok(WorkPoint {
                parameter: tol,
                steps: r.steps_taken(),
                error: r.error,
            })
        })
        .collect();
    let constant: Vec<Result<WorkPoint, CliError>> = dts
        .par_iter()
        .map(|&dt| {
            let r = constant_run(problem, Mode::ConstantOrder2, dt, t_end)?;
            Ok(WorkPoint {
                parameter: dt,
                steps: r.steps_taken(),
                error: r.error,
            })
        })
        .collect();

    let mut out = WorkPrecision {
        adaptive: Vec::new(),
        constant: Vec::new(),
    };
    for p in adaptive {
        match p {
            Ok(p) => out.adaptive.push(p),
            Err(e) => return Err(with_partial(e, &out)),
        }
    }
    for p in constant {
        match p {
            Ok(p) => out.constant.push(p),
            Err(e) => return Err(with_partial(e, &out)),
        }
    }
    Ok(out)
}

fn with_partial(e: CliError, done: &WorkPrecision) -> CliError {
    match e {
        CliError::Numerical { message, .. } => CliError::numerical(message, Some(done.table())),
        other => other,
    }
}
