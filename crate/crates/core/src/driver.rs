//! The integration loop.
//!
//! Each attempted step computes the backward Euler value, filters it, and
//! forms the embedded estimates from the accepted history. In adaptive
//! mode the controller then keeps one of the two values (or rejects the
//! step); in the constant modes the step size is fixed and every step is
//! kept.
//!
//! Starting a two-step method needs care: the first step is plain
//! backward Euler with step doubling for error control, the second keeps
//! the filtered value under `EST1` control alone, and from the third step
//! on both estimates are available. The constant second-order modes
//! start from the Richardson extrapolation of the step-doubled pair.

use std::collections::VecDeque;
use std::time::{Duration, Instant};

use crate::controller::{decide, ControllerConfig, EstimateNorms, Verdict};
use crate::error::{Error, SolveError};
use crate::estimators::ErrorEstimates;
use crate::filters::{filter_order2, filter_second, StepRatios};
use crate::lin_space::{difference, LinearSpace};
use crate::stepper::{linearization_point, Problem};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Variable step, variable order 1/2.
    Vsvo12,
    /// Plain backward Euler at fixed step.
    ConstantOrder1,
    /// Backward Euler plus one filter at fixed step.
    ConstantOrder2,
    /// Backward Euler plus both filters at fixed step.
    ConstantDoubleFilter,
}

impl Mode {
    pub fn is_adaptive(self) -> bool {
        self == Mode::Vsvo12
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Variant {
    /// Fully implicit backward Euler.
    #[default]
    Implicit,
    /// Nonlinearity linearized about an extrapolated state.
    LinearlyImplicit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DriverConfig {
    pub mode: Mode,
    pub variant: Variant,
    pub controller: ControllerConfig,
    /// Initial step (adaptive) or the fixed step (constant modes).
    pub dt0: f64,
    /// Keep every accepted state in the trajectory.
    pub keep_states: bool,
}

impl DriverConfig {
    pub fn adaptive(tol: f64, t0: f64, t_end: f64) -> Self {
        Self {
            mode: Mode::Vsvo12,
            variant: Variant::Implicit,
            controller: ControllerConfig::for_span(tol, t0, t_end),
            dt0: (t_end - t0) * 1e-4,
            keep_states: true,
        }
    }

    pub fn constant(mode: Mode, dt: f64, t0: f64, t_end: f64) -> Self {
        Self {
            mode,
            dt0: dt,
            ..Self::adaptive(1.0, t0, t_end)
        }
    }

    pub fn with_variant(mut self, variant: Variant) -> Self {
        self.variant = variant;
        self
    }

    pub fn with_keep_states(mut self, keep: bool) -> Self {
        self.keep_states = keep;
        self
    }
}

/// The last (at most four) accepted states, newest first.
#[derive(Debug, Clone)]
pub struct HistoryWindow<S> {
    entries: VecDeque<(f64, S)>,
}

impl<S: LinearSpace> HistoryWindow<S> {
    const CAPACITY: usize = 4;

    pub fn new(t0: f64, y0: S) -> Self {
        let mut entries = VecDeque::with_capacity(Self::CAPACITY + 1);
        entries.push_front((t0, y0));
        Self { entries }
    }

    pub fn push(&mut self, t: f64, y: S) {
        debug_assert!(t > self.time(0), "history times must increase");
        self.entries.push_front((t, y));
        self.entries.truncate(Self::CAPACITY);
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Time of the `k`-th newest state.
    pub fn time(&self, k: usize) -> f64 {
        self.entries[k].0
    }

    pub fn state(&self, k: usize) -> &S {
        &self.entries[k].1
    }

    /// Ratios for a step of size `dt` from the newest state. Needs two
    /// states; with only two, `previous` is reported as 1.
    pub fn ratios(&self, dt: f64) -> Option<StepRatios> {
        if self.len() < 2 {
            return None;
        }
        let h0 = self.time(0) - self.time(1);
        let previous = if self.len() >= 3 {
            h0 / (self.time(1) - self.time(2))
        } else {
            1.0
        };
        Some(StepRatios {
            current: dt / h0,
            previous,
        })
    }
}

/// One accepted step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    /// Time reached by the step.
    pub t: f64,
    pub dt: f64,
    /// Order of the kept value: 1 for backward Euler (including the
    /// step-doubled start), 2 for filtered values.
    pub order: u8,
    /// The first step, taken by backward Euler step doubling. Order 1
    /// keeps the two-half-step value, order 2 its extrapolation.
    pub startup: bool,
    /// The step kept the doubly filtered value.
    pub double_filtered: bool,
    /// Estimate norms; recorded in adaptive mode only.
    pub est1: Option<f64>,
    pub est2: Option<f64>,
}

/// One attempted step, accepted or not.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Attempt {
    /// Start of the attempted interval.
    pub t: f64,
    pub dt: f64,
    pub accepted: bool,
    pub order: Option<u8>,
    pub est1: Option<f64>,
    pub est2: Option<f64>,
    pub solver_failed: bool,
}

#[derive(Debug, Clone)]
pub struct Trajectory<S> {
    pub t0: f64,
    pub y0: S,
    pub steps: Vec<StepRecord>,
    /// Accepted states matching `steps`, when kept.
    pub states: Vec<S>,
    pub attempts: Vec<Attempt>,
    pub final_state: S,
}

impl<S> Trajectory<S> {
    pub fn final_time(&self) -> f64 {
        self.steps.last().map_or(self.t0, |s| s.t)
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        std::iter::once(self.t0).chain(self.steps.iter().map(|s| s.t))
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunStatistics {
    pub accepted: usize,
    pub rejected: usize,
    pub accepted_order1: usize,
    pub accepted_order2: usize,
    pub solver_iterations: usize,
    pub solver_failures: usize,
    pub wall_time: Duration,
    /// Time spent inside implicit solves.
    pub solve_time: Duration,
    /// Time spent forming filtered values and estimates.
    pub filter_time: Duration,
}

impl RunStatistics {
    pub fn attempts(&self) -> usize {
        self.accepted + self.rejected
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FailureReason {
    #[error(transparent)]
    Controller(#[from] Error),
    #[error(transparent)]
    Solver(#[from] SolveError),
    #[error("non-finite state at t = {0}")]
    NonFinite(f64),
}

/// An integration that stopped before the final time, with what it
/// produced so far.
#[derive(Debug, Clone)]
pub struct IntegrationFailure<S> {
    pub reason: FailureReason,
    pub trajectory: Trajectory<S>,
    pub stats: RunStatistics,
}

impl<S: std::fmt::Debug> std::fmt::Display for IntegrationFailure<S> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "integration failed at t = {}: {}",
            self.trajectory.final_time(),
            self.reason
        )
    }
}

impl<S: std::fmt::Debug> std::error::Error for IntegrationFailure<S> {}

pub type IntegrationResult<S> = Result<(Trajectory<S>, RunStatistics), IntegrationFailure<S>>;

/// Values produced by one attempted step from the current history.
struct StepValues<S> {
    y_be: S,
    y2: Option<S>,
    y_double: Option<S>,
    estimates: Option<ErrorEstimates<S>>,
}

fn attempt_step<P: Problem>(
    problem: &P,
    hist: &HistoryWindow<P::State>,
    dt: f64,
    cfg: &DriverConfig,
    stats: &mut RunStatistics,
) -> Result<StepValues<P::State>, FailureReason> {
    let t_n = hist.time(0);
    let y_n = hist.state(0);
    let ratios = hist.ratios(dt);

    let lin_point = match (cfg.variant, ratios) {
        (Variant::Implicit, _) => None,
        (Variant::LinearlyImplicit, Some(r)) if cfg.mode != Mode::ConstantOrder1 => {
            Some(linearization_point(y_n, hist.state(1), r.current))
        }
        (Variant::LinearlyImplicit, _) => Some(y_n.clone()),
    };

    let clock = Instant::now();
    let solved = problem.implicit_solve(t_n + dt, y_n, dt, lin_point.as_ref());
    stats.solve_time += clock.elapsed();
    let (y_be, report) = solved?;
    stats.solver_iterations += report.iterations;

    let Some(ratios) = ratios else {
        return Ok(StepValues {
            y_be,
            y2: None,
            y_double: None,
            estimates: None,
        });
    };

    let clock = Instant::now();
    let y2 = filter_order2(&y_be, y_n, hist.state(1), ratios.current)?;
    let estimates = if cfg.mode.is_adaptive() {
        let back: Vec<&P::State> = (0..hist.len().min(3)).map(|k| hist.state(k)).collect();
        Some(ErrorEstimates::compute(&y_be, &y2, &back, ratios)?)
    } else {
        None
    };
    let y_double = if cfg.mode == Mode::ConstantDoubleFilter && hist.len() >= 3 {
        Some(filter_second(&y2, y_n, hist.state(1), hist.state(2), ratios)?)
    } else {
        None
    };
    stats.filter_time += clock.elapsed();

    Ok(StepValues {
        y_be,
        y2: Some(y2),
        y_double,
        estimates,
    })
}

/// Plain backward Euler over `dt` and over two halves.
struct Startup<S> {
    full: S,
    half: S,
    /// `||half - full||`.
    est: f64,
}

impl<S: LinearSpace> Startup<S> {
    /// Richardson extrapolation `2 half - full`, second order.
    fn extrapolated(&self) -> S {
        S::combine_unchecked(&[(2.0, &self.half), (-1.0, &self.full)])
    }
}

fn startup_step<P: Problem>(
    problem: &P,
    t: f64,
    y: &P::State,
    dt: f64,
    cfg: &DriverConfig,
    stats: &mut RunStatistics,
) -> Result<Startup<P::State>, FailureReason> {
    let lin = |y: &P::State| match cfg.variant {
        Variant::Implicit => None,
        Variant::LinearlyImplicit => Some(y.clone()),
    };
    let clock = Instant::now();
    let result = (|| {
        let (full, r1) = problem.implicit_solve(t + dt, y, dt, lin(y).as_ref())?;
        let (mid, r2) = problem.implicit_solve(t + 0.5 * dt, y, 0.5 * dt, lin(y).as_ref())?;
        let (half, r3) = problem.implicit_solve(t + dt, &mid, 0.5 * dt, lin(&mid).as_ref())?;
        Ok::<_, SolveError>((full, half, r1.iterations + r2.iterations + r3.iterations))
    })();
    stats.solve_time += clock.elapsed();
    let (full, half, iterations) = result?;
    stats.solver_iterations += iterations;
    let est = difference(&half, &full)?.norm();
    Ok(Startup { full, half, est })
}

/// Startup estimate for the first adaptive step: `||BE(dt) - BE(dt/2)∘BE(dt/2)||`.
pub fn startup_estimate<P: Problem>(problem: &P, t0: f64, y0: &P::State, dt: f64) -> Result<f64, FailureReason> {
    let cfg = DriverConfig::adaptive(1.0, t0, t0 + dt);
    startup_step(problem, t0, y0, dt, &cfg, &mut RunStatistics::default()).map(|s| s.est)
}

/// Integrate from `t0` to `t_end`.
#[allow(clippy::result_large_err)]
pub fn integrate<P: Problem>(
    problem: &P,
    y0: &P::State,
    t0: f64,
    t_end: f64,
    cfg: &DriverConfig,
) -> IntegrationResult<P::State> {
    integrate_observed(problem, y0, t0, t_end, cfg, |_, _| {})
}

/// [`integrate`], calling `observer` with every accepted step and state.
#[allow(clippy::result_large_err)]
pub fn integrate_observed<P: Problem>(
    problem: &P,
    y0: &P::State,
    t0: f64,
    t_end: f64,
    cfg: &DriverConfig,
    mut observer: impl FnMut(&StepRecord, &P::State),
) -> IntegrationResult<P::State> {
    let start = Instant::now();
    let mut traj = Trajectory {
        t0,
        y0: y0.clone(),
        steps: Vec::new(),
        states: Vec::new(),
        attempts: Vec::new(),
        final_state: y0.clone(),
    };
    let mut stats = RunStatistics::default();

    macro_rules! fail {
        ($reason:expr, $hist:expr) => {{
            stats.wall_time = start.elapsed();
            traj.final_state = $hist.state(0).clone();
            return Err(IntegrationFailure {
                reason: $reason.into(),
                trajectory: traj,
                stats,
            });
        }};
    }

    let mut hist = HistoryWindow::new(t0, y0.clone());
    if t_end.partial_cmp(&t0) != Some(std::cmp::Ordering::Greater) {
        fail!(
            Error::Config(format!("final time {t_end} must exceed start {t0}")),
            hist
        );
    }
    if let Err(e) = cfg.controller.validate() {
        fail!(e, hist);
    }
    if !(cfg.dt0.is_finite() && cfg.dt0 > 0.0) {
        fail!(
            Error::Config(format!("initial step must be positive, got {}", cfg.dt0)),
            hist
        );
    }

    let span = t_end - t0;
    let adaptive = cfg.mode.is_adaptive();
    let mut dt = if adaptive {
        cfg.dt0.min(cfg.controller.dt_max)
    } else {
        cfg.dt0
    };
    let mut rejects: u32 = 0;
    let mut n_steps: u64 = 0;

    while hist.time(0) < t_end {
        let t = hist.time(0);
        let (dt_try, t_new) = if adaptive {
            if t + dt >= t_end - 1e-12 * span {
                (t_end - t, t_end)
            } else {
                (dt, t + dt)
            }
        } else {
            let next = t0 + (n_steps + 1) as f64 * dt;
            if next >= t_end - 1e-9 * dt {
                (t_end - t, t_end)
            } else {
                (next - t, next)
            }
        };

        let mut record_attempt =
            |accepted: bool, order: Option<u8>, est1: Option<f64>, est2: Option<f64>, failed: bool| {
                traj.attempts.push(Attempt {
                    t,
                    dt: dt_try,
                    accepted,
                    order,
                    est1,
                    est2,
                    solver_failed: failed,
                });
            };

        // Startup: step doubling.
        if adaptive && hist.len() == 1 {
            match startup_step(problem, t, hist.state(0), dt_try, cfg, &mut stats) {
                Ok(Startup { half: y, est, .. }) => {
                    let decision = decide(
                        EstimateNorms { est1: est, est2: None },
                        &cfg.controller,
                        dt_try,
                        rejects,
                    );
                    match decision {
                        Ok(d) if d.is_accept() => {
                            record_attempt(true, Some(1), Some(est), None, false);
                            let rec = StepRecord {
                                t: t_new,
                                dt: dt_try,
                                order: 1,
                                startup: true,
                                double_filtered: false,
                                est1: Some(est),
                                est2: None,
                            };
                            if let Err(r) =
                                accept(&mut traj, &mut stats, &mut hist, rec, y, cfg.keep_states, &mut observer)
                            {
                                fail!(r, hist);
                            }
                            rejects = 0;
                            dt = d.next_dt;
                        }
                        Ok(d) => {
                            record_attempt(false, None, Some(est), None, false);
                            stats.rejected += 1;
                            rejects += 1;
                            dt = d.next_dt;
                        }
                        Err(e) => fail!(e, hist),
                    }
                }
                Err(FailureReason::Solver(_)) => {
                    record_attempt(false, None, None, None, true);
                    if let Err(e) = solver_rejection(&cfg.controller, &mut stats, &mut rejects, &mut dt, dt_try) {
                        fail!(e, hist);
                    }
                }
                Err(other) => fail!(other, hist),
            }
            continue;
        }

        // Constant second-order modes start with an extrapolated step so
        // the start does not limit the global order.
        if !adaptive && hist.len() == 1 && cfg.mode != Mode::ConstantOrder1 {
            let start = match startup_step(problem, t, hist.state(0), dt_try, cfg, &mut stats) {
                Ok(s) => s,
                Err(reason) => {
                    record_attempt(false, None, None, None, true);
                    fail!(reason, hist);
                }
            };
            record_attempt(true, Some(2), None, None, false);
            let rec = StepRecord {
                t: t_new,
                dt: dt_try,
                order: 2,
                startup: true,
                double_filtered: false,
                est1: None,
                est2: None,
            };
            if let Err(r) = accept(
                &mut traj,
                &mut stats,
                &mut hist,
                rec,
                start.extrapolated(),
                cfg.keep_states,
                &mut observer,
            ) {
                fail!(r, hist);
            }
            n_steps += 1;
            continue;
        }

        let values = match attempt_step(problem, &hist, dt_try, cfg, &mut stats) {
            Ok(v) => v,
            Err(FailureReason::Solver(e)) => {
                record_attempt(false, None, None, None, true);
                if !adaptive {
                    fail!(e, hist);
                }
                if let Err(e) = solver_rejection(&cfg.controller, &mut stats, &mut rejects, &mut dt, dt_try) {
                    fail!(e, hist);
                }
                continue;
            }
            Err(other) => fail!(other, hist),
        };
        let est1 = values.estimates.as_ref().map(|e| e.est1);
        let est2 = values.estimates.as_ref().and_then(|e| e.est2);

        let (y, order, double) = if adaptive {
            let norms = EstimateNorms {
                est1: est1.expect("filtered step has estimates"),
                est2,
            };
            let d = match decide(norms, &cfg.controller, dt_try, rejects) {
                Ok(d) => d,
                Err(e) => {
                    record_attempt(false, None, est1, est2, false);
                    stats.rejected += 1;
                    fail!(e, hist);
                }
            };
            dt = d.next_dt;
            match d.verdict {
                Verdict::Reject => {
                    record_attempt(false, None, est1, est2, false);
                    stats.rejected += 1;
                    rejects += 1;
                    continue;
                }
                Verdict::Accept { order } => {
                    rejects = 0;
                    let y2 = values.y2.expect("filtered value");
                    // Without EST2 the filtered value is kept under EST1 control.
                    if est2.is_none() || order == 2 {
                        (y2, 2, false)
                    } else {
                        (values.y_be, 1, false)
                    }
                }
            }
        } else {
            match cfg.mode {
                Mode::ConstantOrder1 => (values.y_be, 1, false),
                _ => match (values.y_double, values.y2) {
                    (Some(y3), _) => (y3, 2, true),
                    (None, Some(y2)) => (y2, 2, false),
                    (None, None) => (values.y_be, 1, false),
                },
            }
        };

        record_attempt(true, Some(order), est1, est2, false);
        let rec = StepRecord {
            t: t_new,
            dt: dt_try,
            order,
            startup: false,
            double_filtered: double,
            est1,
            est2,
        };
        if let Err(r) = accept(&mut traj, &mut stats, &mut hist, rec, y, cfg.keep_states, &mut observer) {
            fail!(r, hist);
        }
        n_steps += 1;
    }

    stats.wall_time = start.elapsed();
    traj.final_state = hist.state(0).clone();
    Ok((traj, stats))
}

fn accept<S: LinearSpace>(
    traj: &mut Trajectory<S>,
    stats: &mut RunStatistics,
    hist: &mut HistoryWindow<S>,
    rec: StepRecord,
    y: S,
    keep: bool,
    observer: &mut impl FnMut(&StepRecord, &S),
) -> Result<(), FailureReason> {
    if !y.norm_l2().is_finite() {
        return Err(FailureReason::NonFinite(rec.t));
    }
    stats.accepted += 1;
    if rec.order == 1 {
        stats.accepted_order1 += 1;
    } else {
        stats.accepted_order2 += 1;
    }
    observer(&rec, &y);
    traj.steps.push(rec);
    if keep {
        traj.states.push(y.clone());
    }
    hist.push(rec.t, y);
    Ok(())
}

/// A failed implicit solve counts as a rejection with the step halved.
fn solver_rejection(
    cfg: &ControllerConfig,
    stats: &mut RunStatistics,
    rejects: &mut u32,
    dt: &mut f64,
    dt_try: f64,
) -> Result<(), Error> {
    stats.rejected += 1;
    stats.solver_failures += 1;
    *rejects += 1;
    if *rejects > cfg.max_consecutive_rejects {
        return Err(Error::RejectStorm(*rejects));
    }
    let next = 0.5 * dt_try;
    if next < cfg.dt_min {
        return Err(Error::StepUnderflow {
            dt: next,
            dt_min: cfg.dt_min,
        });
    }
    *dt = next;
    Ok(())
}

/// Recompute the accepted states of a recorded trajectory from its step
/// sizes and kept orders.
pub fn replay<P: Problem>(
    problem: &P,
    y0: &P::State,
    t0: f64,
    steps: &[StepRecord],
    variant: Variant,
) -> Result<Vec<P::State>, FailureReason> {
    let mut hist = HistoryWindow::new(t0, y0.clone());
    let mut out = Vec::with_capacity(steps.len());
    let mut stats = RunStatistics::default();
    let mut cfg = DriverConfig::adaptive(1.0, t0, t0 + 1.0).with_variant(variant);
    for rec in steps {
        let t = hist.time(0);
        let y = if rec.startup {
            let start = startup_step(problem, t, hist.state(0), rec.dt, &cfg, &mut stats)?;
            if rec.order == 2 {
                start.extrapolated()
            } else {
                start.half
            }
        } else {
            cfg.mode = if rec.double_filtered {
                Mode::ConstantDoubleFilter
            } else {
                Mode::ConstantOrder2
            };
            let v = attempt_step(problem, &hist, rec.dt, &cfg, &mut stats)?;
            match (rec.order, rec.double_filtered) {
                (_, true) => v.y_double.expect("double-filtered history"),
                (2, false) => v.y2.expect("filtered history"),
                _ => v.y_be,
            }
        };
        hist.push(rec.t, y.clone());
        out.push(y);
    }
    Ok(out)
}
