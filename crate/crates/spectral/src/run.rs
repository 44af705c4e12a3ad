//! Constant-step Navier–Stokes runs carrying the pressure along.

use std::time::{Duration, Instant};

use tfilter::{linearization_point, SolveError, Variant};

use crate::field::{ScalarField, VelocityField};
use crate::nse::{filter_step_nse, Convection, NseSolver, PressureOption};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    BackwardEuler,
    Filtered(PressureOption),
}

/// A velocity/pressure pair at time `t`.
#[derive(Debug, Clone)]
pub struct FlowState {
    pub t: f64,
    pub velocity: VelocityField,
    pub pressure: ScalarField,
}

#[derive(Debug, Clone)]
pub struct ConstantRun {
    /// Every state from the first start state on, when kept.
    pub states: Vec<FlowState>,
    pub last: FlowState,
    pub solver_iterations: usize,
    /// Time inside backward Euler solves.
    pub solve_time: Duration,
    /// Time inside the filter steps.
    pub filter_time: Duration,
}

/// March `steps` steps of size `dt` after the last start state.
///
/// `start` holds one or two consecutive states, oldest first. A filtered
/// run given a single state takes its first step with plain backward
/// Euler.
pub fn run_constant(
    solver: &NseSolver,
    scheme: Scheme,
    variant: Variant,
    start: &[FlowState],
    dt: f64,
    steps: usize,
    keep: bool,
) -> Result<ConstantRun, SolveError> {
    assert!(!start.is_empty() && start.len() <= 2, "one or two start states");
    let mut hist: Vec<FlowState> = start.to_vec();
    let mut states = if keep { start.to_vec() } else { Vec::new() };
    let mut iterations = 0;
    let mut solve_time = Duration::ZERO;
    let mut filter_time = Duration::ZERO;
    for _ in 0..steps {
        let n = hist.len() - 1;
        let cur = &hist[n];
        let t_new = cur.t + dt;
        let prev = (n >= 1).then(|| &hist[n - 1]);
        let extrapolated = match (variant, scheme, prev) {
            (Variant::Implicit, _, _) => None,
            (Variant::LinearlyImplicit, Scheme::Filtered(_), Some(p)) => {
                Some(linearization_point(&cur.velocity, &p.velocity, 1.0))
            }
            (Variant::LinearlyImplicit, _, _) => Some(cur.velocity.clone()),
        };
        let convection = match &extrapolated {
            Some(a) => Convection::Linearized(a),
            None => Convection::Implicit,
        };
        let clock = Instant::now();
        let be = solver.be_nse_step(t_new, &cur.velocity, dt, convection)?;
        solve_time += clock.elapsed();
        iterations += be.report.iterations;
        let next = match (scheme, prev) {
            (Scheme::Filtered(option), Some(p)) => {
                let clock = Instant::now();
                let (velocity, pressure) = filter_step_nse(
                    &be.velocity,
                    &be.pressure,
                    &cur.velocity,
                    &p.velocity,
                    &cur.pressure,
                    &p.pressure,
                    1.0,
                    option,
                )
                .expect("fields on one grid");
                filter_time += clock.elapsed();
                FlowState {
                    t: t_new,
                    velocity,
                    pressure,
                }
            }
            _ => FlowState {
                t: t_new,
                velocity: be.velocity,
                pressure: be.pressure,
            },
        };
        if keep {
            states.push(next.clone());
        }
        hist.push(next);
        if hist.len() > 2 {
            hist.remove(0);
        }
    }
    Ok(ConstantRun {
        states,
        last: hist.pop().expect("nonempty history"),
        solver_iterations: iterations,
        solve_time,
        filter_time,
    })
}
