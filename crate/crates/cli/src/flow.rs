//! Navier–Stokes studies on the periodic box: Taylor–Green convergence,
//! the discrete energy balance, and the cost of filtering.

use std::sync::Arc;
use std::time::Duration;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use tfilter::verify::{fit_slope, RateReport};
use tfilter::{difference, LinearSpace, SolverOptions, Variant};
use tfilter_spectral::{
    energy_ledger, random_solenoidal, run_constant, taylor_green_exact, tg_mode, EnergyLedger, FlowState, Grid,
    NseSolver, PressureOption, ScalarField, Scheme, VelocityField,
};

use crate::error::CliError;
use crate::table::{Cell, Table};

fn grid(n: usize) -> Result<Grid, CliError> {
    Grid::new(n).map_err(|e| CliError::config(e.to_string()))
}

fn rel_err<S: LinearSpace>(a: &S, b: &S) -> f64 {
    difference(a, b).expect("matching fields").norm() / b.norm()
}

fn exact_flow(grid: &Grid, t: f64, nu: f64) -> FlowState {
    let (velocity, pressure) = taylor_green_exact(grid, t, nu);
    FlowState { t, velocity, pressure }
}

/// Relative L2 errors at the final time of the decaying vortex.
#[derive(Debug, Clone, PartialEq)]
pub struct NseConvergence {
    pub dts: Vec<f64>,
    pub velocity_be: Vec<f64>,
    pub velocity_filtered: Vec<f64>,
    pub pressure_a: Vec<f64>,
    pub pressure_b: Vec<f64>,
}

impl NseConvergence {
    /// Least-squares orders `[velocity_be, velocity_filtered, pressure_a, pressure_b]`.
    pub fn slopes(&self) -> [f64; 4] {
        [
            fit_slope(&self.dts, &self.velocity_be),
            fit_slope(&self.dts, &self.velocity_filtered),
            fit_slope(&self.dts, &self.pressure_a),
            fit_slope(&self.dts, &self.pressure_b),
        ]
    }

    pub fn table(&self) -> Table {
        let cols = [
            &self.velocity_be,
            &self.velocity_filtered,
            &self.pressure_a,
            &self.pressure_b,
        ];
        let orders: Vec<Vec<f64>> = cols
            .iter()
            .map(|e| RateReport::new(self.dts.clone(), e.to_vec()).pairwise_orders())
            .collect();
        let mut t = Table::new(&[
            "dt",
            "err_u_be",
            "err_u_filtered",
            "err_p_a",
            "err_p_b",
            "order_u_be",
            "order_u_filtered",
            "order_p_a",
            "order_p_b",
        ]);
        for i in 0..self.dts.len() {
            let mut row: Vec<Cell> = vec![self.dts[i].into()];
            row.extend(cols.iter().map(|c| Cell::Float(c[i])));
            row.extend(
                orders
                    .iter()
                    .map(|o| if i == 0 { Cell::Empty } else { Cell::Float(o[i - 1]) }),
            );
            t.push(row);
        }
        t
    }
}

/// Taylor–Green vortex from its exact start. Filtered runs take their
/// second start value from the exact solution as well.
pub fn nse_convergence(n: usize, nu: f64, t_end: f64, dts: &[f64]) -> Result<NseConvergence, CliError> {
    let g = grid(n)?;
    let solver = NseSolver::new(g.clone(), nu);
    let (ue, pe) = taylor_green_exact(&g, t_end, nu);
    let cells: Vec<Result<[f64; 4], String>> = dts
        .par_iter()
        .map(|&dt| {
            let steps = (t_end / dt).round() as usize;
            let fail = |e: tfilter::SolveError| format!("dt = {dt}: {e}");
            let be = run_constant(
                &solver,
                Scheme::BackwardEuler,
                Variant::Implicit,
                &[exact_flow(&g, 0.0, nu)],
                dt,
                steps,
                false,
            )
            .map_err(fail)?;
            let start = [exact_flow(&g, 0.0, nu), exact_flow(&g, dt, nu)];
            let filtered = |option| {
                run_constant(
                    &solver,
                    Scheme::Filtered(option),
                    Variant::Implicit,
                    &start,
                    dt,
                    steps - 1,
                    false,
                )
                .map_err(fail)
            };
            let a = filtered(PressureOption::A)?;
            let b = filtered(PressureOption::B)?;
            Ok([
                rel_err(&be.last.velocity, &ue),
                rel_err(&a.last.velocity, &ue),
                rel_err(&a.last.pressure, &pe),
                rel_err(&b.last.pressure, &pe),
            ])
        })
        .collect();

    let mut study = NseConvergence {
        dts: Vec::new(),
        velocity_be: Vec::new(),
        velocity_filtered: Vec::new(),
        pressure_a: Vec::new(),
        pressure_b: Vec::new(),
    };
    for (&dt, cell) in dts.iter().zip(cells) {
        match cell {
            Ok([a, b, c, d]) => {
                study.dts.push(dt);
                study.velocity_be.push(a);
                study.velocity_filtered.push(b);
                study.pressure_a.push(c);
                study.pressure_b.push(d);
            }
            Err(msg) => return Err(CliError::numerical(msg, Some(study.table()))),
        }
    }
    Ok(study)
}

/// A random divergence-free start field of unit box norm.
pub fn random_start(grid: &Grid, seed: u64) -> VelocityField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sample = || rng.random_range(-1.0..1.0);
    let u = random_solenoidal(grid, 4, 1.0, &mut sample);
    u.scaled(1.0 / u.norm())
}

/// Energy ledger of a filtered run from a random field. With `forced`
/// the flow is driven by `sin(3t)` times the Taylor–Green mode.
pub fn nse_energy(
    n: usize,
    nu: f64,
    dt: f64,
    steps: usize,
    forced: bool,
    option: PressureOption,
    seed: u64,
) -> Result<EnergyLedger, CliError> {
    let g = grid(n)?;
    let mut solver = NseSolver::new(g.clone(), nu).with_solver(SolverOptions {
        tol: 1e-12,
        max_iter: 100,
    });
    if forced {
        let mode = tg_mode(&g);
        solver = solver.with_forcing(Arc::new(move |t: f64| mode.scaled((3.0 * t).sin())));
    }
    let start = [FlowState {
        t: 0.0,
        velocity: random_start(&g, seed),
        pressure: ScalarField::zeros(n),
    }];
    let run = run_constant(
        &solver,
        Scheme::Filtered(option),
        Variant::Implicit,
        &start,
        dt,
        steps,
        true,
    )
    .map_err(|e| CliError::numerical(e, None))?;
    let states: Vec<VelocityField> = run.states.into_iter().map(|s| s.velocity).collect();
    Ok(energy_ledger(&g, &states, 0.0, dt, nu, |t| solver.force(t)))
}

pub fn energy_table(ledger: &EnergyLedger) -> Table {
    let mut t = Table::new(&["step", "t", "energy", "viscous", "numerical", "work", "residual"]);
    let mut acc = -ledger.initial;
    for r in &ledger.rows {
        acc += r.viscous + r.numerical - r.work;
        t.push(vec![
            r.step.into(),
            r.t.into(),
            r.energy.into(),
            r.viscous.into(),
            r.numerical.into(),
            r.work.into(),
            (acc + r.energy).into(),
        ]);
    }
    t
}

/// Time spent in backward Euler solves and in filter steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Overhead {
    pub n: usize,
    pub steps: usize,
    pub solver_iterations: usize,
    pub solve_time: Duration,
    pub filter_time: Duration,
}

impl Overhead {
    /// Filter time over solve time.
    pub fn fraction(&self) -> f64 {
        self.filter_time.as_secs_f64() / self.solve_time.as_secs_f64()
    }

    pub fn table(&self) -> Table {
        let mut t = Table::new(&[
            "n",
            "steps",
            "solver_iterations",
            "solve_seconds",
            "filter_seconds",
            "fraction",
        ]);
        t.push(vec![
            self.n.into(),
            self.steps.into(),
            self.solver_iterations.into(),
            self.solve_time.as_secs_f64().into(),
            self.filter_time.as_secs_f64().into(),
            self.fraction().into(),
        ]);
        t
    }
}

/// Constant-step filtered run from a random field.
pub fn overhead(
    n: usize,
    nu: f64,
    dt: f64,
    steps: usize,
    option: PressureOption,
    seed: u64,
) -> Result<Overhead, CliError> {
    let g = grid(n)?;
    let solver = NseSolver::new(g.clone(), nu);
    let start = [FlowState {
        t: 0.0,
        velocity: random_start(&g, seed),
        pressure: ScalarField::zeros(n),
    }];
    let run = run_constant(
        &solver,
        Scheme::Filtered(option),
        Variant::Implicit,
        &start,
        dt,
        steps,
        false,
    )
    .map_err(|e| CliError::numerical(e, None))?;
    Ok(Overhead {
        n,
        steps,
        solver_iterations: run.solver_iterations,
        solve_time: run.solve_time,
        filter_time: run.filter_time,
    })
}
