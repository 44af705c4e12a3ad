//! Discrete energy bookkeeping for constant-step filtered runs.
//!
//! With `I[u] = (3/2)u^{n+1} - u^n + (1/2)u^{n-1}` (the backward Euler
//! value of the step), each step satisfies
//! `E^{n+1} - E^n + D^{n+1} + Z^{n+1} = W^{n+1}` where
//!
//! * `E^n = (|u^n|² + |2u^n - u^{n-1}|² + |u^n - u^{n-1}|²) / 4`,
//! * `D^{n+1} = dt ν |∇I[u]|²` (viscous dissipation),
//! * `Z^{n+1} = (3/4)|u^{n+1} - 2u^n + u^{n-1}|²` (numerical dissipation),
//! * `W^{n+1} = dt (f(t^{n+1}), I[u])` (work of the body force).

use tfilter::verify::g_energy;
use tfilter::{linear_combine, stencil_i, LinearSpace};

use crate::field::VelocityField;
use crate::grid::Grid;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyRow {
    /// Index of the new state.
    pub step: usize,
    pub t: f64,
    pub energy: f64,
    pub viscous: f64,
    pub numerical: f64,
    pub work: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyLedger {
    /// `E^1`, the energy of the first two states.
    pub initial: f64,
    pub rows: Vec<EnergyRow>,
}

impl EnergyLedger {
    /// `E^N + ΣD + ΣZ - E^1 - ΣW`.
    pub fn residual(&self) -> f64 {
        let last = self.rows.last().map_or(self.initial, |r| r.energy);
        let (d, z, w) = self.rows.iter().fold((0.0, 0.0, 0.0), |(d, z, w), r| {
            (d + r.viscous, z + r.numerical, w + r.work)
        });
        last + d + z - self.initial - w
    }

    /// [`EnergyLedger::residual`] relative to `E^1`.
    pub fn relative_residual(&self) -> f64 {
        self.residual().abs() / self.initial
    }
}

/// Ledger of the states `u^0, u^1, ...` at `t0 + n dt`.
pub fn energy_ledger(
    grid: &Grid,
    states: &[VelocityField],
    t0: f64,
    dt: f64,
    nu: f64,
    forcing: impl Fn(f64) -> VelocityField,
) -> EnergyLedger {
    assert!(states.len() >= 2, "need at least two states");
    let initial = g_energy(&states[1], &states[0]).expect("matching fields");
    let rows = states
        .windows(3)
        .enumerate()
        .map(|(k, w)| {
            let (u_nm1, u_n, u_np1) = (&w[0], &w[1], &w[2]);
            let step = k + 2;
            let t = t0 + step as f64 * dt;
            let interp = stencil_i(u_np1, u_n, u_nm1).expect("matching fields");
            let second = linear_combine(&[1.0, -2.0, 1.0], &[u_np1, u_n, u_nm1]).expect("matching fields");
            EnergyRow {
                step,
                t,
                energy: g_energy(u_np1, u_n).expect("matching fields"),
                viscous: dt * nu * interp.gradient_norm_sq(grid),
                numerical: 0.75 * second.norm_l2().powi(2),
                work: dt * forcing(t).dot(&interp),
            }
        })
        .collect();
    EnergyLedger { initial, rows }
}
