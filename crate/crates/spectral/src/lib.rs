//! Pseudo-spectral 2D incompressible Navier–Stokes on the periodic box
//! `[0, 2π]²`, used as a PDE testbed for the filtered backward Euler
//! integrator.
//!
//! Velocity fields are exactly divergence-free (Leray projection per
//! Fourier mode), products are dealiased with the 2/3 rule, and
//! [`nse::NseSolver`] implements [`tfilter::Problem`] so the generic
//! driver runs on it unchanged.

pub mod energy;
pub mod error;
pub mod field;
pub mod grid;
pub mod nse;
pub mod run;
pub mod snapshot;
pub mod taylor_green;

pub use energy::{energy_ledger, EnergyLedger, EnergyRow};
pub use error::SpectralError;
pub use field::{random_solenoidal, ScalarField, VelocityField};
pub use grid::Grid;
pub use nse::{
    advection, filter_step_nse, leray_project, nonlinear_term, pressure_from, BeStep, Convection, Forcing, NseSolver,
    PressureOption,
};
pub use run::{run_constant, ConstantRun, FlowState, Scheme};
pub use snapshot::Snapshot;
pub use taylor_green::{forced_tg_problem, taylor_green_exact, tg_mode, tg_pressure_mode, Amplitude};
