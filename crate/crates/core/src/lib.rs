//! Backward Euler with linear time filters.
//!
//! A backward Euler step followed by a cheap linear filter gives a
//! second-order, A-stable method. Both values are available at every
//! step, so their difference is an embedded error estimate and the
//! integrator can switch step size and order (1 or 2) adaptively.
//!
//! The crate is organised bottom-up:
//!
//! * [`lin_space`]: the vector-space abstraction states must implement.
//! * [`filters`] and [`estimators`]: the filters and error estimates.
//! * [`controller`]: acceptance, order choice and step-size proposals.
//! * [`stepper`]: the backward Euler substep and a dense Newton solver.
//! * [`driver`]: the integration loop.
//! * [`verify`]: numerical checks of the method's algebraic properties.
//! * [`problems`]: reference problems with known solutions.

pub mod controller;
pub mod driver;
pub mod error;
pub mod estimators;
pub mod filters;
pub mod lin_space;
pub mod problems;
pub mod stepper;
pub mod verify;

pub use controller::{decide, ControllerConfig, ControllerDecision, EstimateNorms, Verdict};
pub use driver::{
    integrate, integrate_observed, replay, DriverConfig, FailureReason, HistoryWindow, IntegrationFailure, Mode,
    RunStatistics, StepRecord, Trajectory, Variant,
};
pub use error::{Error, Result, SolveError};
pub use estimators::{est1, est2, ErrorEstimates};
pub use filters::{filter_order2, filter_second, filter_weight, stencil_d, stencil_i, Est2Weights, StepRatios};
pub use lin_space::{difference, inner, linear_combine, LinearSpace};
pub use stepper::{be_step, be_step_linearized, linearization_point, OdeProblem, Problem, SolverOptions, SolverReport};
