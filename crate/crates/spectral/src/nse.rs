//! Backward Euler for the 2D incompressible Navier–Stokes equations
//! `u_t + u·∇u - νΔu + ∇p = f`, `∇·u = 0` on the periodic box.
//!
//! Incompressibility is enforced exactly by the Leray projection, the
//! nonlinear term is evaluated pseudo-spectrally with 2/3 dealiasing, and
//! the viscous term is diagonal in Fourier space. Convection inside a
//! backward Euler step is resolved by Picard iteration.

use std::sync::Arc;

use num_complex::Complex64;
use tfilter::{filter_order2, LinearSpace, Problem, SolveError, SolverOptions, SolverReport};

use crate::field::{ScalarField, VelocityField};
use crate::grid::Grid;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Time-dependent body force.
pub type Forcing = Arc<dyn Fn(f64) -> VelocityField + Send + Sync>;

/// `û(k) ← (I - k kᵀ/|k|²) û(k)` for every `k ≠ 0`.
pub fn leray_project(grid: &Grid, field: &VelocityField) -> VelocityField {
    let mut out = field.clone();
    leray_in_place(grid, &mut out);
    out
}

fn leray_in_place(grid: &Grid, f: &mut VelocityField) {
    for idx in 1..grid.len() {
        let (kx, ky) = grid.k(idx);
        let k2 = kx * kx + ky * ky;
        let kdotu = f.u[idx] * kx + f.v[idx] * ky;
        f.u[idx] -= kdotu * (kx / k2);
        f.v[idx] -= kdotu * (ky / k2);
    }
}

/// `(a·∇) b`, dealiased but not projected. For divergence-free `a` this
/// equals the skew-symmetric form `a·∇b + (1/2)(∇·a) b`.
pub fn advection(grid: &Grid, a: &VelocityField, b: &VelocityField) -> VelocityField {
    let (au, av) = a.to_physical(grid);
    advection_with(grid, &au, &av, b)
}

fn advection_with(grid: &Grid, au: &[f64], av: &[f64], b: &VelocityField) -> VelocityField {
    let deriv = |c: &[Complex64], x: bool| -> Vec<f64> {
        let d: Vec<Complex64> = c
            .iter()
            .enumerate()
            .map(|(idx, z)| {
                let (kx, ky) = grid.k(idx);
                I * if x { kx } else { ky } * z
            })
            .collect();
        grid.inverse(&d)
    };
    let (bux, buy) = (deriv(&b.u, true), deriv(&b.u, false));
    let (bvx, bvy) = (deriv(&b.v, true), deriv(&b.v, false));
    let nu: Vec<f64> = (0..grid.len()).map(|i| au[i] * bux[i] + av[i] * buy[i]).collect();
    let nv: Vec<f64> = (0..grid.len()).map(|i| au[i] * bvx[i] + av[i] * bvy[i]).collect();
    let mut out = VelocityField::from_physical(grid, &nu, &nv);
    grid.dealias(&mut out.u);
    grid.dealias(&mut out.v);
    out
}

/// Projected nonlinear term `P[(u·∇) u]`.
pub fn nonlinear_term(grid: &Grid, u: &VelocityField) -> VelocityField {
    let mut n = advection(grid, u, u);
    leray_in_place(grid, &mut n);
    n
}

/// Pressure balancing the non-solenoidal part of `g`: solves
/// `Δp = ∇·g`, mean zero.
pub fn pressure_from(grid: &Grid, g: &VelocityField) -> ScalarField {
    let mut p = ScalarField::zeros(grid.n());
    for idx in 1..grid.len() {
        let (kx, ky) = grid.k(idx);
        let k2 = kx * kx + ky * ky;
        p.c[idx] = -I * (g.u[idx] * kx + g.v[idx] * ky) / k2;
    }
    p
}

/// How the convecting velocity is chosen in a backward Euler step.
#[derive(Debug, Clone, Copy)]
pub enum Convection<'a> {
    /// `û·∇û`, nonlinear.
    Implicit,
    /// `u*·∇û` with `u*` given.
    Linearized(&'a VelocityField),
}

/// The result of one backward Euler step.
#[derive(Debug, Clone)]
pub struct BeStep {
    pub velocity: VelocityField,
    pub pressure: ScalarField,
    pub report: SolverReport,
}

/// A Navier–Stokes problem on a fixed grid.
#[derive(Clone)]
pub struct NseSolver {
    pub grid: Grid,
    pub nu: f64,
    pub forcing: Option<Forcing>,
    pub solver: SolverOptions,
}

impl std::fmt::Debug for NseSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("NseSolver")
            .field("grid", &self.grid)
            .field("nu", &self.nu)
            .field("forced", &self.forcing.is_some())
            .field("solver", &self.solver)
            .finish()
    }
}

impl NseSolver {
    pub fn new(grid: Grid, nu: f64) -> Self {
        Self {
            grid,
            nu,
            forcing: None,
            solver: SolverOptions::default(),
        }
    }

    pub fn with_forcing(mut self, forcing: Forcing) -> Self {
        self.forcing = Some(forcing);
        self
    }

    pub fn with_solver(mut self, solver: SolverOptions) -> Self {
        self.solver = solver;
        self
    }

    /// Forcing at `t`, or zero.
    pub fn force(&self, t: f64) -> VelocityField {
        match &self.forcing {
            Some(f) => f(t),
            None => VelocityField::zeros(self.grid.n()),
        }
    }

    /// Picard iteration for
    /// `(û - u_n)/dt + a·∇û - νΔû + ∇p̂ = f(t_new)`, `∇·û = 0`.
    ///
    /// The reported residual is that of the last iterate before the
    /// returned one, `(1 + ν dt |k|²)(û_k - û_{k+1})`, which bounds the
    /// returned iterate's residual for a contracting iteration.
    pub fn be_velocity(
        &self,
        t_new: f64,
        u_n: &VelocityField,
        dt: f64,
        convection: Convection<'_>,
    ) -> Result<(VelocityField, SolverReport), SolveError> {
        let g = &self.grid;
        let mut rhs = leray_project(g, &self.force(t_new));
        g.dealias(&mut rhs.u);
        g.dealias(&mut rhs.v);
        let rhs = VelocityField::combine_unchecked(&[(1.0, u_n), (dt, &rhs)]);
        let denom: Vec<f64> = (0..g.len()).map(|idx| 1.0 + self.nu * dt * g.k2(idx)).collect();
        let tol = self.solver.threshold(u_n.norm());

        let convector = match convection {
            Convection::Linearized(a) => Some(a.to_physical(g)),
            Convection::Implicit => None,
        };
        let mut current = u_n.clone();
        for iteration in 1..=self.solver.max_iter {
            let mut adv = match &convector {
                Some((au, av)) => advection_with(g, au, av, &current),
                None => advection(g, &current, &current),
            };
            leray_in_place(g, &mut adv);
            let mut next = VelocityField::zeros(g.n());
            let mut res_sq = 0.0;
            for (idx, &d) in denom.iter().enumerate() {
                next.u[idx] = (rhs.u[idx] - adv.u[idx] * dt) / d;
                next.v[idx] = (rhs.v[idx] - adv.v[idx] * dt) / d;
                res_sq += ((current.u[idx] - next.u[idx]) * d).norm_sqr()
                    + ((current.v[idx] - next.v[idx]) * d).norm_sqr();
            }
            let residual = (res_sq * 4.0 * std::f64::consts::PI.powi(2)).sqrt();
            if !residual.is_finite() {
                return Err(SolveError {
                    iterations: iteration,
                    residual,
                });
            }
            current = next;
            if residual <= tol {
                return Ok((
                    current,
                    SolverReport {
                        iterations: iteration,
                        final_residual: residual,
                        tolerance: tol,
                        converged: true,
                    },
                ));
            }
            if iteration == self.solver.max_iter {
                return Err(SolveError {
                    iterations: iteration,
                    residual,
                });
            }
        }
        unreachable!("max_iter is at least one")
    }

    /// Pressure of the backward Euler step ending in `u_hat`.
    pub fn be_pressure(&self, t_new: f64, u_hat: &VelocityField, convection: Convection<'_>) -> ScalarField {
        let adv = match convection {
            Convection::Implicit => advection(&self.grid, u_hat, u_hat),
            Convection::Linearized(a) => advection(&self.grid, a, u_hat),
        };
        let g = VelocityField::combine_unchecked(&[(1.0, &self.force(t_new)), (-1.0, &adv)]);
        pressure_from(&self.grid, &g)
    }

    /// One backward Euler step with its pressure.
    pub fn be_nse_step(
        &self,
        t_new: f64,
        u_n: &VelocityField,
        dt: f64,
        convection: Convection<'_>,
    ) -> Result<BeStep, SolveError> {
        let (velocity, report) = self.be_velocity(t_new, u_n, dt, convection)?;
        let pressure = self.be_pressure(t_new, &velocity, convection);
        Ok(BeStep {
            velocity,
            pressure,
            report,
        })
    }
}

impl Problem for NseSolver {
    type State = VelocityField;

    /// `P f - P[u·∇u] + νΔu`.
    fn rhs(&self, t: f64, y: &VelocityField) -> VelocityField {
        let g = &self.grid;
        let mut f = leray_project(g, &self.force(t));
        g.dealias(&mut f.u);
        g.dealias(&mut f.v);
        let n = nonlinear_term(g, y);
        let mut out = VelocityField::combine_unchecked(&[(1.0, &f), (-1.0, &n)]);
        for idx in 0..g.len() {
            let k2 = g.k2(idx);
            out.u[idx] -= y.u[idx] * (self.nu * k2);
            out.v[idx] -= y.v[idx] * (self.nu * k2);
        }
        out
    }

    fn implicit_solve(
        &self,
        t_new: f64,
        y_prev: &VelocityField,
        dt: f64,
        linearization: Option<&VelocityField>,
    ) -> Result<(VelocityField, SolverReport), SolveError> {
        let convection = match linearization {
            Some(a) => Convection::Linearized(a),
            None => Convection::Implicit,
        };
        self.be_velocity(t_new, y_prev, dt, convection)
    }
}

/// Whether the pressure is filtered along with the velocity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PressureOption {
    /// The pressure is the backward Euler pressure.
    A,
    /// The pressure is filtered like the velocity.
    B,
}

/// Filter a backward Euler velocity (and, under option B, pressure)
/// using the two previous accepted values.
#[allow(clippy::too_many_arguments)]
pub fn filter_step_nse(
    u_hat: &VelocityField,
    p_hat: &ScalarField,
    u_n: &VelocityField,
    u_nm1: &VelocityField,
    p_n: &ScalarField,
    p_nm1: &ScalarField,
    r_cur: f64,
    option: PressureOption,
) -> tfilter::Result<(VelocityField, ScalarField)> {
    let u = filter_order2(u_hat, u_n, u_nm1, r_cur)?;
    let p = match option {
        PressureOption::A => p_hat.clone(),
        PressureOption::B => filter_order2(p_hat, p_n, p_nm1, r_cur)?,
    };
    Ok((u, p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn grid() -> Grid {
        Grid::new(16).unwrap()
    }

    fn single_mode(g: &Grid, kx: i64, ky: i64, u: f64, v: f64) -> VelocityField {
        let mut f = VelocityField::zeros(g.n());
        f.u[g.index_of(kx, ky)] = Complex64::new(u, 0.0);
        f.v[g.index_of(kx, ky)] = Complex64::new(v, 0.0);
        f
    }

    #[test]
    fn leray_examples() {
        let g = grid();
        let f = single_mode(&g, 1, 0, 0.0, 1.0);
        assert_eq!(leray_project(&g, &f), f);
        let f = single_mode(&g, 1, 0, 1.0, 0.0);
        assert_eq!(leray_project(&g, &f).norm(), 0.0);
        let f = single_mode(&g, 1, 1, 1.0, 0.0);
        let p = leray_project(&g, &f);
        assert_eq!(leray_project(&g, &p), p);
        assert!(p.relative_divergence(&g) < 1e-16);
    }

    #[test]
    fn zero_field_is_fixed() {
        let g = grid();
        let s = NseSolver::new(g.clone(), 0.1);
        let z = VelocityField::zeros(g.n());
        assert_eq!(nonlinear_term(&g, &z).norm(), 0.0);
        let step = s.be_nse_step(0.1, &z, 0.1, Convection::Implicit).unwrap();
        assert_eq!(step.velocity.norm(), 0.0);
        assert_eq!(step.pressure.norm(), 0.0);
    }

    #[test]
    fn pressure_of_gradient() {
        let g = grid();
        // g = ∇(cos 2x) = (-2 sin 2x, 0) gives p = cos 2x.
        let gu = g.sample(|x, _| -2.0 * (2.0 * x).sin());
        let gv = vec![0.0; g.len()];
        let p = pressure_from(&g, &VelocityField::from_physical(&g, &gu, &gv));
        let expected = g.sample(|x, _| (2.0 * x).cos());
        for (a, b) in p.to_physical(&g).iter().zip(&expected) {
            assert_relative_eq!(a, b, epsilon = 1e-13);
        }
        assert_eq!(p.mean(), 0.0);
    }

    #[test]
    fn option_a_passes_pressure_through() {
        let g = grid();
        let u = single_mode(&g, 1, 1, 1.0, -1.0);
        let mut p = ScalarField::zeros(g.n());
        p.c[3] = Complex64::new(0.7, 0.1);
        let q = ScalarField::zeros(g.n());
        let (uf, pf) = filter_step_nse(&u, &p, &u, &u, &q, &q, 1.0, PressureOption::A).unwrap();
        assert_eq!(pf, p);
        assert!((uf.norm() - u.norm()).abs() < 1e-14);
        let (_, pb) = filter_step_nse(&u, &p, &u, &u, &p, &p, 1.0, PressureOption::B).unwrap();
        assert!((pb.norm() - p.norm()).abs() < 1e-14);
    }
}
