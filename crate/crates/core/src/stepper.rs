//! The backward Euler substep and its implicit solvers.

use nalgebra::{DMatrix, DVector};

use crate::error::SolveError;
use crate::lin_space::LinearSpace;

/// Outcome bookkeeping of one implicit solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverReport {
    pub iterations: usize,
    pub final_residual: f64,
    /// Residual threshold the solve was held to.
    pub tolerance: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Residual tolerance, absolute for O(1) states; scaled by the state
    /// norm when that exceeds one.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iter: 50,
        }
    }
}

impl SolverOptions {
    pub fn threshold(&self, scale: f64) -> f64 {
        self.tol * scale.max(1.0)
    }
}

/// An initial value problem `y' = f(t, y)` together with a way to take a
/// backward Euler step.
pub trait Problem {
    type State: LinearSpace;

    fn rhs(&self, t: f64, y: &Self::State) -> Self::State;

    /// Solve `y - y_prev - dt f(t_new, y) = 0`. With `linearization =
    /// Some(y*)` the nonlinearity is linearized about `y*` and a single
    /// linear problem is solved instead.
    fn implicit_solve(
        &self,
        t_new: f64,
        y_prev: &Self::State,
        dt: f64,
        linearization: Option<&Self::State>,
    ) -> Result<(Self::State, SolverReport), SolveError>;
}

/// Backward Euler from `(t_n, y_n)` over `dt`.
pub fn be_step<P: Problem>(
    problem: &P,
    t_n: f64,
    y_n: &P::State,
    dt: f64,
) -> Result<(P::State, SolverReport), SolveError> {
    problem.implicit_solve(t_n + dt, y_n, dt, None)
}

/// Backward Euler with the nonlinearity linearized about `y_star`.
pub fn be_step_linearized<P: Problem>(
    problem: &P,
    t_n: f64,
    y_n: &P::State,
    dt: f64,
    y_star: &P::State,
) -> Result<(P::State, SolverReport), SolveError> {
    problem.implicit_solve(t_n + dt, y_n, dt, Some(y_star))
}

/// Extrapolated linearization point `(1 + r) y_n - r y_nm1`.
pub fn linearization_point<S: LinearSpace>(y_n: &S, y_nm1: &S, r_cur: f64) -> S {
    S::combine_unchecked(&[(1.0 + r_cur, y_n), (-r_cur, y_nm1)])
}

/// States the dense Newton solver can work with.
pub trait NewtonState: LinearSpace {
    fn to_dvector(&self) -> DVector<f64>;
    fn from_dvector(v: DVector<f64>) -> Self;
}

impl NewtonState for f64 {
    fn to_dvector(&self) -> DVector<f64> {
        DVector::from_element(1, *self)
    }
    fn from_dvector(v: DVector<f64>) -> Self {
        v[0]
    }
}

impl NewtonState for DVector<f64> {
    fn to_dvector(&self) -> DVector<f64> {
        self.clone()
    }
    fn from_dvector(v: DVector<f64>) -> Self {
        v
    }
}

impl NewtonState for Vec<f64> {
    fn to_dvector(&self) -> DVector<f64> {
        DVector::from_column_slice(self)
    }
    fn from_dvector(v: DVector<f64>) -> Self {
        v.as_slice().to_vec()
    }
}

type RhsFn<S> = Box<dyn Fn(f64, &S) -> S + Send + Sync>;
type JacFn<S> = Box<dyn Fn(f64, &S) -> DMatrix<f64> + Send + Sync>;

/// A dense ODE system solved by damped Newton iteration. Without an
/// analytic Jacobian a forward-difference one is used.
pub struct OdeProblem<S> {
    rhs: RhsFn<S>,
    jacobian: Option<JacFn<S>>,
    pub solver: SolverOptions,
}

impl<S: NewtonState> OdeProblem<S> {
    pub fn new(rhs: impl Fn(f64, &S) -> S + Send + Sync + 'static) -> Self {
        Self {
            rhs: Box::new(rhs),
            jacobian: None,
            solver: SolverOptions::default(),
        }
    }

    pub fn with_jacobian(mut self, jac: impl Fn(f64, &S) -> DMatrix<f64> + Send + Sync + 'static) -> Self {
        self.jacobian = Some(Box::new(jac));
        self
    }

    pub fn with_solver(mut self, solver: SolverOptions) -> Self {
        self.solver = solver;
        self
    }

    pub fn jacobian(&self, t: f64, y: &S) -> DMatrix<f64> {
        if let Some(j) = &self.jacobian {
            return j(t, y);
        }
        let y0 = y.to_dvector();
        let f0 = (self.rhs)(t, y).to_dvector();
        let n = y0.len();
        let mut jac = DMatrix::zeros(n, n);
        for k in 0..n {
            let h = f64::EPSILON.sqrt() * y0[k].abs().max(1.0);
            let mut yp = y0.clone();
            yp[k] += h;
            let fp = (self.rhs)(t, &S::from_dvector(yp)).to_dvector();
            jac.set_column(k, &((fp - &f0) / h));
        }
        jac
    }

    /// Damped Newton on `residual(y) = 0` where `jac(y)` is its Jacobian.
    /// Residuals are measured in the RMS norm.
    fn newton(
        &self,
        mut y: DVector<f64>,
        scale: f64,
        residual: impl Fn(&DVector<f64>) -> DVector<f64>,
        jac: impl Fn(&DVector<f64>) -> DMatrix<f64>,
    ) -> Result<(DVector<f64>, SolverReport), SolveError> {
        let tol = self.solver.threshold(scale);
        let rms = |v: &DVector<f64>| LinearSpace::norm(v);
        let mut r = residual(&y);
        let mut res = rms(&r);
        let mut iterations = 0;
        // Always take one step unless the guess is exact: for tiny states
        // the absolute threshold alone would accept the initial guess.
        while res > tol || (iterations == 0 && res > 0.0) {
            if iterations >= self.solver.max_iter || !res.is_finite() {
                return Err(SolveError {
                    iterations,
                    residual: res,
                });
            }
            iterations += 1;
            let delta = jac(&y).lu().solve(&(-&r)).ok_or(SolveError {
                iterations,
                residual: res,
            })?;
            let mut lambda = 1.0;
            loop {
                let trial = &y + &delta * lambda;
                let r_trial = residual(&trial);
                let res_trial = rms(&r_trial);
                if res_trial < res || lambda < 1e-3 {
                    y = trial;
                    r = r_trial;
                    res = res_trial;
                    break;
                }
                lambda *= 0.5;
            }
        }
        Ok((
            y,
            SolverReport {
                iterations,
                final_residual: res,
                tolerance: tol,
                converged: true,
            },
        ))
    }

    /// One-leg form of backward Euler followed by the 1/3 filter at
    /// constant step: solves
    /// `D[y]/dt = f(t_new, I[y])` for `y = y^{n+1}` directly.
    pub fn one_leg_step(&self, t_new: f64, y_n: &S, y_nm1: &S, dt: f64) -> Result<(S, SolverReport), SolveError> {
        let yn = y_n.to_dvector();
        let ynm1 = y_nm1.to_dvector();
        let interp = |y: &DVector<f64>| y * 1.5 - &yn + &ynm1 * 0.5;
        let residual = |y: &DVector<f64>| {
            let d = y * 1.5 - &yn * 2.0 + &ynm1 * 0.5;
            let f = (self.rhs)(t_new, &S::from_dvector(interp(y))).to_dvector();
            d - f * dt
        };
        let jac = |y: &DVector<f64>| {
            let n = y.len();
            let jf = self.jacobian(t_new, &S::from_dvector(interp(y)));
            (DMatrix::identity(n, n) - jf * dt) * 1.5
        };
        let scale = LinearSpace::norm(&yn);
        let (y, report) = self.newton(yn.clone(), scale, residual, jac)?;
        Ok((S::from_dvector(y), report))
    }
}

impl<S: NewtonState> Problem for OdeProblem<S> {
    type State = S;

    fn rhs(&self, t: f64, y: &S) -> S {
        (self.rhs)(t, y)
    }

    fn implicit_solve(
        &self,
        t_new: f64,
        y_prev: &S,
        dt: f64,
        linearization: Option<&S>,
    ) -> Result<(S, SolverReport), SolveError> {
        let yp = y_prev.to_dvector();
        let scale = LinearSpace::norm(&yp);
        match linearization {
            None => {
                let residual =
                    |y: &DVector<f64>| y - &yp - (self.rhs)(t_new, &S::from_dvector(y.clone())).to_dvector() * dt;
                let jac = |y: &DVector<f64>| {
                    let n = y.len();
                    DMatrix::identity(n, n) - self.jacobian(t_new, &S::from_dvector(y.clone())) * dt
                };
                let (y, report) = self.newton(yp.clone(), scale, residual, jac)?;
                Ok((S::from_dvector(y), report))
            }
            Some(y_star) => {
                // (I - dt J*) (y - y*) = y_prev + dt f(t, y*) - y*
                let ys = y_star.to_dvector();
                let n = ys.len();
                let jf = self.jacobian(t_new, y_star);
                let fs = (self.rhs)(t_new, y_star).to_dvector();
                let lhs = DMatrix::identity(n, n) - &jf * dt;
                let rhs = &yp + &fs * dt - &ys;
                let fail = SolveError {
                    iterations: 1,
                    residual: f64::INFINITY,
                };
                let delta = lhs.clone().lu().solve(&rhs).ok_or(fail)?;
                let lin_res = LinearSpace::norm(&(lhs * &delta - &rhs));
                let y = ys + delta;
                Ok((
                    S::from_dvector(y),
                    SolverReport {
                        iterations: 1,
                        final_residual: lin_res,
                        tolerance: self.solver.threshold(scale),
                        converged: true,
                    },
                ))
            }
        }
    }
}
