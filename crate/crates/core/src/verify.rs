//! Numerical checks of the method's algebraic and analytic properties:
//! the energy identity behind its stability, the G-norm form of the
//! discrete energy, consistency of the one-leg stencils, equivalence of
//! the filtered and one-leg formulations, and stability at extreme
//! stiffness.

use nalgebra::{Matrix2, Vector2};

use crate::driver::{integrate, DriverConfig, FailureReason, Mode};
use crate::error::{Result, SolveError};
use crate::filters::{filter_order2, filter_second, stencil_d, stencil_i, StepRatios};
use crate::lin_space::{inner, linear_combine, LinearSpace};
use crate::stepper::{OdeProblem, Problem};

/// Both sides of the stencil identity
/// `D(a,b,c) · I(a,b,c) = Φ(a,b) - Φ(b,c) + (3/4)(a - 2b + c)^2`, with
/// `Φ(a,b) = (a^2 + (2a - b)^2 + (a - b)^2) / 4`.
pub fn identity_sides(a: f64, b: f64, c: f64) -> (f64, f64) {
    let lhs = (1.5 * a - 2.0 * b + 0.5 * c) * (1.5 * a - b + 0.5 * c);
    let phi = |x: f64, y: f64| (x * x + (2.0 * x - y).powi(2) + (x - y).powi(2)) / 4.0;
    let rhs = phi(a, b) - phi(b, c) + 0.75 * (a - 2.0 * b + c).powi(2);
    (lhs, rhs)
}

/// `|LHS - RHS|` of [`identity_sides`].
pub fn check_identity(a: f64, b: f64, c: f64) -> f64 {
    let (l, r) = identity_sides(a, b, c);
    (l - r).abs()
}

/// The G matrix of the one-leg form.
pub const G_MATRIX: [[f64; 2]; 2] = [[1.5, -0.75], [-0.75, 0.5]];

/// Discrete energy `(|u_n|^2 + |2u_n - u_nm1|^2 + |u_n - u_nm1|^2) / 4`,
/// using the state's `norm_l2`.
pub fn g_energy<S: LinearSpace>(u_n: &S, u_nm1: &S) -> Result<f64> {
    let two_minus = linear_combine(&[2.0, -1.0], &[u_n, u_nm1])?;
    let diff = linear_combine(&[1.0, -1.0], &[u_n, u_nm1])?;
    Ok(0.25 * (u_n.norm_l2().powi(2) + two_minus.norm_l2().powi(2) + diff.norm_l2().powi(2)))
}

/// `[u_n, u_nm1] G [u_n; u_nm1]` expanded with inner products.
pub fn g_quadratic_form<S: LinearSpace>(u_n: &S, u_nm1: &S) -> Result<f64> {
    let [[g11, g12], [g21, g22]] = G_MATRIX;
    Ok(g11 * inner(u_n, u_n)? + (g12 + g21) * inner(u_n, u_nm1)? + g22 * inner(u_nm1, u_nm1)?)
}

/// `|g_energy - g_quadratic_form|`.
pub fn check_g_form<S: LinearSpace>(u_n: &S, u_nm1: &S) -> Result<f64> {
    Ok((g_energy(u_n, u_nm1)? - g_quadratic_form(u_n, u_nm1)?).abs())
}

/// Errors against decreasing step sizes, with the least-squares slope
/// of `log(error)` on `log(dt)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RateReport {
    pub dts: Vec<f64>,
    pub errors: Vec<f64>,
    pub slope: f64,
}

impl RateReport {
    pub fn new(dts: Vec<f64>, errors: Vec<f64>) -> Self {
        let slope = fit_slope(&dts, &errors);
        Self { dts, errors, slope }
    }

    /// Slopes between consecutive pairs.
    pub fn pairwise_orders(&self) -> Vec<f64> {
        self.dts
            .windows(2)
            .zip(self.errors.windows(2))
            .map(|(d, e)| (e[0] / e[1]).ln() / (d[0] / d[1]).ln())
            .collect()
    }
}

/// Least-squares slope of `log y` against `log x`.
pub fn fit_slope(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

const GL5_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683_1,
    0.0,
    0.538_469_310_105_683_1,
    0.906_179_845_938_664,
];
const GL5_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_1,
    0.478_628_670_499_366_5,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
];

/// Composite five-point Gauss–Legendre quadrature on `panels` panels.
pub fn quadrature(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|k| {
            let mid = a + (k as f64 + 0.5) * h;
            GL5_NODES
                .iter()
                .zip(GL5_WEIGHTS)
                .map(|(x, w)| w * f(mid + 0.5 * h * x))
                .sum::<f64>()
                * 0.5
                * h
        })
        .sum()
}

/// A smooth scalar function with its first three derivatives.
#[derive(Debug, Clone, Copy)]
pub struct Smooth {
    pub u: fn(f64) -> f64,
    pub d1: fn(f64) -> f64,
    pub d2: fn(f64) -> f64,
    pub d3: fn(f64) -> f64,
}

impl Smooth {
    pub const SINE: Smooth = Smooth {
        u: f64::sin,
        d1: f64::cos,
        d2: |t| -t.sin(),
        d3: |t| -t.cos(),
    };
}

/// Stencil gaps on equally spaced samples of a smooth function, with the
/// matching integral bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct ConsistencyReport {
    /// `|D[u]/dt - u_t|` at the newest node.
    pub d_gap: RateReport,
    /// `|I[u] - u|` at the newest node.
    pub i_gap: RateReport,
    /// `(6/5) dt^3 ∫ u_ttt^2` over the two steps.
    pub d_bound: Vec<f64>,
    /// `(4/3) dt^3 ∫ u_tt^2` over the two steps.
    pub i_bound: Vec<f64>,
}

impl ConsistencyReport {
    /// Squared gaps lie below their bounds at every step size.
    pub fn within_bounds(&self) -> bool {
        let ok = |gaps: &RateReport, bounds: &[f64]| gaps.errors.iter().zip(bounds).all(|(g, b)| g * g <= *b);
        ok(&self.d_gap, &self.d_bound) && ok(&self.i_gap, &self.i_bound)
    }
}

/// Stencil gaps at `t_new` for each step size, nodes `t_new - k dt`.
pub fn consistency_rates(f: Smooth, t_new: f64, dts: &[f64]) -> ConsistencyReport {
    let mut d_gaps = Vec::new();
    let mut i_gaps = Vec::new();
    let mut d_bound = Vec::new();
    let mut i_bound = Vec::new();
    for &dt in dts {
        let (a, b, c) = ((f.u)(t_new), (f.u)(t_new - dt), (f.u)(t_new - 2.0 * dt));
        let d = stencil_d(&a, &b, &c).expect("scalar combination");
        let i = stencil_i(&a, &b, &c).expect("scalar combination");
        d_gaps.push((d / dt - (f.d1)(t_new)).abs());
        i_gaps.push((i - a).abs());
        let lo = t_new - 2.0 * dt;
        d_bound.push(1.2 * dt.powi(3) * quadrature(|s| (f.d3)(s).powi(2), lo, t_new, 16));
        i_bound.push(4.0 / 3.0 * dt.powi(3) * quadrature(|s| (f.d2)(s).powi(2), lo, t_new, 16));
    }
    ConsistencyReport {
        d_gap: RateReport::new(dts.to_vec(), d_gaps),
        i_gap: RateReport::new(dts.to_vec(), i_gaps),
        d_bound,
        i_bound,
    }
}

/// Largest deviations between the filtered and one-leg formulations.
///
/// An auxiliary "pressure" `p = f(t, ŷ)` is carried along with the
/// state: unfiltered under option A, filtered like the state under
/// option B. In the one-leg form option A gives `p = f(t, I[y])` and
/// option B gives `I[p] = f(t, I[y])`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EquivalenceReport {
    pub state: f64,
    pub pressure_a: f64,
    pub pressure_b: f64,
}

impl EquivalenceReport {
    pub fn max(&self) -> f64 {
        self.state.max(self.pressure_a).max(self.pressure_b)
    }
}

/// Run both formulations for `steps` constant steps from `y0` at `t0`.
/// The first step is plain backward Euler in both.
pub fn check_equivalence(
    problem: &OdeProblem<f64>,
    t0: f64,
    y0: f64,
    dt: f64,
    steps: usize,
) -> Result<EquivalenceReport, SolveError> {
    let f = |t: f64, y: f64| problem.rhs(t, &y);
    let t1 = t0 + dt;
    let (y1, _) = problem.implicit_solve(t1, &y0, dt, None)?;
    let (p0, p1) = (f(t0, y0), f(t1, y1));

    // Filtered route: state and option B pressure histories.
    let mut fy = [y1, y0];
    let mut fb = [p1, p0];
    // One-leg route.
    let mut oy = [y1, y0];
    let mut ob = [p1, p0];

    let mut report = EquivalenceReport::default();
    for n in 1..steps {
        let t = t0 + (n + 1) as f64 * dt;

        let (y_hat, _) = problem.implicit_solve(t, &fy[0], dt, None)?;
        let y = filter_order2(&y_hat, &fy[0], &fy[1], 1.0).expect("scalar");
        let p_hat = f(t, y_hat);
        let pb = filter_order2(&p_hat, &fb[0], &fb[1], 1.0).expect("scalar");

        let (z, _) = problem.one_leg_step(t, &oy[0], &oy[1], dt)?;
        let iz = stencil_i(&z, &oy[0], &oy[1]).expect("scalar");
        let qa = f(t, iz);
        let qb = (f(t, iz) + ob[0] - 0.5 * ob[1]) / 1.5;

        report.state = report.state.max((y - z).abs());
        report.pressure_a = report.pressure_a.max((p_hat - qa).abs());
        report.pressure_b = report.pressure_b.max((pb - qb).abs());

        fy = [y, fy[0]];
        fb = [pb, fb[0]];
        oy = [z, oy[0]];
        ob = [qb, ob[0]];
    }
    Ok(report)
}

/// Local errors of the singly and doubly filtered values for one
/// constant step of size `dt` ending at `t_new`, started from exact
/// history.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalErrors {
    pub single: f64,
    pub double: f64,
}

pub fn filtered_local_errors(
    problem: &OdeProblem<f64>,
    exact: fn(f64) -> f64,
    t_new: f64,
    dt: f64,
) -> Result<LocalErrors, SolveError> {
    let back: [f64; 3] = std::array::from_fn(|k| exact(t_new - (k + 1) as f64 * dt));
    let (y_be, _) = problem.implicit_solve(t_new, &back[0], dt, None)?;
    let s = StepRatios::constant();
    let y2 = filter_order2(&y_be, &back[0], &back[1], 1.0).expect("scalar");
    let y3 = filter_second(&y2, &back[0], &back[1], &back[2], s).expect("scalar");
    let y = exact(t_new);
    Ok(LocalErrors {
        single: (y2 - y).abs(),
        double: (y3 - y).abs(),
    })
}

/// Roots of the filtered method's characteristic polynomial on
/// `y' = λ y` with `z = λ dt`, as `(re, im)` pairs.
pub fn characteristic_roots(z: f64) -> [(f64, f64); 2] {
    // 1.5 (1 - z) ρ^2 - (2 - z) ρ + 0.5 (1 - z) = 0
    let a = 1.5 * (1.0 - z);
    let b = -(2.0 - z);
    let c = 0.5 * (1.0 - z);
    let disc = b * b - 4.0 * a * c;
    if disc >= 0.0 {
        let s = disc.sqrt();
        [((-b + s) / (2.0 * a), 0.0), ((-b - s) / (2.0 * a), 0.0)]
    } else {
        let s = (-disc).sqrt();
        [(-b / (2.0 * a), s / (2.0 * a)), (-b / (2.0 * a), -s / (2.0 * a))]
    }
}

/// Behaviour of the filtered method on `y' = λ y` at a fixed `λ dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityProbe {
    pub iterates: Vec<f64>,
    /// Discrete energies `g_energy(y_n, y_{n-1})`, `n >= 1`.
    pub energies: Vec<f64>,
    /// Energies never increase.
    pub monotone: bool,
    /// Every iterate is bounded by `|y_0|`.
    pub bounded: bool,
    /// Spectral radius of the two-term recurrence fitted to the tail.
    pub fitted_ratio: f64,
}

/// Integrate `y' = λ y`, `y(0) = 1`, with `dt = 1`, `λ = z`, in constant
/// order-2 mode for `steps` steps.
pub fn a_stability_probe(z: f64, steps: usize) -> std::result::Result<StabilityProbe, FailureReason> {
    let problem =
        OdeProblem::new(move |_, y: &f64| z * y).with_jacobian(move |_, _| nalgebra::DMatrix::from_element(1, 1, z));
    let t_end = steps as f64;
    let cfg = DriverConfig::constant(Mode::ConstantOrder2, 1.0, 0.0, t_end);
    let (traj, _) = integrate(&problem, &1.0, 0.0, t_end, &cfg).map_err(|e| e.reason)?;
    let mut ys = vec![1.0];
    ys.extend(traj.states.iter().copied());

    let energies: Vec<f64> = ys.windows(2).map(|w| g_energy(&w[1], &w[0]).expect("scalar")).collect();
    let monotone = energies.windows(2).all(|e| e[1] <= e[0] * (1.0 + 1e-12));
    let bounded = ys.iter().all(|y| y.abs() <= 1.0);

    // Least squares for y_{n+1} = a y_n + b y_{n-1}, rows normalised so
    // the rapidly decaying tail is weighted evenly.
    let mut m = Matrix2::zeros();
    let mut v = Vector2::zeros();
    for w in ys[2..].windows(3) {
        let s = w[0].hypot(w[1]);
        if s == 0.0 || !s.is_normal() {
            continue;
        }
        let row = Vector2::new(w[1] / s, w[0] / s);
        m += row * row.transpose();
        v += row * (w[2] / s);
    }
    let fitted_ratio = match m.lu().solve(&v) {
        Some(ab) => {
            let (a, b) = (ab[0], ab[1]);
            let disc = a * a + 4.0 * b;
            if disc < 0.0 {
                (-b).sqrt()
            } else {
                ((a.abs() + disc.sqrt()) / 2.0).abs()
            }
        }
        None => f64::NAN,
    };

    Ok(StabilityProbe {
        iterates: ys,
        energies,
        monotone,
        bounded,
        fitted_ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn identity_hand_cases() {
        let (l, r) = identity_sides(1.0, 0.0, 0.0);
        assert_eq!((l, r), (2.25, 2.25));
        // Constant data: D vanishes and the energy terms telescope.
        assert_eq!(identity_sides(2.0, 2.0, 2.0), (0.0, 0.0));
    }

    #[test]
    fn g_form_hand_cases() {
        assert_eq!(g_energy(&1.0, &0.0).unwrap(), 1.5);
        assert_eq!(g_quadratic_form(&1.0, &0.0).unwrap(), 1.5);
        assert_eq!(g_energy(&1.0, &1.0).unwrap(), 0.5);
        assert_eq!(g_quadratic_form(&1.0, &1.0).unwrap(), 0.5);
    }

    #[test]
    fn slope_fit() {
        let dts = [0.1, 0.05, 0.025];
        let errs: Vec<f64> = dts.iter().map(|d| 3.0 * d * d).collect();
        assert_relative_eq!(fit_slope(&dts, &errs), 2.0, max_relative = 1e-12);
        let r = RateReport::new(dts.to_vec(), errs);
        for o in r.pairwise_orders() {
            assert_relative_eq!(o, 2.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn quadrature_is_exact_for_polynomials() {
        assert_relative_eq!(quadrature(|x| x.powi(9), 0.0, 2.0, 1), 102.4, max_relative = 1e-14);
        assert_relative_eq!(
            quadrature(f64::sin, 0.0, std::f64::consts::PI, 4),
            2.0,
            max_relative = 1e-10
        );
    }

    #[test]
    fn consistency_on_polynomials() {
        let square = Smooth {
            u: |t| t * t,
            d1: |t| 2.0 * t,
            d2: |_| 2.0,
            d3: |_| 0.0,
        };
        let r = consistency_rates(square, 1.0, &[0.1, 0.05]);
        assert!(r.d_gap.errors.iter().all(|&e| e < 1e-12));
        let cube = Smooth {
            u: |t| t * t * t,
            d1: |t| 3.0 * t * t,
            d2: |t| 6.0 * t,
            d3: |_| 6.0,
        };
        let r = consistency_rates(cube, 1.0, &[0.1, 0.05]);
        assert_relative_eq!(r.d_gap.errors[0], 2.0 * 0.01, max_relative = 1e-9);
        assert_relative_eq!(r.d_gap.errors[1], 2.0 * 0.0025, max_relative = 1e-9);
        assert!(r.within_bounds());
    }

    #[test]
    fn characteristic_root_modulus_at_infinite_stiffness() {
        let [(re, im), _] = characteristic_roots(-1e6);
        assert_relative_eq!(re.hypot(im), (1.0f64 / 3.0).sqrt(), max_relative = 1e-12);
        // z = 0: roots 1 and 1/3.
        let [(r1, _), (r2, _)] = characteristic_roots(0.0);
        assert_relative_eq!(r1, 1.0, max_relative = 1e-14);
        assert_relative_eq!(r2, 1.0 / 3.0, max_relative = 1e-14);
    }

    #[test]
    fn equivalence_on_zero_rhs() {
        let p = OdeProblem::new(|_, y: &f64| 0.0 * y);
        let r = check_equivalence(&p, 0.0, 1.0, 0.1, 20).unwrap();
        assert!(r.max() < 1e-15);
    }
}
