//! Taylor–Green vortices: the decaying exact solution and a forced
//! variant whose amplitude follows a prescribed function of time.

use std::sync::Arc;

use num_complex::Complex64;

use crate::field::{ScalarField, VelocityField};
use crate::grid::Grid;
use crate::nse::NseSolver;

/// The unit-amplitude mode `(cos x sin y, -sin x cos y)`.
pub fn tg_mode(grid: &Grid) -> VelocityField {
    // cos x sin y = Σ over (±1, ±1) of sx/(4i) e^{i(sx x + sy y)} with
    // sign sy; -sin x cos y likewise with sign -sx.
    let mut f = VelocityField::zeros(grid.n());
    for sx in [-1i64, 1] {
        for sy in [-1i64, 1] {
            let idx = grid.index_of(sx, sy);
            f.u[idx] = Complex64::new(0.0, -0.25 * sy as f64);
            f.v[idx] = Complex64::new(0.0, 0.25 * sx as f64);
        }
    }
    f
}

/// The pressure shape `-(cos 2x + cos 2y) / 4`.
pub fn tg_pressure_mode(grid: &Grid) -> ScalarField {
    let mut p = ScalarField::zeros(grid.n());
    for (kx, ky) in [(2, 0), (-2, 0), (0, 2), (0, -2)] {
        p.c[grid.index_of(kx, ky)] = Complex64::new(-0.125, 0.0);
    }
    p
}

/// Exact decaying solution: `u = e^{-2νt}(cos x sin y, -sin x cos y)`,
/// `p = -(1/4) e^{-4νt}(cos 2x + cos 2y)`.
pub fn taylor_green_exact(grid: &Grid, t: f64, nu: f64) -> (VelocityField, ScalarField) {
    let a = (-2.0 * nu * t).exp();
    let u = tg_mode(grid).scaled(a);
    let mut p = tg_pressure_mode(grid);
    p.c.iter_mut().for_each(|c| *c *= a * a);
    (u, p)
}

/// A smooth scalar amplitude with its derivative.
pub type Amplitude = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Forced Taylor–Green flow with `f = (2νF + F') (cos x sin y, -sin x cos y)`.
/// Starting from amplitude `F(0)`, the exact velocity is `F(t)` times the
/// mode.
pub fn forced_tg_problem(grid: Grid, nu: f64, amplitude: Amplitude, derivative: Amplitude) -> NseSolver {
    let mode = tg_mode(&grid);
    let forcing = move |t: f64| mode.scaled(2.0 * nu * amplitude(t) + derivative(t));
    NseSolver::new(grid, nu).with_forcing(Arc::new(forcing))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;
    use tfilter::LinearSpace;

    #[test]
    fn mode_matches_formula() {
        let g = Grid::new(16).unwrap();
        let (u, v) = tg_mode(&g).to_physical(&g);
        let eu = g.sample(|x, y| x.cos() * y.sin());
        let ev = g.sample(|x, y| -x.sin() * y.cos());
        for i in 0..g.len() {
            assert_relative_eq!(u[i], eu[i], epsilon = 1e-14);
            assert_relative_eq!(v[i], ev[i], epsilon = 1e-14);
        }
        let p = tg_pressure_mode(&g).to_physical(&g);
        let ep = g.sample(|x, y| -0.25 * ((2.0 * x).cos() + (2.0 * y).cos()));
        for i in 0..g.len() {
            assert_relative_eq!(p[i], ep[i], epsilon = 1e-14);
        }
    }

    #[test]
    fn kinetic_energy_and_point_value() {
        let g = Grid::new(16).unwrap();
        let (u, _) = taylor_green_exact(&g, 0.0, 1.0);
        assert_relative_eq!(0.5 * u.norm().powi(2), PI * PI, max_relative = 1e-14);
        // (0, π/2) is grid point i = 0, j = n/4.
        let (pu, pv) = u.to_physical(&g);
        let idx = (g.n() / 4) * g.n();
        assert_relative_eq!(pu[idx], 1.0, epsilon = 1e-14);
        assert_relative_eq!(pv[idx], 0.0, epsilon = 1e-14);
        assert_eq!(u.relative_divergence(&g), 0.0);
    }
}
