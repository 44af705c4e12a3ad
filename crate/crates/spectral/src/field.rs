//! Velocity and pressure fields stored as Fourier coefficients.
//!
//! Both implement [`LinearSpace`] with the L2 inner product over the
//! periodic box, `(a, b) = (2π)² Σ_k Re(conj(â_k) b̂_k)` by Parseval, so
//! the filters and estimators apply to them unchanged and norms are in
//! energy units.

use std::f64::consts::PI;

use num_complex::Complex64;
use tfilter::LinearSpace;

use crate::grid::Grid;

const AREA: f64 = 4.0 * PI * PI;

fn combine(terms: &[(f64, &Vec<Complex64>)]) -> Vec<Complex64> {
    let (c0, x0) = terms[0];
    let mut out: Vec<Complex64> = x0.iter().map(|z| z * c0).collect();
    for (c, x) in &terms[1..] {
        for (o, z) in out.iter_mut().zip(x.iter()) {
            *o += z * c;
        }
    }
    out
}

fn dot(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.re * y.re + x.im * y.im).sum::<f64>() * AREA
}

/// A 2D velocity field `(u, v)`.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityField {
    pub n: usize,
    pub u: Vec<Complex64>,
    pub v: Vec<Complex64>,
}

impl VelocityField {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            u: vec![Complex64::new(0.0, 0.0); n * n],
            v: vec![Complex64::new(0.0, 0.0); n * n],
        }
    }

    /// Transform physical component samples.
    pub fn from_physical(grid: &Grid, u: &[f64], v: &[f64]) -> Self {
        Self {
            n: grid.n(),
            u: grid.forward(u),
            v: grid.forward(v),
        }
    }

    pub fn to_physical(&self, grid: &Grid) -> (Vec<f64>, Vec<f64>) {
        (grid.inverse(&self.u), grid.inverse(&self.v))
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self::combine_unchecked(&[(c, self)])
    }

    /// `||∇u||²` over the box.
    pub fn gradient_norm_sq(&self, grid: &Grid) -> f64 {
        let sum: f64 = (0..grid.len())
            .map(|idx| grid.k2(idx) * (self.u[idx].norm_sqr() + self.v[idx].norm_sqr()))
            .sum();
        sum * AREA
    }

    /// Coefficients of `∂x u + ∂y v`.
    pub fn divergence(&self, grid: &Grid) -> Vec<Complex64> {
        (0..grid.len())
            .map(|idx| {
                let (kx, ky) = grid.k(idx);
                Complex64::new(0.0, 1.0) * (self.u[idx] * kx + self.v[idx] * ky)
            })
            .collect()
    }

    /// `||∇·u|| / ||∇u||` (zero for a constant field).
    pub fn relative_divergence(&self, grid: &Grid) -> f64 {
        let div = dot(&self.divergence(grid), &self.divergence(grid)).sqrt();
        let grad = self.gradient_norm_sq(grid).sqrt();
        if grad == 0.0 {
            div
        } else {
            div / grad
        }
    }

    /// Largest deviation from Hermitian symmetry `û(-k) = conj(û(k))`.
    pub fn hermitian_defect(&self, grid: &Grid) -> f64 {
        let mut worst = 0.0f64;
        for idx in 0..grid.len() {
            let (kx, ky) = grid.k(idx);
            let mirror = grid.index_of(-(kx as i64), -(ky as i64));
            worst = worst
                .max((self.u[idx] - self.u[mirror].conj()).norm())
                .max((self.v[idx] - self.v[mirror].conj()).norm());
        }
        worst
    }
}

impl LinearSpace for VelocityField {
    fn dim(&self) -> usize {
        4 * self.n * self.n
    }

    fn combine_unchecked(terms: &[(f64, &Self)]) -> Self {
        let us: Vec<(f64, &Vec<Complex64>)> = terms.iter().map(|(c, f)| (*c, &f.u)).collect();
        let vs: Vec<(f64, &Vec<Complex64>)> = terms.iter().map(|(c, f)| (*c, &f.v)).collect();
        Self {
            n: terms[0].1.n,
            u: combine(&us),
            v: combine(&vs),
        }
    }

    fn dot(&self, other: &Self) -> f64 {
        dot(&self.u, &other.u) + dot(&self.v, &other.v)
    }

    /// The box L2 norm; one tolerance then refers to energy units at any
    /// resolution.
    fn norm(&self) -> f64 {
        self.norm_l2()
    }
}

/// A scalar field, used for pressure.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub n: usize,
    pub c: Vec<Complex64>,
}

impl ScalarField {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            c: vec![Complex64::new(0.0, 0.0); n * n],
        }
    }

    pub fn from_physical(grid: &Grid, values: &[f64]) -> Self {
        Self {
            n: grid.n(),
            c: grid.forward(values),
        }
    }

    pub fn to_physical(&self, grid: &Grid) -> Vec<f64> {
        grid.inverse(&self.c)
    }

    /// Mean value over the box.
    pub fn mean(&self) -> f64 {
        self.c[0].re
    }
}

impl LinearSpace for ScalarField {
    fn dim(&self) -> usize {
        2 * self.n * self.n
    }

    fn combine_unchecked(terms: &[(f64, &Self)]) -> Self {
        let cs: Vec<(f64, &Vec<Complex64>)> = terms.iter().map(|(c, f)| (*c, &f.c)).collect();
        Self {
            n: terms[0].1.n,
            c: combine(&cs),
        }
    }

    fn dot(&self, other: &Self) -> f64 {
        dot(&self.c, &other.c)
    }

    fn norm(&self) -> f64 {
        self.norm_l2()
    }
}

/// A random divergence-free field built from a stream function with
/// modes `0 < max(|kx|, |ky|) <= kmax`. `sample` supplies coefficients,
/// typically uniform in `[-1, 1]`.
pub fn random_solenoidal(grid: &Grid, kmax: i64, amplitude: f64, sample: &mut dyn FnMut() -> f64) -> VelocityField {
    let mut modes = Vec::new();
    for ky in 0..=kmax {
        for kx in -kmax..=kmax {
            if ky == 0 && kx <= 0 {
                continue;
            }
            modes.push((kx as f64, ky as f64, sample(), sample()));
        }
    }
    // u = ∂ψ/∂y, v = -∂ψ/∂x with ψ = Σ a cos(k·x) + b sin(k·x).
    let u = grid.sample(|x, y| {
        modes
            .iter()
            .map(|&(kx, ky, a, b)| {
                let ph = kx * x + ky * y;
                ky * (-a * ph.sin() + b * ph.cos())
            })
            .sum::<f64>()
            * amplitude
    });
    let v = grid.sample(|x, y| {
        modes
            .iter()
            .map(|&(kx, ky, a, b)| {
                let ph = kx * x + ky * y;
                -kx * (-a * ph.sin() + b * ph.cos())
            })
            .sum::<f64>()
            * amplitude
    });
    let mut f = VelocityField::from_physical(grid, &u, &v);
    grid.dealias(&mut f.u);
    grid.dealias(&mut f.v);
    f
}
