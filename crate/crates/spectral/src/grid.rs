//! The periodic grid on `[0, 2π]²`, its wavenumbers, the 2/3 dealiasing
//! mask, and 2D transforms.
//!
//! Arrays are row-major with index `j * n + i`, where `i` runs along `x`
//! and `j` along `y`: `x_i = 2π i / n`, `y_j = 2π j / n`. Spectral
//! coefficients are normalised so that `u(x) = Σ û_k e^{i k·x}`.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::SpectralError;

#[derive(Clone)]
pub struct Grid {
    n: usize,
    /// Integer wavenumber of each 1D index.
    wavenumbers: Vec<f64>,
    /// `true` for retained (non-aliased) modes, per 2D index.
    mask: Vec<bool>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid").field("n", &self.n).finish()
    }
}

impl Grid {
    /// A grid with `n` points per direction; `n` must be a power of two
    /// and at least 4.
    pub fn new(n: usize) -> Result<Self, SpectralError> {
        if n < 4 || !n.is_power_of_two() {
            return Err(SpectralError::BadResolution(n));
        }
        let half = n as isize / 2;
        let wavenumbers: Vec<f64> = (0..n as isize)
            .map(|m| if m < half { m as f64 } else { (m - n as isize) as f64 })
            .collect();
        let kmax = (n / 3) as f64;
        let mut mask = vec![false; n * n];
        for j in 0..n {
            for i in 0..n {
                mask[j * n + i] = wavenumbers[i].abs() <= kmax && wavenumbers[j].abs() <= kmax;
            }
        }
        let mut planner = FftPlanner::new();
        Ok(Self {
            n,
            wavenumbers,
            mask,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Largest retained wavenumber per direction.
    pub fn kmax(&self) -> usize {
        self.n / 3
    }

    /// `(kx, ky)` of the 2D index `idx`.
    pub fn k(&self, idx: usize) -> (f64, f64) {
        (self.wavenumbers[idx % self.n], self.wavenumbers[idx / self.n])
    }

    pub fn k2(&self, idx: usize) -> f64 {
        let (kx, ky) = self.k(idx);
        kx * kx + ky * ky
    }

    pub fn retained(&self, idx: usize) -> bool {
        self.mask[idx]
    }

    /// 2D index of the integer wavenumber pair `(kx, ky)`.
    pub fn index_of(&self, kx: i64, ky: i64) -> usize {
        let n = self.n as i64;
        (ky.rem_euclid(n) * n + kx.rem_euclid(n)) as usize
    }

    /// Grid coordinates `(x_i, y_j)` of the 2D index `idx`.
    pub fn point(&self, idx: usize) -> (f64, f64) {
        let h = 2.0 * std::f64::consts::PI / self.n as f64;
        ((idx % self.n) as f64 * h, (idx / self.n) as f64 * h)
    }

    /// Zero the aliased modes.
    pub fn dealias(&self, coeffs: &mut [Complex64]) {
        for (c, &keep) in coeffs.iter_mut().zip(&self.mask) {
            if !keep {
                *c = Complex64::new(0.0, 0.0);
            }
        }
    }

    fn transform_2d(&self, data: &mut [Complex64], fft: &Arc<dyn Fft<f64>>) {
        assert_eq!(data.len(), self.len(), "grid size mismatch");
        let n = self.n;
        fft.process(data);
        let mut t = vec![Complex64::new(0.0, 0.0); n * n];
        transpose(data, &mut t, n);
        fft.process(&mut t);
        transpose(&t, data, n);
    }

    /// Physical values to normalised coefficients.
    pub fn forward(&self, values: &[f64]) -> Vec<Complex64> {
        let mut data: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.transform_2d(&mut data, &self.forward);
        let scale = 1.0 / self.len() as f64;
        data.iter_mut().for_each(|c| *c *= scale);
        data
    }

    /// Coefficients to physical values (real part).
    pub fn inverse(&self, coeffs: &[Complex64]) -> Vec<f64> {
        let mut data = coeffs.to_vec();
        self.transform_2d(&mut data, &self.inverse);
        data.iter().map(|c| c.re).collect()
    }

    /// Sample `f(x, y)` on the grid.
    pub fn sample(&self, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        (0..self.len())
            .map(|idx| {
                let (x, y) = self.point(idx);
                f(x, y)
            })
            .collect()
    }
}

fn transpose(src: &[Complex64], dst: &mut [Complex64], n: usize) {
    for j in 0..n {
        for i in 0..n {
            dst[i * n + j] = src[j * n + i];
        }
    }
}
