//! Real linear spaces the integrator is written over.
//!
//! Every filter, estimator and stepper in this crate is a linear
//! combination of states plus a norm, so the whole method is written once
//! against [`LinearSpace`] and reused for scalars, ODE systems and
//! spectral velocity fields.

use nalgebra::DVector;

use crate::error::{Error, Result};

/// Relative epsilon used by identity-type comparisons.
pub const IDENTITY_EPS: f64 = 1e-12;

/// An element of a finite-dimensional real inner-product space.
pub trait LinearSpace: Clone + std::fmt::Debug {
    /// Number of real degrees of freedom. Two states are compatible iff
    /// their dimensions agree.
    fn dim(&self) -> usize;

    /// `Σ c_i x_i`. Callers guarantee `terms` is nonempty and every state
    /// has the same dimension; use [`linear_combine`] for the checked form.
    fn combine_unchecked(terms: &[(f64, &Self)]) -> Self;

    /// The L2 inner product.
    fn dot(&self, other: &Self) -> f64;

    /// Norm used by the step-size controller. Defaults to the RMS norm
    /// (L2 divided by `sqrt(dim)`) so that one tolerance is meaningful
    /// across problem sizes.
    fn norm(&self) -> f64 {
        self.norm_l2() / (self.dim().max(1) as f64).sqrt()
    }

    /// The L2 norm induced by [`LinearSpace::dot`].
    fn norm_l2(&self) -> f64 {
        self.dot(self).max(0.0).sqrt()
    }

    fn zeros_like(&self) -> Self {
        Self::combine_unchecked(&[(0.0, self)])
    }
}

fn check_dims<S: LinearSpace>(a: &S, b: &S) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    Ok(())
}

/// Checked `Σ coeffs[i] · states[i]`.
pub fn linear_combine<S: LinearSpace>(coeffs: &[f64], states: &[&S]) -> Result<S> {
    if coeffs.is_empty() || coeffs.len() != states.len() {
        return Err(Error::BadCombination {
            coeffs: coeffs.len(),
            states: states.len(),
        });
    }
    for s in &states[1..] {
        check_dims(states[0], s)?;
    }
    let terms: Vec<(f64, &S)> = coeffs.iter().copied().zip(states.iter().copied()).collect();
    Ok(S::combine_unchecked(&terms))
}

/// Checked L2 inner product.
pub fn inner<S: LinearSpace>(u: &S, v: &S) -> Result<f64> {
    check_dims(u, v)?;
    Ok(u.dot(v))
}

/// `a - b`, checked.
pub fn difference<S: LinearSpace>(a: &S, b: &S) -> Result<S> {
    linear_combine(&[1.0, -1.0], &[a, b])
}

impl LinearSpace for f64 {
    fn dim(&self) -> usize {
        1
    }

    fn combine_unchecked(terms: &[(f64, &Self)]) -> Self {
        terms.iter().map(|(c, x)| c * **x).sum()
    }

    fn dot(&self, other: &Self) -> f64 {
        self * other
    }

    fn norm(&self) -> f64 {
        self.abs()
    }

    fn norm_l2(&self) -> f64 {
        self.abs()
    }
}

impl LinearSpace for DVector<f64> {
    fn dim(&self) -> usize {
        self.len()
    }

    fn combine_unchecked(terms: &[(f64, &Self)]) -> Self {
        let (c0, x0) = terms[0];
        let mut out = x0 * c0;
        for (c, x) in &terms[1..] {
            out.axpy(*c, x, 1.0);
        }
        out
    }

    fn dot(&self, other: &Self) -> f64 {
        self.dot(other)
    }
}

impl LinearSpace for Vec<f64> {
    fn dim(&self) -> usize {
        self.len()
    }

    fn combine_unchecked(terms: &[(f64, &Self)]) -> Self {
        let mut out = vec![0.0; terms[0].1.len()];
        for (c, x) in terms {
            for (o, xi) in out.iter_mut().zip(x.iter()) {
                *o += c * xi;
            }
        }
        out
    }

    fn dot(&self, other: &Self) -> f64 {
        self.iter().zip(other).map(|(a, b)| a * b).sum()
    }
}
