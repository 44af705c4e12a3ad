//! Reference problems with known solutions, and the smooth transition
//! functions used to build forcings with sharp but smooth switches.

use nalgebra::DMatrix;

use crate::stepper::OdeProblem;

/// A scalar problem bundled with its exact solution.
pub struct ScalarReference {
    pub name: &'static str,
    pub problem: OdeProblem<f64>,
    pub t0: f64,
    pub y0: f64,
    pub exact: fn(f64) -> f64,
}

/// `y' = -y`, `y(0) = 1`.
pub fn decay() -> ScalarReference {
    ScalarReference {
        name: "decay",
        problem: OdeProblem::new(|_, y: &f64| -y).with_jacobian(|_, _| DMatrix::from_element(1, 1, -1.0)),
        t0: 0.0,
        y0: 1.0,
        exact: |t| (-t).exp(),
    }
}

/// `y' = -y^3`, `y(0) = 1`, with solution `1 / sqrt(1 + 2t)`.
pub fn cubic() -> ScalarReference {
    ScalarReference {
        name: "cubic",
        problem: OdeProblem::new(|_, y: &f64| -y * y * y)
            .with_jacobian(|_, y: &f64| DMatrix::from_element(1, 1, -3.0 * y * y)),
        t0: 0.0,
        y0: 1.0,
        exact: |t| 1.0 / (1.0 + 2.0 * t).sqrt(),
    }
}

/// `y' = -(y - sin 4t) + 4 cos 4t`, `y(0) = 0`, with solution `sin 4t`.
///
/// The solution oscillates fast relative to the decay rate, so `y'''`
/// dominates the leading local error of the filtered method.
pub fn fast_sine() -> ScalarReference {
    ScalarReference {
        name: "fast-sine",
        problem: OdeProblem::new(|t, y: &f64| -(y - (4.0 * t).sin()) + 4.0 * (4.0 * t).cos())
            .with_jacobian(|_, _| DMatrix::from_element(1, 1, -1.0)),
        t0: 0.0,
        y0: 0.0,
        exact: |t| (4.0 * t).sin(),
    }
}

pub fn by_name(name: &str) -> Option<ScalarReference> {
    match name {
        "decay" => Some(decay()),
        "cubic" => Some(cubic()),
        "fast-sine" => Some(fast_sine()),
        _ => None,
    }
}

pub const PROBLEM_NAMES: [&str; 3] = ["decay", "cubic", "fast-sine"];

/// `g(t) = exp(-1 / (10 t)^10)` for `t > 0`, zero otherwise. Rises from
/// 0 to 1 between roughly `t = 0.05` and `t = 0.25`.
pub fn transition_g(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        (-(10.0 * t).powi(-10)).exp()
    }
}

/// Derivative of [`transition_g`].
pub fn transition_g_prime(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        let g = transition_g(t);
        if g == 0.0 {
            0.0
        } else {
            g * 100.0 * (10.0 * t).powi(-11)
        }
    }
}

/// A sum of smooth plateaus: `F(t) = Σ g(t - rise_k) g(fall_k - t)`.
/// Each plateau switches on just after `rise_k` and off just before
/// `fall_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Plateaus {
    pub edges: Vec<(f64, f64)>,
}

impl Default for Plateaus {
    fn default() -> Self {
        Self {
            edges: vec![(1.0, 3.0), (5.0, 8.0)],
        }
    }
}

impl Plateaus {
    pub fn value(&self, t: f64) -> f64 {
        self.edges
            .iter()
            .map(|&(a, b)| transition_g(t - a) * transition_g(b - t))
            .sum()
    }

    pub fn derivative(&self, t: f64) -> f64 {
        self.edges
            .iter()
            .map(|&(a, b)| {
                transition_g_prime(t - a) * transition_g(b - t) - transition_g(t - a) * transition_g_prime(b - t)
            })
            .sum()
    }

    /// Intervals over which `F` changes: `[rise, rise + width]` and
    /// `[fall - width, fall]` for each plateau.
    pub fn windows(&self, width: f64) -> Vec<(f64, f64)> {
        self.edges
            .iter()
            .flat_map(|&(a, b)| [(a, a + width), (b - width, b)])
            .collect()
    }
}
