//! Linear time filters applied to backward Euler output.
//!
//! * [`filter_order2`] raises a backward Euler value to second order using
//!   the two previous states and the current step ratio.
//! * [`filter_second`] is the optional second filter that removes the
//!   `y'''` part of the leading local error.
//! * [`stencil_i`] / [`stencil_d`] are the constant-step interpolation and
//!   difference stencils of the equivalent one-leg form.
//!
//! Step ratios are causal: `current = (t^{n+1} - t^n) / (t^n - t^{n-1})`
//! and `previous = (t^n - t^{n-1}) / (t^{n-1} - t^{n-2})`.

use crate::error::{Error, Result};
use crate::lin_space::{linear_combine, LinearSpace};

/// Ratios of consecutive step sizes around the step being taken.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRatios {
    /// Current step over the previous one.
    pub current: f64,
    /// Previous step over the one before it.
    pub previous: f64,
}

impl StepRatios {
    pub fn new(current: f64, previous: f64) -> Result<Self> {
        check_ratio(current)?;
        check_ratio(previous)?;
        Ok(Self { current, previous })
    }

    pub const fn constant() -> Self {
        Self {
            current: 1.0,
            previous: 1.0,
        }
    }
}

pub(crate) fn check_ratio(r: f64) -> Result<()> {
    if r.is_finite() && r > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidRatio(r))
    }
}

/// Weight `r / (2r + 1)` of the order-2 filter; `1/3` at constant step.
pub fn filter_weight(r: f64) -> f64 {
    r / (2.0 * r + 1.0)
}

/// Second-order filtered value
/// `y_be - w(r) (y_be - (1 + r) y_n + r y_nm1)`.
pub fn filter_order2<S: LinearSpace>(y_be: &S, y_n: &S, y_nm1: &S, r_cur: f64) -> Result<S> {
    check_ratio(r_cur)?;
    let w = filter_weight(r_cur);
    linear_combine(&[1.0 - w, w * (1.0 + r_cur), -w * r_cur], &[y_be, y_n, y_nm1])
}

/// Coefficients of the order-2 error estimate:
/// `EST2 = prefactor · (y2 + c_n y_n + c_nm1 y_nm1 + c_nm2 y_nm2)`.
///
/// The bracket is a scaled third divided difference over the four nodes,
/// so it vanishes on data that is quadratic in `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Est2Weights {
    pub prefactor: f64,
    pub c_n: f64,
    pub c_nm1: f64,
    pub c_nm2: f64,
}

impl Est2Weights {
    pub fn new(ratios: StepRatios) -> Result<Self> {
        let StepRatios {
            current: r,
            previous: q,
        } = StepRatios::new(ratios.current, ratios.previous)?;
        let prefactor = q * r * (1.0 + r) / (1.0 + 2.0 * r + q * (1.0 + 4.0 * r + 3.0 * r * r));
        let shared = 1.0 + q * (1.0 + r);
        Ok(Self {
            prefactor,
            c_n: -(1.0 + r) * shared / (1.0 + q),
            c_nm1: r * shared,
            c_nm2: -q * q * r * (1.0 + r) / (1.0 + q),
        })
    }

    /// Coefficients of the full combination (prefactor applied) on
    /// `[y2, y_n, y_nm1, y_nm2]`.
    pub fn combined(&self) -> [f64; 4] {
        let p = self.prefactor;
        [p, p * self.c_n, p * self.c_nm1, p * self.c_nm2]
    }
}

/// The doubly filtered value `y2 - EST2`. At constant step this is
/// `y2 - (2/11)(y2 - 3 y_n + 3 y_nm1 - y_nm2)`.
pub fn filter_second<S: LinearSpace>(y2: &S, y_n: &S, y_nm1: &S, y_nm2: &S, ratios: StepRatios) -> Result<S> {
    let [a, b, c, d] = Est2Weights::new(ratios)?.combined();
    linear_combine(&[1.0 - a, -b, -c, -d], &[y2, y_n, y_nm1, y_nm2])
}

/// `I[w] = (3/2) w^{n+1} - w^n + (1/2) w^{n-1}`.
pub fn stencil_i<S: LinearSpace>(w_np1: &S, w_n: &S, w_nm1: &S) -> Result<S> {
    linear_combine(&[1.5, -1.0, 0.5], &[w_np1, w_n, w_nm1])
}

/// `D[w] = (3/2) w^{n+1} - 2 w^n + (1/2) w^{n-1}`.
pub fn stencil_d<S: LinearSpace>(w_np1: &S, w_n: &S, w_nm1: &S) -> Result<S> {
    linear_combine(&[1.5, -2.0, 0.5], &[w_np1, w_n, w_nm1])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    /// Node times `[t_{n+1}, t_n, t_{n-1}, t_{n-2}]` for a step of size
    /// `h` with the given ratios, ending at `t_end`.
    fn nodes(t_end: f64, h: f64, r: f64, q: f64) -> [f64; 4] {
        let prev = h / r;
        let prev2 = prev / q;
        [t_end, t_end - h, t_end - h - prev, t_end - h - prev - prev2]
    }

    #[test]
    fn weight_values() {
        assert_eq!(filter_weight(1.0), 1.0 / 3.0);
        assert_eq!(filter_weight(2.0), 2.0 / 5.0);
        let mut last = 0.0;
        for i in 1..200 {
            let w = filter_weight(i as f64 * 0.05);
            assert!(w > last);
            last = w;
        }
    }

    #[test]
    fn order2_hand_values() {
        assert_relative_eq!(
            filter_order2(&4.0, &2.0, &1.0, 1.0).unwrap(),
            11.0 / 3.0,
            max_relative = 1e-15
        );
        assert_relative_eq!(filter_order2(&4.0, &2.0, &1.0, 2.0).unwrap(), 4.0, max_relative = 1e-15);
    }

    #[test]
    fn order2_rejects_bad_ratio() {
        assert_eq!(filter_order2(&1.0, &1.0, &1.0, 0.0), Err(Error::InvalidRatio(0.0)));
        assert!(filter_order2(&1.0, &1.0, &1.0, -1.0).is_err());
        assert!(filter_order2(&1.0, &1.0, &1.0, f64::NAN).is_err());
    }

    #[test]
    fn second_filter_hand_values() {
        let s = StepRatios::constant();
        assert_relative_eq!(
            filter_second(&4.0, &2.0, &1.0, &1.0, s).unwrap(),
            4.0,
            max_relative = 1e-15
        );
        assert_relative_eq!(
            filter_second(&4.0, &2.0, &1.0, &0.0, s).unwrap(),
            42.0 / 11.0,
            max_relative = 1e-15
        );
        assert!(filter_second(
            &4.0,
            &2.0,
            &1.0,
            &0.0,
            StepRatios {
                current: 1.0,
                previous: 0.0
            }
        )
        .is_err());
    }

    #[test]
    fn est2_weights_at_constant_step() {
        let w = Est2Weights::new(StepRatios::constant()).unwrap();
        assert_eq!(w.prefactor, 2.0 / 11.0);
        assert_eq!((w.c_n, w.c_nm1, w.c_nm2), (-3.0, 3.0, -1.0));
    }

    #[test]
    fn stencils() {
        let w = 2.5;
        assert_eq!(stencil_i(&w, &w, &w).unwrap(), w);
        assert_eq!(stencil_d(&w, &w, &w).unwrap(), 0.0);
        let dt = 0.01;
        let sq = |t: f64| t * t;
        let cube = |t: f64| t * t * t;
        let (a, b, c) = (2.0 * dt, dt, 0.0);
        // I on t^2: 5 dt^2 vs exact 4 dt^2.
        assert_relative_eq!(
            stencil_i(&sq(a), &sq(b), &sq(c)).unwrap(),
            5.0 * dt * dt,
            max_relative = 1e-12
        );
        // D/dt on t^2 is exact: 4 dt.
        assert_relative_eq!(
            stencil_d(&sq(a), &sq(b), &sq(c)).unwrap() / dt,
            4.0 * dt,
            max_relative = 1e-12
        );
        // D/dt on t^3: 10 dt^2 against the exact 12 dt^2.
        assert_relative_eq!(
            stencil_d(&cube(a), &cube(b), &cube(c)).unwrap() / dt,
            10.0 * dt * dt,
            max_relative = 1e-12
        );
        // Linear data is reproduced by I.
        assert_relative_eq!(stencil_i(&a, &b, &c).unwrap(), a, max_relative = 1e-15);
    }

    proptest! {
        #[test]
        fn order2_keeps_linear_data(
            r in 0.1f64..10.0, h in 1e-3f64..1.0, t in -5.0f64..5.0,
            a in -10.0f64..10.0, b in -10.0f64..10.0,
        ) {
            let [t1, t0, tm1, _] = nodes(t, h, r, 1.0);
            let y = |s: f64| a + b * s;
            let out = filter_order2(&y(t1), &y(t0), &y(tm1), r).unwrap();
            let scale = 1.0 + a.abs() + b.abs() * (t.abs() + 20.0);
            prop_assert!((out - y(t1)).abs() <= 1e-12 * scale);
        }

        #[test]
        fn second_filter_keeps_quadratic_data(
            r in 0.1f64..10.0, q in 0.1f64..10.0, h in 1e-3f64..1.0,
            a in -10.0f64..10.0, b in -10.0f64..10.0, c in -10.0f64..10.0,
        ) {
            let ts = nodes(0.3, h, r, q);
            let y = |s: f64| a + b * s + c * s * s;
            let out = filter_second(&y(ts[0]), &y(ts[1]), &y(ts[2]), &y(ts[3]), StepRatios { current: r, previous: q }).unwrap();
            let span = (ts[0] - ts[3]).abs() + 1.0;
            let scale = a.abs() + b.abs() * span + c.abs() * span * span;
            prop_assert!((out - y(ts[0])).abs() <= 1e-11 * scale);
        }
    }
}
