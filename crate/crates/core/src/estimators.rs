//! Embedded local error estimates for the order-1 and order-2 values.

use crate::error::Result;
use crate::filters::{Est2Weights, StepRatios};
use crate::lin_space::{difference, linear_combine, LinearSpace};

/// `EST1 = y_filtered - y_be`: local error estimate of the backward Euler value.
pub fn est1<S: LinearSpace>(y_be: &S, y_filtered: &S) -> Result<S> {
    difference(y_filtered, y_be)
}

/// Local error estimate of the filtered value, built from the filtered
/// value and three back states. At constant step it is
/// `(2/11)(y2 - 3 y_n + 3 y_nm1 - y_nm2)`.
pub fn est2<S: LinearSpace>(y2: &S, y_n: &S, y_nm1: &S, y_nm2: &S, ratios: StepRatios) -> Result<S> {
    let coeffs = Est2Weights::new(ratios)?.combined();
    linear_combine(&coeffs, &[y2, y_n, y_nm1, y_nm2])
}

/// Both estimates for one attempted step. `est2` is absent until three
/// back states exist; a zero there would silently pass the tolerance test.
#[derive(Debug, Clone)]
pub struct ErrorEstimates<S> {
    pub est1_vec: S,
    pub est2_vec: Option<S>,
    pub est1: f64,
    pub est2: Option<f64>,
}

impl<S: LinearSpace> ErrorEstimates<S> {
    pub fn new(est1_vec: S, est2_vec: Option<S>) -> Self {
        let est1 = est1_vec.norm();
        let est2 = est2_vec.as_ref().map(LinearSpace::norm);
        Self {
            est1_vec,
            est2_vec,
            est1,
            est2,
        }
    }

    /// Estimates for the step producing `y_be -> y2`, using `back =
    /// [y_n, y_nm1, y_nm2?]`.
    pub fn compute(y_be: &S, y2: &S, back: &[&S], ratios: StepRatios) -> Result<Self> {
        let e1 = est1(y_be, y2)?;
        let e2 = match back {
            [y_n, y_nm1, y_nm2, ..] => Some(est2(y2, y_n, y_nm1, y_nm2, ratios)?),
            _ => None,
        };
        Ok(Self::new(e1, e2))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filters::{filter_order2, filter_second};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn est1_values() {
        assert_eq!(est1(&2.0, &2.0).unwrap(), 0.0);
        assert_eq!(est1(&3.0, &4.0).unwrap(), 1.0);
        let y2 = filter_order2(&4.0, &2.0, &1.0, 1.0).unwrap();
        assert_relative_eq!(est1(&4.0, &y2).unwrap(), -1.0 / 3.0, max_relative = 1e-15);
    }

    #[test]
    fn est2_values() {
        let s = StepRatios::constant();
        // t^2 sampled at 3, 2, 1, 0.
        assert!(est2(&9.0, &4.0, &1.0, &0.0, s).unwrap().abs() < 1e-15);
        assert_relative_eq!(
            est2(&4.0, &2.0, &1.0, &0.0, s).unwrap(),
            2.0 / 11.0,
            max_relative = 1e-15
        );
    }

    #[test]
    fn est2_absent_without_history() {
        let e = ErrorEstimates::compute(&1.0, &1.5, &[&1.0, &0.5], StepRatios::constant()).unwrap();
        assert!(e.est2.is_none() && e.est2_vec.is_none());
        assert_eq!(e.est1, 0.5);
        let e = ErrorEstimates::compute(&4.0, &4.0, &[&2.0, &1.0, &0.0], StepRatios::constant()).unwrap();
        assert_relative_eq!(e.est2.unwrap(), 2.0 / 11.0, max_relative = 1e-15);
    }

    #[test]
    fn doubly_filtered_is_y2_minus_est2() {
        let r = StepRatios::new(1.7, 0.6).unwrap();
        let (y2, a, b, c) = (1.3, 0.4, -2.0, 5.5);
        let lhs = filter_second(&y2, &a, &b, &c, r).unwrap();
        let rhs = y2 - est2(&y2, &a, &b, &c, r).unwrap();
        assert_relative_eq!(lhs, rhs, max_relative = 1e-14);
    }

    /// One step of size `h` of y' = lam y from exact history, returning
    /// (true local error of y_be, est1, true local error of y2, est2).
    fn dahlquist_local(lam: f64, h: f64, r: f64, q: f64) -> (f64, f64, f64, f64) {
        let exact = |t: f64| (lam * t).exp();
        let t1 = 1.0;
        let t0 = t1 - h;
        let tm1 = t0 - h / r;
        let tm2 = tm1 - h / r / q;
        let (yn, ynm1, ynm2) = (exact(t0), exact(tm1), exact(tm2));
        let y_be = yn / (1.0 - lam * h);
        let y2 = filter_order2(&y_be, &yn, &ynm1, r).unwrap();
        let e = ErrorEstimates::compute(
            &y_be,
            &y2,
            &[&yn, &ynm1, &ynm2],
            StepRatios {
                current: r,
                previous: q,
            },
        )
        .unwrap();
        (
            (y_be - exact(t1)).abs(),
            e.est1,
            (y2 - exact(t1)).abs(),
            e.est2.unwrap(),
        )
    }

    #[test]
    fn estimates_track_dahlquist_local_errors() {
        for &lam in &[-1.0, -3.0, 0.5] {
            for &(r, q) in &[(1.0, 1.0), (1.3, 0.8), (0.7, 1.2)] {
                for &h in &[1e-2, 5e-3, 2.5e-3] {
                    let (err1, e1, err2, e2) = dahlquist_local(lam, h, r, q);
                    let ratio1 = e1 / err1;
                    let ratio2 = e2 / err2;
                    assert!(
                        (0.25..=4.0).contains(&ratio1),
                        "est1 ratio {ratio1} lam {lam} r {r} q {q} h {h}"
                    );
                    assert!(
                        (0.25..=4.0).contains(&ratio2),
                        "est2 ratio {ratio2} lam {lam} r {r} q {q} h {h}"
                    );
                }
            }
        }
    }

    proptest! {
        #[test]
        fn est2_vanishes_on_quadratics(
            r in 0.1f64..10.0, q in 0.1f64..10.0, h in 1e-3f64..1.0,
            a in -10.0f64..10.0, b in -10.0f64..10.0, c in -10.0f64..10.0,
        ) {
            let t1 = 0.0;
            let t0 = t1 - h;
            let tm1 = t0 - h / r;
            let tm2 = tm1 - h / r / q;
            let y = |s: f64| a + b * s + c * s * s;
            let e = est2(&y(t1), &y(t0), &y(tm1), &y(tm2), StepRatios { current: r, previous: q }).unwrap();
            let span = (t1 - tm2).abs() + 1.0;
            prop_assert!(e.abs() <= 1e-11 * (a.abs() + b.abs() * span + c.abs() * span * span));
        }
    }
}
