//! Convergence of backward Euler and its filtered variants on scalar
//! problems with known solutions.

use rayon::prelude::*;
use tfilter::problems::by_name;
use tfilter::verify::{fit_slope, RateReport};
use tfilter::{integrate, DriverConfig, Mode};

use crate::error::CliError;
use crate::table::{Cell, Table};

/// Final-time errors per step size for the three constant-step methods.
#[derive(Debug, Clone, PartialEq)]
pub struct OdeConvergence {
    pub problem: String,
    pub dts: Vec<f64>,
    pub be: Vec<f64>,
    pub filtered: Vec<f64>,
    pub double: Vec<f64>,
}

impl OdeConvergence {
    /// Least-squares orders `[be, filtered, double]`.
    pub fn slopes(&self) -> [f64; 3] {
        [
            fit_slope(&self.dts, &self.be),
            fit_slope(&self.dts, &self.filtered),
            fit_slope(&self.dts, &self.double),
        ]
    }

    pub fn table(&self) -> Table {
        let orders = |e: &[f64]| RateReport::new(self.dts.clone(), e.to_vec()).pairwise_orders();
        let (ob, of, od) = (orders(&self.be), orders(&self.filtered), orders(&self.double));
        let mut t = Table::new(&[
            "dt",
            "err_be",
            "err_filtered",
            "err_double",
            "order_be",
            "order_filtered",
            "order_double",
        ]);
        for i in 0..self.dts.len() {
            let order = |o: &[f64]| if i == 0 { Cell::Empty } else { Cell::Float(o[i - 1]) };
            t.push(vec![
                self.dts[i].into(),
                self.be[i].into(),
                self.filtered[i].into(),
                self.double[i].into(),
                order(&ob),
                order(&of),
                order(&od),
            ]);
        }
        t
    }
}

const MODES: [Mode; 3] = [Mode::ConstantOrder1, Mode::ConstantOrder2, Mode::ConstantDoubleFilter];

pub fn ode_convergence(problem: &str, dts: &[f64], t_end: f64) -> Result<OdeConvergence, CliError> {
    let reference = by_name(problem).ok_or_else(|| CliError::config(format!("unknown problem '{problem}'")))?;
    let exact = (reference.exact)(t_end);
    let cells: Vec<Result<[f64; 3], String>> = dts
        .par_iter()
        .map(|&dt| {
            let mut errs = [0.0; 3];
            for (e, mode) in errs.iter_mut().zip(MODES) {
                let cfg = DriverConfig::constant(mode, dt, reference.t0, t_end).with_keep_states(false);
                let (traj, _) = integrate(&reference.problem, &reference.y0, reference.t0, t_end, &cfg)
                    .map_err(|f| format!("dt = {dt}, {mode:?}: {f}"))?;
                *e = (traj.final_state - exact).abs();
            }
            Ok(errs)
        })
        .collect();

    let mut study = OdeConvergence {
        problem: problem.to_string(),
        dts: Vec::new(),
        be: Vec::new(),
        filtered: Vec::new(),
        double: Vec::new(),
    };
    for (&dt, cell) in dts.iter().zip(cells) {
        match cell {
            Ok([b, f, d]) => {
                study.dts.push(dt);
                study.be.push(b);
                study.filtered.push(f);
                study.double.push(d);
            }
            Err(msg) => return Err(CliError::numerical(msg, Some(study.table()))),
        }
    }
    Ok(study)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decay_orders() {
        let s = ode_convergence("decay", &[0.1, 0.05, 0.025, 0.0125], 1.0).unwrap();
        let [b, f, d] = s.slopes();
        assert!((b - 1.0).abs() < 0.1 && (f - 2.0).abs() < 0.1 && (d - 2.0).abs() < 0.1);
        let t = s.table();
        assert_eq!(t.len(), 4);
        assert_eq!(t.rows[0][4], Cell::Empty);
    }
}
