//! Experiment harness for the filtered backward Euler integrator.
//!
//! Each command runs one study and returns a [`Table`] (written as CSV
//! by the binary) plus a few summary lines.

pub mod adaptive;
pub mod checks;
pub mod config;
pub mod error;
pub mod flow;
pub mod ode;
pub mod table;

pub use config::{Command, RunConfig};
pub use error::CliError;
pub use table::{Cell, Table};

/// A finished command.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub table: Table,
    pub summary: Vec<String>,
}

pub fn run_command(cfg: &RunConfig) -> Result<Outcome, CliError> {
    cfg.validate()?;
    match cfg.command {
        Command::OdeConverge => {
            let s = ode::ode_convergence(&cfg.problem, &cfg.dts, cfg.t_end)?;
            let [b, f, d] = s.slopes();
            Ok(Outcome {
                summary: vec![format!("orders: be {b:.4}, filtered {f:.4}, double {d:.4}")],
                table: s.table(),
            })
        }
        Command::NseConverge => {
            let s = flow::nse_convergence(cfg.n, cfg.nu, cfg.t_end, &cfg.dts)?;
            let [ub, uf, pa, pb] = s.slopes();
            Ok(Outcome {
                summary: vec![format!(
                    "orders: velocity be {ub:.4}, velocity filtered {uf:.4}, pressure A {pa:.4}, pressure B {pb:.4}"
                )],
                table: s.table(),
            })
        }
        Command::NseEnergy => {
            let ledger = flow::nse_energy(cfg.n, cfg.nu, cfg.dt, cfg.steps, cfg.forced, cfg.option, cfg.seed)?;
            Ok(Outcome {
                summary: vec![format!("relative residual {:.3e}", ledger.relative_residual())],
                table: flow::energy_table(&ledger),
            })
        }
        Command::Adapt => {
            let problem = adaptive::TransitionProblem::new(cfg.n, cfg.nu)?;
            let run = if cfg.mode.is_adaptive() {
                adaptive::adaptive_run(&problem, cfg.controller(), cfg.t_end)?
            } else {
                adaptive::constant_run(&problem, cfg.mode, cfg.dt, cfg.t_end)?
            };
            let mut summary = vec![format!(
                "accepted {}, rejected {}, relative error {:.3e}",
                run.accepted, run.rejected, run.error
            )];
            if let Some(frac) = adaptive::rejections_in_windows(&problem, &run.trajectory) {
                summary.push(format!("rejections in transition windows: {:.1}%", 100.0 * frac));
            }
            Ok(Outcome {
                table: adaptive::attempts_table(&problem, &run.trajectory),
                summary,
            })
        }
        Command::WorkPrecision => {
            let problem = adaptive::TransitionProblem::new(cfg.n, cfg.nu)?;
            let wp = adaptive::work_precision(
                &problem,
                &cfg.controller(),
                &cfg.tols,
                &adaptive::constant_step_sizes(cfg.t_end),
                cfg.t_end,
            )?;
            let summary = wp
                .adaptive
                .iter()
                .map(|p| {
                    let c = wp.constant_error_at(p.steps);
                    format!(
                        "tol {:.0e}: {} steps, error {:.3e}, constant step at equal work {}",
                        p.parameter,
                        p.steps,
                        p.error,
                        c.map_or("n/a".into(), |e| format!("{e:.3e}"))
                    )
                })
                .collect();
            Ok(Outcome {
                table: wp.table(),
                summary,
            })
        }
        Command::Verify => {
            let checks = checks::all_checks(cfg.trials, cfg.seed)?;
            let failed: Vec<&str> = checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
            let table = checks::checks_table(&checks);
            if failed.is_empty() {
                Ok(Outcome {
                    summary: vec![format!("{} checks passed", checks.len())],
                    table,
                })
            } else {
                Err(CliError::numerical(
                    format!("failed checks: {}", failed.join("; ")),
                    Some(table),
                ))
            }
        }
        Command::Overhead => {
            let o = flow::overhead(cfg.n, cfg.nu, cfg.dt, cfg.steps, cfg.option, cfg.seed)?;
            Ok(Outcome {
                summary: vec![format!("filter time / solve time = {:.3}%", 100.0 * o.fraction())],
                table: o.table(),
            })
        }
    }
}
