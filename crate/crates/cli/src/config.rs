//! Run configuration. Values start from per-command defaults, then a
//! `key = value` file is applied, then command-line flags.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use tfilter::problems::PROBLEM_NAMES;
use tfilter::{ControllerConfig, Mode};
use tfilter_spectral::{Grid, PressureOption};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    OdeConverge,
    NseConverge,
    NseEnergy,
    Adapt,
    WorkPrecision,
    Verify,
    Overhead,
}

impl Command {
    pub const ALL: [Command; 7] = [
        Command::OdeConverge,
        Command::NseConverge,
        Command::NseEnergy,
        Command::Adapt,
        Command::WorkPrecision,
        Command::Verify,
        Command::Overhead,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::OdeConverge => "ode-converge",
            Command::NseConverge => "nse-converge",
            Command::NseEnergy => "nse-energy",
            Command::Adapt => "adapt",
            Command::WorkPrecision => "work-precision",
            Command::Verify => "verify",
            Command::Overhead => "overhead",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| CliError::config(format!("unknown command '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    /// Scalar problem for `ode-converge`.
    pub problem: String,
    pub tol: f64,
    /// Tolerance sweep for `work-precision`.
    pub tols: Vec<f64>,
    /// Fixed step for constant-step runs.
    pub dt: f64,
    /// Step sweep for convergence studies.
    pub dts: Vec<f64>,
    /// Step count for `nse-energy` and `overhead`.
    pub steps: usize,
    pub t_end: f64,
    pub nu: f64,
    /// Grid points per direction.
    pub n: usize,
    pub option: PressureOption,
    pub mode: Mode,
    pub dt_max: Option<f64>,
    /// Add a body force in `nse-energy`.
    pub forced: bool,
    pub output: PathBuf,
    pub seed: u64,
    /// Worker threads for independent cells; 1 runs sequentially.
    pub jobs: usize,
    /// Random trials per check in `verify`.
    pub trials: usize,
}

fn halving(start: f64, levels: usize) -> Vec<f64> {
    (0..levels).map(|k| start / f64::from(1u32 << k)).collect()
}

impl RunConfig {
    pub fn defaults(command: Command) -> Self {
        let base = Self {
            command,
            problem: "decay".into(),
            tol: 1e-3,
            tols: (1..=7).map(|k| 10f64.powi(-k)).collect(),
            dt: 0.01,
            dts: halving(0.1, 4),
            steps: 50,
            t_end: 1.0,
            nu: 1.0,
            n: 64,
            option: PressureOption::A,
            mode: Mode::Vsvo12,
            dt_max: None,
            forced: false,
            output: PathBuf::from(format!("{}.csv", command.name())),
            seed: 1,
            jobs: 1,
            trials: 1000,
        };
        match command {
            Command::NseConverge => Self {
                dts: halving(0.05, 5),
                t_end: 0.5,
                ..base
            },
            Command::NseEnergy => Self { n: 32, nu: 0.1, ..base },
            Command::Adapt | Command::WorkPrecision => Self {
                n: 16,
                nu: 0.01,
                t_end: 10.0,
                dt_max: Some(0.1),
                ..base
            },
            Command::Overhead => Self {
                nu: 0.01,
                option: PressureOption::B,
                ..base
            },
            _ => base,
        }
    }

    /// Set one field from its textual key and value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let value = value.trim();
        match key.trim().replace('_', "-").as_str() {
            "problem" => self.problem = value.to_string(),
            "tol" => self.tol = parse(key, value)?,
            "tols" => self.tols = parse_list(key, value)?,
            "dt" => self.dt = parse(key, value)?,
            "dts" => self.dts = parse_list(key, value)?,
            "steps" => self.steps = parse(key, value)?,
            "t-end" | "t" => self.t_end = parse(key, value)?,
            "nu" => self.nu = parse(key, value)?,
            "n" => self.n = parse(key, value)?,
            "option" => self.option = parse_option(value)?,
            "mode" => self.mode = parse_mode(value)?,
            "dt-max" => self.dt_max = Some(parse(key, value)?),
            "forced" => self.forced = parse(key, value)?,
            "output" => self.output = PathBuf::from(value),
            "seed" => self.seed = parse(key, value)?,
            "jobs" => self.jobs = parse(key, value)?,
            "trials" => self.trials = parse(key, value)?,
            other => return Err(CliError::config(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    /// Apply `key = value` lines. Blank lines and `#` comments are skipped.
    pub fn apply_file(&mut self, text: &str) -> Result<(), CliError> {
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::config(format!("line {}: expected key = value", lineno + 1)))?;
            self.set(k, v)
                .map_err(|e| CliError::config(format!("line {}: {e}", lineno + 1)))?;
        }
        Ok(())
    }

    /// The controller settings used by adaptive runs.
    pub fn controller(&self) -> ControllerConfig {
        let mut c = ControllerConfig::for_span(self.tol, 0.0, self.t_end);
        if let Some(m) = self.dt_max {
            c.dt_max = m;
        }
        c
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let positive = |name: &str, x: f64| {
            if x.is_finite() && x > 0.0 {
                Ok(())
            } else {
                Err(CliError::config(format!("{name} must be positive, got {x}")))
            }
        };
        positive("t-end", self.t_end)?;
        positive("nu", self.nu)?;
        positive("dt", self.dt)?;
        for &dt in &self.dts {
            positive("dts entry", dt)?;
        }
        for &tol in &self.tols {
            positive("tols entry", tol)?;
        }
        if self.dts.len() < 2 && matches!(self.command, Command::OdeConverge | Command::NseConverge) {
            return Err(CliError::config("a convergence study needs at least two dts"));
        }
        if self.dts.iter().any(|&dt| dt > self.t_end) {
            return Err(CliError::config("every dt must be at most t-end"));
        }
        if !PROBLEM_NAMES.contains(&self.problem.as_str()) {
            return Err(CliError::config(format!(
                "unknown problem '{}', expected one of {}",
                self.problem,
                PROBLEM_NAMES.join(", ")
            )));
        }
        if self.steps == 0 || self.jobs == 0 || self.trials == 0 {
            return Err(CliError::config("steps, jobs and trials must be at least 1"));
        }
        Grid::new(self.n).map_err(|e| CliError::config(e.to_string()))?;
        self.controller()
            .validate()
            .map_err(|e| CliError::config(e.to_string()))?;
        for &tol in &self.tols {
            let mut c = self.controller();
            c.tol = tol;
            c.validate().map_err(|e| CliError::config(e.to_string()))?;
        }
        Ok(())
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value
        .parse()
        .map_err(|_| CliError::config(format!("bad value '{value}' for {key}")))
}

/// A comma-separated list, or `a..b` for the decades from `a` to `b`.
pub fn parse_list(key: &str, value: &str) -> Result<Vec<f64>, CliError> {
    if let Some((a, b)) = value.split_once("..") {
        let (a, b): (f64, f64) = (parse(key, a.trim())?, parse(key, b.trim())?);
        if !(a > 0.0 && b > 0.0) {
            return Err(CliError::config(format!("{key}: range ends must be positive")));
        }
        let (la, lb) = (a.log10().round() as i32, b.log10().round() as i32);
        let step = if lb >= la { 1 } else { -1 };
        let mut out = Vec::new();
        let mut k = la;
        loop {
            out.push(10f64.powi(k));
            if k == lb {
                break;
            }
            k += step;
        }
        return Ok(out);
    }
    value
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse(key, s.trim()))
        .collect()
}

pub fn parse_mode(value: &str) -> Result<Mode, CliError> {
    match value {
        "vsvo12" => Ok(Mode::Vsvo12),
        "constant1" => Ok(Mode::ConstantOrder1),
        "constant2" => Ok(Mode::ConstantOrder2),
        "double" => Ok(Mode::ConstantDoubleFilter),
        _ => Err(CliError::config(format!(
            "bad mode '{value}', expected vsvo12, constant1, constant2 or double"
        ))),
    }
}

pub fn parse_option(value: &str) -> Result<PressureOption, CliError> {
    match value {
        "A" | "a" => Ok(PressureOption::A),
        "B" | "b" => Ok(PressureOption::B),
        _ => Err(CliError::config(format!(
            "bad pressure option '{value}', expected A or B"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decade_ranges() {
        assert_eq!(parse_list("tols", "1e-1..1e-3").unwrap(), vec![0.1, 0.01, 0.001]);
        assert_eq!(parse_list("dts", "0.1, 0.05").unwrap(), vec![0.1, 0.05]);
        assert!(parse_list("dts", "0.1,x").is_err());
    }

    #[test]
    fn file_then_flags() {
        let mut c = RunConfig::defaults(Command::OdeConverge);
        c.apply_file("# study\nproblem = cubic\ndts = 0.1,0.05 # two levels\nt_end=2\n")
            .unwrap();
        assert_eq!(c.problem, "cubic");
        assert_eq!(c.t_end, 2.0);
        c.set("problem", "decay").unwrap();
        assert_eq!(c.problem, "decay");
        c.validate().unwrap();
    }

    #[test]
    fn bad_settings_are_config_errors() {
        let mut c = RunConfig::defaults(Command::Adapt);
        assert_eq!(c.apply_file("tol 3").unwrap_err().exit_code(), 2);
        assert!(c.set("colour", "red").is_err());
        c.set("tol", "-1").unwrap();
        assert!(c.validate().is_err());
        let mut c = RunConfig::defaults(Command::Adapt);
        c.set("n", "12").unwrap();
        assert!(c.validate().is_err());
        let mut c = RunConfig::defaults(Command::Adapt);
        c.set("dt-max", "0").unwrap();
        assert!(c.validate().is_err());
    }

    #[test]
    fn command_names_round_trip() {
        for c in Command::ALL {
            assert_eq!(c.name().parse::<Command>().unwrap(), c);
        }
    }
}
