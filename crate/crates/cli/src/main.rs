use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tfilter_cli::{run_command, CliError, Command, RunConfig};

#[derive(Parser, Debug)]
#[command(
    name = "tfilter",
    version,
    about = "Filtered backward Euler experiments, written as CSV tables"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Convergence of BE, filtered and doubly filtered BE on a scalar problem
    OdeConverge(Flags),
    /// Taylor–Green temporal convergence for velocity and both pressure options
    NseConverge(Flags),
    /// Discrete energy balance of a filtered Navier–Stokes run
    NseEnergy(Flags),
    /// Adaptive run on the forced transition problem, one row per attempt
    Adapt(Flags),
    /// Error against steps taken, adaptive and constant step
    WorkPrecision(Flags),
    /// Identity, estimator, equivalence, consistency and stability checks
    Verify(Flags),
    /// Filter time against solve time in a Navier–Stokes run
    Overhead(Flags),
}

impl Cmd {
    fn split(self) -> (Command, Flags) {
        match self {
            Cmd::OdeConverge(f) => (Command::OdeConverge, f),
            Cmd::NseConverge(f) => (Command::NseConverge, f),
            Cmd::NseEnergy(f) => (Command::NseEnergy, f),
            Cmd::Adapt(f) => (Command::Adapt, f),
            Cmd::WorkPrecision(f) => (Command::WorkPrecision, f),
            Cmd::Verify(f) => (Command::Verify, f),
            Cmd::Overhead(f) => (Command::Overhead, f),
        }
    }
}

/// Flags shared by every command. Each overrides the same key in `--config`.
#[derive(Args, Debug, Default)]
struct Flags {
    /// File of `key = value` lines
    #[arg(long)]
    config: Option<PathBuf>,
    /// decay, cubic or fast-sine
    #[arg(long)]
    problem: Option<String>,
    #[arg(long)]
    tol: Option<String>,
    /// Comma list or decade range such as 1e-1..1e-7
    #[arg(long, allow_hyphen_values = true)]
    tols: Option<String>,
    #[arg(long)]
    dt: Option<String>,
    /// Comma list or decade range
    #[arg(long)]
    dts: Option<String>,
    #[arg(long)]
    steps: Option<String>,
    /// Final time
    #[arg(long = "t-end")]
    t_end: Option<String>,
    /// Viscosity
    #[arg(long)]
    nu: Option<String>,
    /// Grid points per direction (power of two)
    #[arg(long)]
    n: Option<String>,
    /// Pressure option, A or B
    #[arg(long)]
    option: Option<String>,
    /// vsvo12, constant1, constant2 or double
    #[arg(long)]
    mode: Option<String>,
    #[arg(long = "dt-max")]
    dt_max: Option<String>,
    /// Drive the flow with a body force
    #[arg(long)]
    forced: bool,
    /// CSV output path
    #[arg(long, short)]
    output: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Worker threads for independent cells
    #[arg(long)]
    jobs: Option<String>,
    /// Random trials per check in verify
    #[arg(long)]
    trials: Option<String>,
}

impl Flags {
    fn pairs(&self) -> Vec<(&'static str, String)> {
        let mut out: Vec<(&'static str, String)> = [
            ("problem", &self.problem),
            ("tol", &self.tol),
            ("tols", &self.tols),
            ("dt", &self.dt),
            ("dts", &self.dts),
            ("steps", &self.steps),
            ("t-end", &self.t_end),
            ("nu", &self.nu),
            ("n", &self.n),
            ("option", &self.option),
            ("mode", &self.mode),
            ("dt-max", &self.dt_max),
            ("output", &self.output),
            ("seed", &self.seed),
            ("jobs", &self.jobs),
            ("trials", &self.trials),
        ]
        .into_iter()
        .filter_map(|(k, v)| v.clone().map(|v| (k, v)))
        .collect();
        if self.forced {
            out.push(("forced", "true".into()));
        }
        out
    }
}

fn build_config(command: Command, flags: &Flags) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::defaults(command);
    if let Some(path) = &flags.config {
        let text =
            fs::read_to_string(path).map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
        cfg.apply_file(&text)?;
    }
    for (k, v) in flags.pairs() {
        cfg.set(k, &v)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn partial_path(output: &Path) -> PathBuf {
    let stem = output.file_stem().and_then(|s| s.to_str()).unwrap_or("output");
    output.with_file_name(format!("{stem}.partial.csv"))
}

fn log_line(output: &Path, text: &str) {
    let path = output.with_file_name("run.log");
    if let Ok(mut f) = OpenOptions::new().create(true).append(true).open(path) {
        let _ = writeln!(f, "{} {text}", chrono::Utc::now().to_rfc3339());
    }
}

fn execute(cfg: &RunConfig) -> Result<(), CliError> {
    if let Some(dir) = cfg.output.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    log_line(&cfg.output, &format!("start {}", cfg.command));
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| CliError::config(e.to_string()))?;
    let result = pool.install(|| run_command(cfg));
    match result {
        Ok(outcome) => {
            outcome.table.write_to(&cfg.output)?;
            for line in &outcome.summary {
                println!("{line}");
            }
            println!("wrote {}", cfg.output.display());
            log_line(&cfg.output, &format!("end {}", cfg.command));
            Ok(())
        }
        Err(CliError::Numerical { message, partial }) => {
            if let Some(table) = &partial {
                let path = partial_path(&cfg.output);
                table.write_to(&path)?;
                eprintln!("partial results in {}", path.display());
            }
            log_line(&cfg.output, &format!("failed {}", cfg.command));
            Err(CliError::Numerical { message, partial })
        }
        Err(e) => Err(e),
    }
}

fn main() -> ExitCode {
    let (command, flags) = Cli::parse().command.split();
    let result = build_config(command, &flags).and_then(|cfg| execute(&cfg));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("tfilter: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
