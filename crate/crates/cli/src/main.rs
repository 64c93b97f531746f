//! `cbm`: batch front end over the analytic and simulation routines.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use cbm_core::scenario::{PolicyConfig, Scenario};
use cbm_core::simulate::EstimatorKind;
use cbm_core::Error;

#[derive(Parser)]
#[command(name = "cbm", version, about = "Condition-based maintenance with summed gamma degradation")]
#[command(after_help = "Exit codes: 0 success, 1 validation error, 2 numerical failure, 3 infeasible constraint set.\n\
Every run writes <out>/<command>.csv, <out>/summary.json and <out>/scenario.resolved.toml.")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Scenario file (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Budget K on the variable-cost rate.
    #[arg(long, global = true)]
    budget: Option<f64>,
    /// Inspection-interval grid as lo:hi:count.
    #[arg(long, global = true, value_name = "LO:HI:COUNT")]
    grid_t: Option<String>,
    #[arg(long, global = true)]
    n_max: Option<usize>,
    /// Monte Carlo replications.
    #[arg(long, global = true)]
    reps: Option<usize>,
    #[arg(long, global = true, value_enum)]
    estimator: Option<Estimator>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Estimator {
    Hybrid,
    Event,
}

#[derive(Subcommand)]
enum Command {
    /// Overall degradation density and CDF on a level grid.
    ///
    /// Columns: y, pdf, cdf.
    Density {
        /// Evaluation time (overrides curves.density_time).
        #[arg(long)]
        time: Option<f64>,
    },
    /// Threshold-hitting probability on a time grid.
    ///
    /// Columns: t, F_j<c> for each configured cycle c, then F_mixed_quad and
    /// F_mixed_series when a random effect is configured.
    Hitting,
    /// Q0 and CV over the (N, T) grid.
    ///
    /// Columns: N, T, Q0, CV, feasible (0/1), and with --hitting
    /// F_hit_j1..F_hit_j<n_max> (empty where j > N).
    CostSurface {
        /// Add per-cycle hitting probabilities.
        #[arg(long)]
        hitting: bool,
    },
    /// Cost-rate optimum, constrained when a budget is set.
    ///
    /// Columns: N, T_upper (inf when unbounded, empty when infeasible),
    /// T_best, Q0_best, CV_best over the grid points allowed at each N.
    Optimize,
    /// r-out-of-n monitor curves for the [orderstat] section.
    ///
    /// Columns: t, P_r1..P_r<n>, the probability that at least r components
    /// exceed the monitor threshold.
    Orderstat,
    /// Monte Carlo estimates with standard errors at one policy.
    ///
    /// Columns: quantity, estimate, std_error, analytic, z.
    Simulate {
        /// Policy as N:T (overrides simulation.policy).
        #[arg(long, value_name = "N:T")]
        policy: Option<String>,
    },
    /// Analytic-versus-Monte-Carlo checks with a pass/fail table.
    ///
    /// Columns: check, analytic, estimate, abs_error, tolerance, pass (0/1).
    Validate {
        /// Policy as N:T (overrides simulation.policy).
        #[arg(long, value_name = "N:T")]
        policy: Option<String>,
    },
    /// Sampled trajectories of each defect process and of the total.
    ///
    /// Columns: path, t, X1..X<n>, Y.
    Paths,
    /// Density of the variable cost given the degradation level.
    ///
    /// Columns: u, density, raw, clamped (0/1), warning (0/1).
    Conditional {
        /// Evaluation time (overrides curves.density_time).
        #[arg(long)]
        time: Option<f64>,
        /// Conditioning level (overrides curves.conditional_y).
        #[arg(long)]
        y: Option<f64>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Density { .. } => "density",
            Command::Hitting => "hitting",
            Command::CostSurface { .. } => "cost-surface",
            Command::Optimize => "optimize",
            Command::Orderstat => "orderstat",
            Command::Simulate { .. } => "simulate",
            Command::Validate { .. } => "validate",
            Command::Paths => "paths",
            Command::Conditional { .. } => "conditional",
        }
    }
}

/// Failure classes, one per non-zero exit code.
#[derive(Debug)]
pub enum Failure {
    Validation(String),
    Numerical(String),
    Infeasible(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Validation(_) => 1,
            Failure::Numerical(_) => 2,
            Failure::Infeasible(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Validation(m) | Failure::Numerical(m) | Failure::Infeasible(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config { .. } => Failure::Validation(e.to_string()),
            Error::Infeasible(_) => Failure::Infeasible(e.to_string()),
            other => Failure::Numerical(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Numerical(format!("writing output: {e}"))
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Numerical(format!("writing output: {e}"))
    }
}

fn invalid(field: &str, message: impl std::fmt::Display) -> Failure {
    Failure::Validation(format!("invalid configuration at `{field}`: {message}"))
}

fn parse_grid(text: &str) -> Result<(f64, f64, usize), Failure> {
    let parts: Vec<&str> = text.split(':').collect();
    let bad = || invalid("--grid-t", format!("expected lo:hi:count, got `{text}`"));
    let [lo, hi, count] = parts.as_slice() else {
        return Err(bad());
    };
    Ok((
        lo.parse().map_err(|_| bad())?,
        hi.parse().map_err(|_| bad())?,
        count.parse().map_err(|_| bad())?,
    ))
}

fn parse_policy(text: &str) -> Result<PolicyConfig, Failure> {
    let bad = || invalid("--policy", format!("expected N:T, got `{text}`"));
    let (n, t) = text.split_once(':').ok_or_else(bad)?;
    Ok(PolicyConfig {
        n: n.parse().map_err(|_| bad())?,
        t: t.parse().map_err(|_| bad())?,
    })
}

/// Loads the scenario and folds every flag into it, so the resolved file alone
/// reproduces the run.
fn resolve(cli: &Cli) -> Result<Scenario, Failure> {
    let c = &cli.common;
    let path = c
        .config
        .as_ref()
        .ok_or_else(|| invalid("--config", "a scenario file is required"))?;
    let mut s = Scenario::from_path(path)?;
    if let Some(seed) = c.seed {
        s.simulation.seed = seed;
    }
    if let Some(k) = c.budget {
        s.costs.budget = Some(k);
    }
    if let Some(text) = &c.grid_t {
        let (lo, hi, count) = parse_grid(text)?;
        s.grid.t_lo = lo;
        s.grid.t_hi = hi;
        s.grid.t_count = count;
    }
    if let Some(n) = c.n_max {
        s.grid.n_max = n;
    }
    if let Some(r) = c.reps {
        s.simulation.replications = r;
    }
    if let Some(e) = c.estimator {
        s.simulation.estimator = match e {
            Estimator::Hybrid => EstimatorKind::HybridCounts,
            Estimator::Event => EstimatorKind::FullEventDriven,
        };
    }
    match &cli.command {
        Command::Density { time: Some(t) } => s.curves.density_time = *t,
        Command::Simulate { policy: Some(p) } | Command::Validate { policy: Some(p) } => {
            s.simulation.policy = Some(parse_policy(p)?);
        }
        Command::Conditional { time, y } => {
            if let Some(t) = time {
                s.curves.density_time = *t;
            }
            if let Some(y) = y {
                s.curves.conditional_y = Some(*y);
            }
        }
        _ => {}
    }
    s.validate()?;
    Ok(s)
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let scenario = resolve(cli)?;
    let out = output::Output::create(&cli.common.out, cli.command.name(), &scenario)?;
    match &cli.command {
        Command::Density { .. } => commands::density(&scenario, &out),
        Command::Hitting => commands::hitting(&scenario, &out),
        Command::CostSurface { hitting } => commands::cost_surface(&scenario, &out, *hitting),
        Command::Optimize => commands::optimize(&scenario, &out),
        Command::Orderstat => commands::orderstat(&scenario, &out),
        Command::Simulate { .. } => commands::simulate(&scenario, &out),
        Command::Validate { .. } => commands::validate(&scenario, &out),
        Command::Paths => commands::paths(&scenario, &out),
        Command::Conditional { .. } => commands::conditional(&scenario, &out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("cbm {}: {}", cli.command.name(), f.message());
            ExitCode::from(f.code())
        }
    }
}
