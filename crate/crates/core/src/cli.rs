//! Command-line front end. [`run`] parses arguments and returns the exit
//! code: 0 on success, 1 for usage or configuration errors, 2 for numeric
//! failures (infeasibility, non-convergence).

use std::fs;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::channel::SystemDims;
use crate::error::{PdmaError, Result};
use crate::harness::{plot_script, run_experiments_with_threads, write_csv, ExperimentConfig, Preset};
use crate::pattern::{factor_graph_dot, optimize_beam_allocation, Pattern};
use crate::power::{optimize_power_barrier, PowerAlloc, PowerConstraints, SolverReport};
use crate::transceiver::{sic_order, NormalizedGains, SicOrder};

pub const SEED_ENV: &str = "PDMA_SEED";

#[derive(Debug, Parser)]
#[command(name = "pdma", about = "PDMA downlink simulation", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a Monte Carlo experiment and write CSV.
    Run {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        preset: Option<String>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        plot_script: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Beam allocation tools.
    Pattern {
        #[command(subcommand)]
        action: PatternAction,
    },
    /// Power allocation tools.
    Power {
        #[command(subcommand)]
        action: PowerAction,
    },
    /// Check a configuration file without running it.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
enum PatternAction {
    /// Min-max inner-product beam search.
    Optimize {
        #[arg(long)]
        beams: usize,
        #[arg(long)]
        users: usize,
        #[arg(long)]
        dot: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
enum PowerAction {
    /// Sum-rate maximal powers for given gains and pattern.
    Optimize {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

/// Input of `power optimize`. Matrices are row-major, `N x K`.
#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct PowerProblemInput {
    /// `|h_nk|`.
    pub h: Vec<Vec<f64>>,
    pub pattern: Pattern,
    pub p_sum: f64,
    #[serde(default)]
    pub delta: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub r_min: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub per_beam_budget: Option<f64>,
    /// Users weakest first; derived from `h` when absent.
    #[serde(default)]
    pub order: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PowerProblemOutput {
    pub power: Vec<Vec<f64>>,
    pub sum_rate: f64,
    pub order: Vec<usize>,
    pub report: SolverReport,
}

fn matrix(rows: &[Vec<f64>], shape: (usize, usize), what: &str) -> Result<DMatrix<f64>> {
    if rows.len() != shape.0 || rows.iter().any(|r| r.len() != shape.1) {
        return Err(PdmaError::Dimension(format!("{what} must be {}x{}", shape.0, shape.1)));
    }
    Ok(DMatrix::from_fn(shape.0, shape.1, |i, j| rows[i][j]))
}

fn rows_of(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

/// Solves a `power optimize` problem.
pub fn solve_power_problem(input: &PowerProblemInput) -> Result<PowerProblemOutput> {
    let shape = (input.pattern.n_beams(), input.pattern.n_users());
    let h = matrix(&input.h, shape, "h")?;
    let gains = NormalizedGains::from_magnitudes(h, input.p_sum / shape.0 as f64);
    let zeros = DMatrix::zeros(shape.0, shape.1);
    let delta = match &input.delta {
        Some(d) => matrix(d, shape, "delta")?,
        None => zeros.clone(),
    };
    let r_min = match &input.r_min {
        Some(r) => matrix(r, shape, "r_min")?,
        None => zeros,
    };
    let constraints = PowerConstraints::new(input.p_sum, delta, r_min)?.with_per_beam_budget(input.per_beam_budget)?;
    let order = match &input.order {
        Some(o) => SicOrder::new(o.clone())?,
        None => sic_order(&gains),
    };
    let (p, report): (PowerAlloc, SolverReport) = optimize_power_barrier(&gains, &input.pattern, &constraints, &order)?;
    Ok(PowerProblemOutput {
        power: rows_of(&p.p),
        sum_rate: report.sum_rate,
        order: order.perm,
        report,
    })
}

fn load_config(path: &PathBuf) -> Result<ExperimentConfig> {
    ExperimentConfig::from_json(&fs::read_to_string(path)?)
}

fn exit_code(e: &PdmaError) -> i32 {
    if e.is_numeric() {
        2
    } else {
        1
    }
}

/// Entry point of the `pdma` binary; `args` includes the program name.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Run {
            config,
            preset,
            out,
            plot_script: plot,
            seed,
            threads,
            trials,
        } => {
            let mut base = match &config {
                Some(p) => load_config(p)?,
                None => ExperimentConfig::default(),
            };
            if let Some(t) = trials {
                base.trials = t;
            }
            let env_seed = match std::env::var(SEED_ENV) {
                Ok(s) => Some(
                    s.trim()
                        .parse::<u64>()
                        .map_err(|_| PdmaError::Config(format!("{SEED_ENV} is not an integer: {s}")))?,
                ),
                Err(_) => None,
            };
            if let Some(s) = seed.or(env_seed) {
                base.base_seed = s;
            }
            let preset = preset.as_deref().map(str::parse::<Preset>).transpose()?;
            let configs = match preset {
                Some(p) => p.configs(&base),
                None => vec![base.clone()],
            };
            for c in &configs {
                c.validate()?;
            }
            let threads = threads.unwrap_or(0);
            let run = run_experiments_with_threads(&configs, threads)?;
            write_csv(fs::File::create(&out)?, &run.rows, run.failure.as_ref())?;
            if let Some(path) = plot {
                let x_is_mu = preset.map(Preset::sweeps_mu).unwrap_or(base.mu.0.len() > 1);
                fs::write(path, plot_script(&out.to_string_lossy(), &run.rows, x_is_mu))?;
            }
            match run.failure {
                Some(e) => Err(e),
                None => Ok(()),
            }
        }
        Command::Pattern {
            action: PatternAction::Optimize { beams, users, dot },
        } => {
            let dims = SystemDims {
                n_tx: beams.max(1),
                n_rx: 1,
                n_beams: beams,
                n_users: users,
            };
            let search = optimize_beam_allocation(dims)?;
            println!("objective {}", search.objective);
            println!("pairs_at_max {}", search.pairs_at_max);
            println!("feasible_candidates {}", search.feasible_candidates);
            print!("{}", search.pattern);
            if let Some(path) = dot {
                fs::write(path, factor_graph_dot(&search.pattern))?;
            }
            Ok(())
        }
        Command::Power {
            action: PowerAction::Optimize { input, output },
        } => {
            let problem: PowerProblemInput =
                serde_json::from_str(&fs::read_to_string(&input)?).map_err(|e| PdmaError::Config(e.to_string()))?;
            let result = solve_power_problem(&problem)?;
            let text = serde_json::to_string_pretty(&result)?;
            match output {
                Some(path) => fs::write(path, text + "\n")?,
                None => println!("{text}"),
            }
            Ok(())
        }
        Command::Validate { config } => {
            let c = load_config(&config)?;
            c.validate()?;
            println!("ok: {} point(s) x {} trial(s)", c.points().len(), c.trials);
            Ok(())
        }
    }
}
