//! `sss`: experiment runner for sampling-based adversarial search.

mod commands;
mod config;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::Output;
use crate::config::HasHeader;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("runtime error: {0}")]
    Runtime(String),
}

impl From<sampling_search::Error> for CliError {
    fn from(e: sampling_search::Error) -> Self {
        use sampling_search::Error as E;
        match e {
            E::InvalidParameter { .. } | E::InvalidSpec(_) | E::BudgetTooSmall { .. } | E::NoHeuristic => {
                CliError::Config(e.to_string())
            }
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "sss", version, about = "Sampling-based adversarial search experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, clap::Args)]
struct Common {
    /// JSON config file.
    #[arg(long)]
    config: PathBuf,
    /// Worker threads (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
    /// Master seed; overrides the config's `seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory, created if missing.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// UCT convergence times over a grid of synthetic trees.
    #[command(after_help = "\
Output (kstep trees): converge_sweep.csv
  d1, d2, mean_t_star, stddev, non_converged, runs
Output (dual trees): dual_sweep.csv
  max_critical, min_critical_1, min_critical_2, mean_t_star, stddev, non_converged,
  favorable_runs, favorable_mean, unfavorable_runs, unfavorable_mean, unresolved,
  gap_ratio, fraction_b
Means and stddev cover converged runs only; empty when none converged.")]
    ConvergeSweep(Common),
    /// Closed-form vs simulated epsilon-greedy visits on scenario trees.
    #[command(after_help = "\
Output: scenario_a.csv
  p, epsilon, predicted, mean_visits, stddev, non_converged, mean_resolved_passage, runs
Output (with `curve`): scenario_b_curve.csv
  epsilon, expected_visits")]
    ScenarioCompare(Common),
    /// Fit the two-step runtime model to (d1, d2, mean) observations.
    #[command(after_help = "\
Output: model_fit.json
  {a, b, C, rss, observations: [{d1, d2, observed, predicted, log_residual}]}")]
    ModelFit(Common),
    /// Matches between players on the built-in connection game.
    #[command(after_help = "\
Output: tournament.csv
  player_a, player_b, budget_a, budget_b, m, success_a, success_b, wins, draws, losses,
  mean_nodes_a, mean_nodes_b
Output (with `transcripts`): transcripts.jsonl, one game per line")]
    Tournament(Common),
    /// Move-ranking correlations against a reference evaluator.
    #[command(after_help = "\
Output: rank_scatter.csv
  position, move, candidate, rank_reference, rank_candidate
Output: rank_corr.csv
  candidate, mean_correlation, positions, undefined")]
    RankCorr(Common),
    /// Soft-trap scan over positions of the built-in game.
    #[command(after_help = "\
Output: traps.jsonl, one trapping move per line
  {position, line?, ply, board, trapping_move, gain, delta, k, witness}")]
    TrapScan(Common),
}

fn prepare<T: serde::de::DeserializeOwned + HasHeader>(common: &Common, name: &str) -> Result<T, CliError> {
    let text = std::fs::read_to_string(&common.config)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", common.config.display())))?;
    let mut cfg: T = config::load(&text, name)?;
    if let Some(s) = common.seed {
        *cfg.seed_mut() = s;
    }
    Ok(cfg)
}

/// Writes every output through a temp file in `dir` and renames it into place.
fn write_outputs(dir: &Path, outputs: &[Output]) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Runtime(format!("writing to {}: {e}", dir.display()));
    std::fs::create_dir_all(dir).map_err(io)?;
    for o in outputs {
        let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
        tmp.write_all(&o.bytes).map_err(io)?;
        tmp.as_file().sync_all().map_err(io)?;
        tmp.persist(dir.join(o.name)).map_err(|e| io(e.error))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<Vec<PathBuf>, CliError> {
    let common = match &cli.command {
        Command::ConvergeSweep(c)
        | Command::ScenarioCompare(c)
        | Command::ModelFit(c)
        | Command::Tournament(c)
        | Command::RankCorr(c)
        | Command::TrapScan(c) => c,
    };
    if common.jobs == Some(0) {
        return Err(CliError::Config("--jobs must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(common.jobs.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    let outputs = pool.install(|| match &cli.command {
        Command::ConvergeSweep(c) => commands::converge_sweep(&prepare(c, "converge-sweep")?),
        Command::ScenarioCompare(c) => commands::scenario_compare(&prepare(c, "scenario-compare")?),
        Command::ModelFit(c) => {
            let dir = c.config.parent().unwrap_or(Path::new("."));
            commands::model_fit(&prepare(c, "model-fit")?, dir)
        }
        Command::Tournament(c) => commands::tournament(&prepare(c, "tournament")?),
        Command::RankCorr(c) => commands::rank_corr(&prepare(c, "rank-corr")?),
        Command::TrapScan(c) => commands::trap_scan(&prepare(c, "trap-scan")?),
    })?;
    write_outputs(&common.out, &outputs)?;
    Ok(outputs.iter().map(|o| common.out.join(o.name)).collect())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // Bad arguments count as config errors; help and version are not errors.
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(paths) => {
            for p in paths {
                eprintln!("wrote {}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
