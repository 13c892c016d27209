use std::path::PathBuf;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use sampling_search::experiments::StopRule;
use sampling_search::game::ConnectGame;
use sampling_search::ranking::{MoveEvaluator, DEFAULT_EPSILON_TIE};
use sampling_search::tournament::PlayerSpec;
use sampling_search::uct::UctConfig;

use crate::CliError;

fn default_tau() -> f64 {
    0.7
}

fn default_epsilon_tie() -> f64 {
    DEFAULT_EPSILON_TIE
}

/// Reads a config, checking the optional `command` field against the one invoked.
pub fn load<T: DeserializeOwned + HasHeader>(text: &str, command: &str) -> Result<T, CliError> {
    let cfg: T = serde_json::from_str(text).map_err(|e| CliError::Config(format!("{e}")))?;
    if let Some(c) = cfg.command() {
        if c != command {
            return Err(CliError::Config(format!("field `command`: config is for `{c}`, not `{command}`")));
        }
    }
    Ok(cfg)
}

pub trait HasHeader {
    fn command(&self) -> Option<&str>;
    fn seed_mut(&mut self) -> &mut u64;
}

macro_rules! header {
    ($($t:ty),*) => {$(
        impl HasHeader for $t {
            fn command(&self) -> Option<&str> {
                self.command.as_deref()
            }
            fn seed_mut(&mut self) -> &mut u64 {
                &mut self.seed
            }
        }
    )*};
}

header!(ConvergeSweep, ScenarioCompare, ModelFit, Tournament, RankCorr, TrapScan);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SweepTrees {
    /// Two-step trees; every `d1 < d2` pair of the grid is a cell.
    Kstep { depth: u32, d1: Vec<u32>, d2: Vec<u32> },
    /// Dual-strategy trees; every (max_critical, min_criticals) pair is a cell.
    Dual {
        depth: u32,
        max_critical: Vec<u32>,
        min_criticals: Vec<(u32, u32)>,
        #[serde(default)]
        fixed_tree: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergeSweep {
    #[serde(default)]
    pub command: Option<String>,
    #[serde(default)]
    pub seed: u64,
    pub trees: SweepTrees,
    pub reps: u64,
    #[serde(default = "default_tau")]
    pub tau: f64,
    #[serde(default)]
    pub uct: UctConfig,
    #[serde(default)]
    pub stop: StopRule,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpsilonCurve {
    pub p: f64,
    pub q: f64,
    pub catch_up: f64,
    #[serde(default)]
    pub p_prime: Option<f64>,
    pub epsilon_min: f64,
    pub epsilon_max: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioCompare {
    #[serde(default)]
    pub command: Option<String>,
    #[serde(default)]
    pub seed: u64,
    pub subtree_depth: u32,
    #[serde(default)]
    pub p: Vec<f64>,
    #[serde(default)]
    pub epsilon: Vec<f64>,
    #[serde(default)]
    pub reps: u64,
    #[serde(default = "default_tau")]
    pub tau: f64,
    #[serde(default)]
    pub stop: StopRule,
    #[serde(default)]
    pub curve: Option<EpsilonCurve>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFit {
    #[serde(default)]
    pub command: Option<String>,
    #[serde(default)]
    pub seed: u64,
    /// `(d1, d2, mean iterations)` triples.
    #[serde(default)]
    pub observations: Vec<(u32, u32, f64)>,
    /// A `converge_sweep.csv`; relative paths resolve against the config's directory.
    #[serde(default)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Matchup {
    pub a: PlayerSpec,
    pub b: PlayerSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tournament {
    #[serde(default)]
    pub command: Option<String>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub game: ConnectGame,
    pub games_per_match: u64,
    pub matches: Vec<Matchup>,
    #[serde(default)]
    pub transcripts: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Candidate {
    pub name: String,
    pub evaluator: MoveEvaluator,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RankCorr {
    #[serde(default)]
    pub command: Option<String>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub game: ConnectGame,
    pub positions: usize,
    pub plies: (u32, u32),
    pub reference: MoveEvaluator,
    pub candidates: Vec<Candidate>,
    #[serde(default = "default_epsilon_tie")]
    pub epsilon_tie: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrapScan {
    #[serde(default)]
    pub command: Option<String>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub game: ConnectGame,
    /// Number of self-play positions to sample.
    #[serde(default)]
    pub positions: usize,
    #[serde(default)]
    pub plies: Option<(u32, u32)>,
    /// Extra positions given as column sequences from the empty board.
    #[serde(default)]
    pub lines: Vec<Vec<usize>>,
    pub delta: f64,
    pub k: u32,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_field_is_named() {
        let e = load::<ModelFit>(r#"{"observations": [], "bogus": 1}"#, "model-fit").unwrap_err();
        assert!(e.to_string().contains("bogus"), "{e}");
    }

    #[test]
    fn command_must_match() {
        let e = load::<ModelFit>(r#"{"command": "tournament"}"#, "model-fit").unwrap_err();
        assert!(matches!(e, CliError::Config(_)));
        assert!(load::<ModelFit>(r#"{"command": "model-fit"}"#, "model-fit").is_ok());
    }

    #[test]
    fn sweep_round_trips() {
        let text = r#"{"seed": 3, "trees": {"kind": "dual", "depth": 12, "max_critical": [2],
            "min_criticals": [[1, 3]]}, "reps": 4, "uct": {"exploration": 1.0}}"#;
        let cfg: ConvergeSweep = load(text, "converge-sweep").unwrap();
        let back: ConvergeSweep = serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(cfg, back);
        assert_eq!(cfg.uct.exploration, 1.0);
    }
}
