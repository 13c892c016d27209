//! Head-to-head matches under per-move node budgets.
//!
//! Scoring: 1 per win, 0.5 per draw, 0 per loss, so the two players'
//! success rates over `m` games always sum to exactly `m`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::game::{Action, Game, Player};
use crate::minimax::{minimax, LeafEvaluator};
use crate::rng::RngStream;
use crate::uct::{UctConfig, UctTree};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PlayerKind {
    /// UCT with a fresh tree per move; one iteration per budget unit.
    Uct(UctConfig),
    /// Depth-k minimax, random rollouts at the horizon.
    MinimaxR { k: u32 },
    /// Depth-k minimax, heuristic at the horizon.
    MinimaxH { k: u32, h_max: f64 },
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlayerSpec {
    #[serde(flatten)]
    pub kind: PlayerKind,
    /// Nodes per move decision; `None` is unlimited (UCT then runs `max_iterations`).
    #[serde(default)]
    pub budget: Option<u64>,
}

impl PlayerSpec {
    pub fn new(kind: PlayerKind, budget: Option<u64>) -> Self {
        PlayerSpec { kind, budget }
    }

    /// Short label such as `UCT`, `MM-4-R`, `MM-2-H` or `Random`.
    pub fn label(&self) -> String {
        match &self.kind {
            PlayerKind::Uct(_) => "UCT".into(),
            PlayerKind::MinimaxR { k } => format!("MM-{k}-R"),
            PlayerKind::MinimaxH { k, .. } => format!("MM-{k}-H"),
            PlayerKind::Random => "Random".into(),
        }
    }
}

/// A move decision and the nodes it cost.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decision {
    pub action: Action,
    pub nodes: u64,
}

pub fn choose_move<G: Game>(spec: &PlayerSpec, game: &G, state: &G::State, rng: &mut RngStream) -> Result<Decision> {
    let actions = game.legal_actions(state);
    if actions.is_empty() {
        return Err(Error::TerminalState);
    }
    let n = actions.len() as u64;
    match &spec.kind {
        PlayerKind::Random => Ok(Decision { action: actions[rng.index(actions.len())], nodes: 0 }),
        PlayerKind::Uct(cfg) => {
            let budget = spec.budget.unwrap_or(cfg.max_iterations);
            if budget < n {
                return Err(Error::BudgetTooSmall { budget, needed: n });
            }
            let mut tree = UctTree::new(game, state.clone());
            tree.run(budget, cfg, rng)?;
            Ok(Decision { action: tree.recommend_move()?, nodes: tree.expansions() })
        }
        PlayerKind::MinimaxR { k } | PlayerKind::MinimaxH { k, .. } => {
            if *k == 0 {
                return Err(invalid("k", "minimax players search at least one ply"));
            }
            if let Some(budget) = spec.budget {
                if budget < n + 1 {
                    return Err(Error::BudgetTooSmall { budget, needed: n + 1 });
                }
            }
            let leaf = match spec.kind {
                PlayerKind::MinimaxH { h_max, .. } => LeafEvaluator::Heuristic { h_max },
                _ => LeafEvaluator::RandomRollout,
            };
            let report = minimax(game, state, *k, leaf, rng)?;
            Ok(Decision { action: report.best_action.ok_or(Error::EmptyActionSet)?, nodes: report.nodes_visited })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Win,
    Draw,
    Loss,
}

impl Outcome {
    pub fn score(self) -> f64 {
        match self {
            Outcome::Win => 1.0,
            Outcome::Draw => 0.5,
            Outcome::Loss => 0.0,
        }
    }
}

/// Transcript of one game.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameRecord {
    pub game_index: u64,
    /// Whether player A made the first move.
    pub a_first: bool,
    pub moves: Vec<usize>,
    /// Nodes spent on each move, aligned with `moves`.
    pub nodes: Vec<u64>,
    /// Outcome for player A.
    pub outcome: Outcome,
}

/// Plays one game; A moves first when `a_first`. The outcome is from A's side.
pub fn play_game<G: Game>(
    a: &PlayerSpec,
    b: &PlayerSpec,
    game: &G,
    root: &G::State,
    a_first: bool,
    rng: &mut RngStream,
) -> Result<GameRecord> {
    let first = game.to_move(root);
    let a_side = if a_first { first } else { first.opponent() };
    let mut state = root.clone();
    let (mut moves, mut nodes) = (Vec::new(), Vec::new());
    while !game.is_terminal(&state) {
        let spec = if game.to_move(&state) == a_side { a } else { b };
        let d = choose_move(spec, game, &state, rng)?;
        moves.push(d.action.0);
        nodes.push(d.nodes);
        state = game.apply(&state, d.action)?;
    }
    let r = game.terminal_reward(&state)? * a_side.sign();
    let outcome = if r > 0.0 {
        Outcome::Win
    } else if r < 0.0 {
        Outcome::Loss
    } else {
        Outcome::Draw
    };
    Ok(GameRecord { game_index: 0, a_first, moves, nodes, outcome })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchResult {
    pub games: Vec<GameRecord>,
    pub success_a: f64,
    pub success_b: f64,
}

impl MatchResult {
    pub fn from_games(games: Vec<GameRecord>) -> Self {
        let success_a: f64 = games.iter().map(|g| g.outcome.score()).sum();
        let success_b = games.len() as f64 - success_a;
        MatchResult { games, success_a, success_b }
    }

    pub fn m(&self) -> usize {
        self.games.len()
    }

    fn count(&self, o: Outcome) -> usize {
        self.games.iter().filter(|g| g.outcome == o).count()
    }

    /// (wins, draws, losses) for A.
    pub fn tally(&self) -> (usize, usize, usize) {
        (self.count(Outcome::Win), self.count(Outcome::Draw), self.count(Outcome::Loss))
    }

    /// Mean nodes per move spent by A and B.
    pub fn mean_nodes(&self) -> (f64, f64) {
        let (mut sa, mut na, mut sb, mut nb) = (0u64, 0u64, 0u64, 0u64);
        for g in &self.games {
            for (i, &n) in g.nodes.iter().enumerate() {
                if (i % 2 == 0) == g.a_first {
                    sa += n;
                    na += 1;
                } else {
                    sb += n;
                    nb += 1;
                }
            }
        }
        (sa as f64 / na.max(1) as f64, sb as f64 / nb.max(1) as f64)
    }
}

/// Plays `m` games (even, at least 2), alternating who moves first.
///
/// Game `i` draws from its own stream derived from `rng` and `i`, so results
/// do not depend on evaluation order.
pub fn run_match<G: Game>(
    a: &PlayerSpec,
    b: &PlayerSpec,
    game: &G,
    root: &G::State,
    m: u64,
    rng: &RngStream,
) -> Result<MatchResult> {
    if m < 2 || m % 2 != 0 {
        return Err(invalid("m", format!("must be even and at least 2, got {m}")));
    }
    use rayon::prelude::*;
    let games = (0..m)
        .into_par_iter()
        .map(|i| {
            let mut g_rng = rng.derive(&[i]);
            let mut rec = play_game(a, b, game, root, i % 2 == 0, &mut g_rng)?;
            rec.game_index = i;
            Ok(rec)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MatchResult::from_games(games))
}

/// One CSV report row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchRow {
    pub player_a: String,
    pub player_b: String,
    pub budget_a: String,
    pub budget_b: String,
    pub m: usize,
    pub success_a: f64,
    pub success_b: f64,
    pub wins: usize,
    pub draws: usize,
    pub losses: usize,
}

impl MatchRow {
    pub fn new(a: &PlayerSpec, b: &PlayerSpec, r: &MatchResult) -> Self {
        let budget = |s: &PlayerSpec| s.budget.map_or_else(|| "unlimited".to_string(), |n| n.to_string());
        let (wins, draws, losses) = r.tally();
        MatchRow {
            player_a: a.label(),
            player_b: b.label(),
            budget_a: budget(a),
            budget_b: budget(b),
            m: r.m(),
            success_a: r.success_a,
            success_b: r.success_b,
            wins,
            draws,
            losses,
        }
    }
}

/// Which side a player spec would control, for transcripts.
pub fn side(a_first: bool, first: Player) -> Player {
    if a_first {
        first
    } else {
        first.opponent()
    }
}
