//! Move rankings under different evaluators and their rank correlation.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::game::{heuristic_value, random_playout_with, Action, Game};
use crate::minimax::{minimax, minimax_pruned, mmk_playout, LeafEvaluator};
use crate::rng::RngStream;

pub const DEFAULT_EPSILON_TIE: f64 = 0.01;
pub const DEFAULT_PLAYOUTS: u32 = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PlayoutPolicy {
    Random,
    /// Both sides play MM-k-R.
    Minimax { k: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MoveEvaluator {
    /// Depth-k minimax from the state; each move's score is its child's depth k-1 value.
    /// `pruned` switches to alpha-beta, which gives the same scores faster.
    MinimaxValue {
        k: u32,
        leaf: LeafEvaluator,
        #[serde(default)]
        pruned: bool,
    },
    PlayoutMean {
        policy: PlayoutPolicy,
        #[serde(default = "default_playouts")]
        playouts: u32,
    },
    /// The child's normalized heuristic (exact reward if terminal).
    RawHeuristic { h_max: f64 },
}

fn default_playouts() -> u32 {
    DEFAULT_PLAYOUTS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MoveRanking {
    pub moves: Vec<Action>,
    /// Mover-perspective scores, aligned with `moves`.
    pub scores: Vec<f64>,
    pub ranks: Vec<u32>,
    pub epsilon_tie: f64,
}

impl MoveRanking {
    /// Ranks `scores` directly (higher is better).
    pub fn from_scores(moves: Vec<Action>, scores: Vec<f64>, epsilon_tie: f64) -> Result<Self> {
        if moves.len() != scores.len() {
            return Err(Error::MismatchedMoveSets);
        }
        let ranks = rank_scores(&scores, epsilon_tie)?;
        Ok(MoveRanking { moves, scores, ranks, epsilon_tie })
    }

    /// The rank of `a`, if it is in the move set.
    pub fn rank_of(&self, a: Action) -> Option<u32> {
        self.moves.iter().position(|&m| m == a).map(|i| self.ranks[i])
    }
}

/// Competition ranks after epsilon-tie smoothing.
///
/// Scores are visited best first. Each cluster is anchored at its best score
/// and takes every following score within `epsilon_tie` of that anchor; all
/// members share rank 1 + (number of moves in earlier clusters).
pub fn rank_scores(scores: &[f64], epsilon_tie: f64) -> Result<Vec<u32>> {
    if !(epsilon_tie >= 0.0) {
        return Err(invalid("epsilon_tie", "must be non-negative"));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(invalid("scores", "NaN score"));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&i, &j| scores[j].total_cmp(&scores[i]).then(i.cmp(&j)));
    let mut ranks = vec![0u32; scores.len()];
    let mut pos = 0;
    while pos < order.len() {
        let anchor = scores[order[pos]];
        let rank = pos as u32 + 1;
        while pos < order.len() && anchor - scores[order[pos]] <= epsilon_tie {
            ranks[order[pos]] = rank;
            pos += 1;
        }
    }
    Ok(ranks)
}

/// Scores and ranks every legal move of `state` from the mover's side.
pub fn rank_moves<G: Game>(
    game: &G,
    state: &G::State,
    evaluator: &MoveEvaluator,
    epsilon_tie: f64,
    rng: &mut RngStream,
) -> Result<MoveRanking> {
    if game.is_terminal(state) {
        return Err(Error::TerminalState);
    }
    let sign = game.to_move(state).sign();
    let moves = game.legal_actions(state);
    let values: Vec<f64> = match *evaluator {
        MoveEvaluator::MinimaxValue { k, leaf, pruned } => {
            if k == 0 {
                return Err(invalid("k", "must be at least 1"));
            }
            let report = if pruned {
                minimax_pruned(game, state, k, leaf, rng)?
            } else {
                minimax(game, state, k, leaf, rng)?
            };
            report.root_values.iter().map(|&(_, v)| v).collect()
        }
        MoveEvaluator::PlayoutMean { policy, playouts } => {
            if playouts == 0 {
                return Err(invalid("playouts", "must be at least 1"));
            }
            let mut buf = Vec::new();
            let mut out = Vec::with_capacity(moves.len());
            for &a in &moves {
                let child = game.apply(state, a)?;
                let mut total = 0.0;
                for _ in 0..playouts {
                    total += match policy {
                        PlayoutPolicy::Random => random_playout_with(game, &child, rng, &mut buf),
                        PlayoutPolicy::Minimax { k } => mmk_playout(game, &child, k, rng)?,
                    };
                }
                out.push(total / playouts as f64);
            }
            out
        }
        MoveEvaluator::RawHeuristic { h_max } => moves
            .iter()
            .map(|&a| heuristic_value(game, &game.apply(state, a)?, h_max))
            .collect::<Result<_>>()?,
    };
    let scores = values.into_iter().map(|v| sign * v).collect();
    MoveRanking::from_scores(moves, scores, epsilon_tie)
}

/// Average ranks: competition rank r shared by g moves becomes r + (g - 1)/2.
pub fn midranks(ranks: &[u32]) -> Vec<f64> {
    ranks
        .iter()
        .map(|&r| {
            let g = ranks.iter().filter(|&&x| x == r).count();
            r as f64 + (g as f64 - 1.0) / 2.0
        })
        .collect()
}

/// Spearman correlation (Pearson on midranks). `Ok(None)` when either side
/// is a total tie and the correlation is undefined.
pub fn rank_correlation(ra: &MoveRanking, rb: &MoveRanking) -> Result<Option<f64>> {
    if ra.moves.len() != rb.moves.len() {
        return Err(Error::MismatchedMoveSets);
    }
    let mut rb_aligned = Vec::with_capacity(ra.moves.len());
    for &m in &ra.moves {
        rb_aligned.push(rb.rank_of(m).ok_or(Error::MismatchedMoveSets)?);
    }
    let x = midranks(&ra.ranks);
    let y = midranks(&rb_aligned);
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(&y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Ok(None);
    }
    Ok(Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0)))
}
