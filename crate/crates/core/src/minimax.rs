//! Depth-limited minimax with pluggable leaf evaluation.
//!
//! The default search does no pruning, so `nodes_visited` is the exact node
//! census of the depth-k game tree and can serve as a compute budget.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{heuristic_value, random_playout_with, Action, Game, Player, Reward};
use crate::rng::RngStream;

/// How a non-terminal leaf at the search horizon is valued. Terminal leaves
/// always use their exact reward.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum LeafEvaluator {
    /// One fresh uniform random rollout per leaf (MM-k-R).
    RandomRollout,
    /// The game's heuristic scaled by `h_max` into [-1, +1] (MM-k-H).
    Heuristic { h_max: f64 },
    /// Non-terminal leaves count as 0.
    Zero,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchReport {
    pub value: Reward,
    /// `None` for terminal states and depth-0 searches.
    pub best_action: Option<Action>,
    pub nodes_visited: u64,
    /// Minimax value of each root action, in legal-action order.
    pub root_values: Vec<(Action, Reward)>,
}

struct Searcher<'a, G: Game> {
    game: &'a G,
    leaf: LeafEvaluator,
    alpha_beta: bool,
    nodes: u64,
    buffers: Vec<Vec<Action>>,
    playout_buf: Vec<Action>,
}

impl<'a, G: Game> Searcher<'a, G> {
    fn new(game: &'a G, leaf: LeafEvaluator, alpha_beta: bool) -> Self {
        Searcher { game, leaf, alpha_beta, nodes: 0, buffers: Vec::new(), playout_buf: Vec::new() }
    }

    fn leaf_value(&mut self, s: &G::State, rng: &mut RngStream) -> Result<Reward> {
        match self.leaf {
            LeafEvaluator::RandomRollout => Ok(random_playout_with(self.game, s, rng, &mut self.playout_buf)),
            LeafEvaluator::Heuristic { h_max } => heuristic_value(self.game, s, h_max),
            LeafEvaluator::Zero => Ok(0.0),
        }
    }

    fn value(&mut self, s: &G::State, depth: u32, mut alpha: f64, mut beta: f64, rng: &mut RngStream) -> Result<Reward> {
        self.nodes += 1;
        if self.game.is_terminal(s) {
            return self.game.terminal_reward(s);
        }
        if depth == 0 {
            return self.leaf_value(s, rng);
        }
        let mut actions = self.buffers.pop().unwrap_or_default();
        self.game.legal_actions_into(s, &mut actions);
        let maximizing = self.game.to_move(s) == Player::Max;
        let mut best = if maximizing { f64::NEG_INFINITY } else { f64::INFINITY };
        for &a in &actions {
            let child = self.game.apply(s, a)?;
            let v = self.value(&child, depth - 1, alpha, beta, rng)?;
            if maximizing {
                best = best.max(v);
                alpha = alpha.max(v);
            } else {
                best = best.min(v);
                beta = beta.min(v);
            }
            if self.alpha_beta && alpha >= beta {
                break;
            }
        }
        self.buffers.push(actions);
        Ok(best)
    }
}

/// Exact depth-`depth` minimax without pruning.
///
/// Root ties are broken uniformly at random among the optimal actions.
pub fn minimax<G: Game>(
    game: &G,
    state: &G::State,
    depth: u32,
    leaf: LeafEvaluator,
    rng: &mut RngStream,
) -> Result<SearchReport> {
    search(game, state, depth, leaf, false, rng)
}

/// Like [`minimax`] but with alpha-beta pruning below the root. Root values
/// stay exact; `nodes_visited` is not a budget census.
pub fn minimax_pruned<G: Game>(
    game: &G,
    state: &G::State,
    depth: u32,
    leaf: LeafEvaluator,
    rng: &mut RngStream,
) -> Result<SearchReport> {
    search(game, state, depth, leaf, true, rng)
}

fn search<G: Game>(
    game: &G,
    state: &G::State,
    depth: u32,
    leaf: LeafEvaluator,
    alpha_beta: bool,
    rng: &mut RngStream,
) -> Result<SearchReport> {
    let mut s = Searcher::new(game, leaf, alpha_beta);
    if game.is_terminal(state) || depth == 0 {
        let value = s.value(state, 0, f64::NEG_INFINITY, f64::INFINITY, rng)?;
        return Ok(SearchReport { value, best_action: None, nodes_visited: s.nodes, root_values: Vec::new() });
    }
    s.nodes += 1;
    let mut root_values = Vec::new();
    for a in game.legal_actions(state) {
        let child = game.apply(state, a)?;
        let v = s.value(&child, depth - 1, f64::NEG_INFINITY, f64::INFINITY, rng)?;
        root_values.push((a, v));
    }
    let sign = game.to_move(state).sign();
    let value = root_values.iter().map(|&(_, v)| sign * v).fold(f64::NEG_INFINITY, f64::max) * sign;
    let best: Vec<Action> = root_values.iter().filter(|&&(_, v)| v == value).map(|&(a, _)| a).collect();
    let best_action = Some(best[rng.index(best.len())]);
    Ok(SearchReport { value, best_action, nodes_visited: s.nodes, root_values })
}

/// Plays the game out with both sides moving by depth-`k` MM-k-R search.
pub fn mmk_playout<G: Game>(game: &G, state: &G::State, k: u32, rng: &mut RngStream) -> Result<Reward> {
    if k == 0 {
        return Err(crate::error::invalid("k", "playout search depth must be at least 1"));
    }
    let mut cur = state.clone();
    while !game.is_terminal(&cur) {
        let report = minimax(game, &cur, k, LeafEvaluator::RandomRollout, rng)?;
        let a = report.best_action.ok_or(Error::EmptyActionSet)?;
        cur = game.apply(&cur, a)?;
    }
    game.terminal_reward(&cur)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{exact_value, ConnectGame};
    use crate::synthetic::{build_kstep_tree, ExplicitGame, ExplicitNode, KStepTreeSpec};

    #[test]
    fn hand_minimax_on_seven_nodes() {
        let g = ExplicitGame::complete(2, 2, &[0.6, 0.9, 0.2, 0.9]).unwrap();
        let r = minimax(&g, &g.root(), 2, LeafEvaluator::Zero, &mut RngStream::new(0)).unwrap();
        assert_eq!(r.value, 0.6);
        assert_eq!(r.best_action, Some(Action(0)));
        assert_eq!(r.nodes_visited, 7);
        assert_eq!(r.root_values, vec![(Action(0), 0.6), (Action(1), 0.2)]);
    }

    #[test]
    fn terminal_state_is_one_node() {
        let g = ExplicitGame::complete(2, 1, &[1.0, -1.0]).unwrap();
        let leaf = g.apply(&g.root(), Action(1)).unwrap();
        for k in [0, 1, 5] {
            let r = minimax(&g, &leaf, k, LeafEvaluator::RandomRollout, &mut RngStream::new(1)).unwrap();
            assert_eq!((r.value, r.nodes_visited, r.best_action), (-1.0, 1, None));
        }
    }

    #[test]
    fn unpruned_census_is_full_binary_tree() {
        let t = build_kstep_tree(KStepTreeSpec::new(12, vec![4], 3)).unwrap();
        for k in 1..=8u32 {
            let r = minimax(&t, &t.root(), k, LeafEvaluator::RandomRollout, &mut RngStream::new(k as u64)).unwrap();
            assert_eq!(r.nodes_visited, (1u64 << (k + 1)) - 1);
        }
    }

    #[test]
    fn full_depth_equals_exact_value() {
        let mut rng = RngStream::new(21);
        for _ in 0..20 {
            let g = ExplicitGame::random_complete(3, 4, &mut rng).unwrap();
            let r = minimax(&g, &g.root(), 4, LeafEvaluator::RandomRollout, &mut rng).unwrap();
            assert_eq!(r.value, exact_value(&g, &g.root()));
            let p = minimax_pruned(&g, &g.root(), 4, LeafEvaluator::Zero, &mut rng).unwrap();
            assert_eq!(p.root_values, r.root_values);
            assert!(p.nodes_visited <= r.nodes_visited);
        }
    }

    #[test]
    fn min_root_minimizes() {
        let g = ExplicitGame::new(vec![
            ExplicitNode::inner(vec![1]),
            ExplicitNode::inner(vec![2, 3]),
            ExplicitNode::leaf(0.5),
            ExplicitNode::leaf(-0.5),
        ])
        .unwrap();
        let s = g.apply(&g.root(), Action(0)).unwrap();
        let r = minimax(&g, &s, 1, LeafEvaluator::Zero, &mut RngStream::new(0)).unwrap();
        assert_eq!((r.value, r.best_action), (-0.5, Some(Action(1))));
    }

    #[test]
    fn heuristic_leaves_need_a_heuristic() {
        let g = ExplicitGame::complete(2, 2, &[0.0; 4]).unwrap();
        let err = minimax(&g, &g.root(), 1, LeafEvaluator::Heuristic { h_max: 1.0 }, &mut RngStream::new(0));
        assert_eq!(err, Err(Error::NoHeuristic));
        let c = ConnectGame::default();
        let r = minimax(&c, &c.root(), 1, LeafEvaluator::Heuristic { h_max: 2.0 }, &mut RngStream::new(0)).unwrap();
        // The center drop is the only move that raises the heuristic after one ply.
        assert_eq!(r.best_action, Some(Action(2)));
        assert!((r.value - 0.05).abs() < 1e-12);
    }

    #[test]
    fn mmk_playout_wins_inside_horizon() {
        let t = build_kstep_tree(KStepTreeSpec::new(4, vec![0], 8)).unwrap();
        let mut rng = RngStream::new(5);
        for _ in 0..50 {
            assert_eq!(mmk_playout(&t, &t.root(), 4, &mut rng).unwrap(), 1.0);
        }
        let leaf = crate::synthetic::TreePath::from_actions(&[0, 0, 0, 0]);
        assert_eq!(mmk_playout(&t, &leaf, 2, &mut rng).unwrap(), 1.0);
    }

    #[test]
    fn mmk_playout_replays_with_same_seed() {
        let g = ConnectGame::default();
        let a = mmk_playout(&g, &g.root(), 2, &mut RngStream::new(99)).unwrap();
        let b = mmk_playout(&g, &g.root(), 2, &mut RngStream::new(99)).unwrap();
        assert_eq!(a, b);
    }
}
