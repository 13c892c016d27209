//! Deterministic two-player zero-sum games.
//!
//! Rewards are always reported from Max's perspective: win = +1, draw = 0,
//! loss = -1. Max moves at even plies from any root where Max is on move.

mod connect;

pub use connect::{builtin_heuristic, ConnectGame, ConnectState};

use std::fmt::Debug;
use std::hash::Hash;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::rng::RngStream;

/// Reward from Max's perspective, in `[-1, +1]`.
pub type Reward = f64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Player {
    Max,
    Min,
}

impl Player {
    pub fn opponent(self) -> Player {
        match self {
            Player::Max => Player::Min,
            Player::Min => Player::Max,
        }
    }

    /// +1 for Max, -1 for Min; converts Max-perspective values to this player's view.
    pub fn sign(self) -> f64 {
        match self {
            Player::Max => 1.0,
            Player::Min => -1.0,
        }
    }

    /// The player on move at `ply` when Max moves at ply 0.
    pub fn at_ply(ply: u32) -> Player {
        if ply % 2 == 0 {
            Player::Max
        } else {
            Player::Min
        }
    }
}

/// A move identifier. Identifiers are stable across repeated queries of a state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Action(pub usize);

impl Action {
    pub fn index(self) -> usize {
        self.0
    }
}

/// A deterministic two-player zero-sum game.
///
/// States are immutable values; `apply` returns a new state.
pub trait Game: Send + Sync {
    type State: Clone + Eq + Hash + Debug + Send + Sync;

    fn root(&self) -> Self::State;

    /// Writes the legal actions of `state` into `out` (cleared first), in a
    /// deterministic order. Empty exactly when `state` is terminal.
    fn legal_actions_into(&self, state: &Self::State, out: &mut Vec<Action>);

    fn legal_actions(&self, state: &Self::State) -> Vec<Action> {
        let mut out = Vec::new();
        self.legal_actions_into(state, &mut out);
        out
    }

    fn apply(&self, state: &Self::State, action: Action) -> Result<Self::State>;

    fn is_terminal(&self, state: &Self::State) -> bool;

    /// Reward of a terminal state; `Error::NotTerminal` otherwise.
    fn terminal_reward(&self, state: &Self::State) -> Result<Reward>;

    fn to_move(&self, state: &Self::State) -> Player;

    fn ply(&self, state: &Self::State) -> u32;

    /// Raw heuristic value (positive favors Max), if the game has one.
    fn heuristic(&self, _state: &Self::State) -> Option<f64> {
        None
    }
}

/// Plays uniformly random legal actions from `state` to the end of the game.
///
/// A terminal `state` returns its reward without touching `rng`.
pub fn random_playout<G: Game>(game: &G, state: &G::State, rng: &mut RngStream) -> Reward {
    let mut buf = Vec::new();
    random_playout_with(game, state, rng, &mut buf)
}

pub(crate) fn random_playout_with<G: Game>(
    game: &G,
    state: &G::State,
    rng: &mut RngStream,
    buf: &mut Vec<Action>,
) -> Reward {
    if game.is_terminal(state) {
        return game.terminal_reward(state).expect("terminal state has a reward");
    }
    let mut cur = state.clone();
    loop {
        game.legal_actions_into(&cur, buf);
        let a = buf[rng.index(buf.len())];
        cur = game.apply(&cur, a).expect("legal action");
        if game.is_terminal(&cur) {
            return game.terminal_reward(&cur).expect("terminal state has a reward");
        }
    }
}

/// Maps a raw heuristic value into `[-1, +1]` by `raw / h_max`, clamped.
pub fn normalize_heuristic(raw: f64, h_max: f64) -> Result<Reward> {
    if !(h_max > 0.0) || !h_max.is_finite() {
        return Err(invalid("h_max", format!("must be positive and finite, got {h_max}")));
    }
    Ok((raw / h_max).clamp(-1.0, 1.0))
}

/// Normalized heuristic value of a non-terminal state, or the exact reward of a terminal one.
pub fn heuristic_value<G: Game>(game: &G, state: &G::State, h_max: f64) -> Result<Reward> {
    if game.is_terminal(state) {
        return game.terminal_reward(state);
    }
    let raw = game.heuristic(state).ok_or(crate::Error::NoHeuristic)?;
    normalize_heuristic(raw, h_max)
}

/// Exact game value by exhaustive minimax. Exponential; for small trees only.
pub fn exact_value<G: Game>(game: &G, state: &G::State) -> Reward {
    if game.is_terminal(state) {
        return game.terminal_reward(state).expect("terminal state has a reward");
    }
    let player = game.to_move(state);
    let values = game
        .legal_actions(state)
        .into_iter()
        .map(|a| exact_value(game, &game.apply(state, a).expect("legal action")));
    match player {
        Player::Max => values.fold(f64::NEG_INFINITY, f64::max),
        Player::Min => values.fold(f64::INFINITY, f64::min),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalize_examples() {
        assert_eq!(normalize_heuristic(0.0, 6500.0).unwrap(), 0.0);
        assert_eq!(normalize_heuristic(6500.0, 6500.0).unwrap(), 1.0);
        assert_eq!(normalize_heuristic(-13000.0, 6500.0).unwrap(), -1.0);
        assert_eq!(normalize_heuristic(3250.0, 6500.0).unwrap(), 0.5);
    }

    #[test]
    fn normalize_rejects_nonpositive_scale() {
        assert!(normalize_heuristic(1.0, 0.0).is_err());
        assert!(normalize_heuristic(1.0, -2.0).is_err());
        assert!(normalize_heuristic(1.0, f64::NAN).is_err());
    }

    #[test]
    fn player_at_ply_alternates() {
        assert_eq!(Player::at_ply(0), Player::Max);
        assert_eq!(Player::at_ply(1), Player::Min);
        assert_eq!(Player::at_ply(2).opponent(), Player::Min);
    }

    proptest::proptest! {
        #[test]
        fn normalize_is_monotone(a in -1e4f64..1e4, b in -1e4f64..1e4, h in 0.1f64..1e4) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            proptest::prop_assert!(normalize_heuristic(lo, h).unwrap() <= normalize_heuristic(hi, h).unwrap());
        }

        #[test]
        fn normalize_preserves_argmax(raw in proptest::collection::vec(-100f64..100.0, 1..8), h in 100f64..1e3) {
            let arg = |xs: &[f64]| xs.iter().enumerate().fold(0, |b, (i, &x)| if x > xs[b] { i } else { b });
            let scaled: Vec<f64> = raw.iter().map(|&r| normalize_heuristic(r, h).unwrap()).collect();
            proptest::prop_assert_eq!(arg(&raw), arg(&scaled));
        }
    }
}
