//! Soft-trap detection: after a move, can the opponent force a heuristic
//! gain of at least `delta` within `k` of its own moves?
//!
//! `h` is read from Max's side. Gain along a line is measured from the
//! opponent's side against the state before the move: `sign(opp)·(h(s') - h(s))`.
//! A line's value is the gain at the first state where it reaches `delta`,
//! otherwise the largest gain seen. The opponent maximizes it, the mover
//! minimizes it.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::game::{Action, Game, Player};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SoftTrapReport<S> {
    pub state: S,
    pub trapping_move: Action,
    pub delta: f64,
    pub k: u32,
    /// Gain the opponent can guarantee.
    pub gain: f64,
    /// The trapping move followed by one principal variation.
    pub witness: Vec<Action>,
}

struct Search<'a, G: Game, H> {
    game: &'a G,
    h: &'a H,
    at_risk: Player,
    base: f64,
    delta: f64,
}

impl<G: Game, H: Fn(&G::State) -> f64> Search<'_, G, H> {
    fn gain(&self, s: &G::State) -> f64 {
        self.at_risk.opponent().sign() * ((self.h)(s) - self.base)
    }

    /// Value of `s` with `left` opponent moves remaining, plus the line that achieves it.
    fn value(&self, s: &G::State, left: u32) -> Result<(f64, Vec<Action>)> {
        let g = self.gain(s);
        if g >= self.delta || self.game.is_terminal(s) || left == 0 {
            return Ok((g, Vec::new()));
        }
        let opp_moves = self.game.to_move(s) != self.at_risk;
        let next_left = if opp_moves { left - 1 } else { left };
        let mut best: Option<(f64, Action, Vec<Action>)> = None;
        for a in self.game.legal_actions(s) {
            let (v, line) = self.value(&self.game.apply(s, a)?, next_left)?;
            let better = match &best {
                None => true,
                Some((b, ..)) => (opp_moves && v > *b) || (!opp_moves && v < *b),
            };
            if better {
                best = Some((v, a, line));
            }
        }
        let (v, a, mut line) = best.ok_or(Error::EmptyActionSet)?;
        line.insert(0, a);
        Ok((g.max(v), line))
    }
}

/// Every move of `state` that is a soft trap for the player to move.
pub fn soft_traps<G, H>(game: &G, state: &G::State, h: &H, delta: f64, k: u32) -> Result<Vec<SoftTrapReport<G::State>>>
where
    G: Game,
    H: Fn(&G::State) -> f64,
{
    if !(delta > 0.0) {
        return Err(invalid("delta", "must be positive"));
    }
    if k == 0 {
        return Err(invalid("k", "must be at least 1"));
    }
    if game.is_terminal(state) {
        return Err(Error::TerminalState);
    }
    let search = Search { game, h, at_risk: game.to_move(state), base: h(state), delta };
    let mut out = Vec::new();
    for m in game.legal_actions(state) {
        let (gain, line) = search.value(&game.apply(state, m)?, k)?;
        if gain >= delta {
            let mut witness = vec![m];
            witness.extend(line);
            out.push(SoftTrapReport { state: state.clone(), trapping_move: m, delta, k, gain, witness });
        }
    }
    Ok(out)
}

/// The lowest-index trapping move of `state`, if any.
pub fn detect_soft_trap<G, H>(game: &G, state: &G::State, h: &H, delta: f64, k: u32) -> Result<Option<SoftTrapReport<G::State>>>
where
    G: Game,
    H: Fn(&G::State) -> f64,
{
    Ok(soft_traps(game, state, h, delta, k)?.into_iter().next())
}

/// Replays a witness and returns the best opponent-side gain reached within
/// `k` opponent moves, or `None` if the line is illegal.
pub fn replay_witness<G, H>(game: &G, state: &G::State, h: &H, witness: &[Action], k: u32) -> Option<f64>
where
    G: Game,
    H: Fn(&G::State) -> f64,
{
    let at_risk = game.to_move(state);
    let base = h(state);
    let sign = at_risk.opponent().sign();
    let mut s = state.clone();
    let mut opp_moves = 0;
    let mut best = f64::NEG_INFINITY;
    for &a in witness {
        if game.to_move(&s) != at_risk {
            opp_moves += 1;
            if opp_moves > k {
                break;
            }
        }
        s = game.apply(&s, a).ok()?;
        best = best.max(sign * (h(&s) - base));
    }
    Some(best)
}
