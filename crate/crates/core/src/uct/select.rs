//! In-tree action selection.
//!
//! Both selectors return an edge index into `NodeStats::actions`. Values are
//! stored from Max's perspective; Min minimizes.

use crate::error::{Error, Result};
use crate::game::Player;
use crate::rng::RngStream;

use super::stats::NodeStats;

const TIE_EPS: f64 = 1e-12;

fn first_unvisited(stats: &NodeStats) -> Option<usize> {
    stats.actions.iter().position(|a| a.n == 0)
}

/// UCB1 selection: Max takes the largest upper bound `q + c*sqrt(ln n / n_a)`,
/// Min the smallest lower bound `q - c*sqrt(ln n / n_a)`. Unvisited actions
/// come first, lowest index first; remaining ties go to the lowest index.
pub fn ucb_select(stats: &NodeStats, player: Player, c: f64) -> Result<usize> {
    ucb_select_with(stats, player, c, None)
}

/// [`ucb_select`] with ties among equal bounds broken uniformly by `rng` when given.
pub fn ucb_select_with(stats: &NodeStats, player: Player, c: f64, rng: Option<&mut RngStream>) -> Result<usize> {
    if stats.actions.is_empty() {
        return Err(Error::EmptyActionSet);
    }
    if let Some(i) = first_unvisited(stats) {
        return Ok(i);
    }
    let ln_n = (stats.n as f64).ln();
    let sign = player.sign();
    // Maximize sign * bound, which is the upper bound for Max and the negated lower bound for Min.
    let scores: Vec<f64> =
        stats.actions.iter().map(|a| sign * a.q + c * (ln_n / a.n as f64).sqrt()).collect();
    Ok(pick_best(&scores, rng))
}

fn pick_best(scores: &[f64], rng: Option<&mut RngStream>) -> usize {
    let best = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    match rng {
        None => scores.iter().position(|&s| s == best).expect("non-empty"),
        Some(rng) => {
            let ties: Vec<usize> = (0..scores.len()).filter(|&i| scores[i] == best).collect();
            ties[rng.index(ties.len())]
        }
    }
}

/// Epsilon-greedy selection with opening rounds.
///
/// Children are visited in rounds (every child once per round) while any two
/// children tie for the best value at a round boundary. Once the tie breaks,
/// an optimal child is chosen with probability `1 - epsilon` and a
/// sub-optimal child with probability `epsilon`, uniformly within each class.
pub fn epsilon_greedy_select(
    stats: &mut NodeStats,
    player: Player,
    epsilon: f64,
    rng: &mut RngStream,
) -> Result<usize> {
    if stats.actions.is_empty() {
        return Err(Error::EmptyActionSet);
    }
    if let Some(i) = first_unvisited(stats) {
        return Ok(i);
    }
    let sign = player.sign();
    let values: Vec<f64> = stats.actions.iter().map(|a| sign * a.q).collect();
    let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let optimal: Vec<usize> = (0..values.len()).filter(|&i| values[i] >= best - TIE_EPS).collect();

    if !stats.rounds_done {
        let min_n = stats.actions.iter().map(|a| a.n).min().expect("non-empty");
        let round_complete = stats.actions.iter().all(|a| a.n == min_n);
        if !round_complete {
            return Ok(stats.actions.iter().position(|a| a.n == min_n).expect("non-empty"));
        }
        if optimal.len() > 1 {
            return Ok(0);
        }
        stats.rounds_done = true;
    }

    let suboptimal: Vec<usize> = (0..values.len()).filter(|&i| values[i] < best - TIE_EPS).collect();
    let explore = !suboptimal.is_empty() && rng.chance(epsilon);
    let pool = if explore { &suboptimal } else { &optimal };
    Ok(pool[rng.index(pool.len())])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ucb_examples() {
        // Bounds: 0.5 + 0.4*sqrt(ln 10 / 6) = 0.748, 0.4 + 0.4*sqrt(ln 10 / 4) = 0.703.
        let s = NodeStats::from_pairs(&[(6, 0.5), (4, 0.4)]);
        assert_eq!(ucb_select(&s, Player::Max, 0.4).unwrap(), 0);
        // Lower bounds: 0.252 and 0.096.
        assert_eq!(ucb_select(&s, Player::Min, 0.4).unwrap(), 1);
    }

    #[test]
    fn ucb_examples_match_direct_formula() {
        let ub = |q: f64, n: f64| q + 0.4 * (10f64.ln() / n).sqrt();
        let lb = |q: f64, n: f64| q - 0.4 * (10f64.ln() / n).sqrt();
        assert!((ub(0.5, 6.0) - 0.748).abs() < 5e-4 && (ub(0.4, 4.0) - 0.703).abs() < 5e-4);
        assert!((lb(0.5, 6.0) - 0.252).abs() < 5e-4 && (lb(0.4, 4.0) - 0.096).abs() < 1e-3);
    }

    #[test]
    fn unvisited_first() {
        let s = NodeStats::from_pairs(&[(6, -1.0), (0, -1.0), (0, 1.0)]);
        assert_eq!(ucb_select(&s, Player::Max, 0.4).unwrap(), 1);
        assert_eq!(ucb_select(&NodeStats::new(3), Player::Min, 0.0).unwrap(), 0);
    }

    #[test]
    fn ties_and_empty() {
        let s = NodeStats::from_pairs(&[(5, 0.0), (5, 0.0), (5, 0.0)]);
        assert_eq!(ucb_select(&s, Player::Max, 0.4).unwrap(), 0);
        let mut rng = RngStream::new(3);
        let mut seen = [false; 3];
        for _ in 0..60 {
            seen[ucb_select_with(&s, Player::Max, 0.4, Some(&mut rng)).unwrap()] = true;
        }
        assert_eq!(seen, [true; 3]);
        assert_eq!(ucb_select(&NodeStats::new(0), Player::Max, 0.4), Err(Error::EmptyActionSet));
    }

    #[test]
    fn epsilon_rounds_alternate_while_tied() {
        let mut rng = RngStream::new(1);
        let mut s = NodeStats::new(2);
        let mut picks = Vec::new();
        for _ in 0..6 {
            let e = epsilon_greedy_select(&mut s, Player::Max, 0.5, &mut rng).unwrap();
            picks.push(e);
            s.backup(e, 1.0);
        }
        assert_eq!(picks, vec![0, 1, 0, 1, 0, 1]);
        assert!(!s.rounds_done);
    }

    #[test]
    fn epsilon_extremes_after_tie_breaks() {
        let mut rng = RngStream::new(2);
        let base = NodeStats::from_pairs(&[(2, 1.0), (2, 0.0)]);
        let mut s = base.clone();
        assert!((0..100).all(|_| epsilon_greedy_select(&mut s, Player::Max, 0.0, &mut rng).unwrap() == 0));
        assert!(s.rounds_done);
        let mut s = base.clone();
        assert!((0..100).all(|_| epsilon_greedy_select(&mut s, Player::Max, 1.0, &mut rng).unwrap() == 1));
        let mut s = base;
        assert!((0..100).all(|_| epsilon_greedy_select(&mut s, Player::Min, 0.0, &mut rng).unwrap() == 1));
    }

    #[test]
    fn epsilon_finishes_a_round_before_judging() {
        let mut rng = RngStream::new(2);
        let mut s = NodeStats::from_pairs(&[(2, 1.0), (1, 1.0)]);
        assert_eq!(epsilon_greedy_select(&mut s, Player::Max, 0.0, &mut rng).unwrap(), 1);
        assert!(!s.rounds_done);
    }
}
