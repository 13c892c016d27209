use serde::{Deserialize, Serialize};

use crate::game::Reward;

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ActionStats {
    /// n(s,a)
    pub n: u64,
    /// Q(s,a), Max's perspective; the mean of every reward backed up through this edge.
    pub q: f64,
}

/// Visit statistics of one stored state.
///
/// `n` equals the sum of the per-action counts: the visit that created the
/// node is not counted, so at the root `n` is the iteration count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeStats {
    /// n(s)
    pub n: u64,
    pub actions: Vec<ActionStats>,
    /// Epsilon-greedy only: set once the opening rounds have broken the tie.
    pub rounds_done: bool,
}

impl NodeStats {
    pub fn new(num_actions: usize) -> Self {
        NodeStats { n: 0, actions: vec![ActionStats::default(); num_actions], rounds_done: false }
    }

    /// Builds stats from `(n, q)` pairs, with `n(s)` set to their total.
    pub fn from_pairs(pairs: &[(u64, f64)]) -> Self {
        NodeStats {
            n: pairs.iter().map(|p| p.0).sum(),
            actions: pairs.iter().map(|&(n, q)| ActionStats { n, q }).collect(),
            rounds_done: false,
        }
    }

    /// Averaging backup of one reward through action `edge`.
    #[inline]
    pub fn backup(&mut self, edge: usize, reward: Reward) {
        self.n += 1;
        let a = &mut self.actions[edge];
        a.n += 1;
        a.q += (reward - a.q) / a.n as f64;
    }

    /// Visit-weighted mean of the action values.
    pub fn mean_value(&self) -> Option<Reward> {
        let total: u64 = self.actions.iter().map(|a| a.n).sum();
        (total > 0).then(|| self.actions.iter().map(|a| a.n as f64 * a.q).sum::<f64>() / total as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn backup_examples() {
        let mut s = NodeStats::from_pairs(&[(3, 0.2)]);
        s.backup(0, 1.0);
        assert_eq!(s.actions[0].n, 4);
        assert!((s.actions[0].q - 0.4).abs() < 1e-15);
        assert_eq!(s.n, 4);

        let mut s = NodeStats::new(2);
        s.backup(1, -1.0);
        assert_eq!(s.actions[1], ActionStats { n: 1, q: -1.0 });
    }

    proptest::proptest! {
        #[test]
        fn backup_is_the_running_mean(rewards in proptest::collection::vec(-1.0f64..=1.0, 1..400)) {
            let mut s = NodeStats::new(1);
            let mut sum = 0.0;
            for &r in &rewards {
                s.backup(0, r);
                sum += r;
            }
            let mean = sum / rewards.len() as f64;
            proptest::prop_assert!((s.actions[0].q - mean).abs() <= 1e-12);
            proptest::prop_assert!(s.actions[0].q.abs() <= 1.0 + 1e-12);
        }
    }
}
