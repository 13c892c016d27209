use serde::{Deserialize, Serialize};

use super::{biased_binary, binary_actions, binary_apply, check_leaf, player_at, uniform_ternary, TreePath, MAX_DEPTH};
use crate::error::{Error, Result};
use crate::game::{Action, Game, Player, Reward};

/// Mean of the off-strategy leaves in the left subtree A.
pub const LEAF_MEAN_A: f64 = 0.0;
/// Mean of the off-strategy leaves in the right subtree B.
pub const LEAF_MEAN_B: f64 = 0.5;

/// Tree where Max wins through the left subtree A (left at the root, left
/// again at `max_critical`), while the right subtree B hides Min's win (left
/// at both `min_criticals`). Off-strategy leaves in B are biased upward, so B
/// looks better than A under light sampling.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DualTreeSpec {
    #[serde(default = "default_depth")]
    pub depth: u32,
    /// Max's second critical depth inside A (the first is the root).
    pub max_critical: u32,
    /// Min's critical depths inside B, odd and increasing.
    pub min_criticals: (u32, u32),
    #[serde(default)]
    pub seed: u64,
}

fn default_depth() -> u32 {
    20
}

impl DualTreeSpec {
    pub fn new(max_critical: u32, min_criticals: (u32, u32), seed: u64) -> Self {
        DualTreeSpec { depth: default_depth(), max_critical, min_criticals, seed }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSpec(m));
        let d = self.depth;
        if d < 4 || d % 2 != 0 || d > MAX_DEPTH {
            return bad(format!("depth must be even in 4..={MAX_DEPTH}, got {d}"));
        }
        let x = self.max_critical;
        if x % 2 != 0 || x < 2 || x > d - 2 {
            return bad(format!("max critical depth {x} must be even in 2..={}", d - 2));
        }
        let (y1, y2) = self.min_criticals;
        for y in [y1, y2] {
            if y % 2 != 1 || y > d - 1 {
                return bad(format!("min critical depth {y} must be odd in 1..={}", d - 1));
            }
        }
        if y1 >= y2 {
            return bad(format!("min critical depths must increase: ({y1}, {y2})"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DualTree {
    spec: DualTreeSpec,
}

pub fn build_dual_tree(spec: DualTreeSpec) -> Result<DualTree> {
    spec.validate()?;
    Ok(DualTree { spec })
}

impl DualTree {
    pub fn spec(&self) -> &DualTreeSpec {
        &self.spec
    }

    /// Leaf reached by Max's implanted winning strategy in A.
    pub fn on_max_strategy(&self, path: &TreePath) -> bool {
        path.len() > self.spec.max_critical
            && path.action_at(0) == 0
            && path.action_at(self.spec.max_critical) == 0
    }

    /// Leaf reached by Min's implanted winning strategy in B.
    pub fn on_min_strategy(&self, path: &TreePath) -> bool {
        let (y1, y2) = self.spec.min_criticals;
        path.len() > y2 && path.action_at(0) == 1 && path.action_at(y1) == 0 && path.action_at(y2) == 0
    }

    pub fn leaf_value(&self, path: &TreePath) -> Result<Reward> {
        check_leaf(path, self.spec.depth)?;
        Ok(if self.on_max_strategy(path) {
            1.0
        } else if self.on_min_strategy(path) {
            -1.0
        } else if path.action_at(0) == 0 {
            uniform_ternary(self.spec.seed, path)
        } else {
            biased_binary(self.spec.seed, path, (1.0 + LEAF_MEAN_B) / 2.0)
        })
    }
}

impl Game for DualTree {
    type State = TreePath;

    fn root(&self) -> TreePath {
        TreePath::ROOT
    }

    fn legal_actions_into(&self, s: &TreePath, out: &mut Vec<Action>) {
        binary_actions(s, self.spec.depth, out)
    }

    fn apply(&self, s: &TreePath, a: Action) -> Result<TreePath> {
        binary_apply(s, self.spec.depth, a)
    }

    fn is_terminal(&self, s: &TreePath) -> bool {
        s.len() == self.spec.depth
    }

    fn terminal_reward(&self, s: &TreePath) -> Result<Reward> {
        self.leaf_value(s).map_err(|_| Error::NotTerminal)
    }

    fn to_move(&self, s: &TreePath) -> Player {
        player_at(s)
    }

    fn ply(&self, s: &TreePath) -> u32 {
        s.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::exact_value;

    fn small(seed: u64) -> DualTree {
        build_dual_tree(DualTreeSpec { depth: 10, ..DualTreeSpec::new(4, (3, 7), seed) }).unwrap()
    }

    fn leaves_under(prefix: &[usize], depth: u32) -> Vec<TreePath> {
        let free = depth - prefix.len() as u32;
        (0..1u64 << free)
            .map(|i| {
                let mut a = prefix.to_vec();
                a.extend((0..free).map(|b| ((i >> b) & 1) as usize));
                TreePath::from_actions(&a)
            })
            .collect()
    }

    #[test]
    fn brute_force_root_is_win_via_left() {
        for seed in 0..5 {
            let t = small(seed);
            assert_eq!(exact_value(&t, &t.root()), 1.0);
            let left = t.apply(&t.root(), Action(0)).unwrap();
            let right = t.apply(&t.root(), Action(1)).unwrap();
            assert_eq!(exact_value(&t, &left), 1.0);
            assert_eq!(exact_value(&t, &right), -1.0, "right child is a trap");
        }
    }

    #[test]
    fn min_strategy_leaves_are_losses() {
        let t = small(3);
        for p in leaves_under(&[1], 10) {
            if p.action_at(3) == 0 && p.action_at(7) == 0 {
                assert_eq!(t.leaf_value(&p).unwrap(), -1.0);
            }
        }
    }

    #[test]
    fn leaf_means_match_targets() {
        for seed in [1, 77, 4242] {
            let t = build_dual_tree(DualTreeSpec { depth: 16, ..DualTreeSpec::new(6, (5, 11), seed) }).unwrap();
            let mean = |paths: Vec<TreePath>, pick: &dyn Fn(&TreePath) -> bool| {
                let vals: Vec<f64> = paths.iter().filter(|p| pick(p)).map(|p| t.leaf_value(p).unwrap()).collect();
                vals.iter().sum::<f64>() / vals.len() as f64
            };
            let off_b = mean(leaves_under(&[1], 16), &|p| !t.on_min_strategy(p));
            let off_a = mean(leaves_under(&[0], 16), &|p| !t.on_max_strategy(p));
            assert!((off_b - LEAF_MEAN_B).abs() < 0.05, "B off-strategy mean {off_b}");
            assert!((off_a - LEAF_MEAN_A).abs() < 0.05, "A off-strategy mean {off_a}");
        }
    }

    #[test]
    fn rejects_bad_parities() {
        assert!(build_dual_tree(DualTreeSpec::new(3, (1, 3), 0)).is_err());
        assert!(build_dual_tree(DualTreeSpec::new(4, (2, 3), 0)).is_err());
        assert!(build_dual_tree(DualTreeSpec::new(4, (5, 3), 0)).is_err());
        assert!(build_dual_tree(DualTreeSpec::new(20, (1, 3), 0)).is_err());
        assert!(build_dual_tree(DualTreeSpec::new(18, (1, 19), 0)).is_ok());
    }
}
