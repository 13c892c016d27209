//! Binary game trees with implanted winning strategies.
//!
//! Trees are never stored. A state is a [`TreePath`] from the root, and leaf
//! values are a pure function of the tree spec and the path, so a tree of
//! depth 24 costs nothing until a search visits its nodes.

mod dual;
mod explicit;
mod kstep;
mod scenario;

pub use dual::{build_dual_tree, DualTree, DualTreeSpec, LEAF_MEAN_A, LEAF_MEAN_B};
pub use explicit::{ExplicitGame, ExplicitNode, ExplicitState};
pub use kstep::{build_kstep_tree, KStepTree, KStepTreeSpec};
pub use scenario::{build_scenario_tree, ScenarioKind, ScenarioTree, ScenarioTreeSpec};

use crate::error::{Error, Result};
use crate::game::{Action, Player, Reward};
use crate::rng::{derive_seed, mix64};

/// Deepest supported synthetic tree.
pub const MAX_DEPTH: u32 = 60;

/// Sequence of binary action indices from the root; bit `i` is the action at ply `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TreePath {
    bits: u64,
    len: u8,
}

impl TreePath {
    pub const ROOT: TreePath = TreePath { bits: 0, len: 0 };

    pub fn from_actions(actions: &[usize]) -> TreePath {
        assert!(actions.len() <= MAX_DEPTH as usize, "path too long");
        actions.iter().fold(TreePath::ROOT, |p, &a| p.child(a))
    }

    pub fn len(&self) -> u32 {
        self.len as u32
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Action taken at ply `ply`; panics past the end of the path.
    #[inline]
    pub fn action_at(&self, ply: u32) -> usize {
        assert!(ply < self.len as u32, "ply {ply} beyond path of length {}", self.len);
        ((self.bits >> ply) & 1) as usize
    }

    #[inline]
    pub fn child(&self, action: usize) -> TreePath {
        debug_assert!(action < 2);
        TreePath { bits: self.bits | ((action as u64 & 1) << self.len), len: self.len + 1 }
    }

    pub fn actions(&self) -> Vec<usize> {
        (0..self.len as u32).map(|i| self.action_at(i)).collect()
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    /// Bits of plies `from..len` packed from bit 0.
    pub(crate) fn suffix_index(&self, from: u32) -> u64 {
        let n = self.len as u32 - from;
        if n == 0 {
            0
        } else {
            (self.bits >> from) & (u64::MAX >> (64 - n))
        }
    }
}

/// Shared state-machine behavior of uniform-depth binary trees.
pub(crate) fn binary_actions(path: &TreePath, depth: u32, out: &mut Vec<Action>) {
    out.clear();
    if path.len() < depth {
        out.extend([Action(0), Action(1)]);
    }
}

pub(crate) fn binary_apply(path: &TreePath, depth: u32, action: Action) -> Result<TreePath> {
    if path.len() >= depth || action.0 > 1 {
        return Err(Error::IllegalAction { action: action.0, ply: path.len() });
    }
    Ok(path.child(action.0))
}

pub(crate) fn check_leaf(path: &TreePath, depth: u32) -> Result<()> {
    if path.len() != depth {
        return Err(Error::WrongPathLength { got: path.len() as usize, expected: depth as usize });
    }
    Ok(())
}

/// Deterministic per-path draw, uniform over `{-1, 0, +1}`.
pub(crate) fn uniform_ternary(seed: u64, path: &TreePath) -> Reward {
    (path_hash(seed, path) % 3) as f64 - 1.0
}

/// Deterministic per-path draw: `+1` with probability `p_plus`, else `-1`.
pub(crate) fn biased_binary(seed: u64, path: &TreePath, p_plus: f64) -> Reward {
    let u = (path_hash(seed, path) >> 11) as f64 / (1u64 << 53) as f64;
    if u < p_plus {
        1.0
    } else {
        -1.0
    }
}

fn path_hash(seed: u64, path: &TreePath) -> u64 {
    derive_seed(seed, &[path.bits, path.len as u64])
}

/// Keyed bijection on `[0, 2^bits)`.
///
/// Labeling leaf `i` as +1 exactly when `permute(i) < count` marks exactly
/// `count` leaves, scattered pseudo-randomly, without storing the tree.
pub(crate) fn permute(x: u64, bits: u32, key: u64) -> u64 {
    if bits == 0 {
        return 0;
    }
    let mask = u64::MAX >> (64 - bits);
    let shift = bits.div_ceil(2);
    let mut x = x & mask;
    for round in 0..4u64 {
        let k = mix64(key ^ round.wrapping_mul(0xa076_1d64_78bd_642f));
        x = (x ^ k) & mask;
        x = x.wrapping_mul(k | 1) & mask;
        x ^= x >> shift;
    }
    x
}

pub(crate) fn player_at(path: &TreePath) -> Player {
    Player::at_ply(path.len())
}
