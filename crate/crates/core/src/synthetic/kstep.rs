use serde::{Deserialize, Serialize};

use super::{binary_actions, binary_apply, check_leaf, player_at, uniform_ternary, TreePath, MAX_DEPTH};
use crate::error::{Error, Result};
use crate::game::{Action, Game, Player, Reward};

/// Binary tree in which Max wins by playing the correct action at every
/// critical depth. Every node at a critical depth is a critical node.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KStepTreeSpec {
    /// Total plies; even.
    pub depth: u32,
    /// Strictly increasing even depths, all below `depth`.
    pub critical_depths: Vec<u32>,
    /// Winning action (0 or 1) at each critical depth; all 0 when empty.
    #[serde(default)]
    pub correct_actions: Vec<u8>,
    #[serde(default)]
    pub seed: u64,
}

impl KStepTreeSpec {
    pub fn new(depth: u32, critical_depths: Vec<u32>, seed: u64) -> Self {
        KStepTreeSpec { depth, critical_depths, correct_actions: Vec::new(), seed }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSpec(m));
        if self.depth == 0 || self.depth % 2 != 0 || self.depth > MAX_DEPTH {
            return bad(format!("depth must be even in 2..={MAX_DEPTH}, got {}", self.depth));
        }
        if self.critical_depths.is_empty() {
            return bad("at least one critical depth is required".into());
        }
        for w in self.critical_depths.windows(2) {
            if w[0] >= w[1] {
                return bad(format!("critical depths must increase strictly: {:?}", self.critical_depths));
            }
        }
        for &d in &self.critical_depths {
            if d % 2 != 0 || d >= self.depth {
                return bad(format!("critical depth {d} must be even and below {}", self.depth));
            }
        }
        if !self.correct_actions.is_empty() {
            if self.correct_actions.len() != self.critical_depths.len() {
                return bad("one correct action per critical depth".into());
            }
            if self.correct_actions.iter().any(|&a| a > 1) {
                return bad("correct actions are 0 or 1".into());
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KStepTree {
    spec: KStepTreeSpec,
    correct: Vec<usize>,
}

pub fn build_kstep_tree(spec: KStepTreeSpec) -> Result<KStepTree> {
    spec.validate()?;
    let correct = if spec.correct_actions.is_empty() {
        vec![0; spec.critical_depths.len()]
    } else {
        spec.correct_actions.iter().map(|&a| a as usize).collect()
    };
    Ok(KStepTree { spec, correct })
}

impl KStepTree {
    pub fn spec(&self) -> &KStepTreeSpec {
        &self.spec
    }

    pub fn depth(&self) -> u32 {
        self.spec.depth
    }

    /// True when the path (of any length) has not yet deviated from the strategy.
    pub fn on_strategy(&self, path: &TreePath) -> bool {
        self.spec
            .critical_depths
            .iter()
            .zip(&self.correct)
            .take_while(|(&d, _)| d < path.len())
            .all(|(&d, &c)| path.action_at(d) == c)
    }

    pub fn leaf_value(&self, path: &TreePath) -> Result<Reward> {
        check_leaf(path, self.spec.depth)?;
        if self.on_strategy(path) {
            Ok(1.0)
        } else {
            Ok(uniform_ternary(self.spec.seed, path))
        }
    }
}

impl Game for KStepTree {
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
