//! Small fully stored game trees, for oracles and hand-built test positions.

use crate::error::{invalid, Error, Result};
use crate::game::{Action, Game, Player, Reward};
use crate::rng::RngStream;

#[derive(Debug, Clone, PartialEq)]
pub struct ExplicitNode {
    pub children: Vec<usize>,
    /// Terminal reward; required exactly on leaves.
    pub reward: Option<Reward>,
    pub heuristic: Option<f64>,
}

impl ExplicitNode {
    pub fn inner(children: Vec<usize>) -> Self {
        ExplicitNode { children, reward: None, heuristic: None }
    }

    pub fn leaf(reward: Reward) -> Self {
        ExplicitNode { children: Vec::new(), reward: Some(reward), heuristic: None }
    }

    pub fn with_heuristic(mut self, h: f64) -> Self {
        self.heuristic = Some(h);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ExplicitState {
    pub node: u32,
    pub ply: u32,
}

/// A game given as an explicit tree. Node 0 is the root; Max moves first.
#[derive(Debug, Clone, PartialEq)]
pub struct ExplicitGame {
    nodes: Vec<ExplicitNode>,
}

impl ExplicitGame {
    pub fn new(nodes: Vec<ExplicitNode>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(invalid("nodes", "tree needs a root"));
        }
        let mut parents = vec![0usize; nodes.len()];
        for (i, n) in nodes.iter().enumerate() {
            if n.children.is_empty() != n.reward.is_some() {
                return Err(Error::InvalidSpec(format!("node {i}: leaves and only leaves carry a reward")));
            }
            for &c in &n.children {
                if c == 0 || c >= nodes.len() {
                    return Err(Error::InvalidSpec(format!("node {i}: bad child {c}")));
                }
                parents[c] += 1;
            }
        }
        if parents.iter().skip(1).any(|&p| p != 1) {
            return Err(Error::InvalidSpec("every non-root node needs exactly one parent".into()));
        }
        Ok(ExplicitGame { nodes })
    }

    /// Complete `branching`-ary tree of uniform `depth`, leaves in left-to-right order.
    pub fn complete(branching: usize, depth: u32, leaves: &[Reward]) -> Result<Self> {
        let expected = branching.pow(depth);
        if branching == 0 || leaves.len() != expected {
            return Err(invalid("leaves", format!("expected {expected} leaf values")));
        }
        let inner: usize = (0..depth).map(|d| branching.pow(d)).sum();
        let mut nodes = Vec::with_capacity(inner + expected);
        for i in 0..inner {
            nodes.push(ExplicitNode::inner((0..branching).map(|k| i * branching + 1 + k).collect()));
        }
        nodes.extend(leaves.iter().map(|&r| ExplicitNode::leaf(r)));
        ExplicitGame::new(nodes)
    }

    /// Complete tree with leaves drawn uniformly from `{-1, 0, +1}`.
    pub fn random_complete(branching: usize, depth: u32, rng: &mut RngStream) -> Result<Self> {
        let leaves: Vec<Reward> = (0..branching.pow(depth)).map(|_| rng.index(3) as f64 - 1.0).collect();
        ExplicitGame::complete(branching, depth, &leaves)
    }

    pub fn node(&self, s: &ExplicitState) -> &ExplicitNode {
        &self.nodes[s.node as usize]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

impl Game for ExplicitGame {
    type State = ExplicitState;

    fn root(&self) -> ExplicitState {
        ExplicitState { node: 0, ply: 0 }
    }

    fn legal_actions_into(&self, s: &ExplicitState, out: &mut Vec<Action>) {
        out.clear();
        out.extend((0..self.node(s).children.len()).map(Action));
    }

    fn apply(&self, s: &ExplicitState, a: Action) -> Result<ExplicitState> {
        let child = self
            .node(s)
            .children
            .get(a.0)
            .ok_or(Error::IllegalAction { action: a.0, ply: s.ply })?;
        Ok(ExplicitState { node: *child as u32, ply: s.ply + 1 })
    }

    fn is_terminal(&self, s: &ExplicitState) -> bool {
        self.node(s).children.is_empty()
    }

    fn terminal_reward(&self, s: &ExplicitState) -> Result<Reward> {
        self.node(s).reward.ok_or(Error::NotTerminal)
    }

    fn to_move(&self, s: &ExplicitState) -> Player {
        Player::at_ply(s.ply)
    }

    fn ply(&self, s: &ExplicitState) -> u32 {
        s.ply
    }

    fn heuristic(&self, s: &ExplicitState) -> Option<f64> {
        self.node(s).heuristic
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::exact_value;

    #[test]
    fn complete_tree_minimax() {
        let g = ExplicitGame::complete(2, 2, &[0.6, 0.9, 0.2, 0.9]).unwrap();
        assert_eq!(g.len(), 7);
        assert_eq!(exact_value(&g, &g.root()), 0.6);
    }

    #[test]
    fn rejects_malformed_trees() {
        assert!(ExplicitGame::new(vec![ExplicitNode::inner(vec![1]), ExplicitNode::inner(vec![])]).is_err());
        assert!(ExplicitGame::new(vec![ExplicitNode::inner(vec![1, 1]), ExplicitNode::leaf(0.0)]).is_err());
        assert!(ExplicitGame::complete(2, 2, &[0.0; 3]).is_err());
    }
}
