//! UCT: Monte-Carlo tree search with UCB1 (or epsilon-greedy) selection and
//! averaging backups.
//!
//! The tree stores its root from the start and adds exactly one node per
//! iteration (the first state reached outside the tree) until the game tree
//! is fully materialized.

mod select;
mod stats;

pub use select::{epsilon_greedy_select, ucb_select, ucb_select_with};
pub use stats::{ActionStats, NodeStats};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::game::{heuristic_value, random_playout_with, Action, Game, Player, Reward};
use crate::minimax::mmk_playout;
use crate::rng::RngStream;

/// How a newly added non-terminal state is valued.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum DefaultPolicy {
    /// Uniform random playout to the end of the game.
    RandomPlayout,
    /// The game's heuristic scaled into [-1, +1]; no playout at all.
    HeuristicEval { h_max: f64 },
    /// Playout between two depth-`k` MM-k-R players.
    MinimaxPlayout { k: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Selector {
    Ucb1,
    /// `decay`, when set, caps the rate at `decay / n(s)` so exploration falls off with visits.
    EpsilonGreedy {
        epsilon: f64,
        #[serde(default)]
        decay: Option<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct UctConfig {
    pub exploration: f64,
    pub default_policy: DefaultPolicy,
    pub selector: Selector,
    pub max_iterations: u64,
    /// Break exact UCB ties at random instead of by lowest index.
    pub random_ties: bool,
    pub seed: u64,
}

impl Default for UctConfig {
    fn default() -> Self {
        UctConfig {
            exploration: 0.4,
            default_policy: DefaultPolicy::RandomPlayout,
            selector: Selector::Ucb1,
            max_iterations: 10_000,
            random_ties: false,
            seed: 0,
        }
    }
}

impl UctConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.exploration >= 0.0) || !self.exploration.is_finite() {
            return Err(invalid("exploration", "must be a non-negative number"));
        }
        if let Selector::EpsilonGreedy { epsilon, decay } = self.selector {
            if !(0.0..=1.0).contains(&epsilon) {
                return Err(invalid("epsilon", "must lie in [0, 1]"));
            }
            if decay.is_some_and(|d| !(d > 0.0)) {
                return Err(invalid("decay", "must be positive"));
            }
        }
        match self.default_policy {
            DefaultPolicy::HeuristicEval { h_max } if !(h_max > 0.0) => Err(invalid("h_max", "must be positive")),
            DefaultPolicy::MinimaxPlayout { k: 0 } => Err(invalid("k", "must be at least 1")),
            _ => Ok(()),
        }
    }
}

type NodeId = u32;

#[derive(Debug, Clone)]
struct Node<S> {
    state: S,
    to_move: Player,
    terminal: Option<Reward>,
    actions: Vec<Action>,
    children: Vec<Option<NodeId>>,
    stats: NodeStats,
}

/// A UCT search tree over `game`, rooted at a fixed state.
#[derive(Debug, Clone)]
pub struct UctTree<'g, G: Game> {
    game: &'g G,
    nodes: Vec<Node<G::State>>,
    iterations: u64,
    playouts: u64,
    last_root_edge: Option<usize>,
    path: Vec<(NodeId, usize)>,
    buf: Vec<Action>,
}

impl<'g, G: Game> UctTree<'g, G> {
    pub fn new(game: &'g G, root: G::State) -> Self {
        let mut tree = UctTree {
            game,
            nodes: Vec::new(),
            iterations: 0,
            playouts: 0,
            last_root_edge: None,
            path: Vec::new(),
            buf: Vec::new(),
        };
        tree.push_node(root);
        tree
    }

    fn push_node(&mut self, state: G::State) -> NodeId {
        let terminal = if self.game.is_terminal(&state) {
            Some(self.game.terminal_reward(&state).expect("terminal state has a reward"))
        } else {
            None
        };
        let actions = self.game.legal_actions(&state);
        let node = Node {
            to_move: self.game.to_move(&state),
            terminal,
            children: vec![None; actions.len()],
            stats: NodeStats::new(actions.len()),
            actions,
            state,
        };
        self.nodes.push(node);
        (self.nodes.len() - 1) as NodeId
    }

    pub fn game(&self) -> &'g G {
        self.game
    }

    /// Iterations run so far (t).
    pub fn iterations(&self) -> u64 {
        self.iterations
    }

    /// Nodes added by iterations; excludes the root.
    pub fn expansions(&self) -> u64 {
        self.nodes.len() as u64 - 1
    }

    /// Number of stored states including the root.
    pub fn stored_nodes(&self) -> usize {
        self.nodes.len()
    }

    /// Calls to the random playout policy so far (MM-k playouts not included).
    pub fn random_playouts(&self) -> u64 {
        self.playouts
    }

    pub fn root_state(&self) -> &G::State {
        &self.nodes[0].state
    }

    pub fn root_stats(&self) -> &NodeStats {
        &self.nodes[0].stats
    }

    pub fn root_actions(&self) -> &[Action] {
        &self.nodes[0].actions
    }

    /// Root edge chosen by the most recent iteration.
    pub fn last_root_edge(&self) -> Option<usize> {
        self.last_root_edge
    }

    /// Stats of the state reached by following `edges` from the root, if stored.
    pub fn stats_at(&self, edges: &[usize]) -> Option<&NodeStats> {
        let mut id = 0 as NodeId;
        for &e in edges {
            id = (*self.nodes[id as usize].children.get(e)?)?;
        }
        Some(&self.nodes[id as usize].stats)
    }

    /// One selection-expansion-evaluation-backup cycle. Returns the episode reward.
    pub fn run_iteration(&mut self, config: &UctConfig, rng: &mut RngStream) -> Result<Reward> {
        if self.nodes[0].terminal.is_some() {
            return Err(Error::RootExhausted);
        }
        let mut path = std::mem::take(&mut self.path);
        path.clear();
        let mut cur: NodeId = 0;
        let reward = loop {
            let node = &mut self.nodes[cur as usize];
            if let Some(r) = node.terminal {
                break r;
            }
            let edge = select(node, config, rng)?;
            path.push((cur, edge));
            match node.children[edge] {
                Some(child) => cur = child,
                None => {
                    let state = self.game.apply(&node.state, node.actions[edge])?;
                    let child = self.push_node(state);
                    self.nodes[cur as usize].children[edge] = Some(child);
                    break self.evaluate(child, config, rng)?;
                }
            }
        };
        self.last_root_edge = path.first().map(|&(_, e)| e);
        self.backup_path(&path, reward);
        self.path = path;
        self.iterations += 1;
        Ok(reward)
    }

    fn evaluate(&mut self, id: NodeId, config: &UctConfig, rng: &mut RngStream) -> Result<Reward> {
        let node = &self.nodes[id as usize];
        if let Some(r) = node.terminal {
            return Ok(r);
        }
        match config.default_policy {
            DefaultPolicy::RandomPlayout => {
                self.playouts += 1;
                Ok(random_playout_with(self.game, &node.state, rng, &mut self.buf))
            }
            DefaultPolicy::HeuristicEval { h_max } => heuristic_value(self.game, &node.state, h_max),
            DefaultPolicy::MinimaxPlayout { k } => mmk_playout(self.game, &node.state, k, rng),
        }
    }

    /// Averaging backup of `reward` through every `(node, edge)` pair on `path`.
    pub fn backup_path(&mut self, path: &[(u32, usize)], reward: Reward) {
        for &(id, edge) in path {
            self.nodes[id as usize].stats.backup(edge, reward);
        }
    }

    /// v(t): mean of all episode rewards, i.e. the visit-weighted mean of the root action values.
    pub fn root_value(&self) -> Result<Reward> {
        if self.iterations == 0 {
            return Err(Error::Uninitialized);
        }
        self.root_stats().mean_value().ok_or(Error::Uninitialized)
    }

    /// Most visited root action; ties go to the better value for the mover, then the lower index.
    pub fn recommend_move(&self) -> Result<Action> {
        if self.iterations == 0 {
            return Err(Error::Uninitialized);
        }
        let root = &self.nodes[0];
        let sign = root.to_move.sign();
        let mut best = 0;
        for (i, a) in root.stats.actions.iter().enumerate().skip(1) {
            let b = &root.stats.actions[best];
            if a.n > b.n || (a.n == b.n && sign * a.q > sign * b.q) {
                best = i;
            }
        }
        Ok(root.actions[best])
    }

    /// Runs `n` iterations.
    pub fn run(&mut self, n: u64, config: &UctConfig, rng: &mut RngStream) -> Result<()> {
        for _ in 0..n {
            self.run_iteration(config, rng)?;
        }
        Ok(())
    }
}

fn select<S>(node: &mut Node<S>, config: &UctConfig, rng: &mut RngStream) -> Result<usize> {
    match config.selector {
        Selector::Ucb1 => {
            let tie_rng = if config.random_ties { Some(rng) } else { None };
            ucb_select_with(&node.stats, node.to_move, config.exploration, tie_rng)
        }
        Selector::EpsilonGreedy { epsilon, decay } => {
            let eps = match decay {
                Some(d) if node.stats.n > 0 => epsilon.min(d / node.stats.n as f64),
                _ => epsilon,
            };
            epsilon_greedy_select(&mut node.stats, node.to_move, eps, rng)
        }
    }
}

/// Runs a fresh search of `config.max_iterations` iterations and returns the tree.
pub fn search<'g, G: Game>(game: &'g G, root: G::State, config: &UctConfig, rng: &mut RngStream) -> Result<UctTree<'g, G>> {
    config.validate()?;
    let mut tree = UctTree::new(game, root);
    tree.run(config.max_iterations, config, rng)?;
    Ok(tree)
}
