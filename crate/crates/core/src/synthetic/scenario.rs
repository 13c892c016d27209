use serde::{Deserialize, Serialize};

use super::{binary_actions, binary_apply, check_leaf, permute, player_at, TreePath, MAX_DEPTH};
use crate::error::{Error, Result};
use crate::game::{Action, Game, Player, Reward};
use crate::rng::derive_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScenarioKind {
    /// One critical Max move at the root: left subtree all +1, right subtree
    /// holds an exact fraction `p` of +1 leaves (the rest -1).
    A,
    /// Critical Max moves at plies 0 and 2: the root's left child is a Min
    /// node whose two children are kind-A trees; the root's right subtree
    /// holds an exact fraction `q` of +1 leaves.
    B,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioTreeSpec {
    pub kind: ScenarioKind,
    /// Depth of the kind-A subtree below its root's children.
    pub subtree_depth: u32,
    pub p: f64,
    #[serde(default)]
    pub q: f64,
    #[serde(default)]
    pub seed: u64,
}

impl ScenarioTreeSpec {
    pub fn a(subtree_depth: u32, p: f64, seed: u64) -> Self {
        ScenarioTreeSpec { kind: ScenarioKind::A, subtree_depth, p, q: 0.0, seed }
    }

    pub fn b(subtree_depth: u32, p: f64, q: f64, seed: u64) -> Self {
        ScenarioTreeSpec { kind: ScenarioKind::B, subtree_depth, p, q, seed }
    }

    fn total_depth(&self) -> u32 {
        match self.kind {
            ScenarioKind::A => self.subtree_depth + 1,
            ScenarioKind::B => self.subtree_depth + 3,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.subtree_depth == 0 || self.total_depth() > MAX_DEPTH {
            return Err(Error::InvalidSpec(format!("subtree depth {} out of range", self.subtree_depth)));
        }
        for (name, v) in [("p", self.p), ("q", self.q)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidSpec(format!("{name} = {v} is not a fraction")));
            }
        }
        Ok(())
    }
}

/// A labeled subtree: leaf `i` of `2^bits` is +1 iff its permuted index is below `wins`.
#[derive(Debug, Clone, PartialEq, Eq)]
struct FractionLabels {
    bits: u32,
    wins: u64,
    key: u64,
}

impl FractionLabels {
    fn new(bits: u32, fraction: f64, key: u64, warnings: &mut Vec<String>, what: &str) -> Self {
        let n = (1u64 << bits) as f64;
        let exact = fraction * n;
        let wins = (exact + 1e-9).floor();
        if (exact - wins).abs() > 1e-9 {
            warnings.push(format!(
                "{what}: fraction {fraction} of {n} leaves is not an integer; labeling {wins} leaves as +1"
            ));
        }
        FractionLabels { bits, wins: wins as u64, key }
    }

    fn value(&self, index: u64) -> Reward {
        if permute(index, self.bits, self.key) < self.wins {
            1.0
        } else {
            -1.0
        }
    }

    fn fraction(&self) -> f64 {
        self.wins as f64 / (1u64 << self.bits) as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioTree {
    spec: ScenarioTreeSpec,
    depth: u32,
    /// Kind A: the right subtree. Kind B: the root's right subtree.
    right: FractionLabels,
    /// Kind B only: right subtrees of the two kind-A trees at ply 2.
    inner: Vec<FractionLabels>,
    warnings: Vec<String>,
}

pub fn build_scenario_tree(spec: ScenarioTreeSpec) -> Result<ScenarioTree> {
    spec.validate()?;
    let mut warnings = Vec::new();
    let sd = spec.subtree_depth;
    let key = |i: u64| derive_seed(spec.seed, &[i]);
    let (right, inner) = match spec.kind {
        ScenarioKind::A => (FractionLabels::new(sd, spec.p, key(0), &mut warnings, "right subtree"), Vec::new()),
        ScenarioKind::B => {
            let right = FractionLabels::new(sd + 2, spec.q, key(0), &mut warnings, "root right subtree");
            let inner = (0..2)
                .map(|b| FractionLabels::new(sd, spec.p, key(1 + b), &mut warnings, "level-2 right subtree"))
                .collect();
            (right, inner)
        }
    };
    Ok(ScenarioTree { depth: spec.total_depth(), spec, right, inner, warnings })
}

impl ScenarioTree {
    pub fn spec(&self) -> &ScenarioTreeSpec {
        &self.spec
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    /// Notes recorded when a requested fraction had to be rounded down.
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// Fraction of +1 leaves actually realized in the (root) right subtree.
    pub fn right_fraction(&self) -> f64 {
        self.right.fraction()
    }

    /// Fraction of +1 leaves in the root's left subtree.
    pub fn left_fraction(&self) -> f64 {
        match self.spec.kind {
            ScenarioKind::A => 1.0,
            ScenarioKind::B => self.inner.iter().map(|l| 0.5 + 0.5 * l.fraction()).sum::<f64>() / 2.0,
        }
    }

    pub fn leaf_value(&self, path: &TreePath) -> Result<Reward> {
        check_leaf(path, self.depth)?;
        Ok(match (self.spec.kind, path.action_at(0)) {
            (ScenarioKind::A, 0) => 1.0,
            (_, 1) => self.right.value(path.suffix_index(1)),
            _ => {
                if path.action_at(2) == 0 {
                    1.0
                } else {
                    self.inner[path.action_at(1)].value(path.suffix_index(3))
                }
            }
        })
    }
}

impl Game for ScenarioTree {
    type State = TreePath;

    fn root(&self) -> TreePath {
        TreePath::ROOT
    }

    fn legal_actions_into(&self, s: &TreePath, out: &mut Vec<Action>) {
        binary_actions(s, self.depth, out)
    }

    fn apply(&self, s: &TreePath, a: Action) -> Result<TreePath> {
        binary_apply(s, self.depth, a)
    }

    fn is_terminal(&self, s: &TreePath) -> bool {
        s.len() == self.depth
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
    use crate::game::{exact_value, random_playout};
    use crate::rng::RngStream;

    fn census(t: &ScenarioTree, first: usize) -> (usize, usize) {
        let free = t.depth() - 1;
        let mut plus = 0;
        for i in 0..1u64 << free {
            let mut a = vec![first];
            a.extend((0..free).map(|b| ((i >> b) & 1) as usize));
            if t.leaf_value(&TreePath::from_actions(&a)).unwrap() == 1.0 {
                plus += 1;
            }
        }
        (plus, 1 << free)
    }

    #[test]
    fn kind_a_half_fraction_is_exact() {
        let t = build_scenario_tree(ScenarioTreeSpec::a(7, 0.5, 9)).unwrap();
        assert_eq!(t.depth(), 8);
        assert_eq!(census(&t, 1), (64, 128));
        assert_eq!(census(&t, 0), (128, 128));
        assert!(t.warnings().is_empty());
    }

    #[test]
    fn kind_a_degenerate_fractions() {
        let zero = build_scenario_tree(ScenarioTreeSpec::a(6, 0.0, 1)).unwrap();
        let mut rng = RngStream::new(4);
        let right = TreePath::ROOT.child(1);
        assert!((0..500).all(|_| random_playout(&zero, &right, &mut rng) == -1.0));
        let one = build_scenario_tree(ScenarioTreeSpec::a(6, 1.0, 1)).unwrap();
        assert_eq!(census(&one, 1), (64, 64));
    }

    #[test]
    fn rounding_is_recorded() {
        let t = build_scenario_tree(ScenarioTreeSpec::a(3, 0.3, 1)).unwrap();
        assert_eq!(census(&t, 1), (2, 8));
        assert_eq!(t.warnings().len(), 1);
    }

    #[test]
    fn playouts_from_right_child_average_two_p_minus_one() {
        let p = 0.25;
        let t = build_scenario_tree(ScenarioTreeSpec::a(8, p, 17)).unwrap();
        let mut rng = RngStream::new(8);
        let right = TreePath::ROOT.child(1);
        let left = TreePath::ROOT.child(0);
        let n = 10_000;
        let mean = (0..n).map(|_| random_playout(&t, &right, &mut rng)).sum::<f64>() / n as f64;
        assert!((mean - (2.0 * p - 1.0)).abs() < 0.05, "mean {mean}");
        assert!((0..100).all(|_| random_playout(&t, &left, &mut rng) == 1.0));
    }

    #[test]
    fn kind_b_layout() {
        let t = build_scenario_tree(ScenarioTreeSpec::b(4, 0.5, 0.25, 3)).unwrap();
        assert_eq!(t.depth(), 7);
        assert_eq!(exact_value(&t, &t.root()), 1.0);
        assert_eq!(census(&t, 1), (16, 64));
        assert!((t.left_fraction() - 0.75).abs() < 1e-12);
        // Both level-2 nodes win by moving left.
        for b in 0..2 {
            let s = TreePath::from_actions(&[0, b, 0]);
            assert_eq!(exact_value(&t, &s), 1.0);
        }
    }

    #[test]
    fn rejects_bad_fractions() {
        assert!(build_scenario_tree(ScenarioTreeSpec::a(4, 1.5, 0)).is_err());
        assert!(build_scenario_tree(ScenarioTreeSpec::b(4, 0.5, -0.1, 0)).is_err());
        assert!(build_scenario_tree(ScenarioTreeSpec::a(0, 0.5, 0)).is_err());
    }
}
