//! Repeated-run experiments on synthetic trees and the built-in game.
//!
//! Every run draws from a stream derived from a master seed and its cell
//! coordinates, so a cell's numbers never depend on which other cells ran.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::scenario_a_visits;
use crate::error::{invalid, Result};
use crate::game::{Game, Player};
use crate::ranking::{rank_correlation, rank_moves, MoveEvaluator, MoveRanking};
use crate::rng::{derive_seed, hash_label, RngStream};
use crate::synthetic::{build_dual_tree, build_kstep_tree, build_scenario_tree, DualTreeSpec, KStepTreeSpec, ScenarioTreeSpec};
use crate::uct::{Selector, UctConfig, UctTree};

/// When a convergence run stops.
///
/// A run ends once v has stayed at or above tau for
/// `max(min_hold, hold_factor * t_c)` iterations, where `t_c` is where the
/// current streak began, or at `max_iterations`. t* is then read off the
/// finished trace, so it is the suffix point of that trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StopRule {
    pub max_iterations: u64,
    pub min_hold: u64,
    pub hold_factor: f64,
}

impl Default for StopRule {
    fn default() -> Self {
        StopRule { max_iterations: 2_000_000, min_hold: 1_000, hold_factor: 1.0 }
    }
}

impl StopRule {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(invalid("max_iterations", "must be positive"));
        }
        if !(self.hold_factor >= 0.0) {
            return Err(invalid("hold_factor", "must be non-negative"));
        }
        Ok(())
    }

    fn held_long_enough(&self, t: u64, streak_start: u64) -> bool {
        let need = (self.hold_factor * streak_start as f64).ceil() as u64;
        t - streak_start + 1 >= need.max(self.min_hold).max(1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRun {
    /// Suffix convergence point of the finished trace.
    pub t_star: Option<u64>,
    /// First iteration at which v reached tau.
    pub first_passage: Option<u64>,
    /// First iteration, at or after the root preference resolved, at which v reached tau.
    pub resolved_passage: Option<u64>,
    pub iterations: u64,
    pub final_value: f64,
    /// Root action the search first preferred once both root actions had
    /// samples and their estimates differed.
    pub first_preference: Option<usize>,
    /// Share of iterations 1..=t* (all iterations if unconverged) that took root action 1.
    pub right_fraction: f64,
}

/// Runs UCT on `game` from its root until `stop` fires.
pub fn convergence_run<G: Game>(game: &G, cfg: &UctConfig, tau: f64, stop: &StopRule, rng: &mut RngStream) -> Result<ConvergenceRun> {
    let mut tree = UctTree::new(game, game.root());
    let root_player = game.to_move(&game.root());
    let mut streak: Option<u64> = None;
    let mut first_passage = None;
    let mut resolved_passage = None;
    let mut first_preference = None;
    let (mut right, mut right_at_streak) = (0u64, 0u64);
    let mut v = 0.0;
    let mut t = 0;
    while t < stop.max_iterations {
        t += 1;
        tree.run_iteration(cfg, rng)?;
        let edge = tree.last_root_edge().unwrap_or(0);
        if edge == 1 {
            right += 1;
        }
        v = tree.root_value()?;
        if first_preference.is_none() {
            first_preference = resolved_preference(tree.root_stats(), root_player);
        }
        if v >= tau {
            first_passage.get_or_insert(t);
            if first_preference.is_some() {
                resolved_passage.get_or_insert(t);
            }
            if streak.is_none() {
                streak = Some(t);
                right_at_streak = right;
            }
            if stop.held_long_enough(t, streak.unwrap()) {
                break;
            }
        } else {
            streak = None;
        }
    }
    let (span, r) = match streak {
        Some(s) => (s, right_at_streak),
        None => (t, right),
    };
    Ok(ConvergenceRun {
        t_star: streak,
        first_passage,
        resolved_passage,
        iterations: t,
        final_value: v,
        first_preference,
        right_fraction: r as f64 / span as f64,
    })
}

fn resolved_preference(stats: &crate::uct::NodeStats, player: Player) -> Option<usize> {
    let a = &stats.actions;
    if a.len() < 2 || a.iter().any(|x| x.n == 0) {
        return None;
    }
    let sign = player.sign();
    let best = a.iter().map(|x| sign * x.q).fold(f64::NEG_INFINITY, f64::max);
    let top: Vec<usize> = (0..a.len()).filter(|&i| sign * a[i].q == best).collect();
    (top.len() == 1).then(|| top[0])
}

/// Mean, sample standard deviation and count of the converged values; the
/// number of unconverged runs is kept apart and never folded into the mean.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub runs: usize,
    pub converged: usize,
    pub mean: Option<f64>,
    pub std: Option<f64>,
}

impl Summary {
    pub fn of<I: IntoIterator<Item = Option<u64>>>(values: I) -> Self {
        let mut xs = Vec::new();
        let mut runs = 0;
        for v in values {
            runs += 1;
            if let Some(x) = v {
                xs.push(x as f64);
            }
        }
        let n = xs.len();
        let mean = (n > 0).then(|| xs.iter().sum::<f64>() / n as f64);
        let std = mean.filter(|_| n > 1).map(|m| (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1) as f64).sqrt());
        Summary { runs, converged: n, mean, std }
    }

    pub fn non_converged(&self) -> usize {
        self.runs - self.converged
    }
}

fn check(cfg: &UctConfig, tau: f64, stop: &StopRule) -> Result<()> {
    cfg.validate()?;
    stop.validate()?;
    if !(tau > -1.0 && tau < 1.0) {
        return Err(invalid("tau", "must lie in (-1, 1)"));
    }
    Ok(())
}

fn repeat<T: Send>(reps: u64, f: impl Fn(u64) -> Result<T> + Sync + Send) -> Result<Vec<T>> {
    (0..reps).into_par_iter().map(f).collect()
}

/// Tag separating the seed spaces of the experiment families.
mod family {
    pub const KSTEP: u64 = 1;
    pub const DUAL: u64 = 2;
    pub const SCENARIO_A: u64 = 3;
    pub const RANKING: u64 = 4;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KStepCell {
    pub d1: u32,
    pub d2: u32,
    pub summary: Summary,
}

/// `reps` runs on two-step trees with critical depths `d1 < d2`. Each run
/// gets its own tree instance.
pub fn kstep_cell(depth: u32, d1: u32, d2: u32, reps: u64, cfg: &UctConfig, tau: f64, stop: &StopRule, master: u64) -> Result<KStepCell> {
    check(cfg, tau, stop)?;
    KStepTreeSpec::new(depth, vec![d1, d2], 0).validate()?;
    let runs = repeat(reps, |rep| {
        let coords = [family::KSTEP, depth as u64, d1 as u64, d2 as u64, rep];
        let tree = build_kstep_tree(KStepTreeSpec::new(depth, vec![d1, d2], derive_seed(master, &coords)))?;
        let mut rng = RngStream::new(master).derive(&[&coords[..], &[1]].concat());
        convergence_run(&tree, cfg, tau, stop, &mut rng)
    })?;
    Ok(KStepCell { d1, d2, summary: Summary::of(runs.iter().map(|r| r.t_star)) })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualCell {
    pub max_critical: u32,
    pub min_criticals: (u32, u32),
    /// Runs whose first resolved root preference was the left (winning) move.
    pub favorable: Summary,
    pub unfavorable: Summary,
    /// Runs that never resolved a root preference.
    pub unresolved: usize,
    pub all: Summary,
    /// Mean share of iterations entering the right subtree B, over all runs.
    pub mean_fraction_b: f64,
    pub fraction_b_favorable: Option<f64>,
    pub fraction_b_unfavorable: Option<f64>,
}

impl DualCell {
    /// Unfavorable over favorable mean convergence time.
    pub fn gap_ratio(&self) -> Option<f64> {
        Some(self.unfavorable.mean? / self.favorable.mean?)
    }
}

/// `reps` runs on dual-strategy trees. With `fixed_tree` every run searches
/// the same instance; otherwise each run gets its own.
#[allow(clippy::too_many_arguments)]
pub fn dual_cell(
    depth: u32,
    max_critical: u32,
    min_criticals: (u32, u32),
    reps: u64,
    fixed_tree: bool,
    cfg: &UctConfig,
    tau: f64,
    stop: &StopRule,
    master: u64,
) -> Result<DualCell> {
    check(cfg, tau, stop)?;
    let coords = [family::DUAL, depth as u64, max_critical as u64, min_criticals.0 as u64, min_criticals.1 as u64];
    let tree_for = |rep: Option<u64>| {
        let seed = match rep {
            None => derive_seed(master, &coords),
            Some(r) => derive_seed(master, &[&coords[..], &[r]].concat()),
        };
        build_dual_tree(DualTreeSpec { depth, ..DualTreeSpec::new(max_critical, min_criticals, seed) })
    };
    let shared = tree_for(None)?;
    let base = RngStream::new(master).derive(&coords);
    let runs = repeat(reps, |rep| {
        let mut rng = base.derive(&[rep]);
        if fixed_tree {
            convergence_run(&shared, cfg, tau, stop, &mut rng)
        } else {
            convergence_run(&tree_for(Some(rep))?, cfg, tau, stop, &mut rng)
        }
    })?;
    let fraction = |want: Option<usize>| {
        let xs: Vec<f64> = runs.iter().filter(|r| want.is_none() || r.first_preference == want).map(|r| r.right_fraction).collect();
        (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
    };
    let pick = |want: usize| Summary::of(runs.iter().filter(|r| r.first_preference == Some(want)).map(|r| r.t_star));
    Ok(DualCell {
        max_critical,
        min_criticals,
        favorable: pick(0),
        unfavorable: pick(1),
        unresolved: runs.iter().filter(|r| r.first_preference.is_none()).count(),
        all: Summary::of(runs.iter().map(|r| r.t_star)),
        mean_fraction_b: fraction(None).unwrap_or(0.0),
        fraction_b_favorable: fraction(Some(0)),
        fraction_b_unfavorable: fraction(Some(1)),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioACell {
    pub p: f64,
    pub epsilon: f64,
    pub predicted: f64,
    /// Root visits to the suffix convergence point.
    pub simulated: Summary,
    /// Root visits until v first reaches tau once the root tie has broken.
    pub resolved_passage: Summary,
}

/// Epsilon-greedy UCT on the one-critical-node scenario tree. One tree per
/// run, since its +1 leaves are placed by the seed.
pub fn scenario_a_cell(
    subtree_depth: u32,
    p: f64,
    epsilon: f64,
    reps: u64,
    tau: f64,
    stop: &StopRule,
    master: u64,
) -> Result<ScenarioACell> {
    let predicted = scenario_a_visits(p, epsilon, tau)?;
    let cfg = UctConfig { selector: Selector::EpsilonGreedy { epsilon, decay: None }, ..UctConfig::default() };
    check(&cfg, tau, stop)?;
    let runs = repeat(reps, |rep| {
        let coords = [family::SCENARIO_A, subtree_depth as u64, p.to_bits(), epsilon.to_bits(), rep];
        let tree = build_scenario_tree(ScenarioTreeSpec::a(subtree_depth, p, derive_seed(master, &coords)))?;
        let mut rng = RngStream::new(master).derive(&[&coords[..], &[1]].concat());
        convergence_run(&tree, &cfg, tau, stop, &mut rng)
    })?;
    Ok(ScenarioACell {
        p,
        epsilon,
        predicted,
        simulated: Summary::of(runs.iter().map(|r| r.t_star)),
        resolved_passage: Summary::of(runs.iter().map(|r| r.resolved_passage)),
    })
}

/// Positions reached by uniformly random self-play from the root, after a
/// uniformly drawn number of plies in `plies`. Terminal and repeated
/// positions are skipped, as are positions rejected by `keep`.
pub fn sample_positions<G: Game>(
    game: &G,
    count: usize,
    plies: std::ops::RangeInclusive<u32>,
    max_attempts: usize,
    rng: &mut RngStream,
    mut keep: impl FnMut(&G::State) -> Result<bool>,
) -> Result<Vec<G::State>> {
    let (lo, hi) = (*plies.start(), *plies.end());
    if lo > hi {
        return Err(invalid("plies", "empty range"));
    }
    let mut out: Vec<G::State> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for _ in 0..max_attempts {
        if out.len() == count {
            break;
        }
        let target = lo + rng.index((hi - lo + 1) as usize) as u32;
        let mut s = game.root();
        for _ in 0..target {
            if game.is_terminal(&s) {
                break;
            }
            let acts = game.legal_actions(&s);
            s = game.apply(&s, acts[rng.index(acts.len())])?;
        }
        if game.is_terminal(&s) || !seen.insert(s.clone()) {
            continue;
        }
        if keep(&s)? {
            out.push(s);
        }
    }
    Ok(out)
}

/// Correlations of one candidate evaluator against the reference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateSummary {
    pub name: String,
    /// Per-position correlation; `None` when the candidate ranking is a total tie.
    pub correlations: Vec<Option<f64>>,
}

impl CandidateSummary {
    pub fn defined(&self) -> impl Iterator<Item = f64> + '_ {
        self.correlations.iter().flatten().copied()
    }

    pub fn undefined(&self) -> usize {
        self.correlations.iter().filter(|c| c.is_none()).count()
    }

    /// Mean over positions where the correlation is defined.
    pub fn mean(&self) -> Option<f64> {
        let n = self.defined().count();
        (n > 0).then(|| self.defined().sum::<f64>() / n as f64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankStudy<S> {
    pub positions: Vec<S>,
    pub reference: Vec<MoveRanking>,
    /// `candidates[c].1[p]` is candidate c's ranking at position p.
    pub candidates: Vec<(String, Vec<MoveRanking>)>,
    pub summaries: Vec<CandidateSummary>,
}

/// Compares candidate move rankings with a reference ranking over
/// self-play positions. Positions where the reference ranks every move
/// equal are skipped, since no correlation is defined there.
#[allow(clippy::too_many_arguments)]
pub fn rank_study<G: Game>(
    game: &G,
    count: usize,
    plies: std::ops::RangeInclusive<u32>,
    reference: &MoveEvaluator,
    candidates: &[(String, MoveEvaluator)],
    epsilon_tie: f64,
    master: u64,
) -> Result<RankStudy<G::State>> {
    let mut sampler = RngStream::new(master).derive(&[family::RANKING, 0]);
    let mut ref_rng = RngStream::new(master).derive(&[family::RANKING, 1]);
    let mut reference_rankings = Vec::new();
    let positions = sample_positions(game, count, plies, count * 1000 + 1000, &mut sampler, |s| {
        let r = rank_moves(game, s, reference, epsilon_tie, &mut ref_rng)?;
        let keep = r.ranks.iter().any(|&x| x != 1);
        if keep {
            reference_rankings.push(r);
        }
        Ok(keep)
    })?;
    let mut out = Vec::new();
    let mut summaries = Vec::new();
    for (name, eval) in candidates {
        let tag = hash_label(name);
        let rankings = positions
            .par_iter()
            .enumerate()
            .map(|(p, s)| {
                let mut rng = RngStream::new(master).derive(&[family::RANKING, 2, tag, p as u64]);
                rank_moves(game, s, eval, epsilon_tie, &mut rng)
            })
            .collect::<Result<Vec<_>>>()?;
        let correlations =
            reference_rankings.iter().zip(&rankings).map(|(a, b)| rank_correlation(a, b)).collect::<Result<Vec<_>>>()?;
        summaries.push(CandidateSummary { name: name.clone(), correlations });
        out.push((name.clone(), rankings));
    }
    Ok(RankStudy { positions, reference: reference_rankings, candidates: out, summaries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{tau_convergence_point, ConvergenceTrace};

    #[test]
    fn run_statistics_match_the_trace() {
        let tree = build_kstep_tree(KStepTreeSpec::new(12, vec![2, 6], 4)).unwrap();
        let cfg = UctConfig::default();
        let stop = StopRule { max_iterations: 20_000, min_hold: 200, hold_factor: 1.0 };
        let run = convergence_run(&tree, &cfg, 0.7, &stop, &mut RngStream::new(9)).unwrap();

        let mut t = UctTree::new(&tree, tree.root());
        let mut rng = RngStream::new(9);
        let mut trace = ConvergenceTrace::new(9);
        let mut right = Vec::new();
        for _ in 0..run.iterations {
            t.run_iteration(&cfg, &mut rng).unwrap();
            trace.push(t.root_value().unwrap());
            right.push(t.last_root_edge() == Some(1));
        }
        let t_star = tau_convergence_point(&trace, 0.7).unwrap();
        assert_eq!(run.t_star, t_star);
        assert!(run.t_star.is_some());
        let span = t_star.unwrap() as usize;
        let frac = right[..span].iter().filter(|&&r| r).count() as f64 / span as f64;
        assert_eq!(run.right_fraction, frac);
        assert_eq!(run.first_passage, trace.values.iter().position(|&v| v >= 0.7).map(|i| i as u64 + 1));
    }

    #[test]
    fn unconverged_runs_are_reported() {
        // tau above any reachable utility.
        let tree = build_kstep_tree(KStepTreeSpec::new(8, vec![2], 1)).unwrap();
        let stop = StopRule { max_iterations: 500, ..StopRule::default() };
        let run = convergence_run(&tree, &UctConfig::default(), 1.5, &stop, &mut RngStream::new(0)).unwrap();
        assert_eq!((run.t_star, run.iterations), (None, 500));
    }

    #[test]
    fn summary_excludes_unconverged() {
        let s = Summary::of([Some(2), None, Some(4)]);
        assert_eq!((s.runs, s.converged, s.non_converged()), (3, 2, 1));
        assert_eq!(s.mean, Some(3.0));
        assert!((s.std.unwrap() - 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(Summary::of([None]).mean, None);
    }

    #[test]
    fn cells_are_independent_of_each_other() {
        let stop = StopRule { max_iterations: 50_000, min_hold: 100, hold_factor: 1.0 };
        let cfg = UctConfig::default();
        let a = kstep_cell(12, 2, 6, 3, &cfg, 0.7, &stop, 5).unwrap();
        let _ = kstep_cell(12, 4, 8, 3, &cfg, 0.7, &stop, 5).unwrap();
        let b = kstep_cell(12, 2, 6, 3, &cfg, 0.7, &stop, 5).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn dual_cell_classifies_every_run() {
        let stop = StopRule { max_iterations: 100_000, min_hold: 200, hold_factor: 1.0 };
        let c = dual_cell(12, 2, (3, 7), 6, false, &UctConfig::default(), 0.7, &stop, 1).unwrap();
        assert_eq!(c.favorable.runs + c.unfavorable.runs + c.unresolved, 6);
        assert!((0.0..=1.0).contains(&c.mean_fraction_b));
    }

    #[test]
    fn scenario_a_runs() {
        let stop = StopRule { max_iterations: 20_000, min_hold: 200, hold_factor: 1.0 };
        let c = scenario_a_cell(6, 0.5, 0.05, 20, 0.7, &stop, 3).unwrap();
        assert_eq!(c.simulated.runs, 20);
        assert_eq!(c.resolved_passage.converged, 20);
    }

    #[test]
    fn rank_study_against_itself() {
        use crate::minimax::LeafEvaluator;
        let g = crate::game::ConnectGame::default();
        let mm = MoveEvaluator::MinimaxValue { k: 2, leaf: LeafEvaluator::Heuristic { h_max: 2.0 }, pruned: false };
        let study = rank_study(&g, 5, 2..=6, &mm, &[("same".into(), mm)], 0.01, 4).unwrap();
        assert_eq!(study.positions.len(), 5);
        assert_eq!(study.summaries[0].mean(), Some(1.0));
    }

    #[test]
    fn sampled_positions_are_distinct_and_live() {
        let g = crate::game::ConnectGame::default();
        let ps = sample_positions(&g, 20, 2..=8, 10_000, &mut RngStream::new(1), |_| Ok(true)).unwrap();
        assert_eq!(ps.len(), 20);
        let set: std::collections::HashSet<_> = ps.iter().collect();
        assert_eq!(set.len(), 20);
        assert!(ps.iter().all(|s| !g.is_terminal(s)));
    }
}
