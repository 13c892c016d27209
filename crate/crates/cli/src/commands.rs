use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use sampling_search::analysis::{fit_runtime_model, model_two_step, scenario_b_total};
use sampling_search::experiments::{dual_cell, kstep_cell, rank_study, sample_positions, scenario_a_cell, Summary};
use sampling_search::game::{builtin_heuristic, Game};
use sampling_search::rng::{derive_seed, hash_label, RngStream};
use sampling_search::tournament::{run_match, MatchRow};
use sampling_search::traps::soft_traps;

use crate::config::*;
use crate::CliError;

/// A finished output file, held in memory until every command step has succeeded.
pub struct Output {
    pub name: &'static str,
    pub bytes: Vec<u8>,
}

fn csv_bytes<T: Serialize>(rows: &[T]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| CliError::Runtime(e.to_string()))?;
    }
    w.into_inner().map_err(|e| CliError::Runtime(e.to_string()))
}

fn jsonl_bytes<T: Serialize>(rows: &[T]) -> Result<Vec<u8>, CliError> {
    let mut out = Vec::new();
    for r in rows {
        serde_json::to_writer(&mut out, r).map_err(|e| CliError::Runtime(e.to_string()))?;
        out.push(b'\n');
    }
    Ok(out)
}

#[derive(Serialize)]
struct KStepRow {
    d1: u32,
    d2: u32,
    mean_t_star: Option<f64>,
    stddev: Option<f64>,
    non_converged: usize,
    runs: usize,
}

#[derive(Serialize)]
struct DualRow {
    max_critical: u32,
    min_critical_1: u32,
    min_critical_2: u32,
    mean_t_star: Option<f64>,
    stddev: Option<f64>,
    non_converged: usize,
    favorable_runs: usize,
    favorable_mean: Option<f64>,
    unfavorable_runs: usize,
    unfavorable_mean: Option<f64>,
    unresolved: usize,
    gap_ratio: Option<f64>,
    fraction_b: f64,
}

pub fn converge_sweep(cfg: &ConvergeSweep) -> Result<Vec<Output>, CliError> {
    match &cfg.trees {
        SweepTrees::Kstep { depth, d1, d2 } => {
            let cells: Vec<(u32, u32)> =
                d1.iter().flat_map(|&a| d2.iter().map(move |&b| (a, b))).filter(|(a, b)| a < b).collect();
            if cells.is_empty() {
                return Err(CliError::Config("field `trees`: no cell has d1 < d2".into()));
            }
            let rows = cells
                .par_iter()
                .map(|&(a, b)| {
                    let c = kstep_cell(*depth, a, b, cfg.reps, &cfg.uct, cfg.tau, &cfg.stop, cfg.seed)?;
                    let Summary { runs, mean, std, .. } = c.summary;
                    Ok(KStepRow { d1: a, d2: b, mean_t_star: mean, stddev: std, non_converged: c.summary.non_converged(), runs })
                })
                .collect::<Result<Vec<_>, sampling_search::Error>>()?;
            Ok(vec![Output { name: "converge_sweep.csv", bytes: csv_bytes(&rows)? }])
        }
        SweepTrees::Dual { depth, max_critical, min_criticals, fixed_tree } => {
            let cells: Vec<(u32, (u32, u32))> =
                max_critical.iter().flat_map(|&x| min_criticals.iter().map(move |&y| (x, y))).collect();
            let rows = cells
                .par_iter()
                .map(|&(x, y)| {
                    let c = dual_cell(*depth, x, y, cfg.reps, *fixed_tree, &cfg.uct, cfg.tau, &cfg.stop, cfg.seed)?;
                    Ok(DualRow {
                        max_critical: x,
                        min_critical_1: y.0,
                        min_critical_2: y.1,
                        mean_t_star: c.all.mean,
                        stddev: c.all.std,
                        non_converged: c.all.non_converged(),
                        favorable_runs: c.favorable.runs,
                        favorable_mean: c.favorable.mean,
                        unfavorable_runs: c.unfavorable.runs,
                        unfavorable_mean: c.unfavorable.mean,
                        unresolved: c.unresolved,
                        gap_ratio: c.gap_ratio(),
                        fraction_b: c.mean_fraction_b,
                    })
                })
                .collect::<Result<Vec<_>, sampling_search::Error>>()?;
            Ok(vec![Output { name: "dual_sweep.csv", bytes: csv_bytes(&rows)? }])
        }
    }
}

#[derive(Serialize)]
struct ScenarioRow {
    p: f64,
    epsilon: f64,
    predicted: f64,
    mean_visits: Option<f64>,
    stddev: Option<f64>,
    non_converged: usize,
    mean_resolved_passage: Option<f64>,
    runs: usize,
}

#[derive(Serialize)]
struct CurveRow {
    epsilon: f64,
    expected_visits: f64,
}

pub fn scenario_compare(cfg: &ScenarioCompare) -> Result<Vec<Output>, CliError> {
    let mut out = Vec::new();
    let cells: Vec<(f64, f64)> = cfg.p.iter().flat_map(|&p| cfg.epsilon.iter().map(move |&e| (p, e))).collect();
    if !cells.is_empty() {
        if cfg.reps == 0 {
            return Err(CliError::Config("field `reps`: must be positive when `p` and `epsilon` are given".into()));
        }
        let rows = cells
            .par_iter()
            .map(|&(p, e)| {
                let c = scenario_a_cell(cfg.subtree_depth, p, e, cfg.reps, cfg.tau, &cfg.stop, cfg.seed)?;
                Ok(ScenarioRow {
                    p,
                    epsilon: e,
                    predicted: c.predicted,
                    mean_visits: c.simulated.mean,
                    stddev: c.simulated.std,
                    non_converged: c.simulated.non_converged(),
                    mean_resolved_passage: c.resolved_passage.mean,
                    runs: c.simulated.runs,
                })
            })
            .collect::<Result<Vec<_>, sampling_search::Error>>()?;
        out.push(Output { name: "scenario_a.csv", bytes: csv_bytes(&rows)? });
    }
    if let Some(c) = &cfg.curve {
        if c.points < 2 || !(c.epsilon_min < c.epsilon_max) {
            return Err(CliError::Config("field `curve`: need points >= 2 and epsilon_min < epsilon_max".into()));
        }
        let rows = (0..c.points)
            .map(|i| {
                let e = c.epsilon_min + (c.epsilon_max - c.epsilon_min) * i as f64 / (c.points - 1) as f64;
                Ok(CurveRow { epsilon: e, expected_visits: scenario_b_total(c.p, c.q, e, c.catch_up, c.p_prime)? })
            })
            .collect::<Result<Vec<_>, sampling_search::Error>>()?;
        out.push(Output { name: "scenario_b_curve.csv", bytes: csv_bytes(&rows)? });
    }
    if out.is_empty() {
        return Err(CliError::Config("nothing to do: give `p` and `epsilon`, or `curve`".into()));
    }
    Ok(out)
}

#[derive(serde::Deserialize)]
struct SweepRecord {
    d1: u32,
    d2: u32,
    mean_t_star: Option<f64>,
}

#[derive(Serialize)]
struct FitOutput {
    a: f64,
    b: f64,
    #[serde(rename = "C")]
    c: f64,
    rss: f64,
    observations: Vec<FitPoint>,
}

#[derive(Serialize)]
struct FitPoint {
    d1: u32,
    d2: u32,
    observed: f64,
    predicted: f64,
    log_residual: f64,
}

pub fn model_fit(cfg: &ModelFit, config_dir: &Path) -> Result<Vec<Output>, CliError> {
    let mut obs = cfg.observations.clone();
    if let Some(p) = &cfg.csv {
        let path = config_dir.join(p);
        let mut r = csv::Reader::from_path(&path).map_err(|e| CliError::Config(format!("field `csv`: {}: {e}", path.display())))?;
        for rec in r.deserialize::<SweepRecord>() {
            let rec = rec.map_err(|e| CliError::Config(format!("field `csv`: {e}")))?;
            if let Some(m) = rec.mean_t_star {
                obs.push((rec.d1, rec.d2, m));
            }
        }
    }
    let fit = fit_runtime_model(&obs)?;
    let observations = obs
        .iter()
        .zip(&fit.residuals)
        .map(|(&(d1, d2, y), &r)| {
            Ok(FitPoint { d1, d2, observed: y, predicted: model_two_step(d1, d2, fit.params)?, log_residual: r })
        })
        .collect::<Result<Vec<_>, sampling_search::Error>>()?;
    let out = FitOutput { a: fit.params.a, b: fit.params.b, c: fit.params.c, rss: fit.rss, observations };
    let mut bytes = serde_json::to_vec_pretty(&out).map_err(|e| CliError::Runtime(e.to_string()))?;
    bytes.push(b'\n');
    Ok(vec![Output { name: "model_fit.json", bytes }])
}

struct TournamentRow {
    row: MatchRow,
    mean_nodes_a: f64,
    mean_nodes_b: f64,
}

#[derive(Serialize)]
struct TranscriptLine<'a> {
    player_a: String,
    player_b: String,
    #[serde(flatten)]
    game: &'a sampling_search::tournament::GameRecord,
}

/// Seed of a match, keyed by its content so edits elsewhere in the list leave it alone.
fn match_seed(master: u64, m: &Matchup) -> u64 {
    let text = serde_json::to_string(m).expect("player specs serialize");
    derive_seed(master, &[hash_label(&text)])
}

pub fn tournament(cfg: &Tournament) -> Result<Vec<Output>, CliError> {
    let game = &cfg.game;
    let root = game.root();
    let results = cfg
        .matches
        .iter()
        .map(|m| run_match(&m.a, &m.b, game, &root, cfg.games_per_match, &RngStream::new(match_seed(cfg.seed, m))))
        .collect::<Result<Vec<_>, _>>()?;
    let rows: Vec<TournamentRow> = cfg
        .matches
        .iter()
        .zip(&results)
        .map(|(m, r)| {
            let (mean_nodes_a, mean_nodes_b) = r.mean_nodes();
            TournamentRow { row: MatchRow::new(&m.a, &m.b, r), mean_nodes_a, mean_nodes_b }
        })
        .collect();
    // csv cannot serialize flattened structs, so the header is written by hand.
    let mut w = csv::Writer::from_writer(Vec::new());
    let fail = |e: csv::Error| CliError::Runtime(e.to_string());
    w.write_record([
        "player_a", "player_b", "budget_a", "budget_b", "m", "success_a", "success_b", "wins", "draws", "losses",
        "mean_nodes_a", "mean_nodes_b",
    ])
    .map_err(fail)?;
    for t in &rows {
        let r = &t.row;
        w.serialize((
            &r.player_a, &r.player_b, &r.budget_a, &r.budget_b, r.m, r.success_a, r.success_b, r.wins, r.draws, r.losses,
            t.mean_nodes_a, t.mean_nodes_b,
        ))
        .map_err(fail)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Runtime(e.to_string()))?;
    let mut out = vec![Output { name: "tournament.csv", bytes }];
    if cfg.transcripts {
        let lines: Vec<TranscriptLine> = cfg
            .matches
            .iter()
            .zip(&results)
            .flat_map(|(m, r)| r.games.iter().map(|g| TranscriptLine { player_a: m.a.label(), player_b: m.b.label(), game: g }))
            .collect();
        out.push(Output { name: "transcripts.jsonl", bytes: jsonl_bytes(&lines)? });
    }
    Ok(out)
}

#[derive(Serialize)]
struct ScatterRow<'a> {
    position: usize,
    #[serde(rename = "move")]
    move_id: usize,
    candidate: &'a str,
    rank_reference: u32,
    rank_candidate: u32,
}

#[derive(Serialize)]
struct CorrRow<'a> {
    candidate: &'a str,
    mean_correlation: Option<f64>,
    positions: usize,
    undefined: usize,
}

pub fn rank_corr(cfg: &RankCorr) -> Result<Vec<Output>, CliError> {
    let candidates: Vec<_> = cfg.candidates.iter().map(|c| (c.name.clone(), c.evaluator)).collect();
    let mut names: Vec<&str> = candidates.iter().map(|c| c.0.as_str()).collect();
    names.sort_unstable();
    if names.windows(2).any(|w| w[0] == w[1]) {
        return Err(CliError::Config("field `candidates`: names must be distinct".into()));
    }
    let study = rank_study(
        &cfg.game,
        cfg.positions,
        cfg.plies.0..=cfg.plies.1,
        &cfg.reference,
        &candidates,
        cfg.epsilon_tie,
        cfg.seed,
    )?;
    let mut scatter = Vec::new();
    for (name, rankings) in &study.candidates {
        for (p, (rr, rc)) in study.reference.iter().zip(rankings).enumerate() {
            for &m in &rr.moves {
                scatter.push(ScatterRow {
                    position: p,
                    move_id: m.0,
                    candidate: name,
                    rank_reference: rr.rank_of(m).expect("same move set"),
                    rank_candidate: rc.rank_of(m).expect("same move set"),
                });
            }
        }
    }
    let corr: Vec<CorrRow> = study
        .summaries
        .iter()
        .map(|s| CorrRow { candidate: &s.name, mean_correlation: s.mean(), positions: s.correlations.len(), undefined: s.undefined() })
        .collect();
    Ok(vec![
        Output { name: "rank_scatter.csv", bytes: csv_bytes(&scatter)? },
        Output { name: "rank_corr.csv", bytes: csv_bytes(&corr)? },
    ])
}

#[derive(Serialize)]
struct TrapLine {
    position: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    line: Option<Vec<usize>>,
    ply: u32,
    board: String,
    trapping_move: usize,
    gain: f64,
    delta: f64,
    k: u32,
    witness: Vec<usize>,
}

pub fn trap_scan(cfg: &TrapScan) -> Result<Vec<Output>, CliError> {
    let game = &cfg.game;
    let mut positions: Vec<(Option<Vec<usize>>, _)> = Vec::new();
    for l in &cfg.lines {
        let s = game.position(l).map_err(|e| CliError::Config(format!("field `lines`: {e}")))?;
        positions.push((Some(l.clone()), s));
    }
    if cfg.positions > 0 {
        let (lo, hi) = cfg.plies.ok_or_else(|| CliError::Config("field `plies`: required when `positions` > 0".into()))?;
        let mut rng = RngStream::new(cfg.seed).derive(&[hash_label("trap-scan")]);
        let sampled = sample_positions(game, cfg.positions, lo..=hi, cfg.positions * 1000 + 1000, &mut rng, |_| Ok(true))?;
        positions.extend(sampled.into_iter().map(|s| (None, s)));
    }
    let h = |s: &_| builtin_heuristic(game, s);
    let found = positions
        .par_iter()
        .enumerate()
        .map(|(i, (line, s))| {
            if game.is_terminal(s) {
                return Ok(Vec::new());
            }
            Ok(soft_traps(game, s, &h, cfg.delta, cfg.k)?
                .into_iter()
                .map(|r| TrapLine {
                    position: i,
                    line: line.clone(),
                    ply: game.ply(s),
                    board: game.render(s),
                    trapping_move: r.trapping_move.0,
                    gain: r.gain,
                    delta: r.delta,
                    k: r.k,
                    witness: r.witness.iter().map(|a| a.0).collect(),
                })
                .collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>, sampling_search::Error>>()?;
    let lines: Vec<TrapLine> = found.into_iter().flatten().collect();
    Ok(vec![Output { name: "traps.jsonl", bytes: jsonl_bytes(&lines)? }])
}
