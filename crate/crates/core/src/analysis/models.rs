//! Closed-form runtime models.
//!
//! Two-step model: `a*C^(d1/2) + b*2^(d1/2)*C^((d2-d1)/2)`. The k-step model
//! applies the same split recursively over the gaps between consecutive
//! critical depths. The scenario formulas predict root visits of
//! epsilon-greedy UCT on the one- and two-step scenario trees.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub a: f64,
    pub b: f64,
    #[serde(rename = "C")]
    pub c: f64,
}

impl ModelParams {
    fn validate(&self) -> Result<()> {
        if !(self.a > 0.0 && self.b > 0.0 && self.c > 0.0) {
            return Err(invalid("params", "a, b and C must be positive"));
        }
        Ok(())
    }
}

fn half(d: u32) -> f64 {
    d as f64 / 2.0
}

pub fn model_two_step(d1: u32, d2: u32, params: ModelParams) -> Result<f64> {
    params.validate()?;
    if d1 >= d2 || d1 % 2 != 0 || d2 % 2 != 0 {
        return Err(invalid("depths", format!("need even 0 <= d1 < d2, got ({d1}, {d2})")));
    }
    let ModelParams { a, b, c } = params;
    Ok(a * c.powf(half(d1)) + b * 2f64.powf(half(d1)) * c.powf(half(d2 - d1)))
}

/// Recursive k-step model over depth gaps `d_1, d_2 - d_1, ...`.
pub fn model_k_step(gaps: &[u32], params: ModelParams) -> Result<f64> {
    params.validate()?;
    if gaps.is_empty() {
        return Err(invalid("gaps", "at least one critical level is required"));
    }
    if let Some(g) = gaps.iter().find(|&&g| g % 2 != 0) {
        return Err(invalid("gaps", format!("gap {g} is odd")));
    }
    let ModelParams { a, b, c } = params;
    let (&last, rest) = gaps.split_last().expect("non-empty");
    Ok(rest.iter().rev().fold(a * c.powf(half(last)), |inner, &g| {
        a * c.powf(half(g)) + b * 2f64.powf(half(g)) * inner
    }))
}

/// Arguments of the catch-up count: current node value, visits so far, target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CatchUpState {
    pub value: f64,
    pub iter: u64,
    pub tau: f64,
}

/// Visits of all-+1 rewards needed to lift an averaged value from `value`
/// (after `iter` visits) to `tau`: `iter * (tau - value) / (1 - tau)`, or 0
/// when already there.
pub fn catch_up_visits(s: CatchUpState) -> Result<f64> {
    if !(s.tau < 1.0) {
        return Err(invalid("tau", format!("must be below 1, got {}", s.tau)));
    }
    if s.iter == 0 {
        return Err(invalid("iter", "must be at least 1"));
    }
    if s.value >= s.tau {
        return Ok(0.0);
    }
    Ok(s.iter as f64 * (s.tau - s.value) / (1.0 - s.tau))
}

/// Smallest whole number of visits reaching `tau`: the ceiling of [`catch_up_visits`].
pub fn catch_up_visits_ceil(s: CatchUpState) -> Result<u64> {
    let x = catch_up_visits(s)?;
    // Snap values that are integers up to rounding noise before taking the ceiling.
    let r = x.round();
    Ok(if (x - r).abs() <= 1e-9 * x.max(1.0) { r } else { x.ceil() } as u64)
}

/// Expected root visits to convergence in the one-step scenario:
/// `2/(1-p) + (1 + tau - 2p) / ((1-eps)(1-p)(1-tau))`.
pub fn scenario_a_visits(p: f64, epsilon: f64, tau: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&p) {
        return Err(invalid("p", "must lie in [0, 1)"));
    }
    if !(0.0..1.0).contains(&epsilon) {
        return Err(invalid("epsilon", "must lie in [0, 1)"));
    }
    if !(tau < 1.0) {
        return Err(invalid("tau", "must be below 1"));
    }
    Ok(2.0 / (1.0 - p) + (1.0 + tau - 2.0 * p) / ((1.0 - epsilon) * (1.0 - p) * (1.0 - tau)))
}

/// Root iterations after the root tie breaks in the two-step scenario, for a
/// favorable (left) or unfavorable (right) break.
pub fn scenario_b_branch_visits(favorable: bool, p: f64, epsilon: f64, catch_up: f64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(invalid("epsilon", "must lie in (0, 1)"));
    }
    if !(0.0..1.0).contains(&p) {
        return Err(invalid("p", "must lie in [0, 1)"));
    }
    let inner = 2.0 / (1.0 - p) + catch_up / (1.0 - epsilon);
    let share = if favorable { 1.0 - epsilon } else { epsilon };
    Ok(2.0 / share * inner)
}

/// Expected root visits in the two-step scenario, including the root tie.
/// `p_prime` is the +1 fraction on the left; `None` uses `3p/4`.
pub fn scenario_b_total(p: f64, q: f64, epsilon: f64, catch_up: f64, p_prime: Option<f64>) -> Result<f64> {
    let pp = p_prime.unwrap_or(0.75 * p);
    for (name, v) in [("q", q), ("p_prime", pp)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(invalid(name, "must lie in [0, 1]"));
        }
    }
    let break_prob = pp + q - 2.0 * pp * q;
    if break_prob <= 0.0 {
        return Err(Error::DegenerateTie);
    }
    let fav = scenario_b_branch_visits(true, p, epsilon, catch_up)?;
    let unfav = scenario_b_branch_visits(false, p, epsilon, catch_up)?;
    Ok((2.0 + pp * (1.0 - q) * fav + (1.0 - pp) * q * unfav) / break_prob)
}
