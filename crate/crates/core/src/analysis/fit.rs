//! Least-squares fit of the two-step runtime model in log space.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use super::models::ModelParams;
use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    #[serde(flatten)]
    pub params: ModelParams,
    /// `ln(model) - ln(observed)` per observation, in input order.
    pub residuals: Vec<f64>,
    pub rss: f64,
}

struct Obs {
    h1: f64,
    h2: f64,
    y: f64,
}

/// Residuals and Jacobian w.r.t. `(ln a, ln b, ln C)`.
fn evaluate(obs: &[Obs], theta: &Vector3<f64>) -> (Vec<f64>, Vec<[f64; 3]>) {
    let (a, b, c) = (theta[0].exp(), theta[1].exp(), theta[2].exp());
    let mut r = Vec::with_capacity(obs.len());
    let mut j = Vec::with_capacity(obs.len());
    for o in obs {
        let x = a * c.powf(o.h1);
        let z = b * 2f64.powf(o.h1) * c.powf(o.h2 - o.h1);
        let m = x + z;
        r.push(m.ln() - o.y.ln());
        j.push([x / m, z / m, (x * o.h1 + z * (o.h2 - o.h1)) / m]);
    }
    (r, j)
}

fn rss(r: &[f64]) -> f64 {
    r.iter().map(|x| x * x).sum()
}

/// Best `(a, b)` for a fixed `C` by linear least squares on relative error.
fn linear_start(obs: &[Obs], c: f64) -> Option<(f64, f64)> {
    let (mut sxx, mut sxz, mut szz, mut sx, mut sz) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for o in obs {
        let x = c.powf(o.h1) / o.y;
        let z = 2f64.powf(o.h1) * c.powf(o.h2 - o.h1) / o.y;
        sxx += x * x;
        sxz += x * z;
        szz += z * z;
        sx += x;
        sz += z;
    }
    let det = sxx * szz - sxz * sxz;
    if det.abs() < 1e-300 {
        return None;
    }
    let a = (sx * szz - sz * sxz) / det;
    let b = (sz * sxx - sx * sxz) / det;
    Some((a.max(1e-6), b.max(1e-6)))
}

/// Fits `a*C^(d1/2) + b*2^(d1/2)*C^((d2-d1)/2)` to `(d1, d2, mean iterations)`
/// observations by minimizing squared log residuals (Levenberg-Marquardt).
pub fn fit_runtime_model(observations: &[(u32, u32, f64)]) -> Result<FitReport> {
    let mut cells: Vec<(u32, u32)> = observations.iter().map(|o| (o.0, o.1)).collect();
    cells.sort_unstable();
    cells.dedup();
    if cells.len() < 4 {
        return Err(Error::Underdetermined(format!(
            "{} distinct (d1, d2) cells for 3 parameters; need at least 4",
            cells.len()
        )));
    }
    if let Some(o) = observations.iter().find(|o| !(o.2 > 0.0) || o.0 >= o.1) {
        return Err(invalid("observations", format!("bad observation {o:?}")));
    }
    let obs: Vec<Obs> = observations
        .iter()
        .map(|&(d1, d2, y)| Obs { h1: d1 as f64 / 2.0, h2: d2 as f64 / 2.0, y })
        .collect();

    let mut theta = Vector3::zeros();
    let mut best = f64::INFINITY;
    for i in 0..=200 {
        let c = 1.05 + i as f64 * 0.025;
        if let Some((a, b)) = linear_start(&obs, c) {
            let t = Vector3::new(a.ln(), b.ln(), c.ln());
            let e = rss(&evaluate(&obs, &t).0);
            if e < best {
                best = e;
                theta = t;
            }
        }
    }

    let mut lambda = 1e-3;
    let (mut r, mut jac) = evaluate(&obs, &theta);
    let mut cost = rss(&r);
    for _ in 0..500 {
        let mut jtj = Matrix3::zeros();
        let mut jtr = Vector3::zeros();
        for (ri, ji) in r.iter().zip(&jac) {
            let row = Vector3::from(*ji);
            jtj += row * row.transpose();
            jtr += row * *ri;
        }
        let mut improved = false;
        while lambda < 1e12 {
            let mut damped = jtj;
            for k in 0..3 {
                damped[(k, k)] += lambda * jtj[(k, k)].max(1e-12);
            }
            let Some(step) = damped.lu().solve(&(-jtr)) else {
                lambda *= 10.0;
                continue;
            };
            let cand = theta + step;
            let (cr, cj) = evaluate(&obs, &cand);
            let c_cost = rss(&cr);
            if c_cost.is_finite() && c_cost <= cost {
                let done = step.norm() < 1e-13 * (1.0 + theta.norm()) || cost - c_cost < 1e-30;
                theta = cand;
                r = cr;
                jac = cj;
                cost = c_cost;
                lambda = (lambda * 0.3).max(1e-15);
                improved = !done;
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }

    Ok(FitReport {
        params: ModelParams { a: theta[0].exp(), b: theta[1].exp(), c: theta[2].exp() },
        rss: cost,
        residuals: r,
    })
}
