use std::collections::BTreeMap;
use std::io;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::Reward;

pub const DEFAULT_TAU: f64 = 0.7;

/// Root utility v(t) after each iteration t = 1..=T of one search.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTrace {
    pub values: Vec<Reward>,
    pub seed: u64,
    #[serde(default)]
    pub metadata: BTreeMap<String, String>,
}

impl ConvergenceTrace {
    pub fn new(seed: u64) -> Self {
        ConvergenceTrace { values: Vec::new(), seed, metadata: BTreeMap::new() }
    }

    pub fn push(&mut self, v: Reward) {
        self.values.push(v);
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// v(t), 1-based.
    pub fn at(&self, t: usize) -> Reward {
        self.values[t - 1]
    }

    /// Writes `t,v_t` rows with a header.
    pub fn write_csv<W: io::Write>(&self, out: W) -> io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "v_t"])?;
        for (i, v) in self.values.iter().enumerate() {
            w.write_record([(i + 1).to_string(), v.to_string()])?;
        }
        w.flush()
    }
}

/// Smallest t* with v(t) >= tau for every t in t*..=T, or `None` when v(T) < tau.
pub fn tau_convergence_point(trace: &ConvergenceTrace, tau: f64) -> Result<Option<u64>> {
    if trace.is_empty() {
        return Err(Error::EmptyTrace);
    }
    let held = trace.values.iter().rev().take_while(|&&v| v >= tau).count();
    Ok((held > 0).then(|| (trace.len() - held + 1) as u64))
}
