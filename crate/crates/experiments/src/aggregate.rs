//! Pointwise statistics of learning curves across seeds.

use crate::error::{Error, Result};
use crate::provenance;
use std::fmt::Write as _;
use suple_core::Config;
use suple_learn::CurvePoint;

/// Mean and unbiased variance across seeds at each evaluation step.
#[derive(Clone, Debug, PartialEq)]
pub struct Aggregate {
    /// Ascending seeds of the contributing curves.
    pub seeds: Vec<u64>,
    pub steps: Vec<usize>,
    pub mean: Vec<f64>,
    /// Zero when a single curve contributes.
    pub variance: Vec<f64>,
}

/// Aggregates `(seed, curve)` pairs. Curves must have the same length and
/// evaluation steps. The result does not depend on input order.
pub fn aggregate(curves: &[(u64, Vec<CurvePoint<f64>>)]) -> Result<Aggregate> {
    let mut sorted: Vec<&(u64, Vec<CurvePoint<f64>>)> = curves.iter().collect();
    sorted.sort_by_key(|(seed, _)| *seed);
    let (_, first) = sorted
        .first()
        .ok_or_else(|| Error::IncompatibleCurves("nothing to aggregate".into()))?;
    if let Some(w) = sorted.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(Error::IncompatibleCurves(format!("seed {} appears twice", w[0].0)));
    }
    let steps: Vec<usize> = first.iter().map(|p| p.step).collect();
    for (seed, c) in &sorted {
        if c.len() != steps.len() {
            return Err(Error::IncompatibleCurves(format!(
                "seed {seed} has {} points, expected {}",
                c.len(),
                steps.len()
            )));
        }
        if c.iter().zip(&steps).any(|(p, &s)| p.step != s) {
            return Err(Error::IncompatibleCurves(format!(
                "seed {seed} is evaluated at different steps"
            )));
        }
    }
    let k = sorted.len() as f64;
    let mut mean = Vec::with_capacity(steps.len());
    let mut variance = Vec::with_capacity(steps.len());
    for t in 0..steps.len() {
        let m = sorted.iter().map(|(_, c)| c[t].mean_error).sum::<f64>() / k;
        let v = if sorted.len() > 1 {
            sorted.iter().map(|(_, c)| (c[t].mean_error - m).powi(2)).sum::<f64>() / (k - 1.0)
        } else {
            0.0
        };
        mean.push(m);
        variance.push(v);
    }
    Ok(Aggregate {
        seeds: sorted.iter().map(|(s, _)| *s).collect(),
        steps,
        mean,
        variance,
    })
}

impl Aggregate {
    /// `step,mean_error,variance,runs,reward_kind` rows under a provenance header.
    pub fn to_csv(&self, reward_kind: &str, config: &Config) -> String {
        let mut out = provenance::header(config, &self.seeds);
        out.push_str("step,mean_error,variance,runs,reward_kind\n");
        self.write_rows(&mut out, reward_kind);
        out
    }

    pub(crate) fn write_rows(&self, out: &mut String, reward_kind: &str) {
        for ((s, m), v) in self.steps.iter().zip(&self.mean).zip(&self.variance) {
            let _ = writeln!(out, "{s},{m},{v},{},{reward_kind}", self.seeds.len());
        }
    }
}
