//! Aggregated experiment results.
//!
//! Everything serialized here is deterministic for a fixed `(config, seed)`:
//! collections are ordered, maps are `BTreeMap`, and the wall-clock runtime
//! is kept out of the serialized form so JSON summaries compare byte-identical
//! across reruns.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;

pub const SCHEMA_VERSION: u32 = 1;

/// One empirical tail probability cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailCell {
    pub n: usize,
    /// k = n - i for tail kinds; the l index for singular-vector cells.
    pub i_or_k: usize,
    pub t: f64,
    pub prob: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

/// Fitted log-log slope for one (n, k) series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeEntry {
    pub n: usize,
    pub i_or_k: usize,
    pub slope: f64,
    pub ci_halfwidth: f64,
}

/// Quantiles of a normalized order-statistic ratio.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioEntry {
    pub n: usize,
    pub i: usize,
    pub count: usize,
    pub median: f64,
    pub q25: f64,
    pub q75: f64,
}

/// Violation counter for one closed-form bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViolationEntry {
    pub n: usize,
    pub bound: String,
    pub violations: usize,
    pub total: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Summary {
    pub schema_version: u32,
    pub kind: String,
    pub config: ExperimentConfig,
    #[serde(default)]
    pub cells: Vec<TailCell>,
    #[serde(default)]
    pub slopes: Vec<SlopeEntry>,
    #[serde(default)]
    pub ratios: Vec<RatioEntry>,
    #[serde(default)]
    pub violations: Vec<ViolationEntry>,
    /// Named scalar results (coverage fractions, brackets, worst slacks...).
    #[serde(default)]
    pub scalars: BTreeMap<String, f64>,
    pub failed_trials: usize,
    pub total_trials: usize,
    /// Wall-clock seconds; excluded from serialization so summaries stay
    /// byte-identical across reruns.
    #[serde(skip)]
    pub runtime_secs: f64,
}

impl Summary {
    pub fn new(config: &ExperimentConfig) -> Self {
        Summary {
            schema_version: SCHEMA_VERSION,
            kind: config.kind.as_str().to_string(),
            config: config.clone(),
            cells: Vec::new(),
            slopes: Vec::new(),
            ratios: Vec::new(),
            violations: Vec::new(),
            scalars: BTreeMap::new(),
            failed_trials: 0,
            total_trials: 0,
            runtime_secs: 0.0,
        }
    }

    pub fn to_json(&self) -> Result<String, serde_json::Error> {
        serde_json::to_string_pretty(self)
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// Binomial proportion with a 95% normal-approximation band, clamped to
/// [0, 1].
pub fn binomial_cell(n: usize, i_or_k: usize, t: f64, hits: usize, total: usize) -> TailCell {
    let prob = hits as f64 / total as f64;
    let half = 1.96 * (prob * (1.0 - prob) / total as f64).sqrt();
    TailCell {
        n,
        i_or_k,
        t,
        prob,
        ci_lo: (prob - half).max(0.0),
        ci_hi: (prob + half).min(1.0),
    }
}

/// Median and quartiles of a sample (sorted copy; deterministic).
pub fn ratio_entry(n: usize, i: usize, values: &[f64]) -> RatioEntry {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let q = |frac: f64| -> f64 {
        if sorted.is_empty() {
            return f64::NAN;
        }
        let idx = ((sorted.len() as f64 - 1.0) * frac).round() as usize;
        sorted[idx]
    };
    RatioEntry {
        n,
        i,
        count: sorted.len(),
        median: q(0.5),
        q25: q(0.25),
        q75: q(0.75),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{ExperimentConfig, ExperimentKind};

    #[test]
    fn json_roundtrip_preserves_cells() {
        let cfg = ExperimentConfig::new(ExperimentKind::CertifySuite, 1, 3);
        let mut s = Summary::new(&cfg);
        s.cells.push(binomial_cell(10, 2, 0.5, 3, 10));
        s.scalars.insert("worst_slack".into(), 1.25e-9);
        s.runtime_secs = 1.5;
        let text = s.to_json().unwrap();
        let back = Summary::from_json(&text).unwrap();
        assert_eq!(back.cells, s.cells);
        assert_eq!(back.scalars["worst_slack"], 1.25e-9);
        // runtime is not serialized
        assert_eq!(back.runtime_secs, 0.0);
        assert!(!text.contains("runtime"));
    }

    #[test]
    fn ratio_quartiles() {
        let vals: Vec<f64> = (1..=9).map(|x| x as f64).collect();
        let r = ratio_entry(5, 3, &vals);
        assert_eq!(r.median, 5.0);
        assert_eq!(r.q25, 3.0);
        assert_eq!(r.q75, 7.0);
    }
}
