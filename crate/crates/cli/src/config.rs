//! Experiment configuration: a flat JSON-serializable struct whose
//! kind-specific parameter completeness is validated before a run starts.

use nogaps_core::ensembles::EntryLaw;
use nogaps_core::field::FieldTag;
use nogaps_core::lcd::LCDParams;
use nogaps_core::nets::NetSpec;
use serde::{Deserialize, Serialize};

use crate::error::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    /// Tail of u*_{n-k+1} for the kernel vector of an (n-1) x n matrix.
    NullVectorTail,
    /// Same statistics for a vector sampled uniformly on the sphere.
    SphereBaseline,
    /// Order statistics of real eigenvectors across several n.
    EigvecNogapsReal,
    /// Order statistics of all eigenvectors of complex matrices.
    EigvecNogapsComplex,
    /// Eigenvectors attached to small real eigenvalues.
    SmallEigDeloc,
    /// Right singular vectors attached to small singular values.
    SingularVectorDeloc,
    /// Smallest singular value of projected-column matrices.
    SminTail,
    /// Build-and-verify a Hilbert-Schmidt net.
    NetVerify,
    /// Run the deterministic lemma checkers on random instances.
    CertifySuite,
    /// Bracket the least common denominator of a configured vector.
    LcdProbe,
}

impl ExperimentKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentKind::NullVectorTail => "null_vector_tail",
            ExperimentKind::SphereBaseline => "sphere_baseline",
            ExperimentKind::EigvecNogapsReal => "eigvec_nogaps_real",
            ExperimentKind::EigvecNogapsComplex => "eigvec_nogaps_complex",
            ExperimentKind::SmallEigDeloc => "small_eig_deloc",
            ExperimentKind::SingularVectorDeloc => "singular_vector_deloc",
            ExperimentKind::SminTail => "smin_tail",
            ExperimentKind::NetVerify => "net_verify",
            ExperimentKind::CertifySuite => "certify_suite",
            ExperimentKind::LcdProbe => "lcd_probe",
        }
    }
}

fn default_threads() -> usize {
    1
}

fn default_law() -> EntryLaw {
    EntryLaw::Gaussian
}

fn default_field() -> FieldTag {
    FieldTag::Real
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    /// Matrix dimension (single-n kinds).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// Dimensions for cross-n scaling kinds.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_list: Option<Vec<usize>>,
    /// Values of k = n - i for tail kinds.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_list: Option<Vec<usize>>,
    /// Explicit i values (singular-vector kind: the l-th smallest values).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub i_list: Option<Vec<usize>>,
    /// Threshold grid (t for tails, c for the discretized eigenvalue kind).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_grid: Option<Vec<f64>>,
    #[serde(default = "default_law")]
    pub law: EntryLaw,
    #[serde(default = "default_field")]
    pub field: FieldTag,
    /// The polylog exponent C in the closed-form bounds.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_const: Option<f64>,
    /// The small constant c in exponential terms.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_small: Option<f64>,
    pub trials: usize,
    #[serde(default = "default_threads")]
    pub threads: usize,
    pub master_seed: u64,
    /// Subspace dimension d (smin kind).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    /// Column count r (smin kind).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<usize>,
    /// Net parameters (net kind).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub net: Option<NetSpec>,
    /// Pairs sampled per net verification.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_pairs: Option<usize>,
    /// LCD probe: the vector and search parameters.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lcd_vector: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lcd_params: Option<LCDParams>,
    /// Output directory; stdout-only when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    /// Output format: "json", "csv" or "both" (default).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<String>,
}

impl ExperimentConfig {
    /// Minimal config skeleton for programmatic use.
    pub fn new(kind: ExperimentKind, trials: usize, master_seed: u64) -> Self {
        ExperimentConfig {
            kind,
            n: None,
            n_list: None,
            k_list: None,
            i_list: None,
            t_grid: None,
            law: default_law(),
            field: default_field(),
            c_const: None,
            c_small: None,
            trials,
            threads: 1,
            master_seed,
            d: None,
            r: None,
            net: None,
            n_pairs: None,
            lcd_vector: None,
            lcd_params: None,
            output: None,
            format: None,
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let fail = |msg: &str| Err(HarnessError::ConfigInvalid(msg.to_string()));
        if self.trials == 0 {
            return fail("trials must be >= 1");
        }
        if self.threads == 0 {
            return fail("threads must be >= 1");
        }
        self.law
            .validate()
            .map_err(|e| HarnessError::ConfigInvalid(e.to_string()))?;
        let need_n = |n: &Option<usize>, msg: &str| -> Result<usize, HarnessError> {
            n.ok_or_else(|| HarnessError::ConfigInvalid(msg.to_string()))
        };
        let need_grid = |g: &Option<Vec<f64>>| -> Result<(), HarnessError> {
            match g {
                None => fail("t_grid is required"),
                Some(v) if v.is_empty() => fail("t_grid must be nonempty"),
                Some(v) if v.iter().any(|&t| t <= 0.0) => fail("t_grid entries must be positive"),
                _ => Ok(()),
            }
        };
        match self.kind {
            ExperimentKind::NullVectorTail | ExperimentKind::SphereBaseline => {
                let n = need_n(&self.n, "n is required")?;
                need_grid(&self.t_grid)?;
                match &self.k_list {
                    None => return fail("k_list is required"),
                    Some(ks) if ks.is_empty() => return fail("k_list must be nonempty"),
                    Some(ks) if ks.iter().any(|&k| k == 0 || k > n / 2) => {
                        return fail("k values must satisfy 1 <= k <= n/2")
                    }
                    _ => {}
                }
            }
            ExperimentKind::EigvecNogapsReal | ExperimentKind::EigvecNogapsComplex => {
                match &self.n_list {
                    None => return fail("n_list is required"),
                    Some(ns) if ns.is_empty() => return fail("n_list must be nonempty"),
                    Some(ns) if ns.iter().any(|&n| n < 8) => return fail("n must be >= 8"),
                    _ => {}
                }
                if self.kind == ExperimentKind::EigvecNogapsComplex
                    && self.field != FieldTag::Complex
                {
                    return fail("complex eigenvector kind needs field = complex");
                }
                if self.kind == ExperimentKind::EigvecNogapsReal && self.field != FieldTag::Real {
                    return fail("real eigenvector kind needs field = real");
                }
            }
            ExperimentKind::SmallEigDeloc => {
                need_n(&self.n, "n is required")?;
                need_grid(&self.t_grid)?;
                match &self.k_list {
                    None => return fail("k_list is required"),
                    Some(ks) if ks.is_empty() => return fail("k_list must be nonempty"),
                    _ => {}
                }
            }
            ExperimentKind::SingularVectorDeloc => {
                need_n(&self.n, "n is required")?;
                need_grid(&self.t_grid)?;
                if self.i_list.as_ref().map_or(true, |v| v.is_empty()) {
                    return fail("i_list (the l indices) is required");
                }
                if self.k_list.as_ref().map_or(true, |v| v.is_empty()) {
                    return fail("k_list is required");
                }
            }
            ExperimentKind::SminTail => {
                let d = need_n(&self.d, "d is required")?;
                let r = need_n(&self.r, "r is required")?;
                if d < r || r == 0 {
                    return fail("need d >= r >= 1");
                }
                need_grid(&self.t_grid)?;
            }
            ExperimentKind::NetVerify => {
                let net = self
                    .net
                    .as_ref()
                    .ok_or_else(|| HarnessError::ConfigInvalid("net spec is required".into()))?;
                net.validate()
                    .map_err(|e| HarnessError::ConfigInvalid(e.to_string()))?;
                if self.n_pairs.map_or(true, |p| p == 0) {
                    return fail("n_pairs must be >= 1");
                }
            }
            ExperimentKind::CertifySuite => {}
            ExperimentKind::LcdProbe => {
                match &self.lcd_vector {
                    None => return fail("lcd_vector is required"),
                    Some(v) if v.iter().all(|&x| x == 0.0) => {
                        return fail("lcd_vector must be nonzero")
                    }
                    _ => {}
                }
                let p = self
                    .lcd_params
                    .ok_or_else(|| HarnessError::ConfigInvalid("lcd_params is required".into()))?;
                p.validate()
                    .map_err(|e| HarnessError::ConfigInvalid(e.to_string()))?;
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| HarnessError::ConfigInvalid(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> ExperimentConfig {
        let mut c = ExperimentConfig::new(ExperimentKind::SphereBaseline, 100, 7);
        c.n = Some(32);
        c.k_list = Some(vec![1, 2]);
        c.t_grid = Some(vec![0.3, 0.5, 0.7]);
        c
    }

    #[test]
    fn zero_trials_rejected() {
        let mut c = base();
        c.trials = 0;
        assert!(matches!(c.validate(), Err(HarnessError::ConfigInvalid(_))));
    }

    #[test]
    fn missing_grid_rejected() {
        let mut c = base();
        c.t_grid = None;
        assert!(c.validate().is_err());
        let mut c = base();
        c.t_grid = Some(vec![]);
        assert!(c.validate().is_err());
    }

    #[test]
    fn json_roundtrip() {
        let c = base();
        let text = serde_json::to_string(&c).unwrap();
        let back = ExperimentConfig::from_json(&text).unwrap();
        assert_eq!(back.kind, c.kind);
        assert_eq!(back.n, c.n);
        assert_eq!(back.master_seed, c.master_seed);
    }

    #[test]
    fn kind_names_are_snake_case() {
        let c = base();
        let text = serde_json::to_string(&c).unwrap();
        assert!(text.contains("\"sphere_baseline\""));
    }
}
