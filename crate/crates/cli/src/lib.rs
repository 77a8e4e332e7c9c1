//! Experiment orchestration for the delocalization statistics: seeded
//! parallel Monte Carlo runs, lemma-certification suites, and CSV/JSON/SVG
//! output.

pub mod certify;
pub mod config;
pub mod error;
pub mod experiment;
pub mod export;
pub mod plot;
pub mod slope;
pub mod summary;

pub use config::{ExperimentConfig, ExperimentKind};
pub use error::HarnessError;
pub use summary::Summary;
