//! Core numerics for no-gaps delocalization experiments on random matrices.
//!
//! The crate provides:
//! - field-generic dense linear algebra (orthonormal complements, spectra,
//!   point-to-ellipsoid distances) over `f64` and `Complex<f64>`,
//! - seeded random matrix/vector ensembles and kernel extraction,
//! - delocalization statistics: order statistics, subset norms,
//!   incompressibility, least common denominators, concentration functions,
//! - the biorthogonal duality constructions: test projections, dual bases,
//!   ellipsoid/distance classes, and the lattice discretization with its
//!   reduction algorithm,
//! - randomized Hilbert-Schmidt nets and smallest-singular-value tail
//!   experiments.
//!
//! All operations are pure functions over immutable inputs and are safe to
//! drive from concurrently running trials.

pub mod duality;
pub mod eig;
pub mod ellipsoid;
pub mod embed;
pub mod ensembles;
pub mod error;
pub mod field;
pub mod lcd;
pub mod linalg;
pub mod nets;
pub mod stats;
pub mod upsilon;

pub use error::CoreError;
pub use field::{Field, FieldTag};
pub use linalg::{Mat, Vect};
