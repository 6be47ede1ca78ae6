//! Landscape analysis for configuration-performance datasets.
//!
//! The crate takes measured datasets (one row per configuration, one
//! performance value per row), treats them as fitness landscapes over the
//! configuration space, and answers three kinds of questions:
//!
//! * how the landscape is shaped: fitness-distance correlation, local
//!   optima and their basins of attraction, random-walk autocorrelation
//!   ([`landscape`]);
//! * which options the ruggedness is sensitive to ([`sensitivity`]);
//! * how simple tuners behave on it, including priority and transfer
//!   variants ([`tuners`]), with non-parametric comparisons ([`stats`]).
//!
//! Reports are emitted deterministically ([`report`]): the same dataset,
//! settings, and seeds always produce byte-identical output.

pub mod cli;
pub mod dataset;
pub mod error;
pub mod landscape;
pub mod report;
pub mod seeding;
pub mod sensitivity;
pub mod stats;
pub mod synthetic;
pub mod tuners;

pub use error::Error;

/// Version string recorded in report provenance.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
