//! Gamma/hadron separation for imaging atmospheric Cherenkov telescope events.
//!
//! The crate covers the whole experiment on the ten Hillas-style image
//! parameters of the MAGIC gamma telescope data:
//!
//! 1. [`ingest`] parses the telescope file and describes each attribute.
//! 2. [`preprocess`] drops rows with missing values and outlier rows.
//! 3. [`transform`] fits min-max and z-score rescalings.
//! 4. [`features`] extracts (PCA, FastICA) and selects (F-test, RFE) features.
//! 5. [`models`] holds six binary classifiers written from scratch.
//! 6. [`eval`] runs stratified cross-validation over the 8 x 6 grid.
//! 7. [`stats`] runs adequacy checks, one-way ANOVA and Dunnett's test.
//! 8. [`cli`] wires everything into a reproducible run directory.

pub mod cli;
pub mod error;
pub mod eval;
pub mod features;
pub mod ingest;
pub mod linalg;
pub mod models;
pub mod preprocess;
pub mod stats;
pub mod transform;

pub use error::{Error, Result};
pub use ingest::{AttributeName, Dataset, Label, SentinelPolicy};
pub use linalg::Matrix;
