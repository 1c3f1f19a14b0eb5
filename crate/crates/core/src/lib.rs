//! Composite mobility index engine.
//!
//! The pipeline turns a state × indicator table into a ranked composite
//! index:
//!
//! 1. [`dataset`]: load indicator metadata, observations and Gini values.
//! 2. [`normalize`]: directional min-max scaling into `[0, 1]`.
//! 3. [`pca`] (on top of the Jacobi solver in [`eigen`]): correlation
//!    matrix, spectrum, component selection and loadings.
//! 4. [`scoring`]: weights `W_i = Σ_j |L_ij| E_j`, the weighted-mean index,
//!    ranks and percentile categories.
//! 5. [`analysis`]: mobility × inequality scenarios, scatter data and
//!    per-pillar sub-scores.
//!
//! [`pipeline`] strings the stages together and writes the dump files.

// `!(x > y)` is used on purpose so NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
mod csvio;
pub mod dataset;
pub mod eigen;
pub mod error;
pub mod normalize;
pub mod pca;
pub mod pipeline;
pub mod scoring;

pub use error::{Result, SmiError};
