//! Robust meta-learning for mixtures of linear regressions.
//!
//! The crate estimates a mixture of `k` linear regressions from many small
//! tasks, some of which are adversarially corrupted. The pipeline has four
//! stages:
//!
//! 1. [`robust_pca`] recovers the span of the regression vectors from
//!    single-example tasks with a double-filtering outlier-robust PCA.
//! 2. [`clustering`] clusters the projected moment estimates of heavy tasks
//!    and estimates coarse centers and residual radii.
//! 3. [`classification`] assigns a second batch of light tasks to clusters
//!    by likelihood and refines the parameters with trimmed regression.
//! 4. [`prediction`] computes MAP and posterior-mean predictions for a new
//!    task.
//!
//! [`pipeline`] wires the stages together; [`model`] holds the generative
//! model and adversaries used to build synthetic benchmarks.

pub mod classification;
pub mod clustering;
pub mod error;
pub mod linalg;
pub mod model;
pub mod pipeline;
pub mod prediction;
pub mod rng;
pub mod robust_pca;
pub mod stats;

pub use error::{Error, Result};
pub use model::{AdversaryConfig, Batch, MetaParameter, Strategy, Task, Truth};
