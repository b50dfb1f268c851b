//! Finite mixtures of multivariate normal densities estimated with the
//! REBMIX procedure, together with dataset synthesis, bootstrap, clustering
//! and classification.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cli;
pub mod criteria;
pub mod data;
pub mod error;
pub mod estimator;
pub mod inference;
pub mod linalg;
pub mod mixture;
pub mod preprocess;
pub mod rng;

pub use criteria::{degrees_of_freedom, evaluate_criterion, CriterionKind, FitStatistics};
pub use data::{Dataset, LabeledDataset};
pub use error::{Error, Result};
pub use estimator::{fit, EstimatorConfig, FitResult, KSpec, Restraints};
pub use linalg::SymMatrix;
pub use mixture::{Component, MixtureModel};
pub use preprocess::{KGrid, Preprocessed, PreprocessingKind};
