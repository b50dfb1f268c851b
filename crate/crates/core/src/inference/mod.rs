//! Inference on fitted mixtures: bootstrap, clustering by entropy merging
//! and supervised classification.

mod bootstrap;
mod classify;
mod cluster;

pub use bootstrap::{bootstrap, bootstrap_model, match_components, resample, BootstrapMode, BootstrapResult, Spread};
pub use classify::{classify, confusion_metrics, ClassModel, ClassificationResult, ConfusionMetrics};
pub use cluster::{correct_clustering_prob, merge_clusters, ClusteringResult, Merge};
