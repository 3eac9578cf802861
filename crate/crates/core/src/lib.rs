//! Binary classification with ensembles of spanning trees.
//!
//! For every probe instance of a training set the classifier gathers the
//! `gamma` nearest points of each class, enumerates every labelled spanning
//! tree over them (`gamma^(gamma-2)` per class, via Prüfer sequences) and keeps
//! the trees that vote the probe correctly when paired against the opposite
//! class's trees. At test time the stored edge-weight sums of nearby probes
//! pick structurally similar trees around the query, and nested majority votes
//! over tree-vs-tree decisions produce the label.
//!
//! The crate is organised bottom-up:
//!
//! - [`dataset`]: CSV ingestion, stratified splits and folds, probe sets.
//! - [`trees`]: Prüfer enumeration and point-to-tree geometry.
//! - [`spt_cd`]: the pairwise tree-vs-tree decision and majority voting.
//! - [`training`]: neighbourhoods, the bagging filter and model persistence.
//! - [`inference`]: beta assignment, sub-graph selection and classification.
//! - [`evaluation`]: confusion metrics, ROC/AUC, cross-validation and sweeps.
//! - [`cli`]: configuration and the `spt-cd` command line.
//!
//! ```
//! use subspace_graphs::trees::enumerate_spanning_trees;
//! use subspace_graphs::trees::TreeNode;
//!
//! let nodes: Vec<TreeNode> = (0..4)
//!     .map(|i| TreeNode::new(i, vec![i as f64, 0.0]))
//!     .collect();
//! let trees = enumerate_spanning_trees(&nodes).unwrap();
//! assert_eq!(trees.len(), 16);
//! ```

pub mod cli;
pub mod dataset;
pub mod evaluation;
pub mod inference;
mod numeric;
pub mod spt_cd;
pub mod training;
pub mod trees;

pub use dataset::{ClassSplit, Dataset, Instance, Label};
pub use inference::{classify, classify_batch, Prediction};
pub use training::{train, HyperParams, TrainedModel};
pub use trees::LabeledTree;

use thiserror::Error;

/// Any failure raised by the library, tagged with the module it came from.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dataset: {0}")]
    Dataset(#[from] dataset::DatasetError),
    #[error("trees: {0}")]
    Trees(#[from] trees::TreeError),
    #[error("spt_cd: {0}")]
    Pairwise(#[from] spt_cd::PairwiseError),
    #[error("training: {0}")]
    Training(#[from] training::TrainingError),
    #[error("inference: {0}")]
    Inference(#[from] inference::InferenceError),
    #[error("evaluation: {0}")]
    Evaluation(#[from] evaluation::EvaluationError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
