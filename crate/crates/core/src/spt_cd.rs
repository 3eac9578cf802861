//! The pairwise decision between one class-`+1` tree and one class-`-1` tree.
//!
//! Each tree accepts a query lying within its boundary threshold. When exactly
//! one tree accepts, its class wins. When both or neither accept, the `k1`
//! smallest per-edge distances of the two trees are compared position by
//! position and the tree that is closer more often wins.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::Label;
use crate::trees::{point_to_tree_distance, threshold_of_sorted, LabeledTree, TreeDistance, TreeError};

#[derive(Debug, Error, PartialEq)]
pub enum PairwiseError {
    #[error("k1 must be at least 1")]
    ZeroK1,
    #[error("boundary alpha {0} outside [0, 1]")]
    InvalidAlpha(f64),
    #[error("majority vote over an empty sequence")]
    NoVotes,
    #[error(transparent)]
    Tree(#[from] TreeError),
}

/// How the nearest-edge comparison resolves a both-accept or both-reject case.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieBreak {
    /// The tree holding the majority of the smaller distances wins; an even
    /// split goes to `+1`.
    #[default]
    CloserTreeWins,
    /// `+1` when the class-`-1` tree is closer at least as often as the
    /// class-`+1` tree, reproducing the original pseudocode line by line.
    FartherTreeWins,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Accept0Reject1,
    Reject0Accept1,
    BothAccept,
    BothReject,
}

impl Branch {
    pub fn from_acceptance(accept0: bool, accept1: bool) -> Self {
        match (accept0, accept1) {
            (true, false) => Branch::Accept0Reject1,
            (false, true) => Branch::Reject0Accept1,
            (true, true) => Branch::BothAccept,
            (false, false) => Branch::BothReject,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairwiseDecision {
    pub vote: Label,
    /// Minimum distance from the query to the class-`+1` tree.
    pub d0: f64,
    /// Minimum distance from the query to the class-`-1` tree.
    pub d1: f64,
    pub theta0: f64,
    pub theta1: f64,
    pub branch: Branch,
}

/// Parameters of the pairwise decision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairwiseRule {
    pub boundary_alpha: f64,
    pub k1: usize,
    pub tie_break: TieBreak,
}

impl PairwiseRule {
    pub fn new(boundary_alpha: f64, k1: usize, tie_break: TieBreak) -> Result<Self, PairwiseError> {
        if !(0.0..=1.0).contains(&boundary_alpha) {
            return Err(PairwiseError::InvalidAlpha(boundary_alpha));
        }
        if k1 == 0 {
            return Err(PairwiseError::ZeroK1);
        }
        Ok(Self {
            boundary_alpha,
            k1,
            tie_break,
        })
    }

    /// Decides `z` with `h` in the class-`+1` slot and `h_prime` in the
    /// class-`-1` slot.
    pub fn classify(
        &self,
        h: &LabeledTree,
        h_prime: &LabeledTree,
        z: &[f64],
    ) -> Result<PairwiseDecision, PairwiseError> {
        let positive = PreparedTree::new(point_to_tree_distance(z, h)?, h, self.boundary_alpha);
        let negative = PreparedTree::new(point_to_tree_distance(z, h_prime)?, h_prime, self.boundary_alpha);
        Ok(self.decide(&positive, &negative))
    }

    pub(crate) fn decide(&self, positive: &PreparedTree, negative: &PreparedTree) -> PairwiseDecision {
        let accept0 = positive.min_dist <= positive.theta;
        let accept1 = negative.min_dist <= negative.theta;
        let branch = Branch::from_acceptance(accept0, accept1);
        let vote = match branch {
            Branch::Accept0Reject1 => Label::Positive,
            Branch::Reject0Accept1 => Label::Negative,
            Branch::BothAccept | Branch::BothReject => self.nearest_edges_vote(positive, negative),
        };
        PairwiseDecision {
            vote,
            d0: positive.min_dist,
            d1: negative.min_dist,
            theta0: positive.theta,
            theta1: negative.theta,
            branch,
        }
    }

    fn nearest_edges_vote(&self, positive: &PreparedTree, negative: &PreparedTree) -> Label {
        let k = self
            .k1
            .min(positive.sorted.len())
            .min(negative.sorted.len());
        let (mut closer0, mut closer1) = (0usize, 0usize);
        for (d0, d1) in positive.sorted[..k].iter().zip(&negative.sorted[..k]) {
            let diff = d1 - d0;
            if diff > 0.0 {
                closer0 += 1;
            } else if diff < 0.0 {
                closer1 += 1;
            }
        }
        let positive_wins = match self.tie_break {
            TieBreak::CloserTreeWins => closer0 >= closer1,
            TieBreak::FartherTreeWins => closer1 >= closer0,
        };
        if positive_wins {
            Label::Positive
        } else {
            Label::Negative
        }
    }
}

/// Query-specific quantities of one tree: ascending per-edge distances, their
/// minimum and the tree's boundary threshold.
#[derive(Debug, Clone)]
pub(crate) struct PreparedTree {
    sorted: Vec<f64>,
    min_dist: f64,
    theta: f64,
}

impl PreparedTree {
    pub(crate) fn new(distance: TreeDistance, tree: &LabeledTree, boundary_alpha: f64) -> Self {
        Self::with_threshold(distance, threshold_of_sorted(&tree.sorted_edge_lengths(), boundary_alpha))
    }

    pub(crate) fn with_threshold(distance: TreeDistance, theta: f64) -> Self {
        let mut sorted = distance.per_edge;
        sorted.sort_by(f64::total_cmp);
        Self {
            sorted,
            min_dist: distance.min_dist,
            theta,
        }
    }

    pub(crate) fn min_dist(&self) -> f64 {
        self.min_dist
    }
}

/// Pairwise decision with the default tie-break.
pub fn classify_pair(
    h: &LabeledTree,
    h_prime: &LabeledTree,
    z: &[f64],
    boundary_alpha: f64,
    k1: usize,
) -> Result<PairwiseDecision, PairwiseError> {
    PairwiseRule::new(boundary_alpha, k1, TieBreak::default())?.classify(h, h_prime, z)
}

/// `+1` iff the votes sum to zero or more.
pub fn majority(votes: &[Label]) -> Result<Label, PairwiseError> {
    if votes.is_empty() {
        return Err(PairwiseError::NoVotes);
    }
    let tally: i64 = votes.iter().map(|v| i64::from(v.sign())).sum();
    Ok(if tally >= 0 {
        Label::Positive
    } else {
        Label::Negative
    })
}
