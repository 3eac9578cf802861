//! Classification of a query point.
//!
//! 1. Beta assignment: the probes nearest to the query lend the weight sums of
//!    their surviving trees; a quantile of those sums becomes `beta` for each
//!    class.
//! 2. Sub-graph selection: of all spanning trees over the query's own class
//!    neighbourhoods, keep the `best_spt` whose weight sum is closest to beta,
//!    i.e. with the largest `eta = 1 / (1 + |weight_sum - beta|)`.
//! 3. Nested vote: every selected class-`+1` tree faces every selected
//!    class-`-1` tree; each class-`+1` tree takes the majority of its pair
//!    votes, and the majority of those outcomes is the label.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{Instance, Label};
use crate::spt_cd::{majority, PairwiseError, PreparedTree};
use crate::training::{nearest, tree_nodes, TrainedModel, TreeRecord};
use crate::trees::{
    enumerate_spanning_trees_capped, quantile_index, threshold_of_sorted, EdgeDistanceTable,
    LabeledTree, TreeError,
};

#[derive(Debug, Error)]
pub enum InferenceError {
    #[error("query has {found} features, model expects {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("the {label} pool has {size} instances, fewer than gamma = {gamma}")]
    PoolTooSmall { label: Label, size: usize, gamma: usize },
    #[error("sub-graph selection needs at least one candidate")]
    NoCandidates,
    #[error("best_spt must be at least 1")]
    ZeroBestSpt,
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Pairwise(#[from] PairwiseError),
    #[error("item {index}: {source}")]
    Item {
        index: usize,
        #[source]
        source: Box<InferenceError>,
    },
}

/// Which trees the selection step prefers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    /// Weight sums closest to beta (largest eta).
    #[default]
    Closest,
    /// Weight sums farthest from beta (smallest eta).
    Farthest,
}

/// A beta value and where it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct Beta {
    /// `None` when the consulted owners hold no surviving trees.
    pub value: Option<f64>,
    /// Owner ids consulted, nearest first.
    pub owners: Vec<usize>,
    /// Position of `value` in the ascending pooled weight sums.
    pub index: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BetaPair {
    pub beta0: Beta,
    pub beta1: Beta,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub label: Label,
    /// Majority outcome of each selected class-`+1` tree against all selected
    /// class-`-1` trees.
    pub votes_per_h: Vec<Label>,
    /// Sizes of the selected class-`+1` and class-`-1` tree sets.
    pub selected_counts: (usize, usize),
}

impl Prediction {
    /// Fraction of per-tree outcomes that favour `+1`. Used as the ROC score.
    pub fn vote_share(&self) -> f64 {
        let positive = self.votes_per_h.iter().filter(|&&v| v == Label::Positive).count();
        positive as f64 / self.votes_per_h.len() as f64
    }
}

fn harvest_beta(
    z: &[f64],
    zeta: &std::collections::BTreeMap<usize, Vec<TreeRecord>>,
    owners: &[Instance],
    k_neighbours: usize,
    beta_alpha: f64,
) -> Beta {
    let keyed: Vec<Instance> = owners
        .iter()
        .filter(|o| zeta.contains_key(&o.id))
        .cloned()
        .collect();
    let consulted: Vec<usize> = nearest(z, None, &keyed, k_neighbours)
        .iter()
        .map(|o| o.id)
        .collect();
    let mut sums: Vec<f64> = consulted
        .iter()
        .flat_map(|id| zeta[id].iter().map(|r| r.weight_sum))
        .collect();
    if sums.is_empty() {
        return Beta {
            value: None,
            owners: consulted,
            index: None,
        };
    }
    sums.sort_by(f64::total_cmp);
    let index = quantile_index(beta_alpha, sums.len());
    Beta {
        value: Some(sums[index]),
        owners: consulted,
        index: Some(index),
    }
}

pub fn beta_assignment(z: &[f64], model: &TrainedModel) -> BetaPair {
    let p = &model.params;
    BetaPair {
        beta0: harvest_beta(z, &model.zeta0, &model.owners, p.k_neighbours, p.beta_alpha),
        beta1: harvest_beta(z, &model.zeta1, &model.owners, p.k_neighbours, p.beta_alpha),
    }
}

/// Indices of the selected weight sums, best first. Ties keep input order.
pub fn select_indices(
    weight_sums: &[f64],
    beta: Option<f64>,
    best_spt: usize,
    objective: Objective,
) -> Result<Vec<usize>, InferenceError> {
    if weight_sums.is_empty() {
        return Err(InferenceError::NoCandidates);
    }
    if best_spt == 0 {
        return Err(InferenceError::ZeroBestSpt);
    }
    let mut order: Vec<usize> = (0..weight_sums.len()).collect();
    match beta {
        Some(beta) => {
            let gap = |i: usize| (weight_sums[i] - beta).abs();
            match objective {
                Objective::Closest => order.sort_by(|&a, &b| gap(a).total_cmp(&gap(b))),
                Objective::Farthest => order.sort_by(|&a, &b| gap(b).total_cmp(&gap(a))),
            }
        }
        None => order.sort_by(|&a, &b| weight_sums[a].total_cmp(&weight_sums[b])),
    }
    order.truncate(best_spt);
    Ok(order)
}

/// The `best_spt` candidates ranked by `|weight_sum - beta|` under the given
/// objective. Without a beta, the lightest trees come first.
pub fn select_subgraphs(
    candidates: &[LabeledTree],
    beta: Option<f64>,
    best_spt: usize,
    objective: Objective,
) -> Result<Vec<&LabeledTree>, InferenceError> {
    let sums: Vec<f64> = candidates.iter().map(LabeledTree::weight_sum).collect();
    Ok(select_indices(&sums, beta, best_spt, objective)?
        .into_iter()
        .map(|i| &candidates[i])
        .collect())
}

fn candidate_trees(z: &[f64], model: &TrainedModel, label: Label) -> Result<Vec<LabeledTree>, InferenceError> {
    let gamma = model.params.gamma;
    let pool = model.pool(label);
    let members = nearest(z, None, pool, gamma);
    if members.len() < gamma {
        return Err(InferenceError::PoolTooSmall {
            label,
            size: members.len(),
            gamma,
        });
    }
    Ok(enumerate_spanning_trees_capped(&tree_nodes(&members), model.params.max_gamma)?)
}

fn prepare_selected(z: &[f64], trees: &[LabeledTree], selected: &[usize], boundary_alpha: f64) -> Vec<PreparedTree> {
    let table = EdgeDistanceTable::new(z, trees[0].nodes());
    selected
        .iter()
        .map(|&i| {
            let h = &trees[i];
            PreparedTree::with_threshold(
                table.tree_distance(h),
                threshold_of_sorted(&h.sorted_edge_lengths(), boundary_alpha),
            )
        })
        .collect()
}

pub fn classify(z: &[f64], model: &TrainedModel) -> Result<Prediction, InferenceError> {
    if z.len() != model.feature_count {
        return Err(InferenceError::DimensionMismatch {
            expected: model.feature_count,
            found: z.len(),
        });
    }
    let params = &model.params;
    let rule = params.pairwise_rule()?;
    let betas = beta_assignment(z, model);

    let t0 = candidate_trees(z, model, Label::Positive)?;
    let t1 = candidate_trees(z, model, Label::Negative)?;
    let sums0: Vec<f64> = t0.iter().map(LabeledTree::weight_sum).collect();
    let sums1: Vec<f64> = t1.iter().map(LabeledTree::weight_sum).collect();
    let sel0 = select_indices(&sums0, betas.beta0.value, params.best_spt, params.objective)?;
    let sel1 = select_indices(&sums1, betas.beta1.value, params.best_spt, params.objective)?;
    let h0 = prepare_selected(z, &t0, &sel0, params.boundary_alpha);
    let h1 = prepare_selected(z, &t1, &sel1, params.boundary_alpha);

    let votes_per_h = h0
        .iter()
        .map(|h| {
            let inner: Vec<Label> = h1.iter().map(|h_prime| rule.decide(h, h_prime).vote).collect();
            majority(&inner)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Prediction {
        label: majority(&votes_per_h)?,
        votes_per_h,
        selected_counts: (h0.len(), h1.len()),
    })
}

/// Classifies every row in parallel; output order matches input order.
pub fn classify_batch(zs: &[Vec<f64>], model: &TrainedModel) -> Result<Vec<Prediction>, InferenceError> {
    zs.par_iter()
        .enumerate()
        .map(|(index, z)| {
            classify(z, model).map_err(|e| InferenceError::Item {
                index,
                source: Box::new(e),
            })
        })
        .collect()
}
