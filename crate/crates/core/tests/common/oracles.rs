//! Brute-force reference computations shared by the integration suites.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use subspace_graphs::evaluation::ConfusionMatrix;
use subspace_graphs::training::TreeRecord;
use subspace_graphs::trees::{enumerate_spanning_trees, point_to_tree_distance, TreeNode};
use subspace_graphs::{ClassSplit, Dataset, HyperParams, Instance, Label};

use super::euclid;

/// Two overlapping Gaussian clouds (unit variance, centres 1.5 apart), so
/// survivor sets are neither empty nor full. Even ids are `+1`.
pub fn overlapping(n: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let instances = (0..n)
        .map(|id| {
            let label = if id % 2 == 0 { Label::Positive } else { Label::Negative };
            let cx = if label == Label::Positive { 0.0 } else { 1.5 };
            let point = vec![cx + normal.sample(&mut rng), normal.sample(&mut rng)];
            Instance::new(id, point, label)
        })
        .collect();
    Dataset::new("overlap", instances).unwrap()
}

/// The `gamma` pool members nearest to `s` by a full sort, ties by id.
pub fn neighbourhood(s: &Instance, pool: &[Instance], gamma: usize) -> Vec<TreeNode> {
    let mut ranked: Vec<&Instance> = pool.iter().filter(|x| x.id != s.id).collect();
    ranked.sort_by(|a, b| {
        euclid(&s.features, &a.features)
            .total_cmp(&euclid(&s.features, &b.features))
            .then(a.id.cmp(&b.id))
    });
    ranked[..gamma].iter().map(|x| TreeNode::new(x.id, x.features.clone())).collect()
}

/// A tree identified by its node ids and edge list.
pub type TreeKey = (Vec<usize>, Vec<(usize, usize)>);
pub type Survivors = BTreeMap<usize, Vec<(TreeKey, f64)>>;

/// Survivors recounted over every `(h, h')` pair of each probe: a tree is kept
/// iff the pairs it takes part in vote the probe's label at least as often
/// as not.
pub fn survivors(split: &ClassSplit, params: &HyperParams) -> [Survivors; 2] {
    let rule = params.pairwise_rule().unwrap();
    let mut out = [BTreeMap::new(), BTreeMap::new()];
    for s in &split.s {
        let h0 = enumerate_spanning_trees(&neighbourhood(s, &split.x0, params.gamma)).unwrap();
        let h1 = enumerate_spanning_trees(&neighbourhood(s, &split.x1, params.gamma)).unwrap();
        let mut c0 = vec![0i32; h0.len()];
        let mut c1 = vec![0i32; h1.len()];
        for (i, h) in h0.iter().enumerate() {
            for (j, hp) in h1.iter().enumerate() {
                let correct = rule.classify(h, hp, &s.features).unwrap().vote == s.label;
                let score = if correct { 1 } else { -1 };
                c0[i] += score;
                c1[j] += score;
            }
        }
        for (slot, (trees, counts)) in [(&h0, &c0), (&h1, &c1)].into_iter().enumerate() {
            let mut kept: Vec<(TreeKey, f64)> = trees
                .iter()
                .zip(counts.iter())
                .filter(|(_, &c)| c >= 0)
                .map(|(h, _)| {
                    let d = point_to_tree_distance(&s.features, h).unwrap().min_dist;
                    ((h.node_ids(), h.edges().to_vec()), d)
                })
                .collect();
            kept.sort_by(|a, b| a.0.cmp(&b.0));
            out[slot].insert(s.id, kept);
        }
    }
    out
}

/// A stored dictionary in the shape returned by [`survivors`].
pub fn stored(zeta: &BTreeMap<usize, Vec<TreeRecord>>) -> Survivors {
    zeta.iter()
        .map(|(&id, records)| {
            let mut kept: Vec<(TreeKey, f64)> = records
                .iter()
                .map(|r| ((r.tree.node_ids(), r.tree.edges().to_vec()), r.dist_to_owner))
                .collect();
            kept.sort_by(|a, b| a.0.cmp(&b.0));
            (id, kept)
        })
        .collect()
}

/// Selection by descending `eta = 1 / (1 + |sum - beta|)`, stable.
pub fn eta_selection(sums: &[f64], beta: f64, best_spt: usize) -> Vec<usize> {
    let eta: Vec<f64> = sums.iter().map(|s| 1.0 / (1.0 + (s - beta).abs())).collect();
    let mut order: Vec<usize> = (0..sums.len()).collect();
    order.sort_by(|&a, &b| eta[b].total_cmp(&eta[a]));
    order.truncate(best_spt);
    order
}

/// Mann–Whitney statistic over all positive/negative pairs, ties counting
/// one half.
pub fn pairwise_auc(scores: &[(f64, Label)]) -> f64 {
    let pos: Vec<f64> = scores.iter().filter(|s| s.1 == Label::Positive).map(|s| s.0).collect();
    let neg: Vec<f64> = scores.iter().filter(|s| s.1 == Label::Negative).map(|s| s.0).collect();
    let mut credit = 0.0;
    for p in &pos {
        for n in &neg {
            if p > n {
                credit += 1.0;
            } else if p == n {
                credit += 0.5;
            }
        }
    }
    credit / (pos.len() * neg.len()) as f64
}

/// Confusion counts and the five ratios, `None` for 0/0.
pub struct Recount {
    pub confusion: ConfusionMatrix,
    pub accuracy: Option<f64>,
    pub sensitivity: Option<f64>,
    pub specificity: Option<f64>,
    pub precision: Option<f64>,
    pub f1: Option<f64>,
}

pub fn recount(truth: &[Label], predicted: &[Label]) -> Recount {
    let count = |a: Label, b: Label| truth.iter().zip(predicted).filter(|(&x, &y)| x == a && y == b).count();
    let (p, n) = (Label::Positive, Label::Negative);
    let (tp, fp, tn, fneg) = (count(p, p), count(n, p), count(n, n), count(p, n));
    let frac = |a: usize, b: usize| if b == 0 { None } else { Some(a as f64 / b as f64) };
    let precision = frac(tp, tp + fp);
    let sensitivity = frac(tp, tp + fneg);
    let f1 = match (precision, sensitivity) {
        (Some(pr), Some(se)) if pr + se > 0.0 => Some(2.0 * pr * se / (pr + se)),
        _ => None,
    };
    Recount {
        confusion: ConfusionMatrix { tp, fp, tn, fn_: fneg },
        accuracy: frac(tp + tn, truth.len()),
        sensitivity,
        specificity: frac(tn, tn + fp),
        precision,
        f1,
    }
}
