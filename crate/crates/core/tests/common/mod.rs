#![allow(dead_code)]

pub mod oracles;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use subspace_graphs::trees::{LabeledTree, TreeNode};
use subspace_graphs::{Dataset, Instance, Label};

pub const BLOB_RADIUS: f64 = 1.0;
pub const BLOB_SEPARATION: f64 = 10.0 * BLOB_RADIUS;

/// Two 2-D Gaussian blobs with every point within `BLOB_RADIUS` of its
/// centre; centres `BLOB_SEPARATION` apart. Ids `0..n` are `+1`, the rest `-1`.
pub fn blobs(n_per_class: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, BLOB_RADIUS / 3.0).unwrap();
    let mut instances = Vec::with_capacity(2 * n_per_class);
    for (label, cx) in [(Label::Positive, 0.0), (Label::Negative, BLOB_SEPARATION)] {
        let mut made = 0;
        while made < n_per_class {
            let (dx, dy): (f64, f64) = (normal.sample(&mut rng), normal.sample(&mut rng));
            if dx.hypot(dy) > BLOB_RADIUS {
                continue;
            }
            instances.push(Instance::new(instances.len(), vec![cx + dx, dy], label));
            made += 1;
        }
    }
    Dataset::new("blobs", instances).unwrap()
}

/// A point drawn uniformly from the disc of the given blob.
pub fn near_blob(label: Label, rng: &mut impl Rng) -> Vec<f64> {
    let cx = match label {
        Label::Positive => 0.0,
        Label::Negative => BLOB_SEPARATION,
    };
    loop {
        let (dx, dy) = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        if f64::hypot(dx, dy) <= BLOB_RADIUS {
            return vec![cx + dx, dy];
        }
    }
}

pub fn random_points(rng: &mut impl Rng, n: usize, dim: usize, first_id: usize) -> Vec<TreeNode> {
    (0..n)
        .map(|i| {
            TreeNode::new(
                first_id + i,
                (0..dim).map(|_| rng.random_range(-5.0..5.0)).collect(),
            )
        })
        .collect()
}

/// A uniformly random labelled tree on `points` (random Prüfer sequence).
pub fn random_tree(rng: &mut impl Rng, points: Vec<TreeNode>) -> LabeledTree {
    let gamma = points.len();
    let seq: Vec<usize> = (0..gamma.saturating_sub(2))
        .map(|_| rng.random_range(0..gamma))
        .collect();
    let edges = subspace_graphs::trees::decode_pruefer(&seq, gamma).unwrap();
    LabeledTree::from_edges(points.into(), &edges).unwrap()
}

pub fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

pub fn random_tree_on(rng: &mut impl Rng, gamma: usize, dim: usize) -> LabeledTree {
    let points = random_points(rng, gamma, dim, 0);
    random_tree(rng, points)
}
