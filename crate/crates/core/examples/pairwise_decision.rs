//! One tree per class and a few queries around them. Queries rejected by
//! both trees fall through to the tie-break, where the two modes can differ.

use std::sync::Arc;

use subspace_graphs::spt_cd::{PairwiseRule, TieBreak};
use subspace_graphs::trees::{LabeledTree, TreeNode};

fn path(first_id: usize, points: &[[f64; 2]]) -> Result<LabeledTree, Box<dyn std::error::Error>> {
    let nodes: Arc<[TreeNode]> = points
        .iter()
        .enumerate()
        .map(|(i, p)| TreeNode::new(first_id + i, p.to_vec()))
        .collect();
    let edges: Vec<(usize, usize)> = (1..points.len()).map(|i| (i - 1, i)).collect();
    Ok(LabeledTree::from_edges(nodes, &edges)?)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let positive = path(0, &[[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]])?;
    let negative = path(10, &[[0.0, 3.0], [1.0, 3.0], [2.0, 3.5]])?;

    let queries = [
        ("near the +1 tree", [1.0, 0.4]),
        ("near the -1 tree", [1.0, 2.7]),
        ("midway", [1.0, 1.5]),
        ("far away", [9.0, 9.0]),
    ];
    for tie_break in [TieBreak::CloserTreeWins, TieBreak::FartherTreeWins] {
        let rule = PairwiseRule::new(1.0, 2, tie_break)?;
        println!("{tie_break:?}");
        for (what, z) in queries {
            let d = rule.classify(&positive, &negative, &z)?;
            println!(
                "  {what:<17} d0 {:.3} (theta0 {:.3})  d1 {:.3} (theta1 {:.3})  {:?} -> {}",
                d.d0, d.theta0, d.d1, d.theta1, d.branch, d.vote
            );
        }
    }
    Ok(())
}
