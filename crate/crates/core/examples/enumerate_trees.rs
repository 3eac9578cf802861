//! Enumerates every labelled spanning tree over small neighbourhoods and
//! reports the geometry a query sees against one of them.

use subspace_graphs::trees::{enumerate_spanning_trees, point_to_tree_distance, tree_threshold, TreeNode};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for gamma in 2..=6 {
        let nodes: Vec<TreeNode> = (0..gamma)
            .map(|i| {
                let angle = i as f64 * std::f64::consts::TAU / gamma as f64;
                TreeNode::new(i, vec![angle.cos(), angle.sin()])
            })
            .collect();
        let trees = enumerate_spanning_trees(&nodes)?;
        let lightest = trees.iter().map(|t| t.weight_sum()).fold(f64::INFINITY, f64::min);
        println!("gamma {gamma}: {} trees, lightest weight sum {lightest:.4}", trees.len());
    }

    let nodes: Vec<TreeNode> = [[0.0, 0.0], [2.0, 0.0], [2.0, 1.0], [0.0, 3.0]]
        .iter()
        .enumerate()
        .map(|(i, p)| TreeNode::new(i, p.to_vec()))
        .collect();
    let trees = enumerate_spanning_trees(&nodes)?;
    let tree = &trees[0];
    let z = [1.0, 1.5];
    let d = point_to_tree_distance(&z, tree)?;
    println!("tree edges {:?}", tree.edges());
    println!("edge lengths {:?}", tree.edge_lengths());
    println!("z = {z:?}: per-edge distances {:?}, minimum {:.4}", d.per_edge, d.min_dist);
    for alpha in [0.0, 0.5, 1.0] {
        println!("threshold at alpha {alpha}: {:.4}", tree_threshold(tree, alpha));
    }
    Ok(())
}
