//! Trains on two overlapping Gaussian clouds and classifies a line of
//! queries running from one class centre to the other.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use subspace_graphs::dataset::make_class_split;
use subspace_graphs::{classify, train, Dataset, HyperParams, Instance, Label, TrainedModel};

fn clouds(n: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 0.8).unwrap();
    let instances = (0..n)
        .map(|id| {
            let (label, cx) = if id % 2 == 0 { (Label::Positive, 0.0) } else { (Label::Negative, 3.0) };
            Instance::new(id, vec![cx + noise.sample(&mut rng), noise.sample(&mut rng)], label)
        })
        .collect();
    Dataset::new("clouds", instances).unwrap()
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let params = HyperParams {
        gamma: 4,
        ..HyperParams::default()
    };
    let split = make_class_split(&clouds(200, 1), params.s_fraction, params.seed)?;
    let model = train(&split, &params)?;
    println!(
        "pools: {} positive, {} negative, {} probes",
        model.x0.len(),
        model.x1.len(),
        model.owners.len()
    );
    for (name, zeta) in [("zeta0", &model.zeta0), ("zeta1", &model.zeta1)] {
        if let Some(s) = TrainedModel::survivor_stats(zeta) {
            println!("{name}: survivors per probe min {} mean {:.1} max {}", s.min, s.mean, s.max);
        }
    }
    for step in 0..=6 {
        let z = [step as f64 * 0.5, 0.0];
        let p = classify(&z, &model)?;
        println!(
            "z = ({:.1}, 0.0): {:>2}  vote share {:.2}  selected {:?}",
            z[0],
            p.label,
            p.vote_share(),
            p.selected_counts
        );
    }
    Ok(())
}
