//! Accuracy as a function of the training fraction on the sonar fixture.
//! Each ratio is resampled several times with consecutive seeds.

use std::path::PathBuf;

use subspace_graphs::dataset::{load_csv, LabelColumn};
use subspace_graphs::evaluation::{train_ratio_sweep_with, SptClassifier, SWEEP_REPETITIONS};
use subspace_graphs::HyperParams;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/sonar.csv");
    let data = load_csv(path, &LabelColumn::Name("class".into()), "R")?;
    let classifier = SptClassifier {
        params: HyperParams::default(),
        min_max_scale: true,
    };
    let ratios = [0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];
    let rows = train_ratio_sweep_with(&data, &ratios, classifier.params.seed, &classifier)?;
    println!("ratio  mean    min     max     ({SWEEP_REPETITIONS} repetitions)");
    for row in rows {
        match (row.error, row.accuracy.mean, row.accuracy.min, row.accuracy.max) {
            (Some(e), ..) => println!("{:.1}    error: {e}", row.ratio),
            (None, Some(mean), Some(min), Some(max)) => {
                println!("{:.1}    {mean:.4}  {min:.4}  {max:.4}", row.ratio)
            }
            (None, ..) => println!("{:.1}    undefined", row.ratio),
        }
    }
    Ok(())
}
