//! Small hyperparameter grid over gamma and k1 on the sonar fixture, ranked
//! by mean cross-validated accuracy. `spt-cd grid` runs the same loop with
//! any list-valued parameter.

use std::path::PathBuf;

use subspace_graphs::dataset::{load_csv, LabelColumn};
use subspace_graphs::evaluation::{cross_validate_with, SptClassifier};
use subspace_graphs::HyperParams;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/sonar.csv");
    let data = load_csv(path, &LabelColumn::Name("class".into()), "R")?;
    let mut results = Vec::new();
    for gamma in [3, 4, 5] {
        for k1 in [1, 2, 3] {
            let params = HyperParams {
                gamma,
                k1,
                boundary_alpha: 0.8,
                best_spt: 15,
                s_fraction: 0.3,
                ..HyperParams::default()
            };
            let classifier = SptClassifier {
                params,
                min_max_scale: true,
            };
            let cv = cross_validate_with(&data, 5, 0, &classifier)?;
            let acc = cv.spread.accuracy.mean.unwrap_or(f64::NAN);
            let auc = cv.spread.auc.mean.unwrap_or(f64::NAN);
            println!("gamma {gamma} k1 {k1}: accuracy {acc:.4} auc {auc:.4}");
            results.push((acc, gamma, k1));
        }
    }
    results.sort_by(|a, b| b.0.total_cmp(&a.0));
    let (acc, gamma, k1) = results[0];
    println!("best: gamma {gamma} k1 {k1} accuracy {acc:.4}");
    Ok(())
}
