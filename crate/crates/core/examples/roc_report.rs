//! Pooled ROC curve of a cross-validated run on the sonar fixture, scored by
//! vote share.

use std::path::PathBuf;

use subspace_graphs::dataset::{load_csv, LabelColumn};
use subspace_graphs::evaluation::{cross_validate_with, write_roc_tsv, SptClassifier};
use subspace_graphs::HyperParams;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/sonar.csv");
    let data = load_csv(path, &LabelColumn::Name("class".into()), "R")?;
    let params = HyperParams {
        gamma: 5,
        boundary_alpha: 0.8,
        beta_alpha: 0.5,
        best_spt: 15,
        k_neighbours: 3,
        k1: 1,
        s_fraction: 0.3,
        ..HyperParams::default()
    };
    let classifier = SptClassifier {
        params,
        min_max_scale: true,
    };
    let cv = cross_validate_with(&data, 5, classifier.params.seed, &classifier)?;
    for (f, fold) in cv.folds.iter().enumerate() {
        println!("fold {f}: n {} auc {:?}", fold.n, fold.auc);
    }
    println!("pooled auc {:?}", cv.pooled.auc);
    let runs = [("pooled".to_string(), cv.pooled.roc_points.as_slice())];
    write_roc_tsv(std::io::stdout().lock(), &runs)?;
    Ok(())
}
