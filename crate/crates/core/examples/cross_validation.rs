//! Five-fold stratified cross-validation on the Breast Cancer Wisconsin
//! fixture with min-max scaling, printed as the metrics CSV.

use std::path::PathBuf;

use subspace_graphs::dataset::{load_csv, LabelColumn};
use subspace_graphs::evaluation::{cross_validate_with, write_cv_csv, SptClassifier};
use subspace_graphs::HyperParams;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/breast_cancer_wisconsin.csv");
    let data = load_csv(path, &LabelColumn::Name("class".into()), "benign")?;
    let params = HyperParams {
        gamma: 5,
        boundary_alpha: 0.8,
        beta_alpha: 0.5,
        best_spt: 15,
        k_neighbours: 7,
        k1: 3,
        s_fraction: 0.3,
        ..HyperParams::default()
    };
    let classifier = SptClassifier {
        params,
        min_max_scale: true,
    };
    let cv = cross_validate_with(&data, 5, classifier.params.seed, &classifier)?;
    write_cv_csv(std::io::stdout().lock(), data.name(), &cv)?;
    Ok(())
}
