//! Trains on the banana fixture, saves the model as JSON, reloads it and
//! checks that predictions are unchanged.

use std::path::PathBuf;

use subspace_graphs::dataset::{load_csv, make_class_split, LabelColumn};
use subspace_graphs::training::{load_model, save_model};
use subspace_graphs::{classify_batch, train, HyperParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let data_dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data");
    let data = load_csv(data_dir.join("banana.csv"), &LabelColumn::Name("class".into()), "-1")?;
    let params = HyperParams::default();
    let split = make_class_split(&data, params.s_fraction, params.seed)?;
    let model = train(&split, &params)?;

    let path = std::env::temp_dir().join("subspace-graphs-banana-model.json");
    save_model(&model, &path)?;
    let bytes = std::fs::metadata(&path)?.len();
    let reloaded = load_model(&path)?;
    println!("saved {} ({bytes} bytes), reload equal: {}", path.display(), reloaded == model);

    let queries: Vec<Vec<f64>> = data.instances().iter().take(200).map(|i| i.features.clone()).collect();
    let before = classify_batch(&queries, &model)?;
    let after = classify_batch(&queries, &reloaded)?;
    println!("{} predictions identical after reload: {}", queries.len(), before == after);
    std::fs::remove_file(&path)?;
    Ok(())
}
