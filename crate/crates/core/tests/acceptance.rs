//! Acceptance suite: one line per criterion.
//!
//! Criteria 1–8 are deterministic properties and must all pass. Criteria 9–13
//! run 5-fold cross-validation on the public datasets under `data/` (or
//! `$SPT_DATA_DIR`) with the parameters pinned below. A criterion whose
//! dataset is not present is reported as FAIL with the missing path; it does
//! not fail the process, every other FAIL does.

mod common;

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use subspace_graphs::dataset::{load_csv, make_class_split, LabelColumn};
use subspace_graphs::evaluation::{compute_metrics, cross_validate_with, roc_auc, ConfusionMatrix, SptClassifier};
use subspace_graphs::inference::{select_indices, Objective};
use subspace_graphs::spt_cd::{Branch, PairwiseRule, TieBreak};
use subspace_graphs::trees::{
    enumerate_spanning_trees, is_spanning_tree, point_to_edge_distance, point_to_tree_distance, tree_threshold,
};
use subspace_graphs::{train, HyperParams, Label};

use common::oracles::{eta_selection, overlapping, pairwise_auc, recount, stored, survivors};
use common::{blobs, random_points, random_tree_on};

enum Verdict {
    Pass(String),
    Fail(String),
    /// The criterion's dataset is not available locally.
    Missing(String),
}

fn check(ok: bool, detail: String) -> Verdict {
    if ok {
        Verdict::Pass(detail)
    } else {
        Verdict::Fail(detail)
    }
}

struct Tally {
    failed: usize,
    missing: usize,
    passed: usize,
}

impl Tally {
    fn run(&mut self, id: u32, title: &str, limit: Duration, body: impl FnOnce() -> Verdict) {
        let started = Instant::now();
        let verdict = catch_unwind(AssertUnwindSafe(body))
            .unwrap_or_else(|panic| {
                let msg = panic
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                Verdict::Fail(format!("panicked: {msg}"))
            });
        let elapsed = started.elapsed();
        let verdict = match verdict {
            Verdict::Pass(detail) if elapsed > limit => {
                Verdict::Fail(format!("{detail}; took {:.1} s, limit {} s", elapsed.as_secs_f64(), limit.as_secs()))
            }
            v => v,
        };
        let (tag, detail) = match &verdict {
            Verdict::Pass(d) => ("PASS", d.clone()),
            Verdict::Fail(d) => ("FAIL", d.clone()),
            Verdict::Missing(d) => ("FAIL", format!("dataset not available: {d}")),
        };
        println!("criterion {id:>2} {tag} {title} [{:.2} s] {detail}", elapsed.as_secs_f64());
        match verdict {
            Verdict::Pass(_) => self.passed += 1,
            Verdict::Fail(_) => self.failed += 1,
            Verdict::Missing(_) => self.missing += 1,
        }
    }
}

fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

fn cayley() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut counts = Vec::new();
    for gamma in 2..=5 {
        let trees = enumerate_spanning_trees(&random_points(&mut rng, gamma, 3, 0)).unwrap();
        let distinct: BTreeSet<Vec<(usize, usize)>> = trees.iter().map(|h| h.edges().to_vec()).collect();
        if distinct.len() != trees.len() || !trees.iter().all(|h| is_spanning_tree(gamma, h.edges())) {
            return Verdict::Fail(format!("gamma {gamma}: duplicate or non-spanning tree"));
        }
        counts.push((gamma, trees.len()));
    }
    // Brute force over all 3-edge subsets of K4.
    let all: Vec<(usize, usize)> = (0..4).flat_map(|i| (i + 1..4).map(move |j| (i, j))).collect();
    let mut brute = BTreeSet::new();
    for a in 0..6 {
        for b in a + 1..6 {
            for c in b + 1..6 {
                let e = [all[a], all[b], all[c]];
                let mut reach = 1u8;
                for _ in 0..3 {
                    for &(x, y) in &e {
                        if reach & (1 << x) != 0 || reach & (1 << y) != 0 {
                            reach |= (1 << x) | (1 << y);
                        }
                    }
                }
                if reach == 0b1111 {
                    brute.insert(e.to_vec());
                }
            }
        }
    }
    let trees = enumerate_spanning_trees(&random_points(&mut rng, 4, 2, 0)).unwrap();
    let mut enumerated = BTreeSet::new();
    for h in &trees {
        let mut e = h.edges().to_vec();
        e.sort();
        enumerated.insert(e);
    }
    let ok = counts == [(2, 1), (3, 3), (4, 16), (5, 125)] && enumerated == brute && brute.len() == 16;
    check(ok, format!("counts {counts:?}; K4 brute force {} of 20 subsets, match {}", brute.len(), enumerated == brute))
}

fn scan_3d(z: &[f64; 3], a: &[f64; 3], b: &[f64; 3]) -> f64 {
    const SAMPLES: usize = 100_000;
    let mut best = f64::INFINITY;
    for i in 0..SAMPLES {
        let t = i as f64 / (SAMPLES - 1) as f64;
        let mut d2 = 0.0;
        for k in 0..3 {
            let p = a[k] + t * (b[k] - a[k]);
            d2 += (z[k] - p) * (z[k] - p);
        }
        best = best.min(d2);
    }
    best.sqrt()
}

fn projection() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst_rel = 0.0f64;
    let mut asymmetric = 0;
    let mut translation_breaks = 0;
    for _ in 0..1000 {
        let mut p = || -> [f64; 3] { [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)] };
        let (z, a, b) = (p(), p(), p());
        let ours = point_to_edge_distance(&z, &a, &b).unwrap().distance;
        let scan = scan_3d(&z, &a, &b);
        worst_rel = worst_rel.max((scan - ours).abs() / ours);
        if point_to_edge_distance(&z, &b, &a).unwrap() != point_to_edge_distance(&z, &a, &b).unwrap() {
            asymmetric += 1;
        }
        // Exact translation check on the same triple snapped to a 1/1024
        // grid, shifted by integers: every intermediate stays representable.
        let snap = |v: [f64; 3]| v.map(|x| (x * 1024.0).round() / 1024.0);
        let (zs, as_, bs) = (snap(z), snap(a), snap(b));
        let shift = [rng.random_range(-50..=50) as f64, rng.random_range(-50..=50) as f64, rng.random_range(-50..=50) as f64];
        let mv = |v: [f64; 3]| [v[0] + shift[0], v[1] + shift[1], v[2] + shift[2]];
        if point_to_edge_distance(&zs, &as_, &bs).unwrap() != point_to_edge_distance(&mv(zs), &mv(as_), &mv(bs)).unwrap() {
            translation_breaks += 1;
        }
    }
    check(
        worst_rel <= 1e-6 && asymmetric == 0 && translation_breaks == 0,
        format!("max rel err vs 1e5-sample scan {worst_rel:.2e} (tol 1e-6); asymmetric {asymmetric}; translation mismatches {translation_breaks}"),
    )
}

fn totality() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut branch_mismatch = 0;
    let mut branches = [0usize; 4];
    for _ in 0..5000 {
        let (g0, g1) = (rng.random_range(2..=5), rng.random_range(2..=5));
        let h = random_tree_on(&mut rng, g0, 2);
        let hp = random_tree_on(&mut rng, g1, 2);
        let z = vec![rng.random_range(-8.0..8.0), rng.random_range(-8.0..8.0)];
        let alpha = rng.random_range(0.0..=1.0);
        let tie = if rng.random_bool(0.5) { TieBreak::CloserTreeWins } else { TieBreak::FartherTreeWins };
        let d = match PairwiseRule::new(alpha, rng.random_range(1..6), tie).unwrap().classify(&h, &hp, &z) {
            Ok(d) => d,
            Err(e) => return Verdict::Fail(format!("decision failed: {e}")),
        };
        let accept0 = point_to_tree_distance(&z, &h).unwrap().min_dist <= tree_threshold(&h, alpha);
        let accept1 = point_to_tree_distance(&z, &hp).unwrap().min_dist <= tree_threshold(&hp, alpha);
        let expected = match (accept0, accept1) {
            (true, false) => Branch::Accept0Reject1,
            (false, true) => Branch::Reject0Accept1,
            (true, true) => Branch::BothAccept,
            (false, false) => Branch::BothReject,
        };
        if d.branch != expected {
            branch_mismatch += 1;
        }
        branches[match expected {
            Branch::Accept0Reject1 => 0,
            Branch::Reject0Accept1 => 1,
            Branch::BothAccept => 2,
            Branch::BothReject => 3,
        }] += 1;
    }
    check(
        branch_mismatch == 0 && branches.iter().all(|&n| n > 0),
        format!("5000 random pairs, branch mismatches {branch_mismatch}, branch counts {branches:?}"),
    )
}

fn training_oracle() -> Verdict {
    let mut compared = 0;
    for seed in 0..10 {
        let data = overlapping(50, seed);
        let params = HyperParams {
            gamma: 3,
            seed,
            ..HyperParams::default()
        };
        let split = make_class_split(&data, params.s_fraction, seed).unwrap();
        let model = train(&split, &params).unwrap();
        let [o0, o1] = survivors(&split, &params);
        if stored(&model.zeta0) != o0 || stored(&model.zeta1) != o1 {
            return Verdict::Fail(format!("survivor sets differ from recount at seed {seed}"));
        }
        compared += split.s.len();
    }
    Verdict::Pass(format!("10 splits of 50 points, {compared} probes recounted exactly"))
}

fn selection_oracle() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for case in 0..1000 {
        let n = rng.random_range(1..40);
        let sums: Vec<f64> = (0..n).map(|_| f64::from(rng.random_range(0..256)) / 8.0).collect();
        let beta = f64::from(rng.random_range(0..256)) / 8.0;
        let best_spt = rng.random_range(1..50);
        let ours = select_indices(&sums, Some(beta), best_spt, Objective::Closest).unwrap();
        if ours != eta_selection(&sums, beta, best_spt) {
            return Verdict::Fail(format!("set {case}: |delta| order {ours:?} differs from eta order"));
        }
    }
    Verdict::Pass("1000 random candidate sets identical".into())
}

fn metric_oracles() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let label = |b: bool| if b { Label::Positive } else { Label::Negative };
    for case in 0..1000 {
        let n = rng.random_range(2..=200);
        let truth: Vec<Label> = (0..n).map(|_| label(rng.random_bool(0.5))).collect();
        let predicted: Vec<Label> = (0..n).map(|_| label(rng.random_bool(0.5))).collect();
        let cm = ConfusionMatrix::from_labels(&truth, &predicted).unwrap();
        let m = compute_metrics(&cm).unwrap();
        let r = recount(&truth, &predicted);
        let same = cm == r.confusion
            && m.accuracy == r.accuracy
            && m.sensitivity == r.sensitivity
            && m.specificity == r.specificity
            && m.precision == r.precision
            && m.f1 == r.f1;
        if !same {
            return Verdict::Fail(format!("case {case}: metrics differ from recount"));
        }
        if truth.contains(&Label::Positive) && truth.contains(&Label::Negative) {
            let levels = rng.random_range(2..20);
            let scores: Vec<(f64, Label)> = truth
                .iter()
                .map(|&t| (f64::from(rng.random_range(0..levels)) / f64::from(levels), t))
                .collect();
            if roc_auc(&scores).unwrap().auc != pairwise_auc(&scores) {
                return Verdict::Fail(format!("case {case}: AUC differs from pairwise oracle"));
            }
        }
    }
    Verdict::Pass("1000 random cases of size <= 200, metrics and AUC identical".into())
}

fn blobs_end_to_end() -> Verdict {
    let data = blobs(20, 0);
    let mut details = Vec::new();
    let mut ok = true;
    for gamma in [2, 3, 4] {
        let params = HyperParams {
            gamma,
            ..HyperParams::default()
        };
        let cv = cross_validate_with(&data, 5, params.seed, &SptClassifier::new(params)).unwrap();
        let accs: Vec<Option<f64>> = cv.folds.iter().map(|f| f.metrics.accuracy).collect();
        let aucs: Vec<Option<f64>> = cv.folds.iter().map(|f| f.auc).collect();
        let perfect = accs.iter().all(|&a| a == Some(1.0)) && aucs.iter().all(|&a| a == Some(1.0));
        ok &= perfect && cv.pooled.auc == Some(1.0);
        details.push(format!(
            "gamma {gamma}: acc {} auc {}",
            cv.spread.accuracy.mean.unwrap_or(f64::NAN),
            cv.pooled.auc.unwrap_or(f64::NAN)
        ));
    }
    check(ok, details.join("; "))
}

fn determinism() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("blobs.csv");
    blobs(20, 0).write_csv(std::fs::File::create(&data).unwrap()).unwrap();
    let mut runs = Vec::new();
    for name in ["first", "second"] {
        let out = dir.path().join(name);
        for cmd in ["train", "evaluate"] {
            let status = Command::new(env!("CARGO_BIN_EXE_spt-cd"))
                .args([cmd, "--dataset", data.to_str().unwrap(), "--label-col", "label", "--positive-label", "1"])
                .args(["--gamma", "3", "--out", out.to_str().unwrap()])
                .output()
                .unwrap();
            if !status.status.success() {
                return Verdict::Fail(format!("{cmd} failed: {}", String::from_utf8_lossy(&status.stderr)));
            }
        }
        runs.push(out);
    }
    let files = ["model.json", "metrics.csv", "roc.tsv"];
    let differing: Vec<&str> = files
        .iter()
        .copied()
        .filter(|f| std::fs::read(runs[0].join(f)).unwrap() != std::fs::read(runs[1].join(f)).unwrap())
        .collect();
    check(differing.is_empty(), format!("compared {files:?}; differing {differing:?}"))
}

fn data_dir() -> PathBuf {
    std::env::var_os("SPT_DATA_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data"))
}

struct Benchmark {
    file: &'static str,
    label: LabelColumn,
    positive: &'static str,
    params: HyperParams,
    min_accuracy: Option<f64>,
    min_auc: Option<f64>,
}

fn benchmark(b: Benchmark) -> Verdict {
    let path = data_dir().join(b.file);
    if !path.exists() {
        return Verdict::Missing(path.display().to_string());
    }
    let data = load_csv(&path, &b.label, b.positive).unwrap();
    let classifier = SptClassifier {
        params: b.params.clone(),
        min_max_scale: true,
    };
    let cv = cross_validate_with(&data, 5, b.params.seed, &classifier).unwrap();
    let acc = cv.spread.accuracy.mean.unwrap_or(0.0);
    let auc = cv.spread.auc.mean.unwrap_or(0.0);
    let ok = b.min_accuracy.is_none_or(|t| acc >= t) && b.min_auc.is_none_or(|t| auc >= t);
    let mut targets = Vec::new();
    if let Some(t) = b.min_accuracy {
        targets.push(format!("acc >= {t}"));
    }
    if let Some(t) = b.min_auc {
        targets.push(format!("auc >= {t}"));
    }
    check(ok, format!("5-fold mean acc {acc:.4}, auc {auc:.4} (target {})", targets.join(", ")))
}

/// Settings selected with `spt-cd grid` (5-fold, seed 0, min-max scaling).
fn tuned(gamma: usize, k_neighbours: usize, k1: usize) -> HyperParams {
    HyperParams {
        gamma,
        boundary_alpha: 0.8,
        beta_alpha: 0.5,
        best_spt: 15,
        k_neighbours,
        k1,
        s_fraction: 0.3,
        ..HyperParams::default()
    }
}

fn main() {
    let mut t = Tally {
        failed: 0,
        missing: 0,
        passed: 0,
    };
    t.run(1, "Cayley enumeration", secs(1), cayley);
    t.run(2, "projection geometry", secs(120), projection);
    t.run(3, "pairwise totality and branches", secs(120), totality);
    t.run(4, "training survivor recount (gamma 3)", secs(120), training_oracle);
    t.run(5, "selection |delta| vs eta", secs(60), selection_oracle);
    t.run(6, "metric and AUC oracles", secs(60), metric_oracles);
    t.run(7, "separated blobs end to end", secs(30), blobs_end_to_end);
    t.run(8, "byte-identical reruns", secs(120), determinism);
    t.run(9, "banknote authentication accuracy", secs(300), || {
        benchmark(Benchmark {
            file: "banknote.csv",
            label: LabelColumn::Index(4),
            positive: "1",
            params: HyperParams::default(),
            min_accuracy: Some(1.0),
            min_auc: None,
        })
    });
    t.run(10, "breast cancer wisconsin accuracy and AUC", secs(600), || {
        benchmark(Benchmark {
            file: "breast_cancer_wisconsin.csv",
            label: LabelColumn::Name("class".into()),
            positive: "benign",
            params: tuned(5, 7, 3),
            min_accuracy: Some(0.92),
            min_auc: Some(0.90),
        })
    });
    t.run(11, "banana accuracy", secs(1200), || {
        benchmark(Benchmark {
            file: "banana.csv",
            label: LabelColumn::Name("class".into()),
            positive: "-1",
            params: HyperParams::default(),
            min_accuracy: Some(0.80),
            min_auc: None,
        })
    });
    t.run(12, "sonar AUC", secs(300), || {
        benchmark(Benchmark {
            file: "sonar.csv",
            label: LabelColumn::Name("class".into()),
            positive: "R",
            params: tuned(5, 3, 1),
            min_accuracy: None,
            min_auc: Some(0.78),
        })
    });
    t.run(13, "arcene accuracy", secs(600), || {
        benchmark(Benchmark {
            file: "arcene.csv",
            label: LabelColumn::Index(10_000),
            positive: "1",
            params: HyperParams::default(),
            min_accuracy: Some(0.78),
            min_auc: None,
        })
    });
    println!(
        "acceptance: {} passed, {} failed, {} failed for missing data",
        t.passed, t.failed, t.missing
    );
    if t.failed > 0 {
        std::process::exit(1);
    }
}
