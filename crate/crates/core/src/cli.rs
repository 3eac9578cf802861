//! The `spt-cd` command line: `train`, `classify`, `evaluate`, `sweep` and
//! `grid`.
//!
//! Settings come from an optional JSON config file (`--config`) overlaid by
//! flags; flags win. Unknown config keys are rejected. Every run writes its
//! artifacts plus a `manifest.json` (config echo and SHA-256 of each artifact)
//! into the output directory; wall-clock timings go to `run.log` only, so two
//! runs with the same config produce byte-identical artifacts and manifests.
//!
//! Exit status: 0 on success, 1 on runtime errors, 2 on usage errors.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::dataset::{load_csv, make_class_split, read_features, Dataset, LabelColumn};
use crate::evaluation::{
    cross_validate_with, train_ratio_sweep_with, write_cv_csv, write_roc_tsv, write_sweep_csv,
    CrossValidation, SptClassifier,
};
use crate::inference::{classify_batch, Objective};
use crate::spt_cd::TieBreak;
use crate::training::{load_model, save_model, train, HyperParams, TrainedModel};
use crate::trees::DEFAULT_MAX_GAMMA;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Library(#[from] crate::Error),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn io_error(context: impl Into<String>) -> impl FnOnce(std::io::Error) -> CliError {
    let context = context.into();
    move |source| CliError::Io { context, source }
}

#[derive(Debug, Parser)]
#[command(name = "spt-cd", version, about = "Spanning-tree ensemble binary classifier")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train on a dataset and write the model file.
    Train(Flags),
    /// Classify the rows of an input CSV with a saved model.
    Classify(Flags),
    /// Stratified k-fold cross-validation.
    Evaluate(Flags),
    /// Accuracy across train ratios (resampled splits per ratio).
    Sweep(Flags),
    /// Cross-validate every combination of comma-separated parameter lists.
    Grid(Flags),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Train(_) => "train",
            Command::Classify(_) => "classify",
            Command::Evaluate(_) => "evaluate",
            Command::Sweep(_) => "sweep",
            Command::Grid(_) => "grid",
        }
    }

    fn flags(&self) -> &Flags {
        match self {
            Command::Train(f)
            | Command::Classify(f)
            | Command::Evaluate(f)
            | Command::Sweep(f)
            | Command::Grid(f) => f,
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// JSON config file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    /// Label column: a 0-based index or a header name.
    #[arg(long)]
    pub label_col: Option<String>,
    /// Raw label value mapped to +1; every other value maps to -1.
    #[arg(long)]
    pub positive_label: Option<String>,
    #[arg(long, value_delimiter = ',')]
    pub gamma: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    pub boundary_alpha: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub beta_alpha: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub best_spt: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    pub k_neighbours: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    pub k1: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    pub s_fraction: Option<Vec<f64>>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub folds: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub ratios: Option<Vec<f64>>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Model file (written by train, read by classify).
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Rows to classify.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub jobs: Option<usize>,
    #[arg(long, value_enum)]
    pub objective: Option<ObjectiveArg>,
    /// Resolve both-accept/both-reject pairs exactly as the original
    /// pseudocode reads.
    #[arg(long)]
    pub farther_tree_tiebreak: bool,
    /// Min-max scale features, fitted on each training side (evaluate, sweep,
    /// grid).
    #[arg(long)]
    pub min_max_scale: bool,
    /// Largest gamma allowed for enumeration.
    #[arg(long)]
    pub max_gamma: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ObjectiveArg {
    Closest,
    Farthest,
}

impl From<ObjectiveArg> for Objective {
    fn from(o: ObjectiveArg) -> Self {
        match o {
            ObjectiveArg::Closest => Objective::Closest,
            ObjectiveArg::Farthest => Objective::Farthest,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    fn into_vec(self) -> Vec<T> {
        match self {
            OneOrMany::One(v) => vec![v],
            OneOrMany::Many(v) => v,
        }
    }
}

/// Contents of a `--config` file. Every key is optional.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub dataset: Option<PathBuf>,
    pub label_col: Option<LabelColumn>,
    pub positive_label: Option<String>,
    pub gamma: Option<OneOrMany<usize>>,
    pub boundary_alpha: Option<OneOrMany<f64>>,
    pub beta_alpha: Option<OneOrMany<f64>>,
    pub best_spt: Option<OneOrMany<usize>>,
    pub k_neighbours: Option<OneOrMany<usize>>,
    pub k1: Option<OneOrMany<usize>>,
    pub s_fraction: Option<OneOrMany<f64>>,
    pub seed: Option<u64>,
    pub folds: Option<usize>,
    pub ratios: Option<Vec<f64>>,
    pub out: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub input: Option<PathBuf>,
    pub jobs: Option<usize>,
    pub objective: Option<Objective>,
    pub farther_tree_tiebreak: Option<bool>,
    pub min_max_scale: Option<bool>,
    pub max_gamma: Option<usize>,
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(io_error(format!("cannot read config {}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| usage(format!("config {}: {e}", path.display())))
    }

    /// Applies flags on top of this config.
    fn overlay(mut self, f: &Flags) -> Self {
        fn set<T: Clone>(slot: &mut Option<T>, flag: &Option<T>) {
            if flag.is_some() {
                slot.clone_from(flag);
            }
        }
        fn set_many<T: Clone>(slot: &mut Option<OneOrMany<T>>, flag: &Option<Vec<T>>) {
            if let Some(values) = flag {
                *slot = Some(OneOrMany::Many(values.clone()));
            }
        }
        set(&mut self.dataset, &f.dataset);
        if let Some(col) = &f.label_col {
            self.label_col = Some(LabelColumn::parse(col));
        }
        set(&mut self.positive_label, &f.positive_label);
        set_many(&mut self.gamma, &f.gamma);
        set_many(&mut self.boundary_alpha, &f.boundary_alpha);
        set_many(&mut self.beta_alpha, &f.beta_alpha);
        set_many(&mut self.best_spt, &f.best_spt);
        set_many(&mut self.k_neighbours, &f.k_neighbours);
        set_many(&mut self.k1, &f.k1);
        set_many(&mut self.s_fraction, &f.s_fraction);
        set(&mut self.seed, &f.seed);
        set(&mut self.folds, &f.folds);
        set(&mut self.ratios, &f.ratios);
        set(&mut self.out, &f.out);
        set(&mut self.model, &f.model);
        set(&mut self.input, &f.input);
        set(&mut self.jobs, &f.jobs);
        if let Some(o) = f.objective {
            self.objective = Some(o.into());
        }
        if f.farther_tree_tiebreak {
            self.farther_tree_tiebreak = Some(true);
        }
        if f.min_max_scale {
            self.min_max_scale = Some(true);
        }
        set(&mut self.max_gamma, &f.max_gamma);
        self
    }
}

/// Parameter lists for a grid; singletons for every other command.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParamGrid {
    pub gamma: Vec<usize>,
    pub boundary_alpha: Vec<f64>,
    pub beta_alpha: Vec<f64>,
    pub best_spt: Vec<usize>,
    pub k_neighbours: Vec<usize>,
    pub k1: Vec<usize>,
    pub s_fraction: Vec<f64>,
    pub seed: u64,
    pub objective: Objective,
    pub tie_break: TieBreak,
    pub max_gamma: usize,
}

impl ParamGrid {
    fn is_single(&self) -> bool {
        [
            self.gamma.len(),
            self.boundary_alpha.len(),
            self.beta_alpha.len(),
            self.best_spt.len(),
            self.k_neighbours.len(),
            self.k1.len(),
            self.s_fraction.len(),
        ]
        .iter()
        .all(|&n| n == 1)
    }

    /// Every combination, varying the last parameter fastest.
    pub fn combinations(&self) -> Vec<HyperParams> {
        let mut out = Vec::new();
        for &gamma in &self.gamma {
            for &boundary_alpha in &self.boundary_alpha {
                for &beta_alpha in &self.beta_alpha {
                    for &best_spt in &self.best_spt {
                        for &k_neighbours in &self.k_neighbours {
                            for &k1 in &self.k1 {
                                for &s_fraction in &self.s_fraction {
                                    out.push(HyperParams {
                                        gamma,
                                        boundary_alpha,
                                        beta_alpha,
                                        best_spt,
                                        k_neighbours,
                                        k1,
                                        s_fraction,
                                        seed: self.seed,
                                        objective: self.objective,
                                        tie_break: self.tie_break,
                                        max_gamma: self.max_gamma,
                                    });
                                }
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

/// Fully resolved settings, echoed into the manifest.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Resolved {
    pub command: String,
    pub dataset: Option<PathBuf>,
    pub label_col: LabelColumn,
    pub positive_label: String,
    pub params: ParamGrid,
    pub folds: usize,
    pub ratios: Vec<f64>,
    pub out: PathBuf,
    pub model: Option<PathBuf>,
    pub input: Option<PathBuf>,
    pub min_max_scale: bool,
    #[serde(skip)]
    pub jobs: Option<usize>,
}

impl Resolved {
    pub fn from_config(command: &str, config: RunConfig) -> Result<Self, CliError> {
        let defaults = HyperParams::default();
        let list = |v: Option<OneOrMany<f64>>, d: f64| v.map(OneOrMany::into_vec).unwrap_or_else(|| vec![d]);
        let ulist = |v: Option<OneOrMany<usize>>, d: usize| v.map(OneOrMany::into_vec).unwrap_or_else(|| vec![d]);
        let params = ParamGrid {
            gamma: ulist(config.gamma, defaults.gamma),
            boundary_alpha: list(config.boundary_alpha, defaults.boundary_alpha),
            beta_alpha: list(config.beta_alpha, defaults.beta_alpha),
            best_spt: ulist(config.best_spt, defaults.best_spt),
            k_neighbours: ulist(config.k_neighbours, defaults.k_neighbours),
            k1: ulist(config.k1, defaults.k1),
            s_fraction: list(config.s_fraction, defaults.s_fraction),
            seed: config.seed.unwrap_or(defaults.seed),
            objective: config.objective.unwrap_or_default(),
            tie_break: if config.farther_tree_tiebreak.unwrap_or(false) {
                TieBreak::FartherTreeWins
            } else {
                TieBreak::CloserTreeWins
            },
            max_gamma: config.max_gamma.unwrap_or(DEFAULT_MAX_GAMMA),
        };
        let resolved = Self {
            command: command.to_string(),
            dataset: config.dataset,
            label_col: config.label_col.unwrap_or(LabelColumn::Name("class".into())),
            positive_label: config.positive_label.unwrap_or_else(|| "1".into()),
            params,
            folds: config.folds.unwrap_or(5),
            ratios: config.ratios.unwrap_or_else(|| vec![0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]),
            out: config.out.unwrap_or_else(|| PathBuf::from("spt-cd-out")),
            model: config.model,
            input: config.input,
            min_max_scale: config.min_max_scale.unwrap_or(false),
            jobs: config.jobs,
        };
        resolved.validate()?;
        Ok(resolved)
    }

    fn validate(&self) -> Result<(), CliError> {
        let p = &self.params;
        let lists = [
            ("gamma", p.gamma.is_empty()),
            ("boundary_alpha", p.boundary_alpha.is_empty()),
            ("beta_alpha", p.beta_alpha.is_empty()),
            ("best_spt", p.best_spt.is_empty()),
            ("k_neighbours", p.k_neighbours.is_empty()),
            ("k1", p.k1.is_empty()),
            ("s_fraction", p.s_fraction.is_empty()),
        ];
        if let Some((name, _)) = lists.iter().find(|(_, empty)| *empty) {
            return Err(usage(format!("{name} list is empty")));
        }
        if self.command != "grid" && !p.is_single() {
            return Err(usage(format!(
                "parameter lists are only accepted by grid; {} takes single values",
                self.command
            )));
        }
        for params in p.combinations() {
            params.validate().map_err(|e| usage(e.to_string()))?;
        }
        if self.ratios.is_empty() {
            return Err(usage("ratios list is empty"));
        }
        if self.folds < 2 {
            return Err(usage(format!("folds must be at least 2, got {}", self.folds)));
        }
        if self.jobs == Some(0) {
            return Err(usage("jobs must be positive"));
        }
        if self.command != "classify" && self.dataset.is_none() {
            return Err(usage(format!("{} requires --dataset (or \"dataset\" in the config)", self.command)));
        }
        if self.command == "classify" {
            if self.model.is_none() {
                return Err(usage("classify requires --model"));
            }
            if self.input.is_none() {
                return Err(usage("classify requires --input"));
            }
        }
        Ok(())
    }

    pub fn single_params(&self) -> HyperParams {
        self.params.combinations().remove(0)
    }

    fn load_dataset(&self) -> Result<Dataset, CliError> {
        let path = self.dataset.as_ref().expect("validated");
        Ok(load_csv(path, &self.label_col, &self.positive_label).map_err(crate::Error::from)?)
    }

    fn model_path(&self) -> PathBuf {
        self.model.clone().unwrap_or_else(|| self.out.join("model.json"))
    }
}

/// Parses arguments, runs the command and returns the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli.command) {
        Ok(summary) => {
            print!("{summary}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(cause) = source {
                eprintln!("  caused by: {cause}");
                source = cause.source();
            }
            e.exit_code()
        }
    }
}

/// Runs one command and returns the text summary it prints.
pub fn execute(command: &Command) -> Result<String, CliError> {
    let flags = command.flags();
    let base = match &flags.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    let resolved = Resolved::from_config(command.name(), base.overlay(flags))?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(jobs) = resolved.jobs {
        builder = builder.num_threads(jobs);
    }
    let pool = builder
        .build()
        .map_err(|e| usage(format!("cannot start {} worker threads: {e}", resolved.jobs.unwrap_or(0))))?;
    pool.install(|| match command {
        Command::Train(_) => cmd_train(&resolved),
        Command::Classify(_) => cmd_classify(&resolved),
        Command::Evaluate(_) => cmd_evaluate(&resolved),
        Command::Sweep(_) => cmd_sweep(&resolved),
        Command::Grid(_) => cmd_grid(&resolved),
    })
}

/// Collects artifacts of one run and writes them with a manifest.
struct RunOutput<'a> {
    resolved: &'a Resolved,
    artifacts: Vec<(PathBuf, String)>,
}

impl<'a> RunOutput<'a> {
    fn create(resolved: &'a Resolved) -> Result<Self, CliError> {
        std::fs::create_dir_all(&resolved.out)
            .map_err(io_error(format!("cannot create output directory {}", resolved.out.display())))?;
        Ok(Self {
            resolved,
            artifacts: Vec::new(),
        })
    }

    fn write(&mut self, path: PathBuf, bytes: &[u8]) -> Result<(), CliError> {
        std::fs::write(&path, bytes).map_err(io_error(format!("cannot write {}", path.display())))?;
        self.artifacts.push((path, hex::encode(Sha256::digest(bytes))));
        Ok(())
    }

    fn file(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.resolved.out.join(name);
        self.write(path, bytes)
    }

    fn finish(self, started: Instant) -> Result<(), CliError> {
        #[derive(Serialize)]
        struct Artifact {
            path: PathBuf,
            sha256: String,
        }
        #[derive(Serialize)]
        struct Manifest<'a> {
            config: &'a Resolved,
            artifacts: Vec<Artifact>,
        }
        let manifest = Manifest {
            config: self.resolved,
            artifacts: self
                .artifacts
                .into_iter()
                .map(|(path, sha256)| Artifact { path, sha256 })
                .collect(),
        };
        let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        text.push('\n');
        let out = &self.resolved.out;
        std::fs::write(out.join("manifest.json"), text).map_err(io_error("cannot write manifest"))?;
        let log = format!(
            "command={} elapsed_seconds={:.3}\n",
            self.resolved.command,
            started.elapsed().as_secs_f64()
        );
        std::fs::write(out.join("run.log"), log).map_err(io_error("cannot write run.log"))?;
        Ok(())
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.4}")).unwrap_or_else(|| "undefined".into())
}

pub fn cmd_train(resolved: &Resolved) -> Result<String, CliError> {
    let started = Instant::now();
    let params = resolved.single_params();
    let dataset = resolved.load_dataset()?;
    let split = make_class_split(&dataset, params.s_fraction, params.seed).map_err(crate::Error::from)?;
    let model = train(&split, &params).map_err(crate::Error::from)?;

    let mut output = RunOutput::create(resolved)?;
    let model_path = resolved.model_path();
    if let Some(parent) = model_path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(io_error(format!("cannot create {}", parent.display())))?;
    }
    save_model(&model, &model_path).map_err(crate::Error::from)?;
    let bytes = std::fs::read(&model_path).map_err(io_error("cannot re-read model"))?;
    output.artifacts.push((model_path.clone(), hex::encode(Sha256::digest(&bytes))));
    output.finish(started)?;

    let mut summary = String::new();
    writeln!(summary, "model: {}", model_path.display()).unwrap();
    writeln!(summary, "owners: {}", model.owners.len()).unwrap();
    for (name, zeta) in [("zeta0", &model.zeta0), ("zeta1", &model.zeta1)] {
        if let Some(s) = TrainedModel::survivor_stats(zeta) {
            writeln!(summary, "{name} survivors per owner: min {} mean {:.2} max {}", s.min, s.mean, s.max).unwrap();
        }
    }
    writeln!(summary, "wall-clock: {:.3}s", started.elapsed().as_secs_f64()).unwrap();
    Ok(summary)
}

pub fn cmd_classify(resolved: &Resolved) -> Result<String, CliError> {
    let started = Instant::now();
    let model_path = resolved.model.as_ref().expect("validated");
    let input_path = resolved.input.as_ref().expect("validated");
    let model = load_model(model_path).map_err(crate::Error::from)?;
    let file = std::fs::File::open(input_path).map_err(io_error(format!("cannot read {}", input_path.display())))?;
    let mut rows = read_features(file).map_err(crate::Error::from)?;
    let expected = model.feature_count;
    if let Some(found) = rows.first().map(Vec::len) {
        // A labeled input carries one extra column; drop it when it is the
        // configured numeric label column.
        if found == expected + 1 {
            if let LabelColumn::Index(col) = resolved.label_col {
                if col < found {
                    for row in &mut rows {
                        row.remove(col);
                    }
                }
            }
        }
        let found = rows[0].len();
        if found != expected {
            return Err(CliError::Input(format!(
                "feature dimension mismatch: model expects m = {expected}, input has m = {found}"
            )));
        }
    }
    let predictions = classify_batch(&rows, &model).map_err(crate::Error::from)?;
    let mut text = String::from("row,label,vote_share\n");
    for (i, p) in predictions.iter().enumerate() {
        writeln!(text, "{i},{},{}", p.label.sign(), crate::numeric::real_string::encode(p.vote_share())).unwrap();
    }
    let mut output = RunOutput::create(resolved)?;
    output.file("predictions.csv", text.as_bytes())?;
    output.finish(started)?;
    let positives = predictions.iter().filter(|p| p.label.sign() == 1).count();
    Ok(format!(
        "classified {} rows ({} positive, {} negative) -> {}\n",
        predictions.len(),
        positives,
        predictions.len() - positives,
        resolved.out.join("predictions.csv").display()
    ))
}

fn classifier(resolved: &Resolved, params: HyperParams) -> SptClassifier {
    SptClassifier {
        params,
        min_max_scale: resolved.min_max_scale,
    }
}

fn headline(name: &str, cv: &CrossValidation) -> String {
    let s = &cv.spread;
    format!(
        "dataset\taccuracy\tsensitivity\tspecificity\tprecision\tf1\tauc\n{name}\t{}\t{}\t{}\t{}\t{}\t{}\n",
        fmt_opt(s.accuracy.mean),
        fmt_opt(s.sensitivity.mean),
        fmt_opt(s.specificity.mean),
        fmt_opt(s.precision.mean),
        fmt_opt(s.f1.mean),
        fmt_opt(s.auc.mean),
    )
}

pub fn cmd_evaluate(resolved: &Resolved) -> Result<String, CliError> {
    let started = Instant::now();
    let params = resolved.single_params();
    let dataset = resolved.load_dataset()?;
    let mut output = RunOutput::create(resolved)?;
    let cv = cross_validate_with(&dataset, resolved.folds, params.seed, &classifier(resolved, params))?;

    let mut csv_bytes = Vec::new();
    write_cv_csv(&mut csv_bytes, dataset.name(), &cv).map_err(crate::Error::from)?;
    output.file("metrics.csv", &csv_bytes)?;
    let mut runs: Vec<(String, &[(f64, f64)])> = cv
        .folds
        .iter()
        .enumerate()
        .map(|(f, r)| (format!("fold{f}"), r.roc_points.as_slice()))
        .collect();
    runs.push(("pooled".into(), cv.pooled.roc_points.as_slice()));
    let mut roc_bytes = Vec::new();
    write_roc_tsv(&mut roc_bytes, &runs).map_err(crate::Error::from)?;
    output.file("roc.tsv", &roc_bytes)?;
    output.finish(started)?;
    Ok(headline(dataset.name(), &cv))
}

pub fn cmd_sweep(resolved: &Resolved) -> Result<String, CliError> {
    let started = Instant::now();
    let params = resolved.single_params();
    let dataset = resolved.load_dataset()?;
    let mut output = RunOutput::create(resolved)?;
    let rows = train_ratio_sweep_with(&dataset, &resolved.ratios, params.seed, &classifier(resolved, params))?;
    let mut bytes = Vec::new();
    write_sweep_csv(&mut bytes, dataset.name(), &rows).map_err(crate::Error::from)?;
    output.file("sweep.csv", &bytes)?;
    output.finish(started)?;
    let mut summary = String::from("ratio\tmean\tmin\tmax\n");
    for row in &rows {
        match &row.error {
            Some(e) => writeln!(summary, "{}\terror: {e}", row.ratio).unwrap(),
            None => writeln!(
                summary,
                "{}\t{}\t{}\t{}",
                row.ratio,
                fmt_opt(row.accuracy.mean),
                fmt_opt(row.accuracy.min),
                fmt_opt(row.accuracy.max)
            )
            .unwrap(),
        }
    }
    Ok(summary)
}

pub fn cmd_grid(resolved: &Resolved) -> Result<String, CliError> {
    use crate::numeric::real_string::encode;
    let started = Instant::now();
    let dataset = resolved.load_dataset()?;
    let mut output = RunOutput::create(resolved)?;
    let cell = |v: Option<f64>| v.map(encode).unwrap_or_else(|| "undefined".into());

    let mut writer = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| crate::Error::from(crate::evaluation::EvaluationError::from(e));
    writer
        .write_record([
            "gamma", "boundary_alpha", "beta_alpha", "best_spt", "k_neighbours", "k1", "s_fraction",
            "mean_accuracy", "min_accuracy", "max_accuracy", "mean_auc", "error",
        ])
        .map_err(csv_err)?;
    let mut best: Option<(f64, HyperParams, CrossValidation)> = None;
    for params in resolved.params.combinations() {
        let result = cross_validate_with(&dataset, resolved.folds, params.seed, &classifier(resolved, params.clone()));
        let mut row = vec![
            params.gamma.to_string(),
            encode(params.boundary_alpha),
            encode(params.beta_alpha),
            params.best_spt.to_string(),
            params.k_neighbours.to_string(),
            params.k1.to_string(),
            encode(params.s_fraction),
        ];
        match result {
            Ok(cv) => {
                let acc = cv.spread.accuracy;
                row.extend([cell(acc.mean), cell(acc.min), cell(acc.max), cell(cv.spread.auc.mean), String::new()]);
                let score = acc.mean.unwrap_or(f64::NEG_INFINITY);
                if best.as_ref().is_none_or(|(b, _, _)| score > *b) {
                    best = Some((score, params, cv));
                }
            }
            Err(e) => row.extend([
                "undefined".into(),
                "undefined".into(),
                "undefined".into(),
                "undefined".into(),
                e.to_string(),
            ]),
        }
        writer.write_record(&row).map_err(csv_err)?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| CliError::Io {
            context: "cannot finish grid.csv".into(),
            source: e.into_error(),
        })?;
    output.file("grid.csv", &bytes)?;
    output.finish(started)?;
    match best {
        Some((_, params, cv)) => Ok(format!(
            "best: gamma={} boundary_alpha={} beta_alpha={} best_spt={} k_neighbours={} k1={} s_fraction={}\n{}",
            params.gamma,
            params.boundary_alpha,
            params.beta_alpha,
            params.best_spt,
            params.k_neighbours,
            params.k1,
            params.s_fraction,
            headline(dataset.name(), &cv)
        )),
        None => Err(CliError::Usage("no grid combination could be evaluated".into())),
    }
}
