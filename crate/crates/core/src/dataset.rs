//! Tabular datasets with binary labels, plus the splits the experiment
//! protocol needs: stratified train/test splits, stratified k-fold, and the
//! probe/class partition used by training.

use std::collections::HashMap;
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("line {line}: expected {expected} cells, found {found}")]
    Ragged {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {line}, column {column}: non-numeric feature cell {value:?}")]
    NonNumeric {
        line: usize,
        column: usize,
        value: String,
    },
    #[error("line {line}, column {column}: non-finite feature value {value:?}")]
    NonFinite {
        line: usize,
        column: usize,
        value: String,
    },
    #[error("label column {0} not found")]
    MissingLabelColumn(String),
    #[error("dataset has no rows")]
    Empty,
    #[error("dataset needs at least one instance of each label")]
    SingleClass,
    #[error("instance {id} has {found} features, expected {expected}")]
    FeatureCount {
        id: usize,
        expected: usize,
        found: usize,
    },
    #[error("duplicate instance id {0}")]
    DuplicateId(usize),
    #[error("ratio {0} must lie strictly between 0 and 1")]
    InvalidRatio(f64),
    #[error("train ratio {ratio} leaves the {label} class empty on one side of the split")]
    EmptySide { ratio: f64, label: Label },
    #[error("k-fold needs k >= 2, got {0}")]
    InvalidFoldCount(usize),
    #[error("the {label} class has {size} members, fewer than k - 1 = {} for k = {k}", k - 1)]
    ClassSmallerThanK { label: Label, size: usize, k: usize },
    #[error("probe fraction {0} must lie in (0, 1]")]
    InvalidProbeFraction(f64),
    #[error("probe fraction {fraction} leaves no {label} instances outside the probe set")]
    ClassExhausted { fraction: f64, label: Label },
    #[error("probe fraction {0} selects an empty probe set")]
    EmptyProbeSet(f64),
}

/// Binary class label. Serialized as the integer `1` or `-1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Positive,
    Negative,
}

impl Label {
    pub fn sign(self) -> i32 {
        match self {
            Label::Positive => 1,
            Label::Negative => -1,
        }
    }

    pub fn from_sign(sign: i32) -> Option<Self> {
        match sign {
            1 => Some(Label::Positive),
            -1 => Some(Label::Negative),
            _ => None,
        }
    }

    pub fn opposite(self) -> Self {
        match self {
            Label::Positive => Label::Negative,
            Label::Negative => Label::Positive,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:+}", self.sign())
    }
}

impl Serialize for Label {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_i32(self.sign())
    }
}

impl<'de> Deserialize<'de> for Label {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let sign = i32::deserialize(d)?;
        Label::from_sign(sign)
            .ok_or_else(|| serde::de::Error::custom(format!("label must be 1 or -1, got {sign}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub id: usize,
    #[serde(with = "crate::numeric::real_string::vec")]
    pub features: Vec<f64>,
    pub label: Label,
}

impl Instance {
    pub fn new(id: usize, features: Vec<f64>, label: Label) -> Self {
        Self {
            id,
            features,
            label,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    name: String,
    feature_count: usize,
    instances: Vec<Instance>,
}

impl Dataset {
    /// Builds a dataset, checking feature arity, finiteness, id uniqueness and
    /// that both labels are present.
    pub fn new(name: impl Into<String>, instances: Vec<Instance>) -> Result<Self, DatasetError> {
        let dataset = Self::from_parts(name, instances)?;
        if !dataset.has_both_labels() {
            return Err(DatasetError::SingleClass);
        }
        Ok(dataset)
    }

    /// Like [`Dataset::new`] but accepts a single-class instance set. Test
    /// folds of small datasets can legitimately hold one class only.
    pub fn from_parts(
        name: impl Into<String>,
        instances: Vec<Instance>,
    ) -> Result<Self, DatasetError> {
        let first = instances.first().ok_or(DatasetError::Empty)?;
        let feature_count = first.features.len();
        let mut seen = std::collections::HashSet::with_capacity(instances.len());
        for inst in &instances {
            if inst.features.len() != feature_count || feature_count == 0 {
                return Err(DatasetError::FeatureCount {
                    id: inst.id,
                    expected: feature_count,
                    found: inst.features.len(),
                });
            }
            if let Some((column, value)) = inst
                .features
                .iter()
                .enumerate()
                .find(|(_, v)| !v.is_finite())
            {
                return Err(DatasetError::NonFinite {
                    line: inst.id,
                    column,
                    value: value.to_string(),
                });
            }
            if !seen.insert(inst.id) {
                return Err(DatasetError::DuplicateId(inst.id));
            }
        }
        Ok(Self {
            name: name.into(),
            feature_count,
            instances,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn feature_count(&self) -> usize {
        self.feature_count
    }

    pub fn instances(&self) -> &[Instance] {
        &self.instances
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn count(&self, label: Label) -> usize {
        self.instances.iter().filter(|i| i.label == label).count()
    }

    fn has_both_labels(&self) -> bool {
        self.count(Label::Positive) > 0 && self.count(Label::Negative) > 0
    }

    fn members_by_id(&self, label: Label) -> Vec<&Instance> {
        let mut members: Vec<&Instance> =
            self.instances.iter().filter(|i| i.label == label).collect();
        members.sort_by_key(|i| i.id);
        members
    }

    fn subset(&self, suffix: &str, mut members: Vec<Instance>) -> Dataset {
        members.sort_by_key(|i| i.id);
        Dataset {
            name: format!("{}/{suffix}", self.name),
            feature_count: self.feature_count,
            instances: members,
        }
    }

    /// Writes the dataset as CSV with a header row, features first and the
    /// `1`/`-1` label last. Reals use shortest round-trip formatting.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), DatasetError> {
        let mut writer = csv::Writer::from_writer(out);
        let mut header: Vec<String> = (0..self.feature_count).map(|i| format!("a{i}")).collect();
        header.push("label".into());
        writer.write_record(&header)?;
        for inst in &self.instances {
            let mut row: Vec<String> = inst
                .features
                .iter()
                .map(|v| crate::numeric::real_string::encode(*v))
                .collect();
            row.push(inst.label.sign().to_string());
            writer.write_record(&row)?;
        }
        writer.flush().map_err(|source| DatasetError::Io {
            path: "<writer>".into(),
            source,
        })?;
        Ok(())
    }
}

/// Which CSV column holds the class label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LabelColumn {
    Index(usize),
    Name(String),
}

impl LabelColumn {
    /// `"3"` selects column 3 (0-based); anything else is a header name.
    pub fn parse(text: &str) -> Self {
        match text.parse::<usize>() {
            Ok(i) => LabelColumn::Index(i),
            Err(_) => LabelColumn::Name(text.to_string()),
        }
    }
}

impl fmt::Display for LabelColumn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LabelColumn::Index(i) => write!(f, "{i}"),
            LabelColumn::Name(n) => write!(f, "{n:?}"),
        }
    }
}

pub fn load_csv(
    path: impl AsRef<Path>,
    label_column: &LabelColumn,
    positive_label: &str,
) -> Result<Dataset, DatasetError> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|source| DatasetError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".into());
    let dataset = parse_csv(file, name, label_column, positive_label)?;
    if !dataset.has_both_labels() {
        return Err(DatasetError::SingleClass);
    }
    Ok(dataset)
}

/// Parses CSV text. The first row is a header iff it holds a non-numeric cell
/// outside the label column (or names the label column). Ids are 0-based data
/// row indices. Unlike [`load_csv`] this accepts an empty or single-class
/// input, which is what classification inputs look like.
pub fn parse_csv<R: Read>(
    input: R,
    name: impl Into<String>,
    label_column: &LabelColumn,
    positive_label: &str,
) -> Result<Dataset, DatasetError> {
    let (rows, label_index) = read_rows(input, Some(label_column))?;
    let label_index = label_index.expect("label column resolved");
    let mut instances = Vec::with_capacity(rows.len());
    for (id, (line, row)) in rows.into_iter().enumerate() {
        let mut features = Vec::with_capacity(row.len().saturating_sub(1));
        for (column, cell) in row.iter().enumerate() {
            if column == label_index {
                continue;
            }
            features.push(parse_cell(cell, line, column)?);
        }
        let label = if row[label_index] == positive_label {
            Label::Positive
        } else {
            Label::Negative
        };
        instances.push(Instance::new(id, features, label));
    }
    if instances.is_empty() {
        return Ok(Dataset {
            name: name.into(),
            feature_count: 0,
            instances,
        });
    }
    Dataset::from_parts(name, instances)
}

/// Reads an unlabeled feature matrix (classification input). Header rows are
/// auto-detected the same way as [`parse_csv`].
pub fn read_features<R: Read>(input: R) -> Result<Vec<Vec<f64>>, DatasetError> {
    let (rows, _) = read_rows(input, None)?;
    rows.into_iter()
        .map(|(line, row)| {
            row.iter()
                .enumerate()
                .map(|(column, cell)| parse_cell(cell, line, column))
                .collect()
        })
        .collect()
}

type Rows = Vec<(usize, Vec<String>)>;

fn read_rows<R: Read>(
    input: R,
    label_column: Option<&LabelColumn>,
) -> Result<(Rows, Option<usize>), DatasetError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(i + 1);
        rows.push((line, record.iter().map(str::to_string).collect::<Vec<_>>()));
    }
    let Some((_, first)) = rows.first() else {
        return Ok((rows, None));
    };
    let width = first.len();
    let (header, label_index) = match label_column {
        None => (
            first.iter().any(|c| !c.trim().is_empty() && c.trim().parse::<f64>().is_err()),
            None,
        ),
        Some(LabelColumn::Name(name)) => match first.iter().position(|c| c == name) {
            Some(i) => (true, Some(i)),
            None => return Err(DatasetError::MissingLabelColumn(name.clone())),
        },
        Some(LabelColumn::Index(i)) => {
            if *i >= width {
                return Err(DatasetError::MissingLabelColumn(i.to_string()));
            }
            let header = first
                .iter()
                .enumerate()
                .any(|(c, cell)| c != *i && !cell.trim().is_empty() && cell.trim().parse::<f64>().is_err());
            (header, Some(*i))
        }
    };
    if header {
        rows.remove(0);
    }
    for (line, row) in &rows {
        if row.len() != width {
            return Err(DatasetError::Ragged {
                line: *line,
                expected: width,
                found: row.len(),
            });
        }
    }
    Ok((rows, label_index))
}

fn parse_cell(cell: &str, line: usize, column: usize) -> Result<f64, DatasetError> {
    let value = cell.parse::<f64>().map_err(|_| DatasetError::NonNumeric {
        line,
        column,
        value: cell.to_string(),
    })?;
    if !value.is_finite() {
        return Err(DatasetError::NonFinite {
            line,
            column,
            value: cell.to_string(),
        });
    }
    Ok(value)
}

fn shuffled<'a>(members: Vec<&'a Instance>, rng: &mut ChaCha8Rng) -> Vec<&'a Instance> {
    let mut members = members;
    members.shuffle(rng);
    members
}

const LABELS: [Label; 2] = [Label::Positive, Label::Negative];

/// Stratified split: each class contributes `round(train_ratio * class_size)`
/// members to the training side.
pub fn split_train_test(
    d: &Dataset,
    train_ratio: f64,
    seed: u64,
) -> Result<(Dataset, Dataset), DatasetError> {
    if !(train_ratio > 0.0 && train_ratio < 1.0) {
        return Err(DatasetError::InvalidRatio(train_ratio));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for label in LABELS {
        let members = shuffled(d.members_by_id(label), &mut rng);
        let n_train = (train_ratio * members.len() as f64).round() as usize;
        if n_train == 0 || n_train >= members.len() {
            return Err(DatasetError::EmptySide {
                ratio: train_ratio,
                label,
            });
        }
        train.extend(members[..n_train].iter().map(|&i| i.clone()));
        test.extend(members[n_train..].iter().map(|&i| i.clone()));
    }
    Ok((d.subset("train", train), d.subset("test", test)))
}

#[derive(Debug, Clone)]
pub struct Fold {
    pub train: Dataset,
    pub test: Dataset,
}

/// Stratified k-fold. Members of each class are shuffled and dealt round-robin
/// into folds; the deal continues across classes so fold sizes differ by at
/// most one.
///
/// Each class needs at least `k - 1` members, so at most one test fold lacks
/// it.
pub fn kfold(d: &Dataset, k: usize, seed: u64) -> Result<Vec<Fold>, DatasetError> {
    if k < 2 {
        return Err(DatasetError::InvalidFoldCount(k));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignment: HashMap<usize, usize> = HashMap::with_capacity(d.len());
    let mut position = 0usize;
    for label in LABELS {
        let members = d.members_by_id(label);
        // At most one test fold may miss a class.
        if members.len() + 1 < k {
            return Err(DatasetError::ClassSmallerThanK {
                label,
                size: members.len(),
                k,
            });
        }
        for inst in shuffled(members, &mut rng) {
            assignment.insert(inst.id, position % k);
            position += 1;
        }
    }
    Ok((0..k)
        .map(|fold| {
            let (test, train): (Vec<Instance>, Vec<Instance>) = d
                .instances
                .iter()
                .cloned()
                .partition(|i| assignment[&i.id] == fold);
            Fold {
                train: d.subset(&format!("fold{fold}/train"), train),
                test: d.subset(&format!("fold{fold}/test"), test),
            }
        })
        .collect())
}

/// The probe set `s` and the two class pools built from what remains.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassSplit {
    /// Remaining label `+1` instances.
    pub x0: Vec<Instance>,
    /// Remaining label `-1` instances.
    pub x1: Vec<Instance>,
    /// Probe instances.
    pub s: Vec<Instance>,
    pub feature_count: usize,
}

/// Draws a stratified probe set of `round(s_fraction * |train|)` instances
/// (per-class sizes by largest remainder) and splits the rest by label.
pub fn make_class_split(
    train: &Dataset,
    s_fraction: f64,
    seed: u64,
) -> Result<ClassSplit, DatasetError> {
    if !(s_fraction > 0.0 && s_fraction <= 1.0) {
        return Err(DatasetError::InvalidProbeFraction(s_fraction));
    }
    let total = (s_fraction * train.len() as f64).round() as usize;
    if total == 0 {
        return Err(DatasetError::EmptyProbeSet(s_fraction));
    }
    let sizes = LABELS.map(|l| train.count(l));
    let quotas = largest_remainder(total, &sizes);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = Vec::with_capacity(total);
    let mut pools: [Vec<Instance>; 2] = [Vec::new(), Vec::new()];
    for (slot, label) in LABELS.into_iter().enumerate() {
        let members = shuffled(train.members_by_id(label), &mut rng);
        let (probe, rest) = members.split_at(quotas[slot]);
        if rest.is_empty() {
            return Err(DatasetError::ClassExhausted {
                fraction: s_fraction,
                label,
            });
        }
        s.extend(probe.iter().map(|&i| i.clone()));
        let mut rest: Vec<Instance> = rest.iter().map(|&i| i.clone()).collect();
        rest.sort_by_key(|i| i.id);
        pools[slot] = rest;
    }
    s.sort_by_key(|i| i.id);
    let [x0, x1] = pools;
    Ok(ClassSplit {
        x0,
        x1,
        s,
        feature_count: train.feature_count(),
    })
}

fn largest_remainder(total: usize, sizes: &[usize; 2]) -> [usize; 2] {
    let n: usize = sizes.iter().sum();
    let mut quotas = [0usize; 2];
    let mut remainders = [(0usize, 0usize); 2];
    for (i, &size) in sizes.iter().enumerate() {
        let exact = total * size;
        quotas[i] = exact / n;
        remainders[i] = (exact % n, i);
    }
    let assigned: usize = quotas.iter().sum();
    // Larger remainder first; equal remainders favour the positive class.
    remainders.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    for &(_, i) in remainders.iter().take(total - assigned) {
        quotas[i] += 1;
    }
    quotas
}

/// Per-feature min-max scaling fitted on a training set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinMaxScaler {
    #[serde(with = "crate::numeric::real_string::vec")]
    mins: Vec<f64>,
    #[serde(with = "crate::numeric::real_string::vec")]
    maxs: Vec<f64>,
}

impl MinMaxScaler {
    pub fn fit(d: &Dataset) -> Self {
        let m = d.feature_count();
        let mut mins = vec![f64::INFINITY; m];
        let mut maxs = vec![f64::NEG_INFINITY; m];
        for inst in d.instances() {
            for (j, &v) in inst.features.iter().enumerate() {
                mins[j] = mins[j].min(v);
                maxs[j] = maxs[j].max(v);
            }
        }
        Self { mins, maxs }
    }

    /// Constant features map to 0.
    pub fn transform_point(&self, features: &[f64]) -> Vec<f64> {
        features
            .iter()
            .zip(self.mins.iter().zip(&self.maxs))
            .map(|(&v, (&lo, &hi))| if hi > lo { (v - lo) / (hi - lo) } else { 0.0 })
            .collect()
    }

    pub fn transform(&self, d: &Dataset) -> Dataset {
        let instances = d
            .instances()
            .iter()
            .map(|i| Instance::new(i.id, self.transform_point(&i.features), i.label))
            .collect();
        Dataset {
            name: d.name.clone(),
            feature_count: d.feature_count,
            instances,
        }
    }
}
