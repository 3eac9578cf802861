//! Training: for every probe instance, enumerate the spanning trees over its
//! `gamma` nearest neighbours in each class, pit every class-`+1` tree against
//! every class-`-1` tree on the probe, and keep the trees whose votes are
//! correct at least as often as not.
//!
//! The survivors are stored per probe as records of (tree, distance from the
//! probe to the tree, edge-weight sum), sorted by distance.

use std::collections::{BTreeMap, HashMap};
use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{ClassSplit, Instance, Label};
use crate::inference::Objective;
use crate::numeric::{real_string, squared_distance};
use crate::spt_cd::{PairwiseError, PairwiseRule, PreparedTree, TieBreak};
use crate::trees::{
    enumerate_spanning_trees_capped, threshold_of_sorted, EdgeDistanceTable, LabeledTree, TreeError,
    TreeNode, DEFAULT_MAX_GAMMA,
};

pub const MODEL_FORMAT: &str = "subspace-graphs/model";
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum TrainingError {
    #[error("invalid hyperparameters: {0}")]
    InvalidParams(String),
    #[error("the {label} pool has {size} instances, fewer than gamma = {gamma}")]
    PoolTooSmall { label: Label, size: usize, gamma: usize },
    #[error("feature dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Pairwise(#[from] PairwiseError),
    #[error("cannot access model file {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed model file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("not a model file (format {0:?})")]
    Format(String),
    #[error("unsupported model schema version {found}, expected {SCHEMA_VERSION}")]
    SchemaVersion { found: u32 },
    #[error("inconsistent model file: {0}")]
    Corrupt(String),
}

/// Every tunable of training and inference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HyperParams {
    /// Neighbourhood size per class, i.e. nodes per spanning tree.
    pub gamma: usize,
    /// Quantile of a tree's edge lengths used as its boundary threshold.
    pub boundary_alpha: f64,
    /// Quantile of the harvested weight sums used as beta.
    pub beta_alpha: f64,
    /// Trees kept per class at test time.
    pub best_spt: usize,
    /// Probe owners consulted when harvesting beta.
    pub k_neighbours: usize,
    /// Nearest edges compared when both trees accept or both reject.
    pub k1: usize,
    pub s_fraction: f64,
    pub seed: u64,
    #[serde(default)]
    pub objective: Objective,
    #[serde(default)]
    pub tie_break: TieBreak,
    #[serde(default = "default_max_gamma")]
    pub max_gamma: usize,
}

fn default_max_gamma() -> usize {
    DEFAULT_MAX_GAMMA
}

impl Default for HyperParams {
    fn default() -> Self {
        Self {
            gamma: 3,
            boundary_alpha: 0.5,
            beta_alpha: 0.5,
            best_spt: 3,
            k_neighbours: 3,
            k1: 2,
            s_fraction: 0.2,
            seed: 0,
            objective: Objective::default(),
            tie_break: TieBreak::default(),
            max_gamma: DEFAULT_MAX_GAMMA,
        }
    }
}

impl HyperParams {
    pub fn validate(&self) -> Result<(), TrainingError> {
        let fail = |msg: String| Err(TrainingError::InvalidParams(msg));
        if self.gamma < 2 {
            return fail(format!("gamma must be at least 2, got {}", self.gamma));
        }
        if self.gamma > self.max_gamma {
            return fail(format!(
                "gamma above enumeration cap ({} > {})",
                self.gamma, self.max_gamma
            ));
        }
        for (name, value) in [
            ("boundary_alpha", self.boundary_alpha),
            ("beta_alpha", self.beta_alpha),
        ] {
            if !(0.0..=1.0).contains(&value) {
                return fail(format!("{name} must lie in [0, 1], got {value}"));
            }
        }
        for (name, value) in [
            ("best_spt", self.best_spt),
            ("k_neighbours", self.k_neighbours),
            ("k1", self.k1),
        ] {
            if value == 0 {
                return fail(format!("{name} must be positive"));
            }
        }
        if !(self.s_fraction > 0.0 && self.s_fraction <= 1.0) {
            return fail(format!("s_fraction must lie in (0, 1], got {}", self.s_fraction));
        }
        Ok(())
    }

    pub fn pairwise_rule(&self) -> Result<PairwiseRule, PairwiseError> {
        PairwiseRule::new(self.boundary_alpha, self.k1, self.tie_break)
    }
}

/// A surviving tree with its distance to the owning probe and its weight sum.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeRecord {
    pub tree: LabeledTree,
    pub dist_to_owner: f64,
    pub weight_sum: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub params: HyperParams,
    pub feature_count: usize,
    /// Probe instances, ascending id.
    pub owners: Vec<Instance>,
    pub x0: Vec<Instance>,
    pub x1: Vec<Instance>,
    /// Surviving class-`+1` trees per probe id.
    pub zeta0: BTreeMap<usize, Vec<TreeRecord>>,
    /// Surviving class-`-1` trees per probe id.
    pub zeta1: BTreeMap<usize, Vec<TreeRecord>>,
}

/// Min / mean / max survivors per owner for one dictionary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurvivorStats {
    pub min: usize,
    pub mean: f64,
    pub max: usize,
}

impl TrainedModel {
    pub fn survivor_stats(zeta: &BTreeMap<usize, Vec<TreeRecord>>) -> Option<SurvivorStats> {
        let counts: Vec<usize> = zeta.values().map(Vec::len).collect();
        let min = *counts.iter().min()?;
        let max = *counts.iter().max()?;
        let mean = counts.iter().sum::<usize>() as f64 / counts.len() as f64;
        Some(SurvivorStats { min, mean, max })
    }

    pub fn pool(&self, label: Label) -> &[Instance] {
        match label {
            Label::Positive => &self.x0,
            Label::Negative => &self.x1,
        }
    }
}

/// The `k` pool members nearest to `z` (ascending distance, ties by id),
/// skipping `exclude`. Returns fewer than `k` when the pool is small.
pub(crate) fn nearest<'a>(
    z: &[f64],
    exclude: Option<usize>,
    pool: &'a [Instance],
    k: usize,
) -> Vec<&'a Instance> {
    let mut scored: Vec<(f64, &Instance)> = pool
        .iter()
        .filter(|x| Some(x.id) != exclude)
        .map(|x| (squared_distance(z, &x.features), x))
        .collect();
    let order = |a: &(f64, &Instance), b: &(f64, &Instance)| a.0.total_cmp(&b.0).then(a.1.id.cmp(&b.1.id));
    if k < scored.len() {
        scored.select_nth_unstable_by(k, order);
        scored.truncate(k);
    }
    scored.sort_by(order);
    scored.into_iter().map(|(_, x)| x).collect()
}

/// The `gamma` members of `pool` closest to `s`, excluding `s` itself.
pub fn gamma_neighbourhood<'a>(
    s: &Instance,
    pool: &'a [Instance],
    gamma: usize,
) -> Result<Vec<&'a Instance>, TrainingError> {
    let found = nearest(&s.features, Some(s.id), pool, gamma);
    if found.len() < gamma {
        return Err(TrainingError::PoolTooSmall {
            label: pool.first().map(|x| x.label).unwrap_or(s.label),
            size: found.len(),
            gamma,
        });
    }
    Ok(found)
}

pub(crate) fn tree_nodes(members: &[&Instance]) -> Vec<TreeNode> {
    members
        .iter()
        .map(|x| TreeNode::new(x.id, x.features.clone()))
        .collect()
}

/// Query-side view of every tree enumerated over one neighbourhood.
pub(crate) fn prepare_all(z: &[f64], trees: &[LabeledTree], boundary_alpha: f64) -> Vec<PreparedTree> {
    let Some(first) = trees.first() else {
        return Vec::new();
    };
    let table = EdgeDistanceTable::new(z, first.nodes());
    trees
        .iter()
        .map(|h| {
            let theta = threshold_of_sorted(&h.sorted_edge_lengths(), boundary_alpha);
            PreparedTree::with_threshold(table.tree_distance(h), theta)
        })
        .collect()
}

fn check_pool(pool: &[Instance], label: Label, params: &HyperParams) -> Result<(), TrainingError> {
    if pool.len() < params.gamma {
        return Err(TrainingError::PoolTooSmall {
            label,
            size: pool.len(),
            gamma: params.gamma,
        });
    }
    Ok(())
}

pub fn train(split: &ClassSplit, params: &HyperParams) -> Result<TrainedModel, TrainingError> {
    params.validate()?;
    check_pool(&split.x0, Label::Positive, params)?;
    check_pool(&split.x1, Label::Negative, params)?;
    let feature_count = split.feature_count;
    for inst in split.s.iter().chain(&split.x0).chain(&split.x1) {
        if inst.features.len() != feature_count {
            return Err(TrainingError::DimensionMismatch {
                expected: feature_count,
                found: inst.features.len(),
            });
        }
    }
    let rule = params.pairwise_rule()?;

    let per_probe: Vec<(usize, Vec<TreeRecord>, Vec<TreeRecord>)> = split
        .s
        .par_iter()
        .map(|s| {
            let (zeta0, zeta1) = probe_survivors(s, split, params, &rule)?;
            Ok((s.id, zeta0, zeta1))
        })
        .collect::<Result<_, TrainingError>>()?;

    let mut zeta0 = BTreeMap::new();
    let mut zeta1 = BTreeMap::new();
    for (id, records0, records1) in per_probe {
        zeta0.insert(id, records0);
        zeta1.insert(id, records1);
    }
    let mut owners = split.s.clone();
    owners.sort_by_key(|i| i.id);
    Ok(TrainedModel {
        params: params.clone(),
        feature_count,
        owners,
        x0: split.x0.clone(),
        x1: split.x1.clone(),
        zeta0,
        zeta1,
    })
}

fn probe_survivors(
    s: &Instance,
    split: &ClassSplit,
    params: &HyperParams,
    rule: &PairwiseRule,
) -> Result<(Vec<TreeRecord>, Vec<TreeRecord>), TrainingError> {
    let n0 = gamma_neighbourhood(s, &split.x0, params.gamma)?;
    let n1 = gamma_neighbourhood(s, &split.x1, params.gamma)?;
    let h0 = enumerate_spanning_trees_capped(&tree_nodes(&n0), params.max_gamma)?;
    let h1 = enumerate_spanning_trees_capped(&tree_nodes(&n1), params.max_gamma)?;
    let p0 = prepare_all(&s.features, &h0, params.boundary_alpha);
    let p1 = prepare_all(&s.features, &h1, params.boundary_alpha);

    // Counter per tree: +1 for every opposing tree with which the pair votes
    // the probe's own label, -1 otherwise.
    let mut counter0 = vec![0i64; h0.len()];
    let mut counter1 = vec![0i64; h1.len()];
    for (i, a) in p0.iter().enumerate() {
        for (j, b) in p1.iter().enumerate() {
            let score = if rule.decide(a, b).vote == s.label { 1 } else { -1 };
            counter0[i] += score;
            counter1[j] += score;
        }
    }
    Ok((
        survivors(&h0, &p0, &counter0),
        survivors(&h1, &p1, &counter1),
    ))
}

fn survivors(trees: &[LabeledTree], prepared: &[PreparedTree], counter: &[i64]) -> Vec<TreeRecord> {
    let mut records: Vec<TreeRecord> = trees
        .iter()
        .zip(prepared)
        .zip(counter)
        .filter(|(_, &c)| c >= 0)
        .map(|((h, p), _)| TreeRecord {
            tree: h.clone(),
            dist_to_owner: p.min_dist(),
            weight_sum: h.weight_sum(),
        })
        .collect();
    records.sort_by(|a, b| a.dist_to_owner.total_cmp(&b.dist_to_owner));
    records
}

// ---------------------------------------------------------------------------
// Persistence

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelDoc {
    format: String,
    schema_version: u32,
    params: ParamsDoc,
    feature_count: usize,
    owners: Vec<Instance>,
    zeta0: BTreeMap<usize, Vec<RecordDoc>>,
    zeta1: BTreeMap<usize, Vec<RecordDoc>>,
    x0: Vec<Instance>,
    x1: Vec<Instance>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParamsDoc {
    gamma: usize,
    #[serde(with = "real_string")]
    boundary_alpha: f64,
    #[serde(with = "real_string")]
    beta_alpha: f64,
    best_spt: usize,
    k_neighbours: usize,
    k1: usize,
    #[serde(with = "real_string")]
    s_fraction: f64,
    seed: u64,
    objective: Objective,
    tie_break: TieBreak,
    max_gamma: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RecordDoc {
    nodes: Vec<usize>,
    edges: Vec<(usize, usize)>,
    #[serde(with = "real_string")]
    dist_to_owner: f64,
    #[serde(with = "real_string")]
    weight_sum: f64,
}

impl From<&HyperParams> for ParamsDoc {
    fn from(p: &HyperParams) -> Self {
        Self {
            gamma: p.gamma,
            boundary_alpha: p.boundary_alpha,
            beta_alpha: p.beta_alpha,
            best_spt: p.best_spt,
            k_neighbours: p.k_neighbours,
            k1: p.k1,
            s_fraction: p.s_fraction,
            seed: p.seed,
            objective: p.objective,
            tie_break: p.tie_break,
            max_gamma: p.max_gamma,
        }
    }
}

impl From<ParamsDoc> for HyperParams {
    fn from(p: ParamsDoc) -> Self {
        Self {
            gamma: p.gamma,
            boundary_alpha: p.boundary_alpha,
            beta_alpha: p.beta_alpha,
            best_spt: p.best_spt,
            k_neighbours: p.k_neighbours,
            k1: p.k1,
            s_fraction: p.s_fraction,
            seed: p.seed,
            objective: p.objective,
            tie_break: p.tie_break,
            max_gamma: p.max_gamma,
        }
    }
}

fn records_doc(zeta: &BTreeMap<usize, Vec<TreeRecord>>) -> BTreeMap<usize, Vec<RecordDoc>> {
    zeta.iter()
        .map(|(&owner, records)| {
            let docs = records
                .iter()
                .map(|r| RecordDoc {
                    nodes: r.tree.node_ids(),
                    edges: r.tree.edges().to_vec(),
                    dist_to_owner: r.dist_to_owner,
                    weight_sum: r.weight_sum,
                })
                .collect();
            (owner, docs)
        })
        .collect()
}

fn records_from_doc(
    docs: BTreeMap<usize, Vec<RecordDoc>>,
    pool: &[Instance],
    owners: &[Instance],
) -> Result<BTreeMap<usize, Vec<TreeRecord>>, TrainingError> {
    let by_id: HashMap<usize, &Instance> = pool.iter().map(|x| (x.id, x)).collect();
    let mut shared: HashMap<Vec<usize>, Arc<[TreeNode]>> = HashMap::new();
    let mut zeta = BTreeMap::new();
    for (owner, records) in docs {
        if owners.binary_search_by_key(&owner, |o| o.id).is_err() {
            return Err(TrainingError::Corrupt(format!("owner {owner} is not a probe")));
        }
        let mut restored = Vec::with_capacity(records.len());
        for doc in records {
            let nodes = match shared.get(&doc.nodes) {
                Some(nodes) => Arc::clone(nodes),
                None => {
                    let nodes = doc
                        .nodes
                        .iter()
                        .map(|id| {
                            by_id
                                .get(id)
                                .map(|x| TreeNode::new(x.id, x.features.clone()))
                                .ok_or_else(|| TrainingError::Corrupt(format!("tree node {id} not in its class pool")))
                        })
                        .collect::<Result<Vec<_>, _>>()?;
                    let nodes: Arc<[TreeNode]> = nodes.into();
                    shared.insert(doc.nodes.clone(), Arc::clone(&nodes));
                    nodes
                }
            };
            let tree = LabeledTree::from_edges(nodes, &doc.edges)?;
            if tree.weight_sum().to_bits() != doc.weight_sum.to_bits() {
                return Err(TrainingError::Corrupt(format!(
                    "stored weight sum {} of an owner-{owner} tree differs from its geometry ({})",
                    doc.weight_sum,
                    tree.weight_sum()
                )));
            }
            restored.push(TreeRecord {
                tree,
                dist_to_owner: doc.dist_to_owner,
                weight_sum: doc.weight_sum,
            });
        }
        zeta.insert(owner, restored);
    }
    Ok(zeta)
}

pub fn write_model<W: Write>(m: &TrainedModel, out: W) -> Result<(), TrainingError> {
    let doc = ModelDoc {
        format: MODEL_FORMAT.into(),
        schema_version: SCHEMA_VERSION,
        params: (&m.params).into(),
        feature_count: m.feature_count,
        owners: m.owners.clone(),
        zeta0: records_doc(&m.zeta0),
        zeta1: records_doc(&m.zeta1),
        x0: m.x0.clone(),
        x1: m.x1.clone(),
    };
    serde_json::to_writer_pretty(out, &doc)?;
    Ok(())
}

pub fn read_model<R: Read>(input: R) -> Result<TrainedModel, TrainingError> {
    let value: serde_json::Value = serde_json::from_reader(input)?;
    let format = value.get("format").and_then(|f| f.as_str()).unwrap_or_default();
    if format != MODEL_FORMAT {
        return Err(TrainingError::Format(format.to_string()));
    }
    let version = value
        .get("schema_version")
        .and_then(|v| v.as_u64())
        .unwrap_or(0) as u32;
    if version != SCHEMA_VERSION {
        return Err(TrainingError::SchemaVersion { found: version });
    }
    let doc: ModelDoc = serde_json::from_value(value)?;
    let params: HyperParams = doc.params.into();
    params.validate()?;
    let mut owners = doc.owners;
    owners.sort_by_key(|i| i.id);
    let zeta0 = records_from_doc(doc.zeta0, &doc.x0, &owners)?;
    let zeta1 = records_from_doc(doc.zeta1, &doc.x1, &owners)?;
    Ok(TrainedModel {
        params,
        feature_count: doc.feature_count,
        owners,
        x0: doc.x0,
        x1: doc.x1,
        zeta0,
        zeta1,
    })
}

pub fn save_model(m: &TrainedModel, path: impl AsRef<Path>) -> Result<(), TrainingError> {
    let path = path.as_ref();
    let io_err = |source| TrainingError::Io {
        path: path.display().to_string(),
        source,
    };
    let file = std::fs::File::create(path).map_err(io_err)?;
    let mut out = std::io::BufWriter::new(file);
    write_model(m, &mut out)?;
    out.write_all(b"\n").map_err(io_err)?;
    out.flush().map_err(io_err)
}

pub fn load_model(path: impl AsRef<Path>) -> Result<TrainedModel, TrainingError> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|source| TrainingError::Io {
        path: path.display().to_string(),
        source,
    })?;
    read_model(std::io::BufReader::new(file))
}
