//! Bandits built from delimited text files.

use std::collections::HashMap;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;

use crate::bandit::{Context, EnvDims, Environment, SimRng, TrialSeed};
use crate::error::{Error, Result};

pub const MUSHROOM_EAT: usize = 0;
pub const MUSHROOM_SKIP: usize = 1;
const MUSHROOM_SAFE: f64 = 5.0;
const MUSHROOM_BAD: f64 = -35.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RewardRule {
    /// Reward 1 for the action equal to the label, 0 otherwise.
    Classification,
    /// Eat (action 0) or skip (action 1); poisonous mushrooms pay +5 or −35
    /// with equal probability when eaten.
    Mushroom,
    /// Listed numeric columns are the per-action rewards.
    DirectColumns,
    /// Equal-count buckets of a numeric label; reward `exp(−(a − bucket)²/2)`.
    SongGaussian,
    /// Arms are fixed random linear combinations of the context.
    FinancialSynthetic,
}

impl FromStr for RewardRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "classification" => RewardRule::Classification,
            "mushroom" => RewardRule::Mushroom,
            "direct_columns" => RewardRule::DirectColumns,
            "song_gaussian" => RewardRule::SongGaussian,
            "financial_synthetic" => RewardRule::FinancialSynthetic,
            other => return Err(Error::UnknownRule(other.to_string())),
        })
    }
}

/// How to read a file and turn its rows into contexts and rewards.
///
/// Columns are named by header entry, or by 0-based index when the file has
/// no header. For `direct_columns`, `context_columns` are the context and
/// `numeric_columns` the rewards. For every other rule the context is
/// `context_columns` (or else `numeric_columns`) followed by the one-hot
/// encoding of `categorical_columns`; if all three are empty, every column
/// except the label is used, one-hot encoded when not numeric.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSpec {
    pub path: PathBuf,
    pub delimiter: u8,
    pub has_header: bool,
    pub label_column: Option<String>,
    pub numeric_columns: Vec<String>,
    pub categorical_columns: Vec<String>,
    pub context_columns: Vec<String>,
    pub reward_rule: RewardRule,
    pub num_actions: Option<usize>,
    pub horizon: Option<usize>,
    pub poisonous_label: String,
    pub mixing_seed: u64,
}

impl DatasetSpec {
    pub fn new(path: impl Into<PathBuf>, reward_rule: RewardRule) -> Self {
        DatasetSpec {
            path: path.into(),
            delimiter: b',',
            has_header: true,
            label_column: None,
            numeric_columns: Vec::new(),
            categorical_columns: Vec::new(),
            context_columns: Vec::new(),
            reward_rule,
            num_actions: None,
            horizon: None,
            poisonous_label: "p".to_string(),
            mixing_seed: 0,
        }
    }
}

/// Immutable table of contexts and per-action expected rewards.
#[derive(Debug, Clone)]
pub struct DatasetBandit {
    name: String,
    contexts: Vec<Context>,
    /// n×k expected rewards.
    rewards: DMatrix<f64>,
    /// Rows whose eat reward is stochastic (mushroom only).
    poisonous: Option<Vec<bool>>,
    horizon: Option<usize>,
}

impl DatasetBandit {
    /// A deterministic-reward table.
    pub fn from_table(name: impl Into<String>, contexts: Vec<Context>, rewards: DMatrix<f64>) -> Result<Self> {
        if contexts.len() != rewards.nrows() {
            return Err(Error::DimensionMismatch {
                expected: contexts.len(),
                actual: rewards.nrows(),
            });
        }
        if rewards.iter().any(|r| !r.is_finite()) {
            return Err(Error::NonFinite("reward table"));
        }
        Ok(DatasetBandit {
            name: name.into(),
            contexts,
            rewards,
            poisonous: None,
            horizon: None,
        })
    }

    /// Mushroom bandit from contexts and poisonous flags.
    pub fn mushroom(contexts: Vec<Context>, poisonous: Vec<bool>) -> Result<Self> {
        let rewards = DMatrix::from_fn(poisonous.len(), 2, |r, a| match (a, poisonous[r]) {
            (MUSHROOM_EAT, false) => MUSHROOM_SAFE,
            (MUSHROOM_EAT, true) => 0.5 * MUSHROOM_SAFE + 0.5 * MUSHROOM_BAD,
            _ => 0.0,
        });
        let mut bandit = DatasetBandit::from_table("mushroom", contexts, rewards)?;
        bandit.poisonous = Some(poisonous);
        Ok(bandit)
    }

    pub fn load(spec: &DatasetSpec) -> Result<Self> {
        let table = RawTable::read(spec)?;
        let mut bandit = build(spec, &table)?;
        bandit.horizon = spec.horizon;
        Ok(bandit)
    }

    pub fn name(&self) -> &str {
        &self.name
    }
    pub fn len(&self) -> usize {
        self.contexts.len()
    }
    pub fn is_empty(&self) -> bool {
        self.contexts.is_empty()
    }
    pub fn context_dim(&self) -> usize {
        self.contexts.first().map_or(0, Context::dim)
    }
    pub fn num_actions(&self) -> usize {
        self.rewards.ncols()
    }
    pub fn contexts(&self) -> &[Context] {
        &self.contexts
    }
    pub fn rewards(&self) -> &DMatrix<f64> {
        &self.rewards
    }
    pub fn is_stochastic(&self) -> bool {
        self.poisonous.is_some()
    }

    /// Reward for `action` on `row`, drawing when the payoff is stochastic.
    pub fn realize(&self, row: usize, action: usize, rng: &mut impl Rng) -> f64 {
        if let Some(p) = &self.poisonous {
            if action == MUSHROOM_EAT && p[row] {
                return if rng.random_bool(0.5) {
                    MUSHROOM_SAFE
                } else {
                    MUSHROOM_BAD
                };
            }
        }
        self.rewards[(row, action)]
    }
}

/// Shuffles the rows of `data` with the trial's environment stream.
/// The horizon is the smaller of the configured horizon and the row count.
pub fn shuffle_for_trial(data: Arc<DatasetBandit>, seed: TrialSeed) -> DatasetView {
    let mut order: Vec<usize> = (0..data.len()).collect();
    order.shuffle(&mut seed.env_rng());
    let horizon = data.horizon.map_or(data.len(), |h| h.min(data.len()));
    DatasetView {
        data,
        order,
        horizon,
    }
}

/// One trial's ordering of a shared dataset.
#[derive(Debug, Clone)]
pub struct DatasetView {
    data: Arc<DatasetBandit>,
    order: Vec<usize>,
    horizon: usize,
}

impl DatasetView {
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn with_horizon(mut self, horizon: usize) -> Self {
        self.horizon = horizon.min(self.data.len());
        self
    }
}

impl Environment for DatasetView {
    fn name(&self) -> &str {
        &self.data.name
    }

    fn dims(&self) -> EnvDims {
        EnvDims {
            context_dim: self.data.context_dim(),
            num_actions: self.data.num_actions(),
            horizon: self.horizon,
        }
    }

    fn context_at(&self, t: usize) -> &Context {
        &self.data.contexts[self.order[t]]
    }

    fn expected_reward(&self, t: usize, action: usize) -> f64 {
        self.data.rewards[(self.order[t], action)]
    }

    fn realize_reward(&self, t: usize, action: usize, rng: &mut SimRng) -> f64 {
        self.data.realize(self.order[t], action, rng)
    }
}

struct RawTable {
    header: Option<Vec<String>>,
    /// (1-based line number, cells) of rows without missing values.
    rows: Vec<(u64, Vec<String>)>,
    width: usize,
}

fn is_missing(cell: &str) -> bool {
    let c = cell.trim();
    c.is_empty() || c == "?"
}

impl RawTable {
    fn read(spec: &DatasetSpec) -> Result<Self> {
        if !spec.path.is_file() {
            return Err(Error::MissingFile(spec.path.clone()));
        }
        let mut reader = csv::ReaderBuilder::new()
            .delimiter(spec.delimiter)
            .has_headers(false)
            .flexible(true)
            .from_path(&spec.path)?;
        let mut header = None;
        let mut rows = Vec::new();
        let mut width = None;
        let mut dropped = 0usize;
        for (i, record) in reader.records().enumerate() {
            let record = record?;
            let line = record.position().map_or(i as u64 + 1, |p| p.line());
            let cells: Vec<String> = record.iter().map(|c| c.trim().to_string()).collect();
            match width {
                None => width = Some(cells.len()),
                Some(w) if w != cells.len() => {
                    return Err(Error::RaggedRow {
                        line,
                        expected: w,
                        found: cells.len(),
                    })
                }
                _ => {}
            }
            if spec.has_header && header.is_none() {
                header = Some(cells);
                continue;
            }
            if cells.iter().any(|c| is_missing(c)) {
                dropped += 1;
                continue;
            }
            rows.push((line, cells));
        }
        if dropped > 0 {
            log::info!("{}: dropped {dropped} rows with missing values", spec.path.display());
        }
        Ok(RawTable {
            header,
            rows,
            width: width.unwrap_or(0),
        })
    }

    fn column(&self, name: &str) -> Result<usize> {
        if let Some(h) = &self.header {
            if let Some(i) = h.iter().position(|c| c == name) {
                return Ok(i);
            }
        }
        match name.parse::<usize>() {
            Ok(i) if i < self.width => Ok(i),
            _ => Err(Error::UnknownColumn(name.to_string())),
        }
    }

    fn columns(&self, names: &[String]) -> Result<Vec<usize>> {
        names.iter().map(|n| self.column(n)).collect()
    }

    fn numeric(&self, row: usize, col: usize) -> Result<f64> {
        let (line, cells) = &self.rows[row];
        let cell = &cells[col];
        cell.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| Error::NonNumeric {
                line: *line,
                column: self.column_name(col),
                value: cell.clone(),
            })
    }

    fn column_name(&self, col: usize) -> String {
        self.header
            .as_ref()
            .map_or_else(|| col.to_string(), |h| h[col].clone())
    }

    fn is_numeric_column(&self, col: usize) -> bool {
        self.rows.iter().all(|(_, c)| c[col].parse::<f64>().is_ok())
    }
}

/// Category index per distinct value in first-appearance order.
fn categories<'a>(values: impl Iterator<Item = &'a str>) -> (Vec<String>, HashMap<String, usize>) {
    let mut order = Vec::new();
    let mut index = HashMap::new();
    for v in values {
        if !index.contains_key(v) {
            index.insert(v.to_string(), order.len());
            order.push(v.to_string());
        }
    }
    (order, index)
}

fn encode_contexts(
    table: &RawTable,
    numeric: &[usize],
    categorical: &[usize],
) -> Result<Vec<Context>> {
    let encoders: Vec<(usize, HashMap<String, usize>, usize)> = categorical
        .iter()
        .map(|&c| {
            let (order, index) = categories(table.rows.iter().map(|(_, r)| r[c].as_str()));
            (c, index, order.len())
        })
        .collect();
    let width = numeric.len() + encoders.iter().map(|e| e.2).sum::<usize>();
    (0..table.rows.len())
        .map(|r| {
            let mut x = Vec::with_capacity(width);
            for &c in numeric {
                x.push(table.numeric(r, c)?);
            }
            for (c, index, levels) in &encoders {
                let mut one_hot = vec![0.0; *levels];
                one_hot[index[table.rows[r].1[*c].as_str()]] = 1.0;
                x.extend(one_hot);
            }
            Context::new(x)
        })
        .collect()
}

fn mismatch(msg: impl Into<String>) -> Error {
    Error::RuleMismatch(msg.into())
}

fn build(spec: &DatasetSpec, table: &RawTable) -> Result<DatasetBandit> {
    let label = spec
        .label_column
        .as_deref()
        .map(|l| table.column(l))
        .transpose()?;
    let rows = table.rows.len();

    if spec.reward_rule == RewardRule::DirectColumns {
        if spec.context_columns.is_empty() || spec.numeric_columns.is_empty() {
            return Err(mismatch(
                "direct_columns needs context_columns and numeric_columns (the rewards)",
            ));
        }
        let ctx = table.columns(&spec.context_columns)?;
        let rew = table.columns(&spec.numeric_columns)?;
        if let Some(k) = spec.num_actions {
            if k != rew.len() {
                return Err(mismatch(format!("num_actions = {k} but {} reward columns", rew.len())));
            }
        }
        let contexts = encode_contexts(table, &ctx, &[])?;
        let mut rewards = DMatrix::zeros(rows, rew.len());
        for r in 0..rows {
            for (a, &c) in rew.iter().enumerate() {
                rewards[(r, a)] = table.numeric(r, c)?;
            }
        }
        return DatasetBandit::from_table("direct_columns", contexts, rewards);
    }

    let (numeric, categorical) = if spec.context_columns.is_empty()
        && spec.numeric_columns.is_empty()
        && spec.categorical_columns.is_empty()
    {
        (0..table.width)
            .filter(|&c| Some(c) != label)
            .partition::<Vec<usize>, _>(|&c| table.is_numeric_column(c))
    } else {
        let numeric = if spec.context_columns.is_empty() {
            &spec.numeric_columns
        } else {
            &spec.context_columns
        };
        (table.columns(numeric)?, table.columns(&spec.categorical_columns)?)
    };
    let contexts = encode_contexts(table, &numeric, &categorical)?;

    let need_label = || label.ok_or_else(|| mismatch("this reward rule needs label_column"));
    match spec.reward_rule {
        RewardRule::Classification => {
            let l = need_label()?;
            let (classes, index) = categories(table.rows.iter().map(|(_, r)| r[l].as_str()));
            let k = spec.num_actions.unwrap_or(classes.len());
            if k < classes.len() {
                return Err(mismatch(format!(
                    "num_actions = {k} but the label has {} classes",
                    classes.len()
                )));
            }
            let rewards = DMatrix::from_fn(rows, k, |r, a| {
                f64::from(u8::from(index[table.rows[r].1[l].as_str()] == a))
            });
            DatasetBandit::from_table("classification", contexts, rewards)
        }
        RewardRule::Mushroom => {
            let l = need_label()?;
            if spec.num_actions.is_some_and(|k| k != 2) {
                return Err(mismatch("the mushroom rule has exactly 2 actions"));
            }
            let poisonous = table
                .rows
                .iter()
                .map(|(_, r)| r[l] == spec.poisonous_label)
                .collect();
            DatasetBandit::mushroom(contexts, poisonous)
        }
        RewardRule::SongGaussian => {
            let l = need_label()?;
            let k = spec.num_actions.unwrap_or(10);
            if k == 0 {
                return Err(mismatch("num_actions must be positive"));
            }
            let years = (0..rows).map(|r| table.numeric(r, l)).collect::<Result<Vec<_>>>()?;
            let buckets = equal_count_buckets(&years, k);
            let rewards = DMatrix::from_fn(rows, k, |r, a| {
                let gap = a as f64 - buckets[r] as f64;
                (-0.5 * gap * gap).exp()
            });
            DatasetBandit::from_table("song_gaussian", contexts, rewards)
        }
        RewardRule::FinancialSynthetic => {
            let k = spec.num_actions.unwrap_or(8);
            if k == 0 {
                return Err(mismatch("num_actions must be positive"));
            }
            let d = contexts.first().map_or(numeric.len(), Context::dim);
            let mut rng = SimRng::seed_from_u64(spec.mixing_seed);
            let mixing = DMatrix::from_fn(d, k, |_, _| rng.sample::<f64, _>(StandardNormal));
            let rewards = DMatrix::from_fn(rows, k, |r, a| {
                contexts[r]
                    .as_slice()
                    .iter()
                    .zip(mixing.column(a).iter())
                    .map(|(x, m)| x * m)
                    .sum()
            });
            DatasetBandit::from_table("financial_synthetic", contexts, rewards)
        }
        RewardRule::DirectColumns => unreachable!("handled above"),
    }
}

/// Bucket index in `[0, k)` per value, with thresholds at the `j·n/k`
/// order statistics so buckets hold about the same number of values.
/// Equal values always share a bucket.
pub fn equal_count_buckets(values: &[f64], k: usize) -> Vec<usize> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let thresholds: Vec<f64> = (1..k)
        .filter_map(|j| sorted.get((j * n).div_ceil(k)).copied())
        .collect();
    values
        .iter()
        .map(|v| thresholds.iter().filter(|&&t| t <= *v).count())
        .collect()
}
