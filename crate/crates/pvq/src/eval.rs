//! Baselines, reference classifier and the repeated-seed experiment runner
//! that compares vector-quantization sampling against uniform random
//! sampling on the same stream windows.
//!
//! Repetition `i` of an experiment derives all of its randomness from
//! `(seed, i)`: the test subset stream does not depend on the sampler, so a
//! PVQ run and a random run with the same seed score against identical test
//! subsets (paired comparison).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::time::Instant;

use crate::data::{DataMatrix, LabelVector, RandomSource};
use crate::error::{Error, Result};
use crate::ingest::{aggregate_labels, apply_scaler, fit_scaler, LabelMap};
use crate::metrics::{ConfusionMatrix, MetricSet};
use crate::sample::{pvq_to_target, SampleConfig, SampleResult};
use crate::som::TrainSchedule;

/// Stream tag for one experiment repetition (`REP_STREAM + repetition`).
pub const REP_STREAM: u64 = 0x5eed_0000;
/// Child tag for the sample draw within a repetition.
pub const SAMPLE_DRAW: u64 = 1;
/// Child tag for the test-subset draw within a repetition.
pub const TEST_DRAW: u64 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplerKind {
    Pvq,
    Random,
}

impl std::fmt::Display for SamplerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SamplerKind::Pvq => write!(f, "pvq"),
            SamplerKind::Random => write!(f, "random"),
        }
    }
}

/// Uniform sample of `size` rows without replacement, in the same result
/// shape as the PVQ sampler (shard provenance empty).
pub fn random_sample(data: &DataMatrix, size: usize, rng: &RandomSource) -> Result<SampleResult> {
    if size < 1 || size > data.n_rows() {
        return Err(Error::invalid(format!(
            "sample size {} must be in 1..={}",
            size,
            data.n_rows()
        )));
    }
    let mut positions = draw_without_replacement(data.n_rows(), size, rng);
    positions.sort_unstable();
    let rows = positions.iter().map(|&p| data.row_id(p)).collect();
    Ok(SampleResult {
        rows,
        shards: Vec::new(),
        config: SampleConfig {
            method: "random".to_string(),
            n_rows: data.n_rows(),
            shard_count: 0,
            seed: rng.seed(),
            rng_algorithm: rng.algorithm().to_string(),
            schedule: TrainSchedule::default(),
            target_size: Some(size),
            estimated_size: Some(size),
            version: env!("CARGO_PKG_VERSION").to_string(),
        },
    })
}

/// First `size` entries of a seeded partial Fisher-Yates shuffle of `0..n`.
fn draw_without_replacement(n: usize, size: usize, rng: &RandomSource) -> Vec<usize> {
    use rand::Rng;
    let mut r = rng.rng();
    let mut indices: Vec<usize> = (0..n).collect();
    for i in 0..size {
        let j = r.random_range(i..n);
        indices.swap(i, j);
    }
    indices.truncate(size);
    indices
}

/// k-nearest-neighbor majority-vote classifier over standardized rows.
#[derive(Debug, Clone)]
pub struct KnnClassifier {
    train: DataMatrix,
    labels: LabelVector,
    k: usize,
}

impl KnnClassifier {
    pub fn fit(train: DataMatrix, labels: LabelVector, k: usize) -> Result<Self> {
        if k < 1 || k > train.n_rows() {
            return Err(Error::invalid(format!(
                "k = {} must be in 1..={}",
                k,
                train.n_rows()
            )));
        }
        if labels.len() != train.n_rows() {
            return Err(Error::invalid("labels do not match the training rows"));
        }
        Ok(Self { train, labels, k })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn train_labels(&self) -> &LabelVector {
        &self.labels
    }

    /// Euclidean k-nearest majority vote. Distance ties prefer the lower
    /// training-row index; vote ties prefer the lexicographically smallest
    /// label.
    pub fn predict(&self, queries: &DataMatrix) -> Result<LabelVector> {
        if queries.n_cols() != self.train.n_cols() {
            return Err(Error::invalid("query dimensionality differs from training data"));
        }
        let predictions: Vec<String> = (0..queries.n_rows())
            .into_par_iter()
            .map(|q| self.predict_one(queries.row(q)))
            .collect();
        Ok(LabelVector::new(predictions))
    }

    fn predict_one(&self, query: &[f64]) -> String {
        let mut scored: Vec<(f64, usize)> = (0..self.train.n_rows())
            .map(|i| {
                let d2: f64 = query
                    .iter()
                    .zip(self.train.row(i))
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                (d2, i)
            })
            .collect();
        let k = self.k;
        scored.select_nth_unstable_by(k - 1, |a, b| {
            a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1))
        });
        scored.truncate(k);
        // select_nth leaves the k smallest in arbitrary order; the vote only
        // needs the multiset, but sort for a deterministic iteration order.
        scored.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));

        let mut votes: HashMap<&str, usize> = HashMap::new();
        for &(_, i) in &scored {
            *votes.entry(self.labels.get(i)).or_insert(0) += 1;
        }
        let mut tally: Vec<(&str, usize)> = votes.into_iter().collect();
        tally.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
        tally[0].0.to_string()
    }
}

/// Number of distinct labels present.
pub fn class_coverage(labels: &LabelVector) -> Result<usize> {
    if labels.is_empty() {
        return Err(Error::invalid("coverage needs at least one label"));
    }
    Ok(labels.distinct().len())
}

/// One sampler's experiment configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub sampler: SamplerKind,
    pub sample_size: usize,
    pub repetitions: usize,
    pub seed: u64,
    pub knn_k: usize,
    /// Test rows scored per repetition; `None` uses 3.2% of the test window.
    pub test_size: Option<usize>,
    pub schedule: TrainSchedule,
    /// Optional label aggregation applied to both windows before anything
    /// else (e.g. 23 attack types into 5 categories).
    #[serde(skip)]
    pub label_map: Option<LabelMap>,
}

impl ExperimentConfig {
    pub fn new(sampler: SamplerKind, sample_size: usize) -> Self {
        Self {
            sampler,
            sample_size,
            repetitions: 50,
            seed: 0,
            knn_k: 5,
            test_size: None,
            schedule: TrainSchedule::default(),
            label_map: None,
        }
    }

    fn resolved_test_size(&self, n_test: usize) -> usize {
        self.test_size.unwrap_or(((n_test as f64 * 0.032).round() as usize).max(1)).min(n_test)
    }
}

/// Outcome of a single repetition.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunRecord {
    pub repetition: usize,
    pub seed: u64,
    pub sampler: SamplerKind,
    pub classes_covered: usize,
    pub sample_size_realized: usize,
    pub metrics: MetricSet,
    /// Digest of the scored test-subset row ids; equal digests mean equal
    /// test subsets (used to verify paired comparisons).
    pub test_digest: u64,
    pub sampling_ms: f64,
    pub fit_ms: f64,
    pub scoring_ms: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MetricSummary {
    pub median: f64,
    pub mean: f64,
    pub iqr: f64,
}

/// Per-sampler distribution summary over all repetitions.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub sampler: SamplerKind,
    pub repetitions: usize,
    pub accuracy: MetricSummary,
    pub macro_recall: MetricSummary,
    pub weighted_precision: MetricSummary,
    pub balanced_accuracy: MetricSummary,
    pub mcc: MetricSummary,
    pub classes_covered: MetricSummary,
    pub sampling_ms: MetricSummary,
    /// How balanced accuracy is defined in this report.
    pub balanced_accuracy_definition: String,
    /// Whether each repetition drew its own sample.
    pub resample_policy: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentOutcome {
    pub records: Vec<RunRecord>,
    pub summary: ExperimentSummary,
}

/// Test-subset positions for repetition `rep` of an experiment seeded with
/// `seed`. Depends only on `(seed, rep, n_test, size)`, never on the sampler,
/// so runs with equal seeds are paired.
pub fn test_positions(seed: u64, rep: usize, n_test: usize, size: usize) -> Vec<usize> {
    let rng = RandomSource::new(seed).derive(REP_STREAM + rep as u64).derive(TEST_DRAW);
    let mut positions = draw_without_replacement(n_test, size, &rng);
    positions.sort_unstable();
    positions
}

/// Runs the configured sampler for every repetition: draw a sample, fit the
/// reference kNN on it, score a fresh test subset, and record all metrics,
/// coverage and timings.
pub fn run_experiment(
    config: &ExperimentConfig,
    train: (&DataMatrix, &LabelVector),
    test: (&DataMatrix, &LabelVector),
) -> Result<ExperimentOutcome> {
    let (train_data, train_labels) = train;
    let (test_data, test_labels) = test;
    if config.repetitions < 1 {
        return Err(Error::invalid("need at least one repetition"));
    }
    if config.sample_size > train_data.n_rows() {
        return Err(Error::invalid("sample size exceeds the training window"));
    }
    if train_labels.len() != train_data.n_rows() || test_labels.len() != test_data.n_rows() {
        return Err(Error::invalid("labels do not match their windows"));
    }

    let (train_labels, test_labels) = match &config.label_map {
        Some(map) => (aggregate_labels(train_labels, map), aggregate_labels(test_labels, map)),
        None => (train_labels.clone(), test_labels.clone()),
    };

    // One scaler per training window, reused for its test subsets.
    let scaler = fit_scaler(train_data);
    let scaled_train = apply_scaler(train_data, &scaler)?;
    let scaled_test = apply_scaler(test_data, &scaler)?;
    let id_to_pos: HashMap<u64, usize> =
        scaled_train.row_ids().iter().enumerate().map(|(p, &id)| (id, p)).collect();
    let test_size = config.resolved_test_size(scaled_test.n_rows());

    let records: Vec<RunRecord> = (0..config.repetitions)
        .into_par_iter()
        .map(|rep| {
            run_one(
                config,
                rep,
                &scaled_train,
                &train_labels,
                &scaled_test,
                &test_labels,
                &id_to_pos,
                test_size,
            )
        })
        .collect::<Result<Vec<_>>>()?;

    let summary = summarize(config, &records);
    Ok(ExperimentOutcome { records, summary })
}

#[allow(clippy::too_many_arguments)]
fn run_one(
    config: &ExperimentConfig,
    rep: usize,
    scaled_train: &DataMatrix,
    train_labels: &LabelVector,
    scaled_test: &DataMatrix,
    test_labels: &LabelVector,
    id_to_pos: &HashMap<u64, usize>,
    test_size: usize,
) -> Result<RunRecord> {
    let rep_rng = RandomSource::new(config.seed).derive(REP_STREAM + rep as u64);

    let started = Instant::now();
    let sample = match config.sampler {
        SamplerKind::Pvq => pvq_to_target(
            scaled_train,
            config.sample_size,
            &config.schedule,
            &rep_rng.derive(SAMPLE_DRAW),
        )?,
        SamplerKind::Random => {
            random_sample(scaled_train, config.sample_size, &rep_rng.derive(SAMPLE_DRAW))?
        }
    };
    let sampling_ms = started.elapsed().as_secs_f64() * 1e3;

    let positions: Vec<usize> =
        sample.rows.iter().map(|id| id_to_pos[id]).collect();
    let sample_data = scaled_train.select(&positions)?;
    let sample_labels = train_labels.select(&positions);

    let started = Instant::now();
    let model = KnnClassifier::fit(sample_data, sample_labels.clone(), config.knn_k)?;
    let fit_ms = started.elapsed().as_secs_f64() * 1e3;

    let test_positions = test_positions(config.seed, rep, scaled_test.n_rows(), test_size);
    let subset = scaled_test.select(&test_positions)?;
    let truth = test_labels.select(&test_positions);
    let test_digest = digest_ids(subset.row_ids());

    let started = Instant::now();
    let predicted = model.predict(&subset)?;
    let scoring_ms = started.elapsed().as_secs_f64() * 1e3;

    // Universe: union of the classifier's training labels and the subset's
    // truth labels, sorted for determinism.
    let mut universe = sample_labels.distinct();
    universe.extend(truth.distinct());
    universe.sort_unstable();
    universe.dedup();

    let confusion = ConfusionMatrix::from_labels(&truth, &predicted, &universe)?;
    Ok(RunRecord {
        repetition: rep,
        seed: rep_rng.seed(),
        sampler: config.sampler,
        classes_covered: class_coverage(&sample_labels)?,
        sample_size_realized: sample.rows.len(),
        metrics: confusion.metric_set()?,
        test_digest,
        sampling_ms,
        fit_ms,
        scoring_ms,
    })
}

fn digest_ids(ids: &[u64]) -> u64 {
    ids.iter().fold(0x9e3779b97f4a7c15u64, |acc, &id| {
        let mut z = acc ^ id;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z ^ (z >> 27)
    })
}

fn summarize(config: &ExperimentConfig, records: &[RunRecord]) -> ExperimentSummary {
    let stat = |f: &dyn Fn(&RunRecord) -> f64| -> MetricSummary {
        let values: Vec<f64> = records.iter().map(f).collect();
        MetricSummary {
            median: quantile(&values, 0.5),
            mean: values.iter().sum::<f64>() / values.len() as f64,
            iqr: quantile(&values, 0.75) - quantile(&values, 0.25),
        }
    };
    ExperimentSummary {
        sampler: config.sampler,
        repetitions: records.len(),
        accuracy: stat(&|r| r.metrics.accuracy),
        macro_recall: stat(&|r| r.metrics.macro_recall),
        weighted_precision: stat(&|r| r.metrics.weighted_precision),
        balanced_accuracy: stat(&|r| r.metrics.balanced_accuracy),
        mcc: stat(&|r| r.metrics.mcc),
        classes_covered: stat(&|r| r.classes_covered as f64),
        sampling_ms: stat(&|r| r.sampling_ms),
        balanced_accuracy_definition: "macro_recall".to_string(),
        resample_policy: "resample-per-repetition".to_string(),
    }
}

/// Linearly interpolated quantile of an unsorted slice.
pub fn quantile(values: &[f64], q: f64) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
    }
}
