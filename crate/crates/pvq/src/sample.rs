//! Parallel vector-quantization sampling.
//!
//! The dataset is split into `L` balanced random shards. Each shard trains
//! its own SOM codebook (sized by `ceil(5 * sqrt(shard_rows))`), maps its rows
//! to best-matching units, and keeps, per non-empty Voronoi cell, the single
//! observation closest to the centroid. The union of the per-shard picks is
//! the representative sample. Shards are processed in parallel; the result is
//! identical for any worker count because every shard owns a derived random
//! stream and the reduction appends in shard order.
//!
//! Since each shard contributes at most `ceil(5 * sqrt(n/L))` rows, the
//! sample size is close to `5 * sqrt(n * L)` and can be steered toward a
//! target by choosing `L`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{split_balanced, DataMatrix, RandomSource};
use crate::error::{Error, Result};
use crate::som::{
    batch_train, codebook_size, init_codebook, map_to_bmu, plan_topology, TrainSchedule,
};

/// Stream tag for the partition draw inside [`pvq`].
pub const PARTITION_STREAM: u64 = 0;
/// Stream tag base for shard `k` inside [`pvq`]: `SHARD_STREAM_BASE + k`.
pub const SHARD_STREAM_BASE: u64 = 1;

/// Per-shard sampling outcome: which original rows were kept and why.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShardSample {
    pub shard_index: usize,
    /// Original row ids of the representatives, in codebook-cell order.
    pub representative_rows: Vec<u64>,
    /// The sizing heuristic's m for this shard.
    pub codebook_size_used: usize,
    pub non_empty_cells: usize,
    pub rows_in_shard: usize,
}

/// How the sample was drawn; echoed into every serialized result so a run can
/// be reproduced exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleConfig {
    pub method: String,
    pub n_rows: usize,
    pub shard_count: usize,
    pub seed: u64,
    pub rng_algorithm: String,
    pub schedule: TrainSchedule,
    /// Requested sample size, when the shard count was derived from one.
    pub target_size: Option<usize>,
    /// Size estimate `ceil(5 * sqrt(n * L))` for the chosen shard count.
    pub estimated_size: Option<usize>,
    pub version: String,
}

/// The representative sample: original row ids plus per-shard provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleResult {
    pub rows: Vec<u64>,
    pub shards: Vec<ShardSample>,
    pub config: SampleConfig,
}

impl SampleResult {
    /// Hard upper bound on the sample size: the sum of per-shard codebook
    /// sizes `ceil(5 * sqrt(shard_rows))`.
    pub fn size_bound(&self) -> usize {
        self.shards.iter().map(|s| s.codebook_size_used).sum()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Inverts the size estimate `5 * sqrt(n * L)` to pick a shard count for a
/// desired sample size: `L = clamp(round(target^2 / (25 n)), 1, n)`.
pub fn choose_shard_count(n: usize, target: usize) -> Result<usize> {
    if n < 1 {
        return Err(Error::invalid("dataset must have at least one row"));
    }
    if target < 5 {
        return Err(Error::invalid("target size must be at least 5 (one shard's worth)"));
    }
    let raw = (target as f64).powi(2) / (25.0 * n as f64);
    Ok((raw.round() as usize).clamp(1, n))
}

/// Size estimate for a given `(n, L)` pair.
pub fn estimated_sample_size(n: usize, shard_count: usize) -> usize {
    (5.0 * ((n * shard_count) as f64).sqrt()).ceil() as usize
}

/// Vector-quantizes one shard and keeps, per non-empty Voronoi cell, the row
/// closest to the centroid (distance ties go to the lowest original row id).
pub fn sample_shard(
    shard: &DataMatrix,
    schedule: &TrainSchedule,
    rng: &RandomSource,
) -> Result<ShardSample> {
    let m = codebook_size(shard.n_rows())?;
    let topology = plan_topology(m, shard)?;
    let codebook = init_codebook(shard, &topology, rng)?;
    let trained = batch_train(shard, codebook, schedule)?;
    let mapping = map_to_bmu(shard, &trained)?;

    // Winner per cell: strictly smaller distance replaces, and rows arrive in
    // ascending original-id order, so the lowest id wins distance ties.
    let mut winner: Vec<Option<(f64, u64)>> = vec![None; trained.units()];
    for i in 0..shard.n_rows() {
        let cell = mapping.bmu[i];
        let dist = mapping.distance[i];
        match winner[cell] {
            Some((best, _)) if best <= dist => {}
            _ => winner[cell] = Some((dist, shard.row_id(i))),
        }
    }
    let representative_rows: Vec<u64> =
        winner.iter().flatten().map(|&(_, id)| id).collect();
    let non_empty_cells = representative_rows.len();
    Ok(ShardSample {
        shard_index: 0,
        representative_rows,
        codebook_size_used: m,
        non_empty_cells,
        rows_in_shard: shard.n_rows(),
    })
}

/// The full sampling pipeline for an explicit shard count.
///
/// Shards run on the ambient rayon pool; wrap the call in
/// `ThreadPoolBuilder::build().install(..)` to control the worker count. The
/// output depends only on `(data, shard_count, schedule, seed)`.
pub fn pvq(
    data: &DataMatrix,
    shard_count: usize,
    schedule: &TrainSchedule,
    rng: &RandomSource,
) -> Result<SampleResult> {
    run(data, shard_count, schedule, rng, None)
}

/// Chooses the shard count for a target sample size, then samples.
pub fn pvq_to_target(
    data: &DataMatrix,
    target: usize,
    schedule: &TrainSchedule,
    rng: &RandomSource,
) -> Result<SampleResult> {
    let shard_count = choose_shard_count(data.n_rows(), target)?;
    run(data, shard_count, schedule, rng, Some(target))
}

fn run(
    data: &DataMatrix,
    shard_count: usize,
    schedule: &TrainSchedule,
    rng: &RandomSource,
    target: Option<usize>,
) -> Result<SampleResult> {
    let partition = split_balanced(data.n_rows(), shard_count, &rng.derive(PARTITION_STREAM))?;
    let members = partition.shard_members();

    let mut shards: Vec<ShardSample> = members
        .par_iter()
        .enumerate()
        .map(|(k, positions)| {
            let shard = data.select(positions)?;
            let shard_rng = rng.derive(SHARD_STREAM_BASE + k as u64);
            let mut sample = sample_shard(&shard, schedule, &shard_rng)?;
            sample.shard_index = k;
            Ok(sample)
        })
        .collect::<Result<Vec<_>>>()?;
    shards.sort_by_key(|s| s.shard_index);

    let rows: Vec<u64> =
        shards.iter().flat_map(|s| s.representative_rows.iter().copied()).collect();
    Ok(SampleResult {
        rows,
        shards,
        config: SampleConfig {
            method: "pvq".to_string(),
            n_rows: data.n_rows(),
            shard_count,
            seed: rng.seed(),
            rng_algorithm: rng.algorithm().to_string(),
            schedule: schedule.clone(),
            target_size: target,
            estimated_size: Some(estimated_sample_size(data.n_rows(), shard_count)),
            version: env!("CARGO_PKG_VERSION").to_string(),
        },
    })
}
