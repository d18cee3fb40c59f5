//! Shared domain types: dense observation matrices, label vectors, balanced
//! random partitions and the seeded randomness contract used everywhere else.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense numeric observation matrix, row-major, with stable original-row ids.
///
/// The matrix is immutable after construction and every value is finite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataMatrix {
    values: Vec<f64>,
    n_cols: usize,
    row_ids: Vec<u64>,
}

impl DataMatrix {
    /// Builds a matrix from a flat row-major buffer. Row ids default to `0..n`.
    pub fn new(values: Vec<f64>, n_cols: usize) -> Result<Self> {
        if n_cols == 0 {
            return Err(Error::invalid("matrix must have at least one column"));
        }
        if values.is_empty() || !values.len().is_multiple_of(n_cols) {
            return Err(Error::invalid(format!(
                "value buffer of length {} is not a positive multiple of {} columns",
                values.len(),
                n_cols
            )));
        }
        let n_rows = values.len() / n_cols;
        Self::with_row_ids(values, n_cols, (0..n_rows as u64).collect())
    }

    /// Builds a matrix with explicit original-row identifiers.
    pub fn with_row_ids(values: Vec<f64>, n_cols: usize, row_ids: Vec<u64>) -> Result<Self> {
        if n_cols == 0 || row_ids.is_empty() {
            return Err(Error::invalid("matrix must be at least 1 x 1"));
        }
        if values.len() != row_ids.len() * n_cols {
            return Err(Error::invalid(format!(
                "{} values do not fill {} rows x {} columns",
                values.len(),
                row_ids.len(),
                n_cols
            )));
        }
        if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "non-finite value at row {}, column {}",
                bad / n_cols,
                bad % n_cols
            )));
        }
        let mut seen = row_ids.clone();
        seen.sort_unstable();
        if seen.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid("row ids must be unique"));
        }
        Ok(Self { values, n_cols, row_ids })
    }

    /// Convenience constructor from per-row vectors.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n_cols = rows.first().map(Vec::len).unwrap_or(0);
        if rows.iter().any(|r| r.len() != n_cols) {
            return Err(Error::invalid("all rows must have the same width"));
        }
        Self::new(rows.concat(), n_cols)
    }

    pub fn n_rows(&self) -> usize {
        self.row_ids.len()
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn row_id(&self, i: usize) -> u64 {
        self.row_ids[i]
    }

    pub fn row_ids(&self) -> &[u64] {
        &self.row_ids
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.n_cols)
    }

    /// Gathers the given row positions into a new matrix, keeping original ids.
    pub fn select(&self, positions: &[usize]) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::invalid("cannot select an empty set of rows"));
        }
        let mut values = Vec::with_capacity(positions.len() * self.n_cols);
        let mut ids = Vec::with_capacity(positions.len());
        for &p in positions {
            if p >= self.n_rows() {
                return Err(Error::invalid(format!("row position {} out of bounds", p)));
            }
            values.extend_from_slice(self.row(p));
            ids.push(self.row_ids[p]);
        }
        Ok(Self { values, n_cols: self.n_cols, row_ids: ids })
    }

    /// Contiguous row range as a new matrix, keeping original ids.
    pub fn slice(&self, start: usize, end: usize) -> Result<Self> {
        if start >= end || end > self.n_rows() {
            return Err(Error::invalid(format!("bad row range {}..{}", start, end)));
        }
        Ok(Self {
            values: self.values[start * self.n_cols..end * self.n_cols].to_vec(),
            n_cols: self.n_cols,
            row_ids: self.row_ids[start..end].to_vec(),
        })
    }
}

/// Categorical label per row. Labels ride beside a [`DataMatrix`]; the sampler
/// never sees them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelVector {
    labels: Vec<String>,
}

impl LabelVector {
    pub fn new(labels: Vec<String>) -> Self {
        Self { labels }
    }

    pub fn from_strs(labels: &[&str]) -> Self {
        Self { labels: labels.iter().map(|s| s.to_string()).collect() }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn get(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.labels.iter().map(String::as_str)
    }

    /// Distinct labels in first-appearance order.
    pub fn distinct(&self) -> Vec<String> {
        let mut seen = std::collections::HashSet::new();
        let mut out = Vec::new();
        for l in &self.labels {
            if seen.insert(l.as_str()) {
                out.push(l.clone());
            }
        }
        out
    }

    pub fn select(&self, positions: &[usize]) -> Self {
        Self { labels: positions.iter().map(|&p| self.labels[p].clone()).collect() }
    }

    pub fn slice(&self, start: usize, end: usize) -> Self {
        Self { labels: self.labels[start..end].to_vec() }
    }
}

/// Seeded, versioned random source. The same seed yields the same stream of
/// draws on every platform, so any result that echoes its seed can be
/// reproduced byte for byte.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RandomSource {
    seed: u64,
}

/// Generator identifier recorded in output metadata.
pub const RNG_ALGORITHM: &str = "chacha8-splitmix64-v1";

impl RandomSource {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn algorithm(&self) -> &'static str {
        RNG_ALGORITHM
    }

    /// A fresh generator positioned at the start of this source's stream.
    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }

    /// Derives an independent child stream. Children with distinct tags never
    /// share draws, so shards and repetitions can consume randomness without
    /// coordinating.
    pub fn derive(&self, tag: u64) -> Self {
        Self { seed: splitmix64(self.seed ^ splitmix64(tag)) }
    }
}

/// SplitMix64 finalizer; fixed constants, stable everywhere.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Balanced random assignment of `n` rows to `shard_count` shards.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    assignments: Vec<u32>,
    shard_count: usize,
    seed: u64,
}

impl Partition {
    pub fn shard_count(&self) -> usize {
        self.shard_count
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn assignments(&self) -> &[u32] {
        &self.assignments
    }

    /// Row positions of every shard, each in ascending row order.
    pub fn shard_members(&self) -> Vec<Vec<usize>> {
        let mut members = vec![Vec::new(); self.shard_count];
        for (row, &s) in self.assignments.iter().enumerate() {
            members[s as usize].push(row);
        }
        members
    }
}

/// Splits `n` rows into `shard_count` shards whose sizes differ by at most one,
/// uniformly at random under `rng`.
pub fn split_balanced(n: usize, shard_count: usize, rng: &RandomSource) -> Result<Partition> {
    if shard_count < 1 || shard_count > n {
        return Err(Error::invalid(format!(
            "shard count {} must be in 1..={}",
            shard_count, n
        )));
    }
    let mut order: Vec<u32> = (0..n as u32).collect();
    order.shuffle(&mut rng.rng());

    let base = n / shard_count;
    let extra = n % shard_count;
    let mut assignments = vec![0u32; n];
    let mut pos = 0;
    for shard in 0..shard_count {
        let size = base + usize::from(shard < extra);
        for &row in &order[pos..pos + size] {
            assignments[row as usize] = shard as u32;
        }
        pos += size;
    }
    Ok(Partition { assignments, shard_count, seed: rng.seed() })
}
