//! Parallel vector-quantization sampling for imbalanced data streams.
//!
//! A window of `n` rows is split into `L` balanced random shards; each shard
//! trains a batch self-organizing map and keeps, per non-empty Voronoi cell,
//! the observation closest to the centroid; the union of the per-shard picks
//! is the sample. Because every shard contributes at most
//! `ceil(5 * sqrt(n / L))` rows, the sample holds about `5 * sqrt(n * L)`
//! rows and its size is steered by `L`. Rare classes that occupy their own
//! region of feature space keep a representative no matter how small they
//! are, and the sampler never reads labels.
//!
//! Everything is deterministic under a seed: fixed `(data, L, seed,
//! schedule)` produce byte-identical results for any worker count.
//!
//! ```
//! use pvq::{pvq_to_target, RandomSource, TrainSchedule};
//! use pvq::synth::{imbalanced_blobs, BlobSpec};
//!
//! let spec = BlobSpec { n_rows: 2_000, n_classes: 5, ..Default::default() };
//! let (window, _labels) = imbalanced_blobs(&spec, &RandomSource::new(1))?;
//! let sample = pvq_to_target(&window, 300, &TrainSchedule::with_epochs(3, 3),
//!     &RandomSource::new(2))?;
//! assert!(sample.rows.len() <= sample.size_bound());
//! # Ok::<(), pvq::Error>(())
//! ```
//!
//! The `examples/` directory walks through each capability:
//!
//! - **`sample_stream`** — sample one imbalanced window, per-class counts
//! - **`size_control`** — estimate/bound/realized size across shard counts
//! - **`coverage_vs_random`** — rare-class survival vs uniform sampling
//! - **`knn_experiment`** — paired experiment with the reference classifier
//! - **`som_training`** — train, inspect and serialize a codebook
//! - **`stream_windows`** — schema-driven ingestion and mini-batch windows
//! - **`kddcup_pipeline`** — the network-intrusion dataset end to end
//!
//! ```bash
//! cargo run --release --example sample_stream
//! ```
//!
//! A thin `pvq` binary exposes the same operations as the `sample`,
//! `baseline`, `experiment` and `coverage` subcommands.

pub mod data;
pub mod error;
pub mod eval;
pub mod ingest;
pub mod metrics;
pub mod report;
pub mod sample;
pub mod som;
pub mod synth;

pub use data::{DataMatrix, LabelVector, Partition, RandomSource};
pub use error::{Error, Result};
pub use eval::{ExperimentConfig, KnnClassifier, RunRecord, SamplerKind};
pub use ingest::{LabelMap, Scaler, Schema};
pub use metrics::{ConfusionMatrix, MetricSet};
pub use sample::{choose_shard_count, pvq, pvq_to_target, SampleResult, ShardSample};
pub use som::{Codebook, SomTopology, TrainSchedule, VoronoiMapping};
