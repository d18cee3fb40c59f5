//! Network-intrusion pipeline on the KDDCUP'99 dataset.
//!
//! Needs the raw training file (kddcup.data, ~4.9M comma-separated rows).
//! Pass its path as the first argument or set KDDCUP_TRAIN:
//!
//! ```bash
//! cargo run --release --example kddcup_pipeline -- /path/to/kddcup.data
//! ```
//!
//! Loads the file under the shipped schema (drops the three non-numeric
//! features, appends a dummy feature, strips the trailing dot from labels),
//! optionally aggregates the 23 fine labels into 5 categories, then compares
//! class coverage of an ~8K vector-quantization sample of the first 10%
//! window against a random sample of equal size.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use pvq::data::RandomSource;
use pvq::eval::random_sample;
use pvq::ingest::{aggregate_labels, apply_scaler, fit_scaler, load_delimited, LabelMap, Schema};
use pvq::sample::pvq_to_target;
use pvq::som::TrainSchedule;

fn main() -> pvq::Result<()> {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .or_else(|| std::env::var("KDDCUP_TRAIN").ok().map(PathBuf::from));
    let Some(path) = path.filter(|p| p.exists()) else {
        eprintln!("KDDCUP training file not found.");
        eprintln!("Download kddcup.data and pass its path:");
        eprintln!("  cargo run --release --example kddcup_pipeline -- /path/to/kddcup.data");
        return Ok(());
    };

    let manifest = Path::new(env!("CARGO_MANIFEST_DIR"));
    let schema = Schema::from_json_file(manifest.join("schemas/kddcup.json"))?;
    println!("loading {} ...", path.display());
    let (data, labels) = load_delimited(&path, &schema)?;
    let labels = labels.expect("train file is labeled");
    println!("{} rows x {} features, {} labels", data.n_rows(), data.n_cols(), {
        labels.distinct().len()
    });

    let map = LabelMap::from_json_file(manifest.join("schemas/kddcup_labels_5class.json"))?;
    let coarse = aggregate_labels(&labels, &map);
    println!("aggregated into {} categories", coarse.distinct().len());

    // First 10% of the stream as one window.
    let window = data.slice(0, data.n_rows() / 10)?;
    let window_labels = labels.slice(0, data.n_rows() / 10);
    let scaler = fit_scaler(&window);
    let scaled = apply_scaler(&window, &scaler)?;

    let rng = RandomSource::new(1999);
    let schedule = TrainSchedule::with_epochs(3, 3);
    let sample = pvq_to_target(&scaled, 8_000, &schedule, &rng)?;
    let uniform = random_sample(&scaled, sample.rows.len(), &rng)?;

    let coverage = |rows: &[u64]| -> usize {
        rows.iter().map(|&id| window_labels.get(id as usize)).collect::<HashSet<_>>().len()
    };
    println!(
        "window of {} rows with {} classes: vq sample covers {}, random covers {}",
        window.n_rows(),
        window_labels.distinct().len(),
        coverage(&sample.rows),
        coverage(&uniform.rows)
    );
    Ok(())
}
