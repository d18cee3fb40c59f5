//! Draw a representative sample from an imbalanced stream window.
//!
//! Generates a 50,000-row window with ten Gaussian-blob classes at roughly
//! 1000:1 imbalance, samples it down to ~1,500 rows, and shows how many rows
//! each class kept.
//!
//! ```bash
//! cargo run --release --example sample_stream
//! ```

use std::collections::BTreeMap;

use pvq::data::RandomSource;
use pvq::ingest::{apply_scaler, fit_scaler};
use pvq::sample::pvq_to_target;
use pvq::som::TrainSchedule;
use pvq::synth::{imbalanced_blobs, BlobSpec};

fn main() -> pvq::Result<()> {
    let spec = BlobSpec {
        n_rows: 50_000,
        n_classes: 10,
        n_features: 8,
        smallest_class: 8,
        separation: 8.0,
        ..Default::default()
    };
    let rng = RandomSource::new(42);
    let (window, labels) = imbalanced_blobs(&spec, &rng)?;

    // Standardize, then sample in scaled space.
    let scaler = fit_scaler(&window);
    let scaled = apply_scaler(&window, &scaler)?;
    let result = pvq_to_target(&scaled, 1_500, &TrainSchedule::default(), &rng)?;

    println!(
        "window: {} rows, {} classes; target 1500 -> shard count {} (estimate {})",
        window.n_rows(),
        spec.n_classes,
        result.config.shard_count,
        result.config.estimated_size.unwrap(),
    );
    println!(
        "realized {} rows (hard bound {})",
        result.rows.len(),
        result.size_bound()
    );
    for shard in &result.shards {
        println!(
            "  shard {}: {} rows -> codebook {} -> {} non-empty cells",
            shard.shard_index, shard.rows_in_shard, shard.codebook_size_used,
            shard.non_empty_cells
        );
    }

    // Per-class counts: window vs sample.
    let mut window_counts: BTreeMap<&str, usize> = BTreeMap::new();
    for l in labels.iter() {
        *window_counts.entry(l).or_insert(0) += 1;
    }
    let mut sample_counts: BTreeMap<&str, usize> = BTreeMap::new();
    for &id in &result.rows {
        *sample_counts.entry(labels.get(id as usize)).or_insert(0) += 1;
    }
    println!("\n{:<10} {:>8} {:>8}", "class", "window", "sample");
    for (class, count) in &window_counts {
        println!("{:<10} {:>8} {:>8}", class, count, sample_counts.get(class).unwrap_or(&0));
    }
    println!(
        "\nclasses present: window {}, sample {}",
        window_counts.len(),
        sample_counts.len()
    );
    Ok(())
}
