//! Mini-batch pipeline: ingest a delimited stream, cut it into tumbling
//! windows, and sample every window independently.
//!
//! Writes a synthetic labeled CSV to a temp directory first, so the example
//! exercises the same schema-driven loader the CLI uses.
//!
//! ```bash
//! cargo run --release --example stream_windows
//! ```

use std::fmt::Write as _;

use pvq::data::RandomSource;
use pvq::ingest::{apply_scaler, fit_scaler, load_delimited, windows, Schema};
use pvq::sample::pvq_to_target;
use pvq::som::TrainSchedule;
use pvq::synth::{imbalanced_blobs, BlobSpec};

fn main() -> pvq::Result<()> {
    // Fabricate a stream file: 12,000 rows, 5 classes, one label column.
    let spec = BlobSpec {
        n_rows: 12_000,
        n_classes: 5,
        n_features: 4,
        smallest_class: 12,
        separation: 9.0,
        ..Default::default()
    };
    let (data, labels) = imbalanced_blobs(&spec, &RandomSource::new(3))?;
    let mut csv = String::new();
    for i in 0..data.n_rows() {
        for v in data.row(i) {
            write!(csv, "{},", v).unwrap();
        }
        writeln!(csv, "{}", labels.get(i)).unwrap();
    }
    let dir = std::env::temp_dir().join("pvq_stream_windows");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("stream.csv");
    std::fs::write(&path, csv)?;

    let schema = Schema::numeric(4, true);
    let (stream, stream_labels) = load_delimited(&path, &schema)?;
    let stream_labels = stream_labels.expect("labeled stream");
    println!("ingested {} rows from {}", stream.n_rows(), path.display());

    let window_size = 4_000;
    let schedule = TrainSchedule::with_epochs(5, 5);
    for (i, (window, window_labels)) in
        windows(&stream, Some(&stream_labels), window_size)?.enumerate()
    {
        let scaler = fit_scaler(&window);
        let scaled = apply_scaler(&window, &scaler)?;
        let sample = pvq_to_target(&scaled, 400, &schedule, &RandomSource::new(i as u64))?;

        let window_labels = window_labels.unwrap();
        let id_of = |id: u64| -> &str {
            // Window row ids are original stream positions.
            window_labels.get(id as usize - i * window_size)
        };
        let classes: std::collections::HashSet<&str> =
            sample.rows.iter().map(|&id| id_of(id)).collect();
        println!(
            "window {}: {} rows -> {} sampled, {} of {} classes kept",
            i,
            window.n_rows(),
            sample.rows.len(),
            classes.len(),
            window_labels.distinct().len()
        );
    }
    Ok(())
}
