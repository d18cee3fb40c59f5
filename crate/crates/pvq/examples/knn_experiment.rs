//! Paired sampling experiment with the reference kNN classifier.
//!
//! Each repetition draws a training sample (PVQ and random arms share the
//! repetition seed, so they score against identical test subsets), fits a
//! k-nearest-neighbor model on it, and evaluates accuracy, macro recall,
//! weighted precision, balanced accuracy and the multi-class Matthews
//! correlation on a fresh test draw.
//!
//! ```bash
//! cargo run --release --example knn_experiment
//! ```

use pvq::data::RandomSource;
use pvq::eval::{run_experiment, ExperimentConfig, ExperimentSummary, SamplerKind};
use pvq::som::TrainSchedule;
use pvq::synth::{imbalanced_blobs, BlobSpec};

fn main() -> pvq::Result<()> {
    let spec = BlobSpec {
        n_rows: 30_000,
        n_classes: 10,
        n_features: 8,
        smallest_class: 6,
        separation: 8.0,
        ..Default::default()
    };
    let (train, train_labels) = imbalanced_blobs(&spec, &RandomSource::new(11))?;
    let (test, test_labels) = imbalanced_blobs(&spec, &RandomSource::new(12))?;

    let mut config = ExperimentConfig::new(SamplerKind::Pvq, 1_000);
    config.repetitions = 8;
    config.seed = 13;
    config.knn_k = 5;
    config.test_size = Some(2_000);
    config.schedule = TrainSchedule::with_epochs(5, 5);

    let vq = run_experiment(&config, (&train, &train_labels), (&test, &test_labels))?;
    config.sampler = SamplerKind::Random;
    let uniform = run_experiment(&config, (&train, &train_labels), (&test, &test_labels))?;

    println!("{} repetitions, sample size 1000, k = 5, test draws of 2000\n", vq.records.len());
    println!("{:<20} {:>12} {:>12}", "median metric", "pvq", "random");
    let row = |name: &str, a: &ExperimentSummary, pick: &dyn Fn(&ExperimentSummary) -> f64| {
        println!("{:<20} {:>12.4} {:>12.4}", name, pick(a), pick(&uniform.summary));
    };
    row("accuracy", &vq.summary, &|s| s.accuracy.median);
    row("macro_recall", &vq.summary, &|s| s.macro_recall.median);
    row("weighted_precision", &vq.summary, &|s| s.weighted_precision.median);
    row("balanced_accuracy", &vq.summary, &|s| s.balanced_accuracy.median);
    row("mcc", &vq.summary, &|s| s.mcc.median);
    row("classes_covered", &vq.summary, &|s| s.classes_covered.median);

    let paired = vq
        .records
        .iter()
        .zip(&uniform.records)
        .all(|(a, b)| a.test_digest == b.test_digest);
    println!("\npaired test subsets: {}", paired);
    Ok(())
}
