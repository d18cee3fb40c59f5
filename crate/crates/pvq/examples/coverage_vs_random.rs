//! Class coverage: vector-quantization sampling vs uniform random sampling.
//!
//! On a heavily imbalanced stream the rare classes almost never survive a
//! uniform sample, while the quantizer keeps a representative per occupied
//! Voronoi cell regardless of how small the class is. Both samplers run over
//! the same seeds at equal sample sizes.
//!
//! ```bash
//! cargo run --release --example coverage_vs_random
//! ```

use std::collections::HashSet;

use pvq::data::RandomSource;
use pvq::eval::{quantile, random_sample};
use pvq::ingest::{apply_scaler, fit_scaler};
use pvq::sample::pvq_to_target;
use pvq::som::TrainSchedule;
use pvq::synth::{imbalanced_blobs, BlobSpec};

fn main() -> pvq::Result<()> {
    let spec = BlobSpec {
        n_rows: 40_000,
        n_classes: 12,
        n_features: 8,
        smallest_class: 6,
        separation: 8.0,
        ..Default::default()
    };
    let (window, labels) = imbalanced_blobs(&spec, &RandomSource::new(1))?;
    let scaler = fit_scaler(&window);
    let scaled = apply_scaler(&window, &scaler)?;
    let schedule = TrainSchedule::with_epochs(5, 5);
    let target = 1_000;

    let coverage = |rows: &[u64]| -> usize {
        rows.iter().map(|&id| labels.get(id as usize)).collect::<HashSet<_>>().len()
    };

    let mut vq = Vec::new();
    let mut uniform = Vec::new();
    println!("{:>5} {:>12} {:>12}", "seed", "vq-coverage", "rand-coverage");
    for seed in 0..10u64 {
        let rng = RandomSource::new(seed);
        let vq_sample = pvq_to_target(&scaled, target, &schedule, &rng)?;
        let rand = random_sample(&scaled, vq_sample.rows.len(), &rng)?;
        let (cv, cr) = (coverage(&vq_sample.rows), coverage(&rand.rows));
        println!("{:>5} {:>9}/12 {:>9}/12", seed, cv, cr);
        vq.push(cv as f64);
        uniform.push(cr as f64);
    }
    println!(
        "\nmedian coverage: vq {} vs random {} (of {} classes)",
        quantile(&vq, 0.5),
        quantile(&uniform, 0.5),
        spec.n_classes
    );
    Ok(())
}
