//! Steer the sample size by the shard count.
//!
//! The per-shard codebook holds `ceil(5 * sqrt(shard_rows))` centroids, so
//! `L` shards return at most about `5 * sqrt(n * L)` rows. This sweep shows
//! the estimate, the hard bound and the realized size side by side.
//!
//! ```bash
//! cargo run --release --example size_control
//! ```

use pvq::data::RandomSource;
use pvq::sample::{choose_shard_count, estimated_sample_size, pvq};
use pvq::som::TrainSchedule;
use pvq::synth::{imbalanced_blobs, BlobSpec};

fn main() -> pvq::Result<()> {
    let spec = BlobSpec {
        n_rows: 20_000,
        n_classes: 8,
        n_features: 6,
        smallest_class: 10,
        separation: 8.0,
        ..Default::default()
    };
    let rng = RandomSource::new(7);
    let (window, _) = imbalanced_blobs(&spec, &rng)?;
    let schedule = TrainSchedule::with_epochs(5, 5);

    println!("{:>4} {:>10} {:>10} {:>10}", "L", "estimate", "bound", "realized");
    for l in [1usize, 2, 4, 8, 16, 32] {
        let result = pvq(&window, l, &schedule, &rng)?;
        println!(
            "{:>4} {:>10} {:>10} {:>10}",
            l,
            estimated_sample_size(window.n_rows(), l),
            result.size_bound(),
            result.rows.len()
        );
    }

    // And the inverse direction: which L approximates a desired size?
    for target in [750usize, 1_500, 3_000] {
        let l = choose_shard_count(window.n_rows(), target)?;
        println!(
            "target {:>5} -> L = {:>2} (estimate {})",
            target,
            l,
            estimated_sample_size(window.n_rows(), l)
        );
    }
    Ok(())
}
