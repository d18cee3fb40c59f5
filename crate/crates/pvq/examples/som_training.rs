//! Train a self-organizing-map codebook directly and inspect it.
//!
//! Shows the topology heuristic (grid shaped by the covariance eigenvalue
//! ratio), the two training phases, the quantization error they reach, and
//! the JSON form of the trained codebook.
//!
//! ```bash
//! cargo run --release --example som_training
//! ```

use pvq::data::RandomSource;
use pvq::som::{
    batch_train, codebook_size, init_codebook, map_to_bmu, plan_topology, quantization_error,
    TrainSchedule,
};
use pvq::synth::{imbalanced_blobs, BlobSpec};

fn main() -> pvq::Result<()> {
    let spec = BlobSpec {
        n_rows: 5_000,
        n_classes: 6,
        n_features: 4,
        smallest_class: 50,
        separation: 10.0,
        ..Default::default()
    };
    let rng = RandomSource::new(5);
    let (data, _) = imbalanced_blobs(&spec, &rng)?;

    let m = codebook_size(data.n_rows())?;
    let topology = plan_topology(m, &data)?;
    println!(
        "{} rows -> requested codebook {} -> {}x{} grid ({} units)",
        data.n_rows(),
        m,
        topology.rows(),
        topology.cols(),
        topology.units()
    );

    let initial = init_codebook(&data, &topology, &rng)?;
    println!("quantization error after init:  {:.4}", quantization_error(&data, &initial)?);

    let trained = batch_train(&data, initial, &TrainSchedule::default())?;
    println!("quantization error after train: {:.4}", quantization_error(&data, &trained)?);

    let mapping = map_to_bmu(&data, &trained)?;
    let mut occupied = vec![false; trained.units()];
    for &b in &mapping.bmu {
        occupied[b] = true;
    }
    println!(
        "{} of {} cells occupied",
        occupied.iter().filter(|&&o| o).count(),
        trained.units()
    );

    let json = trained.to_json()?;
    println!("serialized codebook: {} bytes of JSON", json.len());
    let restored = pvq::som::Codebook::from_json(&json)?;
    assert_eq!(restored, trained);
    Ok(())
}
