//! Synthetic imbalanced streams for benchmarks and examples: labeled Gaussian
//! blobs with a geometric class-size profile, shuffled into stream order.

use rand::Rng;

use crate::data::{DataMatrix, LabelVector, RandomSource};
use crate::error::{Error, Result};

/// Configuration for an imbalanced Gaussian-blob stream.
#[derive(Debug, Clone)]
pub struct BlobSpec {
    pub n_rows: usize,
    pub n_classes: usize,
    pub n_features: usize,
    /// Row count of the rarest class; the rest grow geometrically.
    pub smallest_class: usize,
    /// Minimum pairwise distance between blob centers, in within-class
    /// standard deviations.
    pub separation: f64,
    /// Seed of the center layout. Streams sharing a spec share centers, so a
    /// train window and a test window drawn with different row seeds come
    /// from the same mixture.
    pub center_seed: u64,
}

impl Default for BlobSpec {
    fn default() -> Self {
        Self {
            n_rows: 10_000,
            n_classes: 10,
            n_features: 8,
            smallest_class: 10,
            separation: 10.0,
            center_seed: 0,
        }
    }
}

/// Per-class row counts `smallest * g^i` with the growth factor solved so the
/// counts sum to `total`.
pub fn geometric_class_counts(
    total: usize,
    classes: usize,
    smallest: usize,
) -> Result<Vec<usize>> {
    if classes < 1 || smallest < 1 {
        return Err(Error::invalid("need at least one class and one row per class"));
    }
    if smallest * classes > total {
        return Err(Error::invalid("total too small for the requested class floor"));
    }
    if classes == 1 {
        return Ok(vec![total]);
    }
    let target = total as f64 / smallest as f64;
    let series = |g: f64| -> f64 {
        if (g - 1.0).abs() < 1e-12 {
            classes as f64
        } else {
            (g.powi(classes as i32) - 1.0) / (g - 1.0)
        }
    };
    let mut lo = 1.0;
    let mut hi = 2.0;
    while series(hi) < target {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if series(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let g = 0.5 * (lo + hi);
    let mut counts: Vec<usize> =
        (0..classes).map(|i| (smallest as f64 * g.powi(i as i32)).round() as usize).collect();
    // Absorb rounding drift into the largest class.
    let sum: usize = counts.iter().sum();
    let last = classes - 1;
    counts[last] = counts[last] + total - sum.min(total);
    if sum > total {
        counts[last] -= sum - total;
    }
    Ok(counts)
}

/// Generates a labeled stream of Gaussian blobs. Class `i` has `counts[i]`
/// rows of unit-variance noise around its center; rows are shuffled into a
/// stream order.
pub fn imbalanced_blobs(spec: &BlobSpec, rng: &RandomSource) -> Result<(DataMatrix, LabelVector)> {
    let counts = geometric_class_counts(spec.n_rows, spec.n_classes, spec.smallest_class)?;
    if spec.n_features < 2 {
        return Err(Error::invalid("blobs need at least two features"));
    }
    let centers = blob_centers(spec);

    let mut r = rng.rng();
    let mut rows: Vec<(usize, Vec<f64>)> = Vec::with_capacity(spec.n_rows);
    for (class, &count) in counts.iter().enumerate() {
        for _ in 0..count {
            let point: Vec<f64> = centers[class]
                .iter()
                .map(|c| c + standard_normal(&mut r))
                .collect();
            rows.push((class, point));
        }
    }
    // Deterministic stream shuffle.
    use rand::seq::SliceRandom;
    rows.shuffle(&mut r);

    let labels =
        LabelVector::new(rows.iter().map(|(c, _)| format!("class{:02}", c)).collect());
    let values: Vec<f64> = rows.into_iter().flat_map(|(_, p)| p).collect();
    let data = DataMatrix::new(values, spec.n_features)?;
    Ok((data, labels))
}

/// Blob centers drawn uniformly in a hypercube, rejection-sampled so every
/// pair is at least `separation` apart. Spreading the centers across every
/// dimension keeps the classes separated under per-feature standardization.
pub fn blob_centers(spec: &BlobSpec) -> Vec<Vec<f64>> {
    let mut rng = RandomSource::new(spec.center_seed).derive(0xb10b).rng();
    // Enough volume that rejections stay rare.
    let side = spec.separation * 2.0 * (spec.n_classes as f64).powf(1.0 / spec.n_features as f64);
    let mut centers: Vec<Vec<f64>> = Vec::with_capacity(spec.n_classes);
    while centers.len() < spec.n_classes {
        let candidate: Vec<f64> =
            (0..spec.n_features).map(|_| rng.random_range(0.0..side)).collect();
        let far_enough = centers.iter().all(|c| {
            let d2: f64 =
                c.iter().zip(&candidate).map(|(a, b)| (a - b) * (a - b)).sum();
            d2.sqrt() >= spec.separation
        });
        if far_enough {
            centers.push(candidate);
        }
    }
    centers
}

/// Box-Muller standard normal draw.
fn standard_normal(rng: &mut impl Rng) -> f64 {
    let u1: f64 = rng.random_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.random_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_counts_sum_and_floor() {
        let counts = geometric_class_counts(100_000, 12, 10).unwrap();
        assert_eq!(counts.iter().sum::<usize>(), 100_000);
        assert_eq!(counts[0], 10);
        assert!(counts.windows(2).all(|w| w[0] <= w[1]));
        let ratio = *counts.last().unwrap() as f64 / counts[0] as f64;
        assert!(ratio >= 1000.0, "imbalance ratio {} too small", ratio);
    }

    #[test]
    fn blobs_are_deterministic_and_labeled() {
        let spec = BlobSpec { n_rows: 500, n_classes: 5, ..Default::default() };
        let rng = RandomSource::new(7);
        let (a, la) = imbalanced_blobs(&spec, &rng).unwrap();
        let (b, lb) = imbalanced_blobs(&spec, &rng).unwrap();
        assert_eq!(a, b);
        assert_eq!(la, lb);
        assert_eq!(a.n_rows(), 500);
        assert_eq!(la.distinct().len(), 5);
    }

    #[test]
    fn shared_spec_means_shared_centers() {
        let spec = BlobSpec { n_rows: 300, n_classes: 6, ..Default::default() };
        assert_eq!(blob_centers(&spec), blob_centers(&spec));
        let other = BlobSpec { center_seed: 9, ..spec.clone() };
        assert_ne!(blob_centers(&spec), blob_centers(&other));
        for (i, a) in blob_centers(&spec).iter().enumerate() {
            for b in blob_centers(&spec).iter().skip(i + 1) {
                let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
                assert!(d2.sqrt() >= spec.separation);
            }
        }
    }

    #[test]
    fn classes_are_geometrically_separated() {
        let spec = BlobSpec { n_rows: 2_000, n_classes: 4, separation: 10.0, ..Default::default() };
        let (data, labels) = imbalanced_blobs(&spec, &RandomSource::new(3)).unwrap();
        // Per-class means should be far apart relative to the unit sd.
        let mut per_class: std::collections::HashMap<&str, (Vec<f64>, usize)> =
            std::collections::HashMap::new();
        for i in 0..data.n_rows() {
            let entry = per_class
                .entry(labels.get(i))
                .or_insert_with(|| (vec![0.0; data.n_cols()], 0));
            for (a, v) in entry.0.iter_mut().zip(data.row(i)) {
                *a += v;
            }
            entry.1 += 1;
        }
        let means: Vec<Vec<f64>> = per_class
            .values()
            .map(|(sum, count)| sum.iter().map(|s| s / *count as f64).collect())
            .collect();
        for i in 0..means.len() {
            for j in i + 1..means.len() {
                let d2: f64 = means[i]
                    .iter()
                    .zip(&means[j])
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                assert!(d2.sqrt() > 5.0, "blob means too close: {}", d2.sqrt());
            }
        }
    }
}
