//! Batch self-organizing-map vector quantization.
//!
//! A codebook of centroids lives on a rectangular grid. Training alternates
//! between assigning every row to its best-matching unit (BMU) and replacing
//! each centroid with the neighborhood-kernel-weighted mean of all rows,
//! with the kernel radius shrinking over two phases (rough, then fine).
//! At radius zero an epoch degenerates to one exact Lloyd (k-means) update.

use serde::{Deserialize, Serialize};

use crate::data::{DataMatrix, RandomSource};
use crate::error::{Error, Result};

/// Rectangular grid layout for a codebook. `rows >= cols`, and the unit count
/// `rows * cols` never exceeds the requested codebook size `m`, so the sample
/// size bound derived from `m` holds after grid rounding.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SomTopology {
    m: usize,
    rows: usize,
    cols: usize,
}

impl SomTopology {
    pub fn new(m: usize, rows: usize, cols: usize) -> Result<Self> {
        if m < 1 || rows < 1 || cols < 1 {
            return Err(Error::invalid("topology dimensions must be at least 1"));
        }
        if rows * cols > m {
            return Err(Error::invalid(format!(
                "{}x{} grid exceeds requested codebook size {}",
                rows, cols, m
            )));
        }
        Ok(Self { m, rows, cols })
    }

    /// Requested codebook size (the sizing heuristic's m).
    pub fn codebook_size(&self) -> usize {
        self.m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Number of grid units actually allocated.
    pub fn units(&self) -> usize {
        self.rows * self.cols
    }

    /// Integer lattice coordinates of a unit.
    pub fn position(&self, unit: usize) -> (usize, usize) {
        (unit / self.cols, unit % self.cols)
    }
}

/// Codebook of centroid vectors arranged on a [`SomTopology`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Codebook {
    centroids: Vec<f64>,
    n_cols: usize,
    topology: SomTopology,
}

impl Codebook {
    pub fn new(centroids: Vec<f64>, n_cols: usize, topology: SomTopology) -> Result<Self> {
        if n_cols == 0 || centroids.len() != topology.units() * n_cols {
            return Err(Error::invalid("centroid buffer does not match topology"));
        }
        if centroids.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("centroids must be finite"));
        }
        Ok(Self { centroids, n_cols, topology })
    }

    pub fn units(&self) -> usize {
        self.topology.units()
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn centroid(&self, unit: usize) -> &[f64] {
        &self.centroids[unit * self.n_cols..(unit + 1) * self.n_cols]
    }

    pub fn centroids(&self) -> &[f64] {
        &self.centroids
    }

    pub fn topology(&self) -> &SomTopology {
        &self.topology
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cb: Codebook = serde_json::from_str(text)?;
        Codebook::new(cb.centroids, cb.n_cols, cb.topology)
    }
}

/// Two-phase training schedule. Radii are in grid-distance units and decay
/// linearly within each phase; a radius of zero means the indicator kernel
/// (BMU only), i.e. a plain Lloyd update.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainSchedule {
    pub rough_epochs: usize,
    pub fine_epochs: usize,
    /// `None` resolves to `max(rows, cols) / 4` for the grid being trained,
    /// never below the rough end radius.
    pub rough_radius_start: Option<f64>,
    pub rough_radius_end: f64,
    pub fine_radius_start: f64,
    pub fine_radius_end: f64,
}

impl Default for TrainSchedule {
    fn default() -> Self {
        Self {
            rough_epochs: 10,
            fine_epochs: 10,
            rough_radius_start: None,
            rough_radius_end: 1.0,
            fine_radius_start: 1.0,
            fine_radius_end: 0.0,
        }
    }
}

impl TrainSchedule {
    /// Default radii with custom epoch counts.
    pub fn with_epochs(rough: usize, fine: usize) -> Self {
        Self { rough_epochs: rough, fine_epochs: fine, ..Self::default() }
    }

    /// Per-epoch radius sequence for a concrete grid.
    pub fn radii(&self, topology: &SomTopology) -> Result<Vec<f64>> {
        if self.rough_epochs < 1 || self.fine_epochs < 1 {
            return Err(Error::invalid("each phase needs at least one epoch"));
        }
        let rough_start = self
            .rough_radius_start
            .unwrap_or_else(|| (topology.rows.max(topology.cols) as f64) / 4.0)
            .max(self.rough_radius_end);
        for &(start, end) in &[
            (rough_start, self.rough_radius_end),
            (self.fine_radius_start, self.fine_radius_end),
        ] {
            if !(start >= end && end >= 0.0) {
                return Err(Error::invalid("radii must satisfy start >= end >= 0"));
            }
        }
        let mut radii = phase_radii(rough_start, self.rough_radius_end, self.rough_epochs);
        radii.extend(phase_radii(self.fine_radius_start, self.fine_radius_end, self.fine_epochs));
        Ok(radii)
    }
}

fn phase_radii(start: f64, end: f64, epochs: usize) -> Vec<f64> {
    (0..epochs)
        .map(|t| {
            if epochs <= 1 {
                end
            } else {
                start + (end - start) * t as f64 / (epochs - 1) as f64
            }
        })
        .collect()
}

/// Best-matching unit and Euclidean distance to it, per data row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VoronoiMapping {
    pub bmu: Vec<usize>,
    pub distance: Vec<f64>,
}

/// Codebook size heuristic: `ceil(5 * sqrt(n_rows))`.
pub fn codebook_size(n_rows: usize) -> Result<usize> {
    if n_rows == 0 {
        return Err(Error::invalid("codebook size needs at least one row"));
    }
    Ok((5.0 * (n_rows as f64).sqrt()).ceil() as usize)
}

/// Chooses grid dimensions for `m` units. The aspect ratio follows the square
/// root of the ratio of the two largest data-covariance eigenvalues, clamped
/// to [1, 10]; degenerate covariance falls back to a near-square grid. The
/// grid never allocates more than `m` units.
pub fn plan_topology(m: usize, data: &DataMatrix) -> Result<SomTopology> {
    if m < 1 {
        return Err(Error::invalid("codebook size must be at least 1"));
    }
    let ratio = match principal_axes(data) {
        Some(axes) if axes.lambda2 > axes.lambda1 * 1e-9 => {
            (axes.lambda1 / axes.lambda2).sqrt().clamp(1.0, 10.0)
        }
        _ => 1.0,
    };
    let mut rows = ((m as f64 * ratio).sqrt().round() as usize).clamp(1, m);
    let mut cols = (m / rows).max(1);
    if cols > rows {
        std::mem::swap(&mut rows, &mut cols);
    }
    SomTopology::new(m, rows, cols)
}

/// Places centroids on a regular lattice spanning +/- 2 standard deviations
/// along the top two principal components of the data. Falls back to random
/// data rows when there are fewer than two usable components.
pub fn init_codebook(
    data: &DataMatrix,
    topology: &SomTopology,
    rng: &RandomSource,
) -> Result<Codebook> {
    let d = data.n_cols();
    let units = topology.units();
    let axes = principal_axes(data);
    let linear = match axes {
        Some(ref a) if d >= 2 && a.lambda1 > 0.0 && a.lambda2 > a.lambda1 * 1e-9 => Some(a),
        _ => None,
    };

    let mut centroids = Vec::with_capacity(units * d);
    match linear {
        Some(a) => {
            let span1 = 2.0 * a.lambda1.sqrt();
            let span2 = 2.0 * a.lambda2.sqrt();
            for unit in 0..units {
                let (r, c) = topology.position(unit);
                let fr = lattice_coord(r, topology.rows());
                let fc = lattice_coord(c, topology.cols());
                for j in 0..d {
                    centroids
                        .push(a.mean[j] + fr * span1 * a.axis1[j] + fc * span2 * a.axis2[j]);
                }
            }
        }
        None => {
            use rand::Rng;
            let mut r = rng.rng();
            for _ in 0..units {
                let row = r.random_range(0..data.n_rows());
                centroids.extend_from_slice(data.row(row));
            }
        }
    }
    Codebook::new(centroids, d, topology.clone())
}

fn lattice_coord(index: usize, extent: usize) -> f64 {
    if extent <= 1 {
        0.0
    } else {
        2.0 * index as f64 / (extent - 1) as f64 - 1.0
    }
}

/// Runs the full two-phase batch training and returns the trained codebook.
pub fn batch_train(
    data: &DataMatrix,
    codebook: Codebook,
    schedule: &TrainSchedule,
) -> Result<Codebook> {
    if data.n_cols() != codebook.n_cols() {
        return Err(Error::invalid(format!(
            "data has {} columns but codebook has {}",
            data.n_cols(),
            codebook.n_cols()
        )));
    }
    let radii = schedule.radii(codebook.topology())?;
    let mut cb = codebook;
    for radius in radii {
        cb = batch_epoch(data, cb, radius)?;
    }
    Ok(cb)
}

/// One batch epoch at a fixed kernel radius: assign every row to its BMU,
/// then set each centroid to the kernel-weighted mean of all rows. Centroids
/// that receive zero kernel mass are left unchanged.
pub fn batch_epoch(data: &DataMatrix, codebook: Codebook, radius: f64) -> Result<Codebook> {
    if data.n_cols() != codebook.n_cols() {
        return Err(Error::invalid("dimension mismatch between data and codebook"));
    }
    if radius.is_nan() || radius < 0.0 {
        return Err(Error::invalid("radius must be non-negative"));
    }
    let d = data.n_cols();
    let units = codebook.units();

    // Per-unit sums of the rows mapped to it; the kernel then mixes these
    // unit-level aggregates instead of touching every (row, unit) pair.
    let mut cell_sum = vec![0.0f64; units * d];
    let mut cell_count = vec![0u64; units];
    for i in 0..data.n_rows() {
        let row = data.row(i);
        let (bmu, _) = nearest_centroid(row, &codebook);
        let acc = &mut cell_sum[bmu * d..(bmu + 1) * d];
        for (a, v) in acc.iter_mut().zip(row) {
            *a += v;
        }
        cell_count[bmu] += 1;
    }

    let topo = codebook.topology().clone();
    let kernel = kernel_table(&topo, radius);
    let mut next = codebook.centroids().to_vec();
    for j in 0..units {
        let (jr, jc) = topo.position(j);
        let mut num = vec![0.0f64; d];
        let mut den = 0.0f64;
        for b in 0..units {
            if cell_count[b] == 0 {
                continue;
            }
            let (br, bc) = topo.position(b);
            let dr = jr as isize - br as isize;
            let dc = jc as isize - bc as isize;
            let g2 = (dr * dr + dc * dc) as usize;
            let h = kernel[g2];
            if h == 0.0 {
                continue;
            }
            den += h * cell_count[b] as f64;
            let sums = &cell_sum[b * d..(b + 1) * d];
            for (n, s) in num.iter_mut().zip(sums) {
                *n += h * s;
            }
        }
        if den > 0.0 {
            let dst = &mut next[j * d..(j + 1) * d];
            for (c, n) in dst.iter_mut().zip(&num) {
                *c = n / den;
            }
        }
    }
    Codebook::new(next, d, topo)
}

/// Gaussian kernel values indexed by squared grid distance. Radius zero is
/// the indicator kernel (BMU only).
fn kernel_table(topology: &SomTopology, radius: f64) -> Vec<f64> {
    let max_g2 = (topology.rows() - 1).pow(2) + (topology.cols() - 1).pow(2);
    let mut table = vec![0.0; max_g2 + 1];
    if radius <= 0.0 {
        table[0] = 1.0;
    } else {
        let denom = 2.0 * radius * radius;
        for (g2, h) in table.iter_mut().enumerate() {
            *h = (-(g2 as f64) / denom).exp();
        }
    }
    table
}

/// Exact nearest centroid per row under Euclidean distance; ties break toward
/// the lowest centroid index.
pub fn map_to_bmu(data: &DataMatrix, codebook: &Codebook) -> Result<VoronoiMapping> {
    if data.n_cols() != codebook.n_cols() {
        return Err(Error::invalid("dimension mismatch between data and codebook"));
    }
    let mut bmu = Vec::with_capacity(data.n_rows());
    let mut distance = Vec::with_capacity(data.n_rows());
    for i in 0..data.n_rows() {
        let (b, d2) = nearest_centroid(data.row(i), codebook);
        bmu.push(b);
        distance.push(d2.sqrt());
    }
    Ok(VoronoiMapping { bmu, distance })
}

/// Mean squared row-to-BMU distance.
pub fn quantization_error(data: &DataMatrix, codebook: &Codebook) -> Result<f64> {
    let mapping = map_to_bmu(data, codebook)?;
    let total: f64 = mapping.distance.iter().map(|d| d * d).sum();
    Ok(total / data.n_rows() as f64)
}

/// Returns `(unit, squared_distance)` of the nearest centroid. A candidate
/// replaces the incumbent only on strictly smaller distance, so the lowest
/// index wins ties.
pub(crate) fn nearest_centroid(row: &[f64], codebook: &Codebook) -> (usize, f64) {
    let mut best = f64::INFINITY;
    let mut best_unit = 0;
    for j in 0..codebook.units() {
        let d2 = squared_distance_bounded(row, codebook.centroid(j), best);
        if d2 < best {
            best = d2;
            best_unit = j;
        }
    }
    (best_unit, best)
}

/// Squared Euclidean distance accumulated in four fixed lanes (deterministic
/// reduction order). Bails out once the partial sum reaches `bound`; the
/// returned value is then only guaranteed to be >= `bound`.
pub(crate) fn squared_distance_bounded(a: &[f64], b: &[f64], bound: f64) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 4];
    let quads = a.len() / 4;
    for q in 0..quads {
        let i = q * 4;
        let d0 = a[i] - b[i];
        let d1 = a[i + 1] - b[i + 1];
        let d2 = a[i + 2] - b[i + 2];
        let d3 = a[i + 3] - b[i + 3];
        acc[0] += d0 * d0;
        acc[1] += d1 * d1;
        acc[2] += d2 * d2;
        acc[3] += d3 * d3;
        if q % 4 == 3 && (acc[0] + acc[1]) + (acc[2] + acc[3]) >= bound {
            return (acc[0] + acc[1]) + (acc[2] + acc[3]);
        }
    }
    for i in quads * 4..a.len() {
        let d = a[i] - b[i];
        acc[0] += d * d;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3])
}

struct PrincipalAxes {
    mean: Vec<f64>,
    lambda1: f64,
    lambda2: f64,
    axis1: Vec<f64>,
    axis2: Vec<f64>,
}

/// Top two eigenpairs of the data covariance, via deterministic power
/// iteration with deflation. Returns `None` for single-column data.
fn principal_axes(data: &DataMatrix) -> Option<PrincipalAxes> {
    let d = data.n_cols();
    if d < 2 {
        return None;
    }
    let n = data.n_rows() as f64;
    let mut mean = vec![0.0f64; d];
    for row in data.rows() {
        for (m, v) in mean.iter_mut().zip(row) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= n;
    }
    let mut cov = vec![0.0f64; d * d];
    for row in data.rows() {
        for i in 0..d {
            let di = row[i] - mean[i];
            for j in i..d {
                cov[i * d + j] += di * (row[j] - mean[j]);
            }
        }
    }
    for i in 0..d {
        for j in i..d {
            let v = cov[i * d + j] / n;
            cov[i * d + j] = v;
            cov[j * d + i] = v;
        }
    }

    let (lambda1, axis1) = power_iteration(&cov, d);
    // Deflate and repeat for the second axis.
    let mut deflated = cov;
    for i in 0..d {
        for j in 0..d {
            deflated[i * d + j] -= lambda1 * axis1[i] * axis1[j];
        }
    }
    let (lambda2, axis2) = power_iteration(&deflated, d);
    Some(PrincipalAxes { mean, lambda1: lambda1.max(0.0), lambda2: lambda2.max(0.0), axis1, axis2 })
}

fn power_iteration(matrix: &[f64], d: usize) -> (f64, Vec<f64>) {
    // Deterministic start with a mild tilt so no coordinate axis is special.
    let mut v: Vec<f64> = (0..d).map(|i| 1.0 + 0.01 * (i as f64 + 1.0)).collect();
    normalize(&mut v);
    let mut w = vec![0.0f64; d];
    for _ in 0..200 {
        for (i, wi) in w.iter_mut().enumerate() {
            *wi = matrix[i * d..(i + 1) * d].iter().zip(&v).map(|(m, x)| m * x).sum();
        }
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm <= 1e-300 {
            return (0.0, v);
        }
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = wi / norm;
        }
    }
    let lambda = (0..d)
        .map(|i| {
            v[i] * matrix[i * d..(i + 1) * d]
                .iter()
                .zip(&v)
                .map(|(m, x)| m * x)
                .sum::<f64>()
        })
        .sum();
    (lambda, v)
}

fn normalize(v: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        for x in v.iter_mut() {
            *x /= norm;
        }
    }
}
