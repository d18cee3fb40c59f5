//! Serialization of sampling and experiment results: plot-ready CSV plus
//! self-describing JSON with the full configuration echo.

use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::io::Write;

use crate::data::{DataMatrix, LabelVector};
use crate::error::{Error, Result};
use crate::eval::{ExperimentOutcome, ExperimentSummary, RunRecord};
use crate::sample::{SampleConfig, SampleResult, ShardSample};

/// Writes sampled rows as CSV: original (unscaled) values, the label when
/// present, and the shard provenance column (empty for random samples).
pub fn write_sample_csv<W: Write>(
    out: W,
    result: &SampleResult,
    original: &DataMatrix,
    labels: Option<&LabelVector>,
    feature_names: &[String],
) -> Result<()> {
    if feature_names.len() != original.n_cols() {
        return Err(Error::invalid("feature name count does not match the matrix"));
    }
    let id_to_pos: HashMap<u64, usize> =
        original.row_ids().iter().enumerate().map(|(p, &id)| (id, p)).collect();
    let shard_of: HashMap<u64, usize> = result
        .shards
        .iter()
        .flat_map(|s| s.representative_rows.iter().map(move |&id| (id, s.shard_index)))
        .collect();

    let mut writer = csv::Writer::from_writer(out);
    let mut header: Vec<String> = vec!["row_id".to_string()];
    header.extend(feature_names.iter().cloned());
    if labels.is_some() {
        header.push("label".to_string());
    }
    header.push("shard".to_string());
    writer.write_record(&header)?;

    for &id in &result.rows {
        let pos = *id_to_pos
            .get(&id)
            .ok_or_else(|| Error::invalid(format!("sampled row id {} not in the matrix", id)))?;
        let mut record: Vec<String> = vec![id.to_string()];
        record.extend(original.row(pos).iter().map(|v| format_value(*v)));
        if let Some(l) = labels {
            record.push(l.get(pos).to_string());
        }
        record.push(shard_of.get(&id).map(|s| s.to_string()).unwrap_or_default());
        writer.write_record(&record)?;
    }
    writer.flush()?;
    Ok(())
}

/// Shortest representation that round-trips the f64 exactly.
fn format_value(v: f64) -> String {
    let mut buf = ryu_format(v);
    if buf.ends_with(".0") {
        buf.truncate(buf.len() - 2);
    }
    buf
}

fn ryu_format(v: f64) -> String {
    // serde_json uses ryu internally; going through it keeps CSV and JSON
    // number formatting identical.
    serde_json::to_string(&v).expect("finite f64 serializes")
}

/// Per-shard statistics echoed into the sampling stats JSON.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ShardStat {
    pub shard_index: usize,
    pub rows_in_shard: usize,
    pub codebook_size: usize,
    pub non_empty_cells: usize,
}

/// Stats block written next to every sampled artifact. Contains everything
/// needed to reproduce the run; the wall-clock field is the only part that
/// varies between identical runs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SampleRunStats {
    pub realized_size: usize,
    pub size_bound: usize,
    pub config: SampleConfig,
    pub per_shard: Vec<ShardStat>,
    pub input_rows: usize,
    pub input_cols: usize,
    pub workers: usize,
    pub wall_ms: f64,
}

impl SampleRunStats {
    pub fn new(
        result: &SampleResult,
        input: &DataMatrix,
        workers: usize,
        wall_ms: f64,
    ) -> Self {
        Self {
            realized_size: result.rows.len(),
            size_bound: result.size_bound(),
            config: result.config.clone(),
            per_shard: result.shards.iter().map(ShardStat::from).collect(),
            input_rows: input.n_rows(),
            input_cols: input.n_cols(),
            workers,
            wall_ms,
        }
    }
}

impl From<&ShardSample> for ShardStat {
    fn from(s: &ShardSample) -> Self {
        Self {
            shard_index: s.shard_index,
            rows_in_shard: s.rows_in_shard,
            codebook_size: s.codebook_size_used,
            non_empty_cells: s.non_empty_cells,
        }
    }
}

/// Writes one experiment repetition per CSV row.
pub fn write_run_records_csv<W: Write>(
    out: W,
    records: &[RunRecord],
    classifier: &str,
) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record([
        "seed",
        "sampler",
        "classifier",
        "accuracy",
        "macro_recall",
        "weighted_precision",
        "balanced_accuracy",
        "mcc",
        "classes_covered",
        "repetition",
        "sample_size",
        "sampling_ms",
        "fit_ms",
        "scoring_ms",
    ])?;
    for r in records {
        writer.write_record([
            r.seed.to_string(),
            r.sampler.to_string(),
            classifier.to_string(),
            format_value(r.metrics.accuracy),
            format_value(r.metrics.macro_recall),
            format_value(r.metrics.weighted_precision),
            format_value(r.metrics.balanced_accuracy),
            format_value(r.metrics.mcc),
            r.classes_covered.to_string(),
            r.repetition.to_string(),
            r.sample_size_realized.to_string(),
            format_value(r.sampling_ms),
            format_value(r.fit_ms),
            format_value(r.scoring_ms),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

/// Median-ordering flags between the two samplers.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairedComparison {
    pub paired_test_subsets: bool,
    pub pvq_median_coverage_ge_random: bool,
    pub pvq_median_macro_recall_gt_random: bool,
    pub pvq_median_mcc_gt_random: bool,
}

/// Summary JSON for a paired two-sampler experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairedExperimentReport {
    pub seed: u64,
    pub repetitions: usize,
    pub sample_size: usize,
    pub test_size: usize,
    pub classifier: String,
    pub rng_algorithm: String,
    pub version: String,
    pub pvq: ExperimentSummary,
    pub random: ExperimentSummary,
    pub comparison: PairedComparison,
}

impl PairedExperimentReport {
    pub fn build(
        seed: u64,
        sample_size: usize,
        test_size: usize,
        classifier: String,
        pvq: &ExperimentOutcome,
        random: &ExperimentOutcome,
    ) -> Self {
        let paired = pvq.records.len() == random.records.len()
            && pvq
                .records
                .iter()
                .zip(&random.records)
                .all(|(a, b)| a.test_digest == b.test_digest);
        let comparison = PairedComparison {
            paired_test_subsets: paired,
            pvq_median_coverage_ge_random: pvq.summary.classes_covered.median
                >= random.summary.classes_covered.median,
            pvq_median_macro_recall_gt_random: pvq.summary.macro_recall.median
                > random.summary.macro_recall.median,
            pvq_median_mcc_gt_random: pvq.summary.mcc.median > random.summary.mcc.median,
        };
        Self {
            seed,
            repetitions: pvq.records.len(),
            sample_size,
            test_size,
            classifier,
            rng_algorithm: crate::data::RNG_ALGORITHM.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            pvq: pvq.summary.clone(),
            random: random.summary.clone(),
            comparison,
        }
    }
}

/// Class-coverage report for a sampled file, optionally against a reference
/// label list.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoverageReport {
    pub distinct: usize,
    pub labels: Vec<String>,
    pub reference_count: Option<usize>,
    pub missing: Vec<String>,
    pub display: String,
}

impl CoverageReport {
    pub fn new(sample_labels: &LabelVector, reference: Option<&[String]>) -> Result<Self> {
        if sample_labels.is_empty() {
            return Err(Error::invalid("no labels to count"));
        }
        let mut labels = sample_labels.distinct();
        labels.sort_unstable();
        let distinct = labels.len();
        match reference {
            Some(reference) => {
                let have: std::collections::HashSet<&str> =
                    labels.iter().map(String::as_str).collect();
                let mut missing: Vec<String> =
                    reference.iter().filter(|l| !have.contains(l.as_str())).cloned().collect();
                missing.sort_unstable();
                let covered = reference.len() - missing.len();
                Ok(Self {
                    distinct,
                    labels,
                    reference_count: Some(reference.len()),
                    display: format!("{}/{}", covered, reference.len()),
                    missing,
                })
            }
            None => Ok(Self {
                distinct,
                labels,
                reference_count: None,
                missing: Vec::new(),
                display: distinct.to_string(),
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::RandomSource;
    use crate::sample::pvq;
    use crate::som::TrainSchedule;

    #[test]
    fn sample_csv_has_provenance_and_original_units() {
        let data = DataMatrix::from_rows(&[
            vec![100.0, 0.5],
            vec![200.0, 1.5],
            vec![300.0, 2.5],
            vec![400.0, 3.5],
        ])
        .unwrap();
        let labels = LabelVector::from_strs(&["a", "b", "c", "d"]);
        let result =
            pvq(&data, 2, &TrainSchedule::with_epochs(1, 1), &RandomSource::new(1)).unwrap();
        let mut buf = Vec::new();
        write_sample_csv(
            &mut buf,
            &result,
            &data,
            Some(&labels),
            &["big".to_string(), "small".to_string()],
        )
        .unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "row_id,big,small,label,shard");
        for line in lines {
            let fields: Vec<&str> = line.split(',').collect();
            assert_eq!(fields.len(), 5);
            let shard: usize = fields[4].parse().unwrap();
            assert!(shard < 2);
        }
    }

    #[test]
    fn coverage_report_against_reference() {
        let labels = LabelVector::from_strs(&["a", "a", "b"]);
        let report = CoverageReport::new(&labels, None).unwrap();
        assert_eq!(report.distinct, 2);
        assert_eq!(report.display, "2");

        let reference: Vec<String> =
            ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        let report = CoverageReport::new(&labels, Some(&reference)).unwrap();
        assert_eq!(report.display, "2/3");
        assert_eq!(report.missing, vec!["c".to_string()]);
    }

    #[test]
    fn values_round_trip_through_csv_text() {
        let v = 0.1 + 0.2;
        let text = format_value(v);
        assert_eq!(text.parse::<f64>().unwrap(), v);
        assert_eq!(format_value(4.0), "4");
    }
}
