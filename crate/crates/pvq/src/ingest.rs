//! Data acquisition and preparation: delimited-file loading under a declared
//! schema, z-score standardization, label aggregation and tumbling mini-batch
//! windows.

use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::path::Path;

use crate::data::{DataMatrix, LabelVector};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnKind {
    Numeric,
    Categorical,
    Label,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnSpec {
    pub name: String,
    pub kind: ColumnKind,
}

/// Declares how a delimited file maps onto a [`DataMatrix`]: column kinds,
/// which columns to drop, and whether to append a constant-1 dummy feature.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schema {
    pub columns: Vec<ColumnSpec>,
    #[serde(default)]
    pub drop: Vec<String>,
    #[serde(default)]
    pub add_dummy: bool,
    #[serde(default = "default_delimiter")]
    pub delimiter: char,
    #[serde(default)]
    pub has_header: bool,
    /// Trailing text stripped from every label (KDDCUP labels end in ".").
    #[serde(default)]
    pub label_strip_suffix: Option<String>,
}

fn default_delimiter() -> char {
    ','
}

impl Schema {
    /// All-numeric schema for a headerless file of `d` columns, optionally
    /// with a trailing label column.
    pub fn numeric(d: usize, with_label: bool) -> Self {
        let mut columns: Vec<ColumnSpec> = (0..d)
            .map(|i| ColumnSpec { name: format!("f{}", i), kind: ColumnKind::Numeric })
            .collect();
        if with_label {
            columns.push(ColumnSpec { name: "label".to_string(), kind: ColumnKind::Label });
        }
        Self {
            columns,
            drop: Vec::new(),
            add_dummy: false,
            delimiter: ',',
            has_header: false,
            label_strip_suffix: None,
        }
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let schema: Schema = serde_json::from_str(&text)?;
        schema.validate()?;
        Ok(schema)
    }

    pub fn validate(&self) -> Result<()> {
        if self.columns.is_empty() {
            return Err(Error::invalid("schema declares no columns"));
        }
        if !self.delimiter.is_ascii() {
            return Err(Error::invalid("delimiter must be an ASCII character"));
        }
        let labels = self.columns.iter().filter(|c| c.kind == ColumnKind::Label).count();
        if labels > 1 {
            return Err(Error::invalid("schema declares more than one label column"));
        }
        for name in &self.drop {
            if !self.columns.iter().any(|c| &c.name == name) {
                return Err(Error::invalid(format!("drop list names unknown column {:?}", name)));
            }
        }
        Ok(())
    }

    fn dropped(&self, name: &str) -> bool {
        self.drop.iter().any(|d| d == name)
    }

    /// Column names emitted into the matrix, in order (dummy last).
    pub fn emitted_columns(&self) -> Vec<String> {
        let mut out: Vec<String> = self
            .columns
            .iter()
            .filter(|c| c.kind == ColumnKind::Numeric && !self.dropped(&c.name))
            .map(|c| c.name.clone())
            .collect();
        if self.add_dummy {
            out.push("dummy".to_string());
        }
        out
    }

    pub fn label_column(&self) -> Option<&str> {
        self.columns
            .iter()
            .find(|c| c.kind == ColumnKind::Label)
            .map(|c| c.name.as_str())
    }
}

/// Loads a delimited file under a schema. Numeric non-dropped columns become
/// matrix columns in declaration order; the label column, if any, becomes the
/// label vector; categorical and dropped columns are not emitted.
pub fn load_delimited(
    path: impl AsRef<Path>,
    schema: &Schema,
) -> Result<(DataMatrix, Option<LabelVector>)> {
    schema.validate()?;
    let file = std::fs::File::open(path)?;
    load_delimited_reader(file, schema)
}

/// Same as [`load_delimited`] for any reader (handy in tests).
pub fn load_delimited_reader(
    reader: impl std::io::Read,
    schema: &Schema,
) -> Result<(DataMatrix, Option<LabelVector>)> {
    let mut csv_reader = csv::ReaderBuilder::new()
        .delimiter(schema.delimiter as u8)
        .has_headers(schema.has_header)
        .from_reader(reader);

    // Per-column action resolved once, not per row.
    #[derive(Clone, Copy, PartialEq)]
    enum Action {
        Emit,
        Skip,
        Label,
    }
    let actions: Vec<Action> = schema
        .columns
        .iter()
        .map(|c| match c.kind {
            ColumnKind::Numeric if !schema.dropped(&c.name) => Action::Emit,
            ColumnKind::Label => Action::Label,
            _ => Action::Skip,
        })
        .collect();
    let has_label = actions.contains(&Action::Label);
    let width = schema.columns.len();
    let emitted = schema.emitted_columns().len();

    let mut values: Vec<f64> = Vec::new();
    let mut labels: Vec<String> = Vec::new();
    let mut record = csv::StringRecord::new();
    let mut n_rows = 0usize;
    loop {
        match csv_reader.read_record(&mut record) {
            Ok(false) => break,
            Ok(true) => {}
            Err(e) => {
                let line = e.position().map(|p| p.line()).unwrap_or(0);
                return Err(Error::parse(line, e.to_string()));
            }
        }
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() != width {
            return Err(Error::parse(
                line,
                format!("expected {} columns, found {}", width, record.len()),
            ));
        }
        for (field, (action, spec)) in
            record.iter().zip(actions.iter().zip(&schema.columns))
        {
            match action {
                Action::Emit => {
                    let v: f64 = field.trim().parse().map_err(|_| {
                        Error::parse(
                            line,
                            format!("column {:?}: {:?} is not numeric", spec.name, field),
                        )
                    })?;
                    if !v.is_finite() {
                        return Err(Error::parse(
                            line,
                            format!("column {:?}: non-finite value", spec.name),
                        ));
                    }
                    values.push(v);
                }
                Action::Label => {
                    let mut label = field.trim();
                    if let Some(suffix) = &schema.label_strip_suffix {
                        label = label.strip_suffix(suffix.as_str()).unwrap_or(label);
                    }
                    labels.push(label.to_string());
                }
                Action::Skip => {}
            }
        }
        if schema.add_dummy {
            values.push(1.0);
        }
        n_rows += 1;
    }
    if n_rows == 0 {
        return Err(Error::parse(0, "file contains no data rows"));
    }
    let matrix = DataMatrix::new(values, emitted)?;
    debug_assert_eq!(matrix.n_rows(), n_rows);
    Ok((matrix, has_label.then(|| LabelVector::new(labels))))
}

/// Per-feature z-score standardization fitted on a training window.
/// Zero-variance features pass through unchanged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    mean: Vec<f64>,
    scale: Vec<f64>,
}

pub fn fit_scaler(data: &DataMatrix) -> Scaler {
    let d = data.n_cols();
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
    let mut var = vec![0.0f64; d];
    for row in data.rows() {
        for (s, (v, m)) in var.iter_mut().zip(row.iter().zip(&mean)) {
            let dev = v - m;
            *s += dev * dev;
        }
    }
    let scale = var
        .iter()
        .map(|s| {
            let sd = (s / n).sqrt();
            if sd > 0.0 {
                sd
            } else {
                1.0
            }
        })
        .collect();
    Scaler { mean, scale }
}

pub fn apply_scaler(data: &DataMatrix, scaler: &Scaler) -> Result<DataMatrix> {
    if data.n_cols() != scaler.mean.len() {
        return Err(Error::invalid("scaler was fitted on a different column count"));
    }
    let d = data.n_cols();
    let mut values = Vec::with_capacity(data.n_rows() * d);
    for row in data.rows() {
        for ((v, m), s) in row.iter().zip(&scaler.mean).zip(&scaler.scale) {
            values.push((v - m) / s);
        }
    }
    DataMatrix::with_row_ids(values, d, data.row_ids().to_vec())
}

impl Scaler {
    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn scale(&self) -> &[f64] {
        &self.scale
    }
}

/// Fine-to-aggregate label mapping (e.g. 23 attack types into 5 categories).
/// Labels without an entry map to themselves.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelMap {
    pub map: HashMap<String, String>,
}

impl LabelMap {
    pub fn identity() -> Self {
        Self::default()
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Distinct input labels with no mapping entry (callers may warn).
    pub fn unmapped(&self, labels: &LabelVector) -> Vec<String> {
        labels.distinct().into_iter().filter(|l| !self.map.contains_key(l)).collect()
    }
}

/// Element-wise label aggregation; identity where unmapped.
pub fn aggregate_labels(labels: &LabelVector, map: &LabelMap) -> LabelVector {
    LabelVector::new(
        labels
            .iter()
            .map(|l| map.map.get(l).cloned().unwrap_or_else(|| l.to_string()))
            .collect(),
    )
}

/// Consecutive non-overlapping mini-batches of `window_size` rows; the final
/// window may be short. `window_size >= n` yields the full batch.
pub fn windows<'a>(
    data: &'a DataMatrix,
    labels: Option<&'a LabelVector>,
    window_size: usize,
) -> Result<impl Iterator<Item = (DataMatrix, Option<LabelVector>)> + 'a> {
    if window_size < 1 {
        return Err(Error::invalid("window size must be at least 1"));
    }
    if let Some(l) = labels {
        if l.len() != data.n_rows() {
            return Err(Error::invalid("labels do not match the matrix row count"));
        }
    }
    let n = data.n_rows();
    Ok((0..n).step_by(window_size).map(move |start| {
        let end = (start + window_size).min(n);
        (
            data.slice(start, end).expect("window range is valid"),
            labels.map(|l| l.slice(start, end)),
        )
    }))
}

/// Number of windows `window_size` produces over `n` rows.
pub fn window_count(n: usize, window_size: usize) -> usize {
    n.div_ceil(window_size)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn demo_schema() -> Schema {
        Schema {
            columns: vec![
                ColumnSpec { name: "x".into(), kind: ColumnKind::Numeric },
                ColumnSpec { name: "proto".into(), kind: ColumnKind::Categorical },
                ColumnSpec { name: "y".into(), kind: ColumnKind::Numeric },
                ColumnSpec { name: "label".into(), kind: ColumnKind::Label },
            ],
            drop: vec!["proto".into()],
            add_dummy: false,
            delimiter: ',',
            has_header: false,
            label_strip_suffix: None,
        }
    }

    #[test]
    fn loads_numeric_file_without_labels() {
        let schema = Schema::numeric(3, false);
        let (m, labels) =
            load_delimited_reader("1,2,3\n4,5,6\n7,8,9\n".as_bytes(), &schema).unwrap();
        assert_eq!((m.n_rows(), m.n_cols()), (3, 3));
        assert!(labels.is_none());
        assert_eq!(m.row(1), &[4.0, 5.0, 6.0]);
    }

    #[test]
    fn drops_categorical_and_reads_labels() {
        let (m, labels) =
            load_delimited_reader("1.5,tcp,2.5,good\n3.5,udp,4.5,bad\n".as_bytes(), &demo_schema())
                .unwrap();
        assert_eq!((m.n_rows(), m.n_cols()), (2, 2));
        assert_eq!(m.row(0), &[1.5, 2.5]);
        let labels = labels.unwrap();
        assert_eq!(labels.get(0), "good");
        assert_eq!(labels.get(1), "bad");
    }

    #[test]
    fn dummy_feature_appends_constant_one() {
        let mut schema = demo_schema();
        schema.add_dummy = true;
        let (m, _) =
            load_delimited_reader("1,tcp,2,a\n3,udp,4,b\n".as_bytes(), &schema).unwrap();
        assert_eq!(m.n_cols(), 3);
        assert_eq!(m.row(0), &[1.0, 2.0, 1.0]);
        assert_eq!(schema.emitted_columns(), vec!["x", "y", "dummy"]);
    }

    #[test]
    fn label_suffix_is_stripped() {
        let mut schema = demo_schema();
        schema.label_strip_suffix = Some(".".into());
        let (_, labels) =
            load_delimited_reader("1,tcp,2,smurf.\n".as_bytes(), &schema).unwrap();
        assert_eq!(labels.unwrap().get(0), "smurf");
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let schema = Schema::numeric(2, false);
        let err = load_delimited_reader("1,2\n3,oops\n".as_bytes(), &schema).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("expected parse error, got {:?}", other),
        }
        let err = load_delimited_reader("1,2\n3\n".as_bytes(), &schema).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("expected parse error, got {:?}", other),
        }
    }

    #[test]
    fn schema_validation_catches_mistakes() {
        let mut schema = demo_schema();
        schema.drop.push("missing".into());
        assert!(schema.validate().is_err());

        let mut schema = demo_schema();
        schema.columns.push(ColumnSpec { name: "label2".into(), kind: ColumnKind::Label });
        assert!(schema.validate().is_err());
    }

    #[test]
    fn scaler_standardizes_and_passes_constants_through() {
        let data = DataMatrix::from_rows(&[
            vec![8.0, 7.0],
            vec![10.0, 7.0],
            vec![12.0, 7.0],
        ])
        .unwrap();
        let scaler = fit_scaler(&data);
        let scaled = apply_scaler(&data, &scaler).unwrap();
        // Column 0 has mean 10, population sd sqrt(8/3); the constant column
        // is untouched.
        assert_eq!(scaled.row(0)[1], 7.0 - 7.0);
        for j in 0..2 {
            let mean: f64 =
                scaled.rows().map(|r| r[j]).sum::<f64>() / scaled.n_rows() as f64;
            assert!(mean.abs() < 1e-9);
        }
        let sd0: f64 = (scaled.rows().map(|r| r[0] * r[0]).sum::<f64>()
            / scaled.n_rows() as f64)
            .sqrt();
        assert!((sd0 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn scaler_value_example() {
        // mean 10, sd 2: the value 12 maps to 1.0.
        let data = DataMatrix::from_rows(&[vec![8.0], vec![12.0]]).unwrap();
        let scaler = fit_scaler(&data);
        let scaled = apply_scaler(&data, &scaler).unwrap();
        assert!((scaled.row(1)[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn repeated_fit_apply_is_stable() {
        let data = DataMatrix::from_rows(&[
            vec![1.0, 5.0],
            vec![2.0, 6.0],
            vec![3.0, 9.0],
        ])
        .unwrap();
        let a = apply_scaler(&data, &fit_scaler(&data)).unwrap();
        let b = apply_scaler(&data, &fit_scaler(&data)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn label_aggregation_examples() {
        let labels = LabelVector::from_strs(&["smurf", "neptune", "normal"]);
        assert_eq!(aggregate_labels(&labels, &LabelMap::identity()), labels);

        let mut map = LabelMap::identity();
        map.map.insert("smurf".into(), "dos".into());
        map.map.insert("neptune".into(), "dos".into());
        let out = aggregate_labels(&labels, &map);
        assert_eq!(out, LabelVector::from_strs(&["dos", "dos", "normal"]));
        assert_eq!(map.unmapped(&labels), vec!["normal".to_string()]);
    }

    #[test]
    fn windows_cover_rows_in_order() {
        let data = DataMatrix::from_rows(
            &(0..10).map(|i| vec![i as f64]).collect::<Vec<_>>(),
        )
        .unwrap();
        let labels = LabelVector::new((0..10).map(|i| format!("l{}", i)).collect());
        let got: Vec<_> = windows(&data, Some(&labels), 4).unwrap().collect();
        assert_eq!(got.len(), 3);
        assert_eq!(
            got.iter().map(|(w, _)| w.n_rows()).collect::<Vec<_>>(),
            vec![4, 4, 2]
        );
        // Concatenating windows reproduces the source order exactly.
        let mut ids = Vec::new();
        let mut labs = Vec::new();
        for (w, l) in &got {
            ids.extend_from_slice(w.row_ids());
            labs.extend(l.as_ref().unwrap().iter().map(String::from));
        }
        assert_eq!(ids, data.row_ids());
        assert_eq!(labs, labels.iter().map(String::from).collect::<Vec<_>>());
    }

    #[test]
    fn full_batch_window() {
        let data = DataMatrix::from_rows(&[vec![1.0], vec![2.0]]).unwrap();
        let got: Vec<_> = windows(&data, None, 2).unwrap().collect();
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].0, data);
    }

    #[test]
    fn window_count_arithmetic() {
        assert_eq!(window_count(4_900_000, 80_000), 62);
        assert_eq!(window_count(10, 4), 3);
        assert_eq!(window_count(10, 10), 1);
    }

    #[test]
    fn shipped_kddcup_schema_is_valid() {
        let schema = Schema::from_json_file(
            std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("schemas/kddcup.json"),
        )
        .unwrap();
        assert_eq!(schema.columns.len(), 42);
        assert_eq!(schema.label_column(), Some("label"));
        // 41 features minus the three dropped non-numeric ones, plus dummy.
        assert_eq!(schema.emitted_columns().len(), 39);
        assert_eq!(schema.emitted_columns().last().unwrap(), "dummy");
        assert_eq!(schema.label_strip_suffix.as_deref(), Some("."));
    }

    #[test]
    fn shipped_five_class_map_collapses_all_train_labels() {
        let map = LabelMap::from_json_file(
            std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
                .join("schemas/kddcup_labels_5class.json"),
        )
        .unwrap();
        assert_eq!(map.map.len(), 23);
        let fine = LabelVector::new(map.map.keys().cloned().collect());
        let coarse = aggregate_labels(&fine, &map);
        let mut categories = coarse.distinct();
        categories.sort_unstable();
        assert_eq!(categories, vec!["dos", "normal", "probe", "r2l", "u2r"]);
        assert!(map.unmapped(&fine).is_empty());
    }
}
