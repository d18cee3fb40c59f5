//! End-to-end tests of the command-line surface: file in, file out, exit
//! codes, and worker-count independence of the data artifacts.

use std::path::Path;
use std::process::Command;

fn pvq_bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pvq"))
}

fn write_fixture(dir: &Path) -> (std::path::PathBuf, std::path::PathBuf) {
    // 100 rows, two blobs 9:1, labeled.
    let mut csv = String::new();
    for i in 0..100 {
        let (cx, label) = if i % 10 == 0 { (25.0, "rare") } else { (0.0, "common") };
        let x = cx + (i as f64 * 0.37).sin();
        let y = cx + (i as f64 * 0.73).cos();
        csv.push_str(&format!("{x},{y},{label}\n"));
    }
    let input = dir.join("window.csv");
    std::fs::write(&input, csv).unwrap();

    let schema = dir.join("schema.json");
    std::fs::write(
        &schema,
        r#"{
  "delimiter": ",",
  "has_header": false,
  "columns": [
    {"name": "x", "kind": "numeric"},
    {"name": "y", "kind": "numeric"},
    {"name": "label", "kind": "label"}
  ]
}"#,
    )
    .unwrap();
    (input, schema)
}

#[test]
fn sample_output_is_subset_and_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (input, schema) = write_fixture(dir.path());

    let run = |out: &str| {
        let status = pvq_bin()
            .args([
                "sample",
                "--input",
                input.to_str().unwrap(),
                "--schema",
                schema.to_str().unwrap(),
                "--target-size",
                "50",
                "--seed",
                "7",
                "--out",
                dir.path().join(out).to_str().unwrap(),
            ])
            .status()
            .unwrap();
        assert!(status.success());
        std::fs::read(dir.path().join(format!("{out}.csv"))).unwrap()
    };
    let first = run("a");
    let second = run("b");
    assert_eq!(first, second, "same seed must give byte-identical CSVs");

    let text = String::from_utf8(first).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert!(rows.len() <= 50);
    for line in &rows {
        let id: usize = line.split(',').next().unwrap().parse().unwrap();
        assert!(id < 100, "sampled id {} not from the input", id);
    }

    let stats: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("a.stats.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(stats["config"]["seed"], 7);
    assert!(stats["realized_size"].as_u64().unwrap() <= stats["size_bound"].as_u64().unwrap());
}

#[test]
fn worker_count_does_not_change_the_sample() {
    let dir = tempfile::tempdir().unwrap();
    let (input, schema) = write_fixture(dir.path());

    let run = |workers: &str, out: &str| {
        let status = pvq_bin()
            .args([
                "sample",
                "--input",
                input.to_str().unwrap(),
                "--schema",
                schema.to_str().unwrap(),
                "--shards",
                "4",
                "--seed",
                "3",
                "--workers",
                workers,
                "--format",
                "json",
                "--out",
                dir.path().join(out).to_str().unwrap(),
            ])
            .status()
            .unwrap();
        assert!(status.success());
        std::fs::read(dir.path().join(format!("{out}.json"))).unwrap()
    };
    assert_eq!(run("1", "w1"), run("8", "w8"));
}

#[test]
fn baseline_identity_and_bad_size() {
    let dir = tempfile::tempdir().unwrap();
    let (input, schema) = write_fixture(dir.path());

    let status = pvq_bin()
        .args([
            "baseline",
            "--input",
            input.to_str().unwrap(),
            "--schema",
            schema.to_str().unwrap(),
            "--size",
            "100",
            "--seed",
            "1",
            "--out",
            dir.path().join("all").to_str().unwrap(),
        ])
        .status()
        .unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(dir.path().join("all.csv")).unwrap();
    assert_eq!(text.lines().count(), 101); // header + every input row

    let status = pvq_bin()
        .args([
            "baseline",
            "--input",
            input.to_str().unwrap(),
            "--schema",
            schema.to_str().unwrap(),
            "--size",
            "0",
            "--seed",
            "1",
            "--out",
            dir.path().join("none").to_str().unwrap(),
        ])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2), "size 0 is a usage error");
}

#[test]
fn experiment_emits_records_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let (input, schema) = write_fixture(dir.path());

    let status = pvq_bin()
        .args([
            "experiment",
            "--input",
            input.to_str().unwrap(),
            "--test",
            input.to_str().unwrap(),
            "--schema",
            schema.to_str().unwrap(),
            "--target-size",
            "30",
            "--reps",
            "2",
            "--k",
            "3",
            "--seed",
            "9",
            "--test-size",
            "20",
            "--rough-epochs",
            "2",
            "--fine-epochs",
            "2",
            "--out",
            dir.path().join("exp").to_str().unwrap(),
        ])
        .status()
        .unwrap();
    assert!(status.success());

    let csv = std::fs::read_to_string(dir.path().join("exp.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 1 + 4, "2 reps x 2 samplers plus header");
    assert!(lines[0].starts_with("seed,sampler,classifier,accuracy,macro_recall"));

    let summary: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("exp.summary.json")).unwrap(),
    )
    .unwrap();
    for sampler in ["pvq", "random"] {
        for metric in ["accuracy", "macro_recall", "weighted_precision", "mcc"] {
            let block = &summary[sampler][metric];
            assert!(block["median"].is_number(), "{sampler}.{metric}.median missing");
            assert!(block["mean"].is_number());
            assert!(block["iqr"].is_number());
        }
    }
    assert_eq!(summary["comparison"]["paired_test_subsets"], true);
}

#[test]
fn coverage_reports_counts_and_reference() {
    let dir = tempfile::tempdir().unwrap();
    let sampled = dir.path().join("sampled.csv");
    std::fs::write(&sampled, "row_id,x,label,shard\n0,1.0,a,0\n1,2.0,a,0\n2,3.0,b,1\n")
        .unwrap();

    let output = pvq_bin()
        .args(["coverage", "--input", sampled.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(output.status.success());
    assert!(String::from_utf8_lossy(&output.stdout).contains("coverage: 2"));

    let reference = dir.path().join("ref.txt");
    std::fs::write(&reference, "a\nb\nc\n").unwrap();
    let output = pvq_bin()
        .args([
            "coverage",
            "--input",
            sampled.to_str().unwrap(),
            "--reference",
            reference.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(output.status.success());
    let text = String::from_utf8_lossy(&output.stdout);
    assert!(text.contains("coverage: 2/3"), "got {text}");
    assert!(text.contains("missing: c"));

    let empty = dir.path().join("empty.csv");
    std::fs::write(&empty, "").unwrap();
    let status = pvq_bin()
        .args(["coverage", "--input", empty.to_str().unwrap()])
        .status()
        .unwrap();
    assert_ne!(status.code(), Some(0), "empty file must fail");
}

#[test]
fn missing_input_fails_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let (_, schema) = write_fixture(dir.path());
    let status = pvq_bin()
        .args([
            "sample",
            "--input",
            dir.path().join("nope.csv").to_str().unwrap(),
            "--schema",
            schema.to_str().unwrap(),
            "--target-size",
            "10",
            "--out",
            dir.path().join("x").to_str().unwrap(),
        ])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1), "io errors exit 1");
}

#[test]
fn malformed_data_exits_with_parse_code() {
    let dir = tempfile::tempdir().unwrap();
    let (input, schema) = write_fixture(dir.path());
    std::fs::write(&input, "1.0,not_a_number,a\n").unwrap();
    let status = pvq_bin()
        .args([
            "sample",
            "--input",
            input.to_str().unwrap(),
            "--schema",
            schema.to_str().unwrap(),
            "--target-size",
            "10",
            "--out",
            dir.path().join("x").to_str().unwrap(),
        ])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(65), "data parse errors exit 65");
}
