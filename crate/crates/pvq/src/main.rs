//! Thin command-line driver over the library: sample / baseline / experiment
//! / coverage. Every run is reproducible from the metadata echoed into its
//! outputs.
//!
//! Exit codes: 0 success, 2 usage or invalid parameters, 65 input-data parse
//! errors, 1 anything else.

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::fs::File;
use std::io::{BufReader, BufWriter, Read};
use std::path::{Path, PathBuf};
use std::time::Instant;

use pvq::data::{DataMatrix, LabelVector, RandomSource};
use pvq::error::Error;
use pvq::eval::{run_experiment, ExperimentConfig, SamplerKind};
use pvq::ingest::{apply_scaler, fit_scaler, load_delimited, LabelMap, Schema};
use pvq::report::{
    write_run_records_csv, write_sample_csv, CoverageReport, PairedExperimentReport,
    SampleRunStats,
};
use pvq::sample::{pvq as pvq_sample, pvq_to_target, SampleResult};
use pvq::som::TrainSchedule;

#[derive(Parser)]
#[command(name = "pvq", version, about = "Parallel vector-quantization sampling of data-stream windows")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a vector-quantization sample from a delimited window
    Sample(SampleArgs),
    /// Draw a uniform random baseline sample
    Baseline(BaselineArgs),
    /// Run the paired PVQ-vs-random experiment with the reference kNN
    Experiment(ExperimentArgs),
    /// Report class coverage of a sampled CSV
    Coverage(CoverageArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    /// Sampled rows as CSV (original units, label, shard provenance)
    Csv,
    /// Canonical serialized result as JSON
    Json,
}

#[derive(Args)]
struct SampleArgs {
    /// Input delimited file
    #[arg(long)]
    input: PathBuf,
    /// Schema JSON describing the input columns
    #[arg(long)]
    schema: PathBuf,
    /// Desired sample size (chooses the shard count)
    #[arg(long, conflicts_with = "shards")]
    target_size: Option<usize>,
    /// Explicit shard count L
    #[arg(long)]
    shards: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads (default: available parallelism)
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Output path prefix: writes <out>.csv or <out>.json plus <out>.stats.json
    #[arg(long)]
    out: PathBuf,
    /// Rough-phase epoch count override
    #[arg(long)]
    rough_epochs: Option<usize>,
    /// Fine-phase epoch count override
    #[arg(long)]
    fine_epochs: Option<usize>,
}

#[derive(Args)]
struct BaselineArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    schema: PathBuf,
    /// Sample size
    #[arg(long)]
    size: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Training window file
    #[arg(long)]
    input: PathBuf,
    /// Test window file
    #[arg(long)]
    test: PathBuf,
    #[arg(long)]
    schema: PathBuf,
    /// Training sample size drawn by each sampler
    #[arg(long)]
    target_size: usize,
    /// Repetitions per sampler
    #[arg(long, default_value_t = 50)]
    reps: usize,
    /// Neighbor count of the reference kNN
    #[arg(long, default_value_t = 5)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    workers: Option<usize>,
    /// Test rows scored per repetition (default: 3.2% of the test window)
    #[arg(long)]
    test_size: Option<usize>,
    /// Aggregate labels through the 5-category map at this path before running
    #[arg(long, value_name = "PATH")]
    labels_5: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Output path prefix: writes <out>.csv (or .json) plus <out>.summary.json
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    rough_epochs: Option<usize>,
    #[arg(long)]
    fine_epochs: Option<usize>,
}

#[derive(Args)]
struct CoverageArgs {
    /// Sampled CSV (as written by the sample/baseline subcommands)
    #[arg(long)]
    input: PathBuf,
    /// Reference label list, one label per line
    #[arg(long)]
    reference: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

fn main() {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("error: {}", err);
            match err {
                Error::InvalidArgument(_) => 2,
                Error::Parse { .. } => 65,
                _ => 1,
            }
        }
    };
    std::process::exit(code);
}

fn run(cli: Cli) -> pvq::Result<()> {
    match cli.command {
        Command::Sample(args) => cmd_sample(args),
        Command::Baseline(args) => cmd_baseline(args),
        Command::Experiment(args) => cmd_experiment(args),
        Command::Coverage(args) => cmd_coverage(args),
    }
}

fn worker_pool(workers: Option<usize>) -> pvq::Result<(rayon::ThreadPool, usize)> {
    let threads = workers.unwrap_or_else(|| {
        std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
    });
    if threads < 1 {
        return Err(Error::InvalidArgument("worker count must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    Ok((pool, threads))
}

fn schedule_with(rough: Option<usize>, fine: Option<usize>) -> TrainSchedule {
    let mut schedule = TrainSchedule::default();
    if let Some(r) = rough {
        schedule.rough_epochs = r;
    }
    if let Some(f) = fine {
        schedule.fine_epochs = f;
    }
    schedule
}

fn load_window(path: &Path, schema: &Schema) -> pvq::Result<(DataMatrix, Option<LabelVector>)> {
    load_delimited(path, schema)
}

fn prefixed(prefix: &Path, suffix: &str) -> PathBuf {
    let mut name = prefix.file_name().map(|f| f.to_os_string()).unwrap_or_default();
    name.push(suffix);
    prefix.with_file_name(name)
}

fn write_sample_outputs(
    args_format: Format,
    out: &Path,
    result: &SampleResult,
    original: &DataMatrix,
    labels: Option<&LabelVector>,
    schema: &Schema,
    stats: &SampleRunStats,
) -> pvq::Result<()> {
    match args_format {
        Format::Csv => {
            let file = BufWriter::new(File::create(prefixed(out, ".csv"))?);
            write_sample_csv(file, result, original, labels, &schema.emitted_columns())?;
        }
        Format::Json => {
            std::fs::write(prefixed(out, ".json"), result.to_json()?)?;
        }
    }
    let stats_file = BufWriter::new(File::create(prefixed(out, ".stats.json"))?);
    serde_json::to_writer_pretty(stats_file, stats)?;
    Ok(())
}

fn cmd_sample(args: SampleArgs) -> pvq::Result<()> {
    let schema = Schema::from_json_file(&args.schema)?;
    let (original, labels) = load_window(&args.input, &schema)?;
    let schedule = schedule_with(args.rough_epochs, args.fine_epochs);
    let rng = RandomSource::new(args.seed);
    let (pool, threads) = worker_pool(args.workers)?;

    let scaler = fit_scaler(&original);
    let scaled = apply_scaler(&original, &scaler)?;

    let started = Instant::now();
    let result = pool.install(|| match (args.target_size, args.shards) {
        (Some(target), None) => pvq_to_target(&scaled, target, &schedule, &rng),
        (None, Some(l)) => pvq_sample(&scaled, l, &schedule, &rng),
        (None, None) => {
            Err(Error::InvalidArgument("pass --target-size or --shards".into()))
        }
        (Some(_), Some(_)) => unreachable!("clap rejects the combination"),
    })?;
    let wall_ms = started.elapsed().as_secs_f64() * 1e3;

    let stats = SampleRunStats::new(&result, &original, threads, wall_ms);
    write_sample_outputs(
        args.format,
        &args.out,
        &result,
        &original,
        labels.as_ref(),
        &schema,
        &stats,
    )?;
    println!(
        "sampled {} of {} rows (bound {}, {} shards, seed {}) in {:.0} ms",
        stats.realized_size, stats.input_rows, stats.size_bound, result.config.shard_count,
        args.seed, wall_ms
    );
    Ok(())
}

fn cmd_baseline(args: BaselineArgs) -> pvq::Result<()> {
    let schema = Schema::from_json_file(&args.schema)?;
    let (original, labels) = load_window(&args.input, &schema)?;
    let rng = RandomSource::new(args.seed);

    let started = Instant::now();
    let result = pvq::eval::random_sample(&original, args.size, &rng)?;
    let wall_ms = started.elapsed().as_secs_f64() * 1e3;

    let stats = SampleRunStats::new(&result, &original, 1, wall_ms);
    write_sample_outputs(
        args.format,
        &args.out,
        &result,
        &original,
        labels.as_ref(),
        &schema,
        &stats,
    )?;
    println!(
        "random sample of {} rows from {} (seed {}) in {:.0} ms",
        args.size,
        original.n_rows(),
        args.seed,
        wall_ms
    );
    Ok(())
}

fn cmd_experiment(args: ExperimentArgs) -> pvq::Result<()> {
    let schema = Schema::from_json_file(&args.schema)?;
    let (train, train_labels) = load_window(&args.input, &schema)?;
    let (test, test_labels) = load_window(&args.test, &schema)?;
    let train_labels = train_labels
        .ok_or_else(|| Error::InvalidArgument("experiment needs a labeled train file".into()))?;
    let test_labels = test_labels
        .ok_or_else(|| Error::InvalidArgument("experiment needs a labeled test file".into()))?;

    let label_map = match &args.labels_5 {
        Some(path) => {
            let map = LabelMap::from_json_file(path)?;
            let unmapped = map.unmapped(&train_labels);
            if !unmapped.is_empty() {
                eprintln!("warning: labels with no aggregation entry: {:?}", unmapped);
            }
            Some(map)
        }
        None => None,
    };

    let mut config = ExperimentConfig::new(SamplerKind::Pvq, args.target_size);
    config.repetitions = args.reps;
    config.seed = args.seed;
    config.knn_k = args.k;
    config.test_size = args.test_size;
    config.schedule = schedule_with(args.rough_epochs, args.fine_epochs);
    config.label_map = label_map;

    let (pool, _) = worker_pool(args.workers)?;
    let (pvq_outcome, random_outcome) = pool.install(|| -> pvq::Result<_> {
        let pvq_outcome =
            run_experiment(&config, (&train, &train_labels), (&test, &test_labels))?;
        let mut random_config = config.clone();
        random_config.sampler = SamplerKind::Random;
        let random_outcome =
            run_experiment(&random_config, (&train, &train_labels), (&test, &test_labels))?;
        Ok((pvq_outcome, random_outcome))
    })?;

    let mut records = pvq_outcome.records.clone();
    records.extend(random_outcome.records.iter().cloned());
    let classifier = format!("knn{}", args.k);

    match args.format {
        Format::Csv => {
            let file = BufWriter::new(File::create(prefixed(&args.out, ".csv"))?);
            write_run_records_csv(file, &records, &classifier)?;
        }
        Format::Json => {
            let file = BufWriter::new(File::create(prefixed(&args.out, ".json"))?);
            serde_json::to_writer_pretty(file, &records)?;
        }
    }
    let test_size = args
        .test_size
        .unwrap_or(((test.n_rows() as f64 * 0.032).round() as usize).max(1));
    let report = PairedExperimentReport::build(
        args.seed,
        args.target_size,
        test_size,
        classifier,
        &pvq_outcome,
        &random_outcome,
    );
    let summary_file = BufWriter::new(File::create(prefixed(&args.out, ".summary.json"))?);
    serde_json::to_writer_pretty(summary_file, &report)?;

    println!(
        "{} reps x 2 samplers done: median coverage pvq {} vs random {}, median mcc {:.3} vs {:.3}",
        args.reps,
        report.pvq.classes_covered.median,
        report.random.classes_covered.median,
        report.pvq.mcc.median,
        report.random.mcc.median,
    );
    Ok(())
}

fn cmd_coverage(args: CoverageArgs) -> pvq::Result<()> {
    let file = BufReader::new(File::open(&args.input)?);
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
    let headers = reader.headers().map_err(|e| Error::Parse {
        line: 1,
        message: e.to_string(),
    })?;
    let label_col = headers
        .iter()
        .position(|h| h == "label")
        .ok_or_else(|| Error::InvalidArgument("input has no \"label\" column".into()))?;

    let mut labels = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            Error::Parse { line: e.position().map(|p| p.line()).unwrap_or(0), message: e.to_string() }
        })?;
        labels.push(record.get(label_col).unwrap_or("").to_string());
    }
    let labels = LabelVector::new(labels);

    let reference = match &args.reference {
        Some(path) => {
            let mut text = String::new();
            BufReader::new(File::open(path)?).read_to_string(&mut text)?;
            let list: Vec<String> =
                text.lines().map(str::trim).filter(|l| !l.is_empty()).map(String::from).collect();
            Some(list)
        }
        None => None,
    };
    let report = CoverageReport::new(&labels, reference.as_deref())?;
    match args.format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&report)?),
        Format::Csv => {
            println!("coverage: {}", report.display);
            if !report.missing.is_empty() {
                println!("missing: {}", report.missing.join(","));
            }
        }
    }
    Ok(())
}
