//! Command-line front end: split corpora, simulate oracles, evaluate
//! triplet files, merge reports, and run the built-in selfcheck.
//!
//! Exit codes: 2 for configuration problems, 3 for data problems, 4
//! when every conditioning set of a metric is empty, 5 when the
//! selfcheck finds a mismatch. `M2MBENCH_OUT_DIR` supplies the default
//! output directory when `--out` is not given. A `--config` TOML file,
//! when present, overrides the corresponding command-line flags.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use crate::config::{builtin_config, load_config, DatasetConfig};
use crate::error::{Error, Result};
use crate::fixtures::{shapes_grid, GRID_CORPUS_NAME};
use crate::io::{
    load_corpus, load_manifest, load_triplets, load_triplets_csv, save_id_list, save_manifest,
    save_triplets, CorpusFormat, TripletHeader,
};
use crate::metrics::{compute_report, pose_report, EvalOptions, LabelSource};
use crate::oracles::{
    generate_triplets, parse_oracle, OracleKind, OracleSpec, Pairing, DEFAULT_PAIR_CAP,
};
use crate::report::{
    emit_per_attribute_report, emit_pose_report, emit_report, parse_report_json, ReportDocument,
    ReportFormat,
};
use crate::schema::Domain;
use crate::splitter::{build_split, check_manifest, split_stats};

pub const OUT_DIR_ENV: &str = "M2MBENCH_OUT_DIR";
pub const DEFAULT_SEED: u64 = 42;

#[derive(Parser)]
#[command(
    name = "m2mbench",
    version,
    about = "Attribute-space benchmark toolchain for guided image translation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Filter a labeled corpus into the two domain manifests.
    Split(SplitArgs),
    /// Generate triplets under a reference oracle.
    Simulate(SimulateArgs),
    /// Compute metrics over a triplet file and emit a report.
    Eval(EvalArgs),
    /// Merge evaluation reports into one document.
    Report(ReportArgs),
    /// Run the built-in consistency suite.
    Selfcheck(SelfcheckArgs),
}

#[derive(Args, Clone)]
struct DatasetArgs {
    /// Built-in dataset name: 3dshapes, synaction, or celeba_d.
    #[arg(long, conflicts_with = "schema")]
    dataset: Option<String>,
    /// Schema file (with --partition) instead of a built-in dataset.
    #[arg(long, requires = "partition")]
    schema: Option<PathBuf>,
    #[arg(long, requires = "schema")]
    partition: Option<PathBuf>,
}

impl DatasetArgs {
    fn load(&self) -> Result<DatasetConfig> {
        match (&self.dataset, &self.schema, &self.partition) {
            (Some(name), None, None) => builtin_config(name),
            (None, Some(schema), Some(partition)) => load_config(schema, partition),
            (None, None, None) => Err(Error::config(
                "pass --dataset or both --schema and --partition",
            )),
            _ => Err(Error::config(
                "--dataset conflicts with --schema/--partition",
            )),
        }
    }
}

#[derive(Args)]
struct SplitArgs {
    #[command(flatten)]
    dataset: DatasetArgs,
    /// Corpus path, or builtin:3dshapes-grid for the synthesized grid.
    #[arg(long)]
    corpus: Option<String>,
    /// csv, jsonl, or celeba-attr; inferred from the extension if absent.
    #[arg(long)]
    corpus_format: Option<String>,
    /// Output directory for manifests, id lists, and the summary.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Run-config TOML; its entries override these flags.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    dataset: DatasetArgs,
    #[arg(long)]
    manifest_a: Option<PathBuf>,
    #[arg(long)]
    manifest_b: Option<PathBuf>,
    /// content-identity, guidance-identity, random-target,
    /// random-triplets, perfect, style-copier:a,b,... or constant:v,...
    #[arg(long)]
    oracle: Option<String>,
    /// Wraps the oracle in per-attribute label noise of this rate.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Pairs per direction (uniform-random pairing).
    #[arg(long, default_value_t = 10_000)]
    pairs: u64,
    /// uniform-random or exhaustive.
    #[arg(long, default_value = "uniform-random")]
    pairing: String,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Pair-count guard for exhaustive pairing.
    #[arg(long, default_value_t = DEFAULT_PAIR_CAP)]
    cap: u64,
    /// Output triplet file (JSONL).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    dataset: DatasetArgs,
    /// Triplet file; .csv loads the CSV layout, anything else JSONL.
    #[arg(long)]
    triplets: Option<PathBuf>,
    /// Row label in the report; defaults to the file's oracle name.
    #[arg(long)]
    name: Option<String>,
    /// markdown, csv, or json.
    #[arg(long, default_value = "markdown")]
    format: String,
    #[arg(long, default_value_t = 30.0)]
    bias_threshold: f64,
    /// Evaluate against ground-truth vectors instead of given labels.
    #[arg(long)]
    ground_truth: bool,
    /// Append the per-attribute breakdown (markdown only).
    #[arg(long)]
    per_attribute: bool,
    /// Also report pose statistics for this continuous attribute.
    #[arg(long)]
    pose: Option<String>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Record the emission time in the report header.
    #[arg(long)]
    stamp: bool,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    /// Report documents to merge: path.json or name=path.json to
    /// relabel a single-row document.
    #[arg(required = true)]
    inputs: Vec<String>,
    #[arg(long, default_value = "markdown")]
    format: String,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct SelfcheckArgs {
    /// Print passing checks too, not only failures.
    #[arg(long)]
    verbose: bool,
}

/// Flat run-config file; any present key overrides its flag.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileOverrides {
    dataset: Option<String>,
    schema: Option<PathBuf>,
    partition: Option<PathBuf>,
    corpus: Option<String>,
    corpus_format: Option<String>,
    manifest_a: Option<PathBuf>,
    manifest_b: Option<PathBuf>,
    triplets: Option<PathBuf>,
    out: Option<PathBuf>,
    format: Option<String>,
    oracle: Option<String>,
    pairs: Option<u64>,
    pairing: Option<String>,
    seed: Option<u64>,
    epsilon: Option<f64>,
    bias_threshold: Option<f64>,
    cap: Option<u64>,
    name: Option<String>,
    stamp: Option<bool>,
    per_attribute: Option<bool>,
    pose: Option<String>,
    ground_truth: Option<bool>,
}

fn load_overrides(path: Option<&Path>) -> Result<FileOverrides> {
    let Some(path) = path else {
        return Ok(FileOverrides::default());
    };
    let text =
        fs::read_to_string(path).map_err(|e| Error::config(format!("{}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| Error::config(format!("{}: {e}", path.display())))
}

fn override_dataset(args: &mut DatasetArgs, file: &FileOverrides) {
    if file.dataset.is_some() {
        args.dataset = file.dataset.clone();
        args.schema = None;
        args.partition = None;
    }
    if file.schema.is_some() {
        args.schema = file.schema.clone();
        args.dataset = None;
    }
    if file.partition.is_some() {
        args.partition = file.partition.clone();
        args.dataset = None;
    }
}

fn out_path(explicit: Option<&Path>, default_name: &str) -> PathBuf {
    match explicit {
        Some(path) => path.to_path_buf(),
        None => {
            let base = std::env::var_os(OUT_DIR_ENV)
                .map(PathBuf::from)
                .unwrap_or_else(|| PathBuf::from("."));
            base.join(default_name)
        }
    }
}

fn write_or_print(out: Option<&Path>, default_name: Option<&str>, text: &str) -> Result<()> {
    match (out, default_name) {
        (None, None) => {
            print!("{text}");
            Ok(())
        }
        _ => {
            let path = match out {
                Some(p) => p.to_path_buf(),
                None => out_path(None, default_name.expect("default name")),
            };
            fs::write(&path, text)?;
            eprintln!("wrote {}", path.display());
            Ok(())
        }
    }
}

fn require<T>(value: Option<T>, flag: &str) -> Result<T> {
    value.ok_or_else(|| Error::config(format!("missing required {flag}")))
}

fn run_split(mut args: SplitArgs) -> Result<()> {
    let overrides = load_overrides(args.config.as_deref())?;
    override_dataset(&mut args.dataset, &overrides);
    if overrides.corpus.is_some() {
        args.corpus = overrides.corpus.clone();
    }
    if overrides.corpus_format.is_some() {
        args.corpus_format = overrides.corpus_format.clone();
    }
    if overrides.out.is_some() {
        args.out = overrides.out.clone();
    }

    let config = args.dataset.load()?;
    let corpus_name = require(args.corpus, "--corpus")?;
    let corpus = if corpus_name == GRID_CORPUS_NAME {
        if config.dataset.as_deref() != Some("3dshapes") {
            return Err(Error::config(format!(
                "{GRID_CORPUS_NAME} only matches the 3dshapes schema"
            )));
        }
        shapes_grid()
    } else {
        let path = Path::new(&corpus_name);
        let format = match &args.corpus_format {
            Some(f) => CorpusFormat::parse(f)?,
            None => CorpusFormat::infer(path)?,
        };
        load_corpus(path, format, &config.schema)?
    };

    let outcome = build_split(
        &corpus,
        &config.schema,
        &config.partition,
        &config.partition_hash(),
        &corpus_name,
    )?;
    let out_dir = out_path(args.out.as_deref(), "");
    if !out_dir.as_os_str().is_empty() {
        fs::create_dir_all(&out_dir)?;
    }
    save_manifest(&out_dir.join("a.manifest.jsonl"), &outcome.a)?;
    save_manifest(&out_dir.join("b.manifest.jsonl"), &outcome.b)?;
    save_id_list(&out_dir.join("a.ids.txt"), &outcome.a)?;
    save_id_list(&out_dir.join("b.ids.txt"), &outcome.b)?;

    let stats = split_stats(&outcome.a, &outcome.b, &config.schema, &config.partition);
    let summary = serde_json::json!({
        "dataset": config.dataset,
        "partition_hash": config.partition_hash(),
        "corpus": corpus_name,
        "corpus_examples": corpus.len(),
        "domain_a": outcome.a.examples.len(),
        "domain_b": outcome.b.examples.len(),
        "overlap": outcome.overlap_ids.len(),
        "unmatched": outcome.unmatched,
        "warnings": outcome.warnings,
        "variation_warnings": stats.warnings,
    });
    let mut summary_text =
        serde_json::to_string_pretty(&summary).map_err(|e| Error::data(e.to_string()))?;
    summary_text.push('\n');
    fs::write(out_dir.join("split.summary.json"), &summary_text)?;

    for warning in outcome.warnings.iter().chain(&stats.warnings) {
        eprintln!("warning: {warning}");
    }
    println!(
        "split {}: |A| = {}, |B| = {}, overlap = {}, unmatched = {}",
        config.dataset.as_deref().unwrap_or("dataset"),
        outcome.a.examples.len(),
        outcome.b.examples.len(),
        outcome.overlap_ids.len(),
        outcome.unmatched
    );
    eprintln!("wrote manifests to {}", out_dir.display());
    Ok(())
}

fn run_simulate(mut args: SimulateArgs) -> Result<()> {
    let overrides = load_overrides(args.config.as_deref())?;
    override_dataset(&mut args.dataset, &overrides);
    if overrides.manifest_a.is_some() {
        args.manifest_a = overrides.manifest_a.clone();
    }
    if overrides.manifest_b.is_some() {
        args.manifest_b = overrides.manifest_b.clone();
    }
    if overrides.oracle.is_some() {
        args.oracle = overrides.oracle.clone();
    }
    if let Some(v) = overrides.epsilon {
        args.epsilon = Some(v);
    }
    if let Some(v) = overrides.pairs {
        args.pairs = v;
    }
    if let Some(v) = &overrides.pairing {
        args.pairing = v.clone();
    }
    if let Some(v) = overrides.seed {
        args.seed = v;
    }
    if let Some(v) = overrides.cap {
        args.cap = v;
    }
    if overrides.out.is_some() {
        args.out = overrides.out.clone();
    }

    let config = args.dataset.load()?;
    let manifest_a = load_manifest(&require(args.manifest_a, "--manifest-a")?)?;
    let manifest_b = load_manifest(&require(args.manifest_b, "--manifest-b")?)?;
    let hash = config.partition_hash();
    check_manifest(
        &manifest_a,
        &config.schema,
        &config.partition,
        &hash,
        Domain::A,
        "manifest A",
    )?;
    check_manifest(
        &manifest_b,
        &config.schema,
        &config.partition,
        &hash,
        Domain::B,
        "manifest B",
    )?;

    let oracle_text = require(args.oracle, "--oracle")?;
    let mut kind = parse_oracle(&oracle_text, &config.schema, &config.partition)?;
    let mut oracle_label = oracle_text.clone();
    if let Some(epsilon) = args.epsilon {
        kind = OracleKind::Composite {
            epsilon,
            inner: Box::new(kind),
        };
        kind.validate(&config.schema)?;
        oracle_label = format!("{oracle_text}+noise{epsilon}");
    }
    let pairing = match args.pairing.as_str() {
        "uniform-random" => Pairing::UniformRandom,
        "exhaustive" => Pairing::Exhaustive,
        other => return Err(Error::config(format!("unknown pairing '{other}'"))),
    };
    let spec = OracleSpec {
        kind,
        seed: args.seed,
    };
    let triplets = generate_triplets(
        &spec,
        &config.schema,
        &config.partition,
        &manifest_a,
        &manifest_b,
        args.pairs,
        pairing,
        args.cap,
    )?;

    let mut header = TripletHeader::new();
    header.dataset = config.dataset.clone();
    header.partition_hash = Some(config.partition_hash());
    header.oracle = Some(oracle_label);
    header.seed = Some(args.seed);
    let out = out_path(args.out.as_deref(), "triplets.jsonl");
    save_triplets(&out, &triplets, Some(&header))?;
    println!("simulated {} triplets to {}", triplets.len(), out.display());
    Ok(())
}

fn run_eval(mut args: EvalArgs) -> Result<()> {
    let overrides = load_overrides(args.config.as_deref())?;
    override_dataset(&mut args.dataset, &overrides);
    if overrides.triplets.is_some() {
        args.triplets = overrides.triplets.clone();
    }
    if overrides.name.is_some() {
        args.name = overrides.name.clone();
    }
    if let Some(v) = &overrides.format {
        args.format = v.clone();
    }
    if let Some(v) = overrides.bias_threshold {
        args.bias_threshold = v;
    }
    if let Some(v) = overrides.ground_truth {
        args.ground_truth = v;
    }
    if let Some(v) = overrides.per_attribute {
        args.per_attribute = v;
    }
    if overrides.pose.is_some() {
        args.pose = overrides.pose.clone();
    }
    if overrides.out.is_some() {
        args.out = overrides.out.clone();
    }
    if let Some(v) = overrides.stamp {
        args.stamp = v;
    }

    let config = args.dataset.load()?;
    let triplet_path = require(args.triplets, "--triplets")?;
    let (triplets, header) = if triplet_path.extension().and_then(|e| e.to_str()) == Some("csv") {
        (load_triplets_csv(&triplet_path, &config.schema)?, None)
    } else {
        load_triplets(&triplet_path)?
    };
    if let Some(h) = &header {
        if let Some(hash) = &h.partition_hash {
            if *hash != config.partition_hash() {
                return Err(Error::data(format!(
                    "triplet file was generated under partition {hash}, configured partition is {}",
                    config.partition_hash()
                )));
            }
        }
    }

    let options = EvalOptions {
        label_source: if args.ground_truth {
            LabelSource::GroundTruth
        } else {
            LabelSource::AsGiven
        },
        bias_threshold: args.bias_threshold,
    };
    let metric_report = compute_report(&triplets, &config.schema, &config.partition, &options)?;

    let name = args
        .name
        .or_else(|| header.as_ref().and_then(|h| h.oracle.clone()))
        .unwrap_or_else(|| "model".into());
    let dataset_name = config.dataset.clone().unwrap_or_else(|| "dataset".into());
    let mut doc = ReportDocument::new(dataset_name, config.partition_hash());
    if args.stamp {
        let seconds = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        doc.stamp = Some(format!("unix:{seconds}"));
    }
    doc.push(name, metric_report.clone());

    let format = ReportFormat::parse(&args.format)?;
    let mut text = emit_report(&doc, format)?;
    if format == ReportFormat::Markdown {
        if args.per_attribute {
            text.push('\n');
            text.push_str(&emit_per_attribute_report(
                &metric_report,
                &config.schema,
                &config.partition,
                doc.options.precision,
            ));
        }
        if let Some(pose_name) = &args.pose {
            let k = config.schema.require_index(pose_name)?;
            let pose = pose_report(&triplets, &config.schema, k)?;
            text.push('\n');
            text.push_str(&emit_pose_report(
                &pose,
                &config.schema,
                doc.options.precision,
            ));
        }
    } else if args.per_attribute || args.pose.is_some() {
        eprintln!("note: --per-attribute/--pose sections render in markdown format only");
    }
    write_or_print(args.out.as_deref(), None, &text)
}

fn run_report(mut args: ReportArgs) -> Result<()> {
    let overrides = load_overrides(args.config.as_deref())?;
    if let Some(v) = &overrides.format {
        args.format = v.clone();
    }
    if overrides.out.is_some() {
        args.out = overrides.out.clone();
    }

    let mut merged: Option<ReportDocument> = None;
    for input in &args.inputs {
        let (rename, path) = match input.split_once('=') {
            Some((name, path)) => (Some(name.to_string()), PathBuf::from(path)),
            None => (None, PathBuf::from(input)),
        };
        let text = fs::read_to_string(&path)
            .map_err(|e| Error::data(format!("{}: {e}", path.display())))?;
        let mut doc = parse_report_json(&text)?;
        if let Some(name) = rename {
            if doc.rows.len() != 1 {
                return Err(Error::config(format!(
                    "{}: cannot rename a document with {} rows",
                    path.display(),
                    doc.rows.len()
                )));
            }
            doc.rows[0].0 = name;
        }
        match &mut merged {
            None => merged = Some(doc),
            Some(base) => {
                if doc.dataset != base.dataset || doc.partition_hash != base.partition_hash {
                    return Err(Error::data(format!(
                        "{}: dataset/partition ({}, {}) does not match ({}, {})",
                        path.display(),
                        doc.dataset,
                        doc.partition_hash,
                        base.dataset,
                        base.partition_hash
                    )));
                }
                base.rows.append(&mut doc.rows);
            }
        }
    }
    let merged = merged.expect("at least one input enforced by clap");
    let text = emit_report(&merged, ReportFormat::parse(&args.format)?)?;
    write_or_print(args.out.as_deref(), None, &text)
}

fn run_selfcheck_cmd(args: SelfcheckArgs) -> i32 {
    let checks = crate::selfcheck::run_selfcheck();
    let mut failed = 0usize;
    for check in &checks {
        if check.passed {
            if args.verbose {
                println!("ok - {}", check.name);
            }
        } else {
            failed += 1;
            println!("FAIL - {}: {}", check.name, check.detail);
        }
    }
    println!("selfcheck: {} checks, {} failed", checks.len(), failed);
    if failed > 0 {
        5
    } else {
        0
    }
}

fn exit_code(error: &Error) -> i32 {
    match error {
        Error::Config(_) => 2,
        Error::Data(_) | Error::Io(_) => 3,
        Error::MetricUndefined(_) => 4,
    }
}

/// Entry point for the binary; returns the process exit code.
pub fn main() -> i32 {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Split(args) => run_split(args),
        Command::Simulate(args) => run_simulate(args),
        Command::Eval(args) => run_eval(args),
        Command::Report(args) => run_report(args),
        Command::Selfcheck(args) => return run_selfcheck_cmd(args),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
