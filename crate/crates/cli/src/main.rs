//! `pccforge`: convert, remap, split, measure and score SemanticKITTI-style
//! indoor point-cloud datasets.
//!
//! Data goes to files or stdout, diagnostics to stderr. Exit codes: 0 success,
//! 2 usage, 3 data error, 4 I/O error.

use std::collections::BTreeSet;
use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use pccforge_core::dataset::{
    build_sequence, compute_distribution_with, emit_training_config, list_frames, list_sequences,
    parse_sequence_list, published_splits, read_split_files, split_dir, split_discrepancies,
    write_split_files, DatasetManifest, Partition, SplitConfig, SplitSpec,
};
use pccforge_core::eval::{evaluate_run, write_eval_reports};
use pccforge_core::geometry::{summarize_geometry, DEFAULT_BINS, DEFAULT_K};
use pccforge_core::io::{
    pack_label, parse_source, read_label_words, unpack_label, write_label_words, LabelPolicy,
    SourceFormat,
};
use pccforge_core::remap::{apply_remap, load_remap_csv, RemapTable};
use pccforge_core::{par, unified_schema, ErrorFamily, LabeledCloud, SequenceId};
use serde_json::json;

const GEOMETRY_FILE: &str = "geometry.jsonl";

#[derive(Parser)]
#[command(
    name = "pccforge",
    version,
    about = "Harmonize, split, measure and score labelled indoor point clouds"
)]
struct Cli {
    /// Dataset root holding `sequences/` and `splits/`
    #[arg(long, global = true)]
    root: Option<PathBuf>,
    /// Reject label words outside the 20-class schema (default)
    #[arg(long, global = true, conflicts_with = "permissive")]
    strict: bool,
    /// Count out-of-schema label words instead of failing
    #[arg(long, global = true)]
    permissive: bool,
    /// Worker threads (default: available parallelism)
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Add a generation timestamp to reports
    #[arg(long, global = true)]
    stamp: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a source file, remap its labels and write it as a new sequence
    Convert(ConvertArgs),
    /// Rewrite the labels of existing sequences through a mapping keyed by current ids
    Remap(RemapArgs),
    /// Write the train/val/test lists of a split configuration
    Split {
        #[arg(long)]
        config: SplitConfig,
    },
    /// Per-class label distribution as CSV
    Stats {
        #[command(flatten)]
        select: Selection,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Per-sequence geometry as JSON lines plus pooled histograms
    Geom {
        #[command(flatten)]
        select: Selection,
        #[arg(long, default_value_t = DEFAULT_BINS)]
        bins: usize,
        /// Neighbourhood size for curvature
        #[arg(long, default_value_t = DEFAULT_K)]
        k: usize,
        /// Directory for geometry.jsonl and hist_<metric>.csv; stdout if absent
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score predicted label files against ground truth
    Eval {
        /// Ground-truth root (defaults to --root)
        #[arg(long)]
        gt: Option<PathBuf>,
        #[arg(long)]
        pred: PathBuf,
        #[command(flatten)]
        select: Selection,
        /// Directory for per_class.csv and summary.json
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the key: value training manifest for a split configuration
    EmitTrainConfig {
        #[arg(long)]
        config: SplitConfig,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct ConvertArgs {
    #[arg(long)]
    format: SourceFormat,
    #[arg(long)]
    input: PathBuf,
    /// Remap CSV; without it labels must already be unified ids
    #[arg(long)]
    mapping: Option<PathBuf>,
    #[arg(long)]
    sequence: SequenceId,
    /// PLY vertex property holding the source label
    #[arg(long, default_value = "class")]
    label_field: String,
    /// Source dataset name for the manifest (defaults to the mapping's source)
    #[arg(long)]
    source: Option<String>,
}

#[derive(Args)]
struct RemapArgs {
    #[arg(long)]
    mapping: PathBuf,
    #[command(flatten)]
    select: Selection,
}

/// Which sequences a command reads. Defaults to every sequence under the root.
#[derive(Args)]
struct Selection {
    /// Ids and ranges, e.g. `00-58,118-133`
    #[arg(long, conflicts_with = "split")]
    seqs: Option<String>,
    /// Take sequences from a split configuration
    #[arg(long)]
    split: Option<SplitConfig>,
    /// Restrict --split to one partition
    #[arg(long, requires = "split")]
    part: Option<Partition>,
}

enum Failure {
    Usage(String),
    Core(pccforge_core::Error),
    Io(PathBuf, io::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Core(e) => match e.family() {
                ErrorFamily::Data => 3,
                ErrorFamily::Io => 4,
            },
            Failure::Io(..) => 4,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "{m}"),
            Failure::Core(e) => write!(f, "{e}"),
            Failure::Io(p, e) if p.as_os_str().is_empty() => write!(f, "{e}"),
            Failure::Io(p, e) => write!(f, "{}: {e}", p.display()),
        }
    }
}

impl From<pccforge_core::Error> for Failure {
    fn from(e: pccforge_core::Error) -> Self {
        Failure::Core(e)
    }
}

type Outcome<T = ()> = Result<T, Failure>;

fn write_file(path: &Path, body: &str) -> Outcome {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Failure::Io(dir.to_path_buf(), e))?;
    }
    fs::write(path, body).map_err(|e| Failure::Io(path.to_path_buf(), e))
}

fn print(body: &str) -> Outcome {
    let mut out = io::stdout().lock();
    out.write_all(body.as_bytes())
        .and_then(|_| out.flush())
        .map_err(|e| Failure::Io(PathBuf::new(), e))
}

fn print_json(v: &serde_json::Value) -> Outcome {
    print(&(v.to_string() + "\n"))
}

struct Ctx {
    root: Option<PathBuf>,
    policy: LabelPolicy,
    stamp: Option<u64>,
}

impl Ctx {
    fn root(&self) -> Outcome<&Path> {
        self.root
            .as_deref()
            .ok_or_else(|| Failure::Usage("this command needs --root".into()))
    }

    /// Split lists written under the root win over the built-in ranges.
    fn split(&self, config: SplitConfig) -> Outcome<SplitSpec> {
        let root = self.root()?;
        if split_dir(root, config).is_dir() {
            Ok(read_split_files(root, config)?)
        } else {
            Ok(published_splits(config))
        }
    }

    fn select(&self, s: &Selection) -> Outcome<BTreeSet<SequenceId>> {
        if let Some(list) = &s.seqs {
            return Ok(parse_sequence_list(list)?);
        }
        if let Some(config) = s.split {
            let spec = self.split(config)?;
            return Ok(match s.part {
                Some(p) => spec.part(p).clone(),
                None => spec.all(),
            });
        }
        Ok(list_sequences(self.root()?)?.into_iter().collect())
    }
}

fn convert(ctx: &Ctx, a: &ConvertArgs) -> Outcome {
    let root = ctx.root()?;
    let schema = unified_schema();
    let table = match &a.mapping {
        Some(p) => load_remap_csv(p, &schema)?,
        None => RemapTable::identity(),
    };
    let source = a
        .source
        .clone()
        .unwrap_or_else(|| table.source_name().to_string());
    let parsed = parse_source(&a.input, a.format, &a.label_field)?;
    let remapped = apply_remap(&parsed.raw_labels, &table);
    if remapped.unmapped_count > 0 {
        log::warn!(
            "{} points had labels outside the mapping and became unassigned",
            remapped.unmapped_count
        );
    }
    let cloud: LabeledCloud = parsed.cloud.with_labels(remapped.labels)?;

    let mut manifest = DatasetManifest::load(root)?;
    manifest.upsert(build_sequence(&cloud, root, a.sequence, &source)?);
    manifest.save()?;

    let qc = &parsed.qc;
    print_json(&json!({
        "sequence": a.sequence.render(),
        "source_dataset": source,
        "total_points": qc.total_points,
        "kept_points": qc.kept_points,
        "dropped_nonfinite": qc.dropped_nonfinite,
        "remission_out_of_range": qc.remission_out_of_range,
        "label_count_mismatch": qc.label_count_mismatch,
        "unmapped_count": remapped.unmapped_count,
    }))
}

fn remap(ctx: &Ctx, a: &RemapArgs) -> Outcome {
    let root = ctx.root()?;
    let table = load_remap_csv(&a.mapping, &unified_schema())?;
    let seqs = ctx.select(&a.select)?;
    let mut points = 0usize;
    let mut unmapped = 0usize;
    for &seq in &seqs {
        for frame in list_frames(root, seq)? {
            let words = read_label_words(&frame.label)?;
            let keys: Vec<String> = words
                .iter()
                .map(|&w| unpack_label(w).0.to_string())
                .collect();
            let out = apply_remap(&keys, &table);
            let packed = words
                .iter()
                .zip(&out.labels)
                .map(|(&w, l)| pack_label(l.get(), unpack_label(w).1));
            write_label_words(&frame.label, packed)?;
            points += words.len();
            unmapped += out.unmapped_count;
        }
    }
    print_json(&json!({
        "source_dataset": table.source_name(),
        "sequences": seqs.iter().map(|s| s.render()).collect::<Vec<_>>(),
        "points": points,
        "unmapped_count": unmapped,
    }))
}

fn split(ctx: &Ctx, config: SplitConfig) -> Outcome {
    let spec = published_splits(config);
    write_split_files(ctx.root()?, &spec)?;
    let ids = |p: Partition| spec.part(p).iter().map(|s| s.render()).collect::<Vec<_>>();
    let [st, sv, ss] = config.stated_counts();
    let [ct, cv, cs] = spec.counts();
    print_json(&json!({
        "config": config.name(),
        "train": ids(Partition::Train),
        "val": ids(Partition::Val),
        "test": ids(Partition::Test),
        "counts": {"train": ct, "val": cv, "test": cs},
        "stated_counts": {"train": st, "val": sv, "test": ss},
        "warnings": split_discrepancies(&spec).iter().map(|d| d.to_string()).collect::<Vec<_>>(),
    }))
}

fn stats(ctx: &Ctx, select: &Selection, out: Option<&Path>) -> Outcome {
    let seqs = ctx.select(select)?;
    let table = compute_distribution_with(ctx.root()?, seqs, &unified_schema(), ctx.policy)?;
    if table.out_of_schema > 0 {
        log::warn!(
            "{} label words fell outside the schema",
            table.out_of_schema
        );
    }
    let csv = table.to_csv();
    match out {
        Some(p) => write_file(p, &csv),
        None => print(&csv),
    }
}

fn geom(ctx: &Ctx, select: &Selection, bins: usize, k: usize, out: Option<&Path>) -> Outcome {
    if bins == 0 {
        return Err(Failure::Usage("--bins must be at least 1".into()));
    }
    if k == 0 {
        return Err(Failure::Usage("--k must be at least 1".into()));
    }
    let seqs = ctx.select(select)?;
    let report = summarize_geometry(ctx.root()?, seqs, bins, k, ctx.policy)?;
    let jsonl = report.to_jsonl();
    let Some(dir) = out else {
        return print(&jsonl);
    };
    write_file(&dir.join(GEOMETRY_FILE), &jsonl)?;
    for (metric, h) in &report.histograms {
        write_file(&dir.join(format!("hist_{metric}.csv")), &h.to_csv())?;
    }
    Ok(())
}

fn eval(
    ctx: &Ctx,
    gt: Option<&Path>,
    pred: &Path,
    select: &Selection,
    out: Option<&Path>,
) -> Outcome {
    let gt = match gt {
        Some(g) => g,
        None => ctx.root()?,
    };
    let seqs = if select.seqs.is_none() && select.split.is_none() {
        list_sequences(gt)?.into_iter().collect()
    } else {
        ctx.select(select)?
    };
    let report = evaluate_run(gt, pred, seqs)?;
    if let Some(dir) = out {
        write_eval_reports(&report, &unified_schema(), dir, ctx.stamp)?;
    }
    print_json(&report.summary_json(ctx.stamp))
}

fn run(cli: &Cli) -> Outcome {
    let ctx = Ctx {
        root: cli.root.clone(),
        policy: if cli.permissive {
            LabelPolicy::Permissive
        } else {
            LabelPolicy::Strict
        },
        stamp: cli.stamp.then(|| {
            SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map_or(0, |d| d.as_secs())
        }),
    };
    match &cli.command {
        Command::Convert(a) => convert(&ctx, a),
        Command::Remap(a) => remap(&ctx, a),
        Command::Split { config } => split(&ctx, *config),
        Command::Stats { select, out } => stats(&ctx, select, out.as_deref()),
        Command::Geom {
            select,
            bins,
            k,
            out,
        } => geom(&ctx, select, *bins, *k, out.as_deref()),
        Command::Eval {
            gt,
            pred,
            select,
            out,
        } => eval(&ctx, gt.as_deref(), pred, select, out.as_deref()),
        Command::EmitTrainConfig { config, out } => {
            if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir).map_err(|e| Failure::Io(dir.to_path_buf(), e))?;
            }
            emit_training_config(*config, out)?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("PCCFORGE_LOG", "warn"))
        .format_timestamp(None)
        .init();

    let threads = match cli.threads {
        Some(0) => {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        Some(n) => n,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    log::debug!("running with {threads} worker threads");

    match par::with_threads(threads, || run(&cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
