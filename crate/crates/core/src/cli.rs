//! Command-line entry point.
//!
//! Exit status: 0 on success, 1 on validation or configuration errors, 2 on
//! I/O errors.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{error, info, warn};
use rayon::prelude::*;

use crate::classifier::ClassifierConfig;
use crate::devices::{annotate, resolve_annotations, GuidingInput};
use crate::error::{Error, Result};
use crate::evaluator::{format_report, match_blocks, GroundTruth, DEFAULT_IOU_THRESHOLD};
use crate::granularity::GranularityOptions;
use crate::pipeline::{self, PipelineConfig};
use crate::render::render_overlay_scaled;
use crate::segmenter::{BlockSet, Diagnostic, ResiduePolicy, SegmenterConfig};
use crate::snapshot::{parse_snapshot, DomSnapshot};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_IO: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "msos", version, about = "Function-aware web page segmentation")]
struct Cli {
    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Segment one or more snapshots into labeled blocks.
    Segment(SegmentArgs),
    /// Score blocks against a ground truth.
    Evaluate(EvaluateArgs),
    /// Map block elements onto device1/device2.
    Annotate(AnnotateArgs),
    /// Draw blocks as an SVG overlay.
    Render(RenderArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Residue {
    Drop,
    Interactive,
}

#[derive(Debug, Args)]
struct SegmentArgs {
    #[arg(long, required = true, num_args = 1)]
    snapshot: Vec<PathBuf>,
    /// Blocks output for a single snapshot.
    #[arg(long, conflicts_with = "out_dir")]
    out: Option<PathBuf>,
    /// Output directory in batch mode; files are named `<name>.blocks.json`.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Guiding input; enables the annotation output.
    #[arg(long)]
    devices: Option<PathBuf>,
    /// Annotation output (defaults next to the blocks file).
    #[arg(long, requires = "devices")]
    annotations: Option<PathBuf>,
    #[arg(long)]
    overlay: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
    #[arg(long)]
    classifier_config: Option<PathBuf>,
    /// Force the global pG instead of deriving it.
    #[arg(long)]
    global_pg: Option<f64>,
    /// Use the global pG for every subtree.
    #[arg(long, requires = "global_pg")]
    fixed_pg: bool,
    #[arg(long, value_enum, default_value_t = Residue::Drop)]
    residue: Residue,
    /// Write the optimized logical tree as JSON (stdout when no path is given).
    #[arg(long, num_args = 0..=1, default_missing_value = "-")]
    dump_logical_tree: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    #[arg(long)]
    blocks: PathBuf,
    #[arg(long)]
    ground_truth: PathBuf,
    #[arg(long, default_value_t = DEFAULT_IOU_THRESHOLD)]
    iou: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct AnnotateArgs {
    #[arg(long)]
    snapshot: PathBuf,
    #[arg(long)]
    blocks: PathBuf,
    #[arg(long)]
    devices: PathBuf,
    #[arg(long)]
    classifier_config: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct RenderArgs {
    #[arg(long)]
    snapshot: PathBuf,
    #[arg(long)]
    blocks: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
}

/// Error tagged with the file it came from.
struct Failure {
    path: Option<PathBuf>,
    error: Error,
}

impl From<Error> for Failure {
    fn from(error: Error) -> Self {
        Failure { path: None, error }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn at<T>(path: &Path, r: Result<T>) -> CliResult<T> {
    r.map_err(|error| Failure {
        path: Some(path.to_path_buf()),
        error,
    })
}

pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    init_logging(cli.verbose);

    let result = match cli.command {
        Command::Segment(args) => cmd_segment(args),
        Command::Evaluate(args) => cmd_evaluate(args),
        Command::Annotate(args) => cmd_annotate(args),
        Command::Render(args) => cmd_render(args),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(Failure { path, error }) => {
            match path {
                Some(p) => error!("{}: {error}", p.display()),
                None => error!("{error}"),
            }
            if error.is_io() {
                EXIT_IO
            } else {
                EXIT_INVALID
            }
        }
    }
}

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .parse_default_env()
        .format_timestamp(None)
        .target(env_logger::Target::Stderr)
        .try_init();
}

fn require_file(path: &Path) -> CliResult<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Failure {
            path: Some(path.to_path_buf()),
            error: Error::Io {
                path: path.to_path_buf(),
                source: std::io::Error::new(std::io::ErrorKind::NotFound, "no such file"),
            },
        })
    }
}

fn require_parent(path: &Path) -> CliResult<()> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() && !dir.is_dir() => Err(Failure {
            path: Some(path.to_path_buf()),
            error: Error::Io {
                path: dir.to_path_buf(),
                source: std::io::Error::new(std::io::ErrorKind::NotFound, "output directory missing"),
            },
        }),
        _ => Ok(()),
    }
}

fn read(path: &Path) -> CliResult<Vec<u8>> {
    at(
        path,
        fs::read(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        }),
    )
}

fn write(path: &Path, bytes: &[u8]) -> CliResult<()> {
    at(
        path,
        fs::write(path, bytes).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        }),
    )
}

fn load_snapshot(path: &Path) -> CliResult<DomSnapshot> {
    let bytes = read(path)?;
    at(path, parse_snapshot(&bytes))
}

fn load_blocks(path: &Path) -> CliResult<BlockSet> {
    let bytes = read(path)?;
    at(path, BlockSet::from_json(&bytes))
}

fn load_devices(path: &Path) -> CliResult<GuidingInput> {
    let bytes = read(path)?;
    at(path, GuidingInput::from_json(&bytes))
}

fn load_classifier(path: Option<&Path>) -> CliResult<ClassifierConfig> {
    match path {
        Some(p) => {
            let bytes = read(p)?;
            at(p, ClassifierConfig::from_json(&bytes))
        }
        None => Ok(ClassifierConfig::default()),
    }
}

fn log_diagnostics(source: &Path, diagnostics: &[Diagnostic]) {
    for d in diagnostics {
        let line = serde_json::json!({ "snapshot": source.display().to_string(), "diagnostic": d });
        match d {
            Diagnostic::EmptyPage | Diagnostic::ResidueDropped { .. } => warn!("{line}"),
            _ => info!("{line}"),
        }
    }
}

fn sibling_path(path: &Path, suffix: &str) -> PathBuf {
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let stem = name
        .strip_suffix(".blocks.json")
        .or_else(|| name.strip_suffix(".snapshot.json"))
        .or_else(|| name.strip_suffix(".json"))
        .unwrap_or(&name);
    path.with_file_name(format!("{stem}{suffix}"))
}

struct SegmentJob {
    snapshot: PathBuf,
    out: PathBuf,
    annotations: Option<PathBuf>,
    overlay: Option<PathBuf>,
}

fn cmd_segment(args: SegmentArgs) -> CliResult<()> {
    if args.snapshot.len() > 1 && args.out_dir.is_none() {
        return Err(Error::config("several snapshots need --out-dir").into());
    }
    if args.snapshot.len() > 1 && (args.overlay.is_some() || args.annotations.is_some()) {
        return Err(Error::config("--overlay and --annotations take a single snapshot").into());
    }
    if args.out.is_none() && args.out_dir.is_none() {
        return Err(Error::config("either --out or --out-dir is required").into());
    }
    if let Some(pg) = args.global_pg {
        if !(0.0..=1.0).contains(&pg) {
            return Err(Error::config(format!("--global-pg must be in [0, 1], got {pg}")).into());
        }
    }
    if !(args.scale.is_finite() && args.scale > 0.0) {
        return Err(Error::config("--scale must be positive").into());
    }

    for p in &args.snapshot {
        require_file(p)?;
    }
    for p in args.devices.iter().chain(&args.classifier_config) {
        require_file(p)?;
    }
    if let Some(dir) = &args.out_dir {
        if !dir.is_dir() {
            return Err(Failure {
                path: Some(dir.clone()),
                error: Error::Io {
                    path: dir.clone(),
                    source: std::io::Error::new(std::io::ErrorKind::NotFound, "no such directory"),
                },
            });
        }
    }

    let cfg = PipelineConfig {
        classifier: load_classifier(args.classifier_config.as_deref())?,
        granularity: GranularityOptions {
            global_override: args.global_pg,
            fixed: args.fixed_pg,
            ..Default::default()
        },
        segmenter: SegmenterConfig {
            residue: match args.residue {
                Residue::Drop => ResiduePolicy::Drop,
                Residue::Interactive => ResiduePolicy::EmitInteractive,
            },
            ..Default::default()
        },
    };
    let devices = args.devices.as_deref().map(load_devices).transpose()?;

    let jobs: Vec<SegmentJob> = args
        .snapshot
        .iter()
        .map(|snapshot| {
            let out = match (&args.out, &args.out_dir) {
                (Some(out), _) => out.clone(),
                (None, Some(dir)) => sibling_path(&dir.join(snapshot.file_name().unwrap_or_default()), ".blocks.json"),
                (None, None) => unreachable!("checked above"),
            };
            let annotations = devices.as_ref().map(|_| {
                args.annotations
                    .clone()
                    .unwrap_or_else(|| sibling_path(&out, ".annotations.json"))
            });
            SegmentJob {
                snapshot: snapshot.clone(),
                out,
                annotations,
                overlay: args.overlay.clone(),
            }
        })
        .collect();
    for job in &jobs {
        for p in std::iter::once(&job.out).chain(&job.annotations).chain(&job.overlay) {
            require_parent(p)?;
        }
    }

    let dump = args.dump_logical_tree.as_deref();
    let work = |job: &SegmentJob| segment_one(job, &cfg, devices.as_ref(), args.scale, dump);
    if args.jobs > 1 && jobs.len() > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(args.jobs)
            .build()
            .map_err(|e| Error::config(format!("thread pool: {e}")))?;
        let results: Vec<CliResult<()>> = pool.install(|| jobs.par_iter().map(work).collect());
        results.into_iter().collect()
    } else {
        jobs.iter().try_for_each(work)
    }
}

fn segment_one(
    job: &SegmentJob,
    cfg: &PipelineConfig,
    devices: Option<&GuidingInput>,
    scale: f64,
    dump: Option<&Path>,
) -> CliResult<()> {
    let snapshot = load_snapshot(&job.snapshot)?;
    let output = at(&job.snapshot, pipeline::run(&snapshot, cfg))?;
    log_diagnostics(&job.snapshot, &output.segmentation.diagnostics);

    if let (Some(dest), Some(tree)) = (dump, &output.tree) {
        let json = tree.to_json_pretty();
        if dest == Path::new("-") {
            println!("{json}");
        } else {
            write(dest, json.as_bytes())?;
        }
    }

    let blocks = output.segmentation.block_set();
    write(&job.out, &blocks.to_json())?;
    if let (Some(gi), Some(path)) = (devices, &job.annotations) {
        let partial = at(path, annotate(&snapshot, &blocks.blocks, gi))?;
        let resolved = resolve_annotations(&partial, &snapshot, &cfg.classifier);
        write(path, &resolved.to_json())?;
    }
    if let Some(path) = &job.overlay {
        write(path, &render_overlay_scaled(&snapshot, &blocks.blocks, scale))?;
    }
    info!(
        "{}: {} blocks, global pG {}",
        job.snapshot.display(),
        blocks.blocks.len(),
        blocks.global_pg
    );
    Ok(())
}

fn cmd_evaluate(args: EvaluateArgs) -> CliResult<()> {
    require_file(&args.blocks)?;
    require_file(&args.ground_truth)?;
    require_parent(&args.out)?;
    let blocks = load_blocks(&args.blocks)?;
    let gt_bytes = read(&args.ground_truth)?;
    let gt = at(&args.ground_truth, GroundTruth::from_json(&gt_bytes))?;
    let report = match_blocks(&blocks.blocks, &gt, args.iou)?;
    if report.precision_undefined {
        warn!("{}: no block to evaluate, precision reported as 0", args.blocks.display());
    }
    write(&args.out, &format_report(&report))
}

fn cmd_annotate(args: AnnotateArgs) -> CliResult<()> {
    for p in [&args.snapshot, &args.blocks, &args.devices] {
        require_file(p)?;
    }
    require_parent(&args.out)?;
    let classifier = load_classifier(args.classifier_config.as_deref())?;
    let gi = load_devices(&args.devices)?;
    let snapshot = load_snapshot(&args.snapshot)?;
    let blocks = load_blocks(&args.blocks)?;
    let partial = annotate(&snapshot, &blocks.blocks, &gi)?;
    let resolved = resolve_annotations(&partial, &snapshot, &classifier);
    write(&args.out, &resolved.to_json())
}

fn cmd_render(args: RenderArgs) -> CliResult<()> {
    require_file(&args.snapshot)?;
    require_file(&args.blocks)?;
    require_parent(&args.out)?;
    if !(args.scale.is_finite() && args.scale > 0.0) {
        return Err(Error::config("--scale must be positive").into());
    }
    let snapshot = load_snapshot(&args.snapshot)?;
    let blocks = load_blocks(&args.blocks)?;
    write(&args.out, &render_overlay_scaled(&snapshot, &blocks.blocks, args.scale))
}
