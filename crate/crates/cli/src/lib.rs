//! Command-line driver: parse an input file, solve at a generic point, sweep
//! the parameter points in parallel and write the run directory.

use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use homsweep::export::{
    axis_indices, export_real_count_grid, export_solutions_json, write_failure_report, write_timings_csv,
};
use homsweep::input::{parse_input, parse_p0_file, InputFile, PointsSpec, RunSettings};
use homsweep::mesh::{generate_mesh, load_param_file, PointList};
use homsweep::paramhom::{stream_rng, MITIGATION_STREAM};
use homsweep::scheduler::{collect_results, run_parallel, ParallelConfig, PARTIAL_MARKER};
use homsweep::{step1, verify_step1, CollectedData, PointStatus, Step1File, Step1Result, SweepContext};

pub const STEP1_FILE: &str = "step1.dat";
pub const COLLECTED_FILE: &str = "collected.dat";
pub const FAILURES_FILE: &str = "failures.txt";
pub const TIMINGS_FILE: &str = "timings.csv";
pub const CSV_FILE: &str = "real_counts.csv";
pub const JSON_FILE: &str = "solutions.json";

/// Exit code when some point stayed unresolved.
pub const EXIT_UNRESOLVED: u8 = 2;
pub const EXIT_FATAL: u8 = 1;

#[derive(Parser, Debug)]
#[command(name = "homsweep", version, about = "Parameter sweeps of polynomial systems by homotopy continuation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Solve at a generic point, then at every point of the sweep.
    Solve(Box<SolveArgs>),
    /// Write CSV or JSON exports of an existing run directory.
    Export(ExportArgs),
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    /// Input file; `-` reads standard input.
    pub input: PathBuf,
    /// Output directory.
    #[arg(long, env = "SWEEP_OUT_DIR", default_value = "sweep_out")]
    pub out: PathBuf,
    #[arg(long)]
    pub workers: Option<usize>,
    /// Master seed; defaults to the clock.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub max_retries: Option<usize>,
    #[arg(long)]
    pub max_norm: Option<f64>,
    #[arg(long)]
    pub min_step: Option<f64>,
    #[arg(long)]
    pub newton_tol: Option<f64>,
    /// Per-worker result buffer in MiB before spilling to disk.
    #[arg(long)]
    pub buffer_mb: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    /// Repeat the generic solve at a second random point and compare counts.
    #[arg(long)]
    pub verify_step1: bool,
    /// Write the real-count grid; optional comma-separated parameter names.
    #[arg(long, num_args = 0..=1, default_missing_value = "", value_name = "AXES")]
    pub export_csv: Option<String>,
    #[arg(long)]
    pub export_json: bool,
    /// File holding the generic start point as `re im` pairs.
    #[arg(long, value_name = "FILE")]
    pub p0: Option<PathBuf>,
    /// Parameter file replacing the points named in the input file.
    #[arg(long, value_name = "FILE")]
    pub points: Option<PathBuf>,
    /// Stop after the generic solve.
    #[arg(long, conflicts_with = "reuse_step1")]
    pub step1_only: bool,
    /// Load the generic solve from an earlier run directory.
    #[arg(long, value_name = "DIR")]
    pub reuse_step1: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ExportArgs {
    /// Run directory holding collected.dat.
    pub dir: PathBuf,
    /// Write the real-count grid; optional comma-separated parameter names.
    #[arg(long, num_args = 0..=1, default_missing_value = "", value_name = "AXES")]
    pub csv: Option<String>,
    #[arg(long)]
    pub json: bool,
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Solve(args) => solve(&args),
        Command::Export(args) => {
            let path = args.dir.join(COLLECTED_FILE);
            let text = read(&path)?;
            let data = CollectedData::parse(&text).with_context(|| format!("{}", path.display()))?;
            write_exports(&args.dir, &data, args.csv.as_deref(), args.json)?;
            Ok(0)
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn load_input(path: &Path) -> Result<InputFile> {
    let (text, base) = if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).context("cannot read standard input")?;
        (s, PathBuf::from("."))
    } else {
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        (read(path)?, base)
    };
    parse_input(&text, &base).with_context(|| format!("{}", path.display()))
}

fn apply_overrides(s: &mut RunSettings, a: &SolveArgs) {
    if a.seed.is_some() {
        s.seed = a.seed;
    }
    if let Some(v) = a.max_retries {
        s.max_retries = v;
    }
    if a.workers.is_some() {
        s.workers = a.workers;
    }
    if let Some(v) = a.max_norm {
        s.solve.tracker.max_norm = v;
    }
    if let Some(v) = a.min_step {
        s.solve.tracker.min_step = v;
    }
    if let Some(v) = a.newton_tol {
        s.solve.tracker.newton_tol = v;
    }
    if let Some(v) = a.buffer_mb {
        s.buffer_mb = v;
    }
    if a.batch_size.is_some() {
        s.batch_size = a.batch_size;
    }
    s.verify_step1 |= a.verify_step1;
}

fn clock_seed() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_nanos() as u64)
}

fn clear_run_files(dir: &Path) -> Result<()> {
    for entry in fs::read_dir(dir).with_context(|| format!("cannot list {}", dir.display()))? {
        let path = entry?.path();
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default();
        if (name.starts_with("step2_worker") && name.ends_with(".part")) || name == PARTIAL_MARKER {
            fs::remove_file(&path).with_context(|| format!("cannot remove {}", path.display()))?;
        }
    }
    Ok(())
}

fn load_points(input: &InputFile, args: &SolveArgs) -> Result<PointList> {
    let m = input.system.num_params();
    let from_file = |path: &Path| -> Result<PointList> {
        let name = path.display().to_string();
        load_param_file(&read(path)?, m, &name).with_context(|| name.clone())
    };
    match (&args.points, &input.points) {
        (Some(path), _) => from_file(path),
        (None, Some(PointsSpec::File(path))) => from_file(path),
        (None, Some(PointsSpec::Mesh(spec))) => Ok(generate_mesh(spec)),
        (None, None) => bail!("no points to solve: add a MESH section, parameter_file or --points"),
    }
}

fn load_step1(dir: &Path, input: &InputFile) -> Result<Step1Result> {
    let path = dir.join(STEP1_FILE);
    let file = Step1File::parse(&read(&path)?).with_context(|| format!("{}", path.display()))?;
    if file.var_names != input.system.var_names() || file.param_names != input.system.param_names() {
        bail!("{} was computed for a different system", path.display());
    }
    Ok(file.result)
}

fn solve(args: &SolveArgs) -> Result<u8> {
    let input = load_input(&args.input)?;
    let mut settings = input.settings.clone();
    apply_overrides(&mut settings, args);
    settings.solve.validate()?;
    let sys = &input.system;

    let p0 = match &args.p0 {
        Some(path) => Some(
            parse_p0_file(&read(path)?, sys.num_params()).with_context(|| format!("{}", path.display()))?,
        ),
        None => input.p0.clone(),
    };
    let points = if args.step1_only { None } else { Some(load_points(&input, args)?) };

    fs::create_dir_all(&args.out).with_context(|| format!("cannot create {}", args.out.display()))?;
    clear_run_files(&args.out)?;

    let started = Instant::now();
    let r1 = match &args.reuse_step1 {
        Some(dir) => load_step1(dir, &input)?,
        None => {
            let seed = settings.seed.unwrap_or_else(clock_seed);
            let r1 = step1(sys, &settings.solve, seed, p0)?;
            let file = Step1File {
                var_names: sys.var_names().to_vec(),
                param_names: sys.param_names().to_vec(),
                result: r1.clone(),
            };
            write(&args.out.join(STEP1_FILE), &file.to_text())?;
            r1
        }
    };
    let seed = settings.seed.unwrap_or(r1.seed);
    let verified = if settings.verify_step1 {
        if !verify_step1(sys, &settings.solve, &r1)? {
            bail!(
                "step1: {} solutions, verification at a second point disagrees",
                r1.solutions.len()
            );
        }
        ", verified"
    } else {
        ""
    };
    eprintln!("step1: {} solutions{verified}", r1.solutions.len());
    eprintln!(
        "step1: seed {}, {} paths, {} failed, {} diverged, {} singular dropped, {:.2} s",
        r1.seed,
        r1.paths_tracked_step1,
        r1.path_failures,
        r1.diverged,
        r1.singular_dropped,
        started.elapsed().as_secs_f64()
    );
    if !r1.crossings.is_empty() {
        eprintln!("step1: warning: {} path pairs coincide at the endgame boundary", r1.crossings.len());
    }
    let Some(points) = points else {
        return Ok(0);
    };

    let workers = settings
        .workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let config = ParallelConfig {
        workers,
        batch_size: settings.batch_size,
        buffer_bytes: settings.buffer_mb.saturating_mul(1 << 20),
        spill_dir: Some(args.out.clone()),
    };
    let ctx = Arc::new(SweepContext::new(sys.clone(), settings.solve.clone()));
    let started = Instant::now();
    let mut rng = stream_rng(seed, MITIGATION_STREAM);
    let sweep = run_parallel(&ctx, &r1, &points.points, settings.max_retries, &config, &mut rng)?;
    let elapsed = started.elapsed().as_secs_f64();

    let records = collect_results(&args.out, &sweep)?;
    let data = CollectedData::from_sweep(sys, &r1, records, sweep.total_paths_tracked, points.source);
    write(&args.out.join(COLLECTED_FILE), &data.to_text())?;
    clear_run_files(&args.out)?;
    write(
        &args.out.join(FAILURES_FILE),
        &write_failure_report(&data.records, &sweep.rounds, sys.param_names()),
    )?;
    write(&args.out.join(TIMINGS_FILE), &write_timings_csv(&sweep.timings))?;
    write_exports(&args.out, &data, args.export_csv.as_deref(), args.export_json)?;

    let count = |s: PointStatus| data.records.iter().filter(|r| r.status == s).count();
    eprintln!(
        "step2: {} points ({} complete, {} with failures, {} unresolved), {} paths, {} workers, {:.2} s",
        data.records.len(),
        count(PointStatus::Complete),
        count(PointStatus::HadFailures),
        count(PointStatus::Unresolved),
        sweep.total_paths_tracked,
        workers,
        elapsed
    );
    Ok(if sweep.unresolved_indices.is_empty() { 0 } else { EXIT_UNRESOLVED })
}

fn write_exports(dir: &Path, data: &CollectedData, csv: Option<&str>, json: bool) -> Result<()> {
    if let Some(sel) = csv {
        let names: Vec<String> = sel.split(',').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect();
        let axes = axis_indices(&data.header.param_names, &names)?;
        write(&dir.join(CSV_FILE), &export_real_count_grid(data, &axes)?)?;
    }
    if json {
        write(&dir.join(JSON_FILE), &export_solutions_json(data))?;
    }
    Ok(())
}
