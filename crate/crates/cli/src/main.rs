//! `bsls` command line: benchmark runs over CVRPLIB instances.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use bsls_core::exact_tsp::DEFAULT_MAX_EXACT;
use bsls_core::harness::{emit_aggregates, emit_report, WORKERS_ENV};
use bsls_core::instance_io::{parse_bks, DEFAULT_GAMMA};
use bsls_core::route_memory::DEFAULT_M_MAX;
use bsls_core::{load_instance, run_benchmark, FilterConfig, Instance, ReportFormat, RunConfig, Space};
use clap::{Parser, ValueEnum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Debug, Parser)]
#[command(name = "bsls", version, about = "Local search for the CVRP in classic, windowed and exact route spaces")]
#[command(after_help = format!("The worker count is read from {WORKERS_ENV}; all cores are used when unset."))]
struct Args {
    /// Glob of instance files, e.g. 'data/X-n1*.vrp'.
    #[arg(long)]
    instances: String,

    /// Search space: classic, bs:K or exact. Repeat or separate with commas.
    #[arg(long, value_delimiter = ',', default_value = "classic")]
    space: Vec<Space>,

    /// Runs per instance and space; run r uses seed + r.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    runs: u64,

    #[arg(long, default_value_t = 1)]
    seed: u64,

    /// Neighbor list size.
    #[arg(long, default_value_t = DEFAULT_GAMMA)]
    gamma: usize,

    /// Cost filter: off, strict, adaptive or adaptive:LO,HI.
    #[arg(long, default_value = "adaptive")]
    filter: FilterConfig,

    #[arg(long, value_enum, default_value_t = Switch::On)]
    tunneling: Switch,

    /// Capacity of the route memory.
    #[arg(long, default_value_t = DEFAULT_M_MAX)]
    mmax: usize,

    /// Largest route solved exactly in the exact space.
    #[arg(long, default_value_t = DEFAULT_MAX_EXACT)]
    max_exact: usize,

    /// Wall-time limit per run in seconds.
    #[arg(long, default_value_t = 600.0)]
    time_limit: f64,

    /// Report file; the aggregate block goes next to it. Defaults to stdout.
    #[arg(long)]
    out: Option<PathBuf>,

    #[arg(long, default_value = "csv")]
    format: ReportFormat,

    /// Best known solutions, one `name<TAB>cost` per line.
    #[arg(long)]
    bks: Option<PathBuf>,

    /// Directory for the final solutions of every run.
    #[arg(long)]
    emit_solutions: Option<PathBuf>,
}

fn aggregate_path(out: &Path, format: ReportFormat) -> PathBuf {
    let ext = match format {
        ReportFormat::Csv => "csv",
        ReportFormat::Jsonl => "jsonl",
    };
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}.aggregate.{ext}"))
}

fn load_all(pattern: &str) -> Result<(Vec<Instance>, usize)> {
    let mut paths: Vec<PathBuf> = glob::glob(pattern)
        .with_context(|| format!("bad glob `{pattern}`"))?
        .filter_map(|p| p.map_err(|e| log::error!("{e}")).ok())
        .collect();
    paths.sort();
    if paths.is_empty() {
        log::warn!("no files match `{pattern}`");
    }
    let mut instances = Vec::new();
    let mut failed = 0;
    for p in paths {
        match load_instance(&p) {
            Ok(inst) => instances.push(inst),
            Err(e) => {
                log::error!("{}: {e}", p.display());
                failed += 1;
            }
        }
    }
    Ok((instances, failed))
}

fn run(args: Args) -> Result<bool> {
    if !(args.time_limit > 0.0) {
        bail!("--time-limit must be positive");
    }
    let bks = match &args.bks {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            parse_bks(&text).with_context(|| format!("parsing {}", p.display()))?
        }
        None => Default::default(),
    };
    if let Some(dir) = &args.emit_solutions {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let (instances, failed) = load_all(&args.instances)?;
    let cfg = RunConfig {
        spaces: args.space,
        runs: args.runs as usize,
        seed: args.seed,
        gamma: args.gamma,
        filter: args.filter,
        tunneling: args.tunneling == Switch::On,
        m_max: args.mmax,
        max_exact: args.max_exact,
        time_limit: Duration::from_secs_f64(args.time_limit),
        workers: None,
        bks,
        emit_solutions: args.emit_solutions,
    };
    let rows = run_benchmark(&instances, &cfg)?;
    match &args.out {
        Some(out) => {
            let f = File::create(out).with_context(|| format!("creating {}", out.display()))?;
            emit_report(&rows, args.format, BufWriter::new(f))?;
            let agg = aggregate_path(out, args.format);
            let f = File::create(&agg).with_context(|| format!("creating {}", agg.display()))?;
            emit_aggregates(&rows, args.format, BufWriter::new(f))?;
        }
        None => {
            let stdout = std::io::stdout();
            emit_report(&rows, args.format, stdout.lock())?;
            let mut err = std::io::stderr().lock();
            writeln!(err)?;
            emit_aggregates(&rows, args.format, err)?;
        }
    }
    Ok(failed == 0)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Args::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
