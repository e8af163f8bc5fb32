//! Benchmark runs over instances, spaces and seeds, and their reports.

use std::collections::{BTreeMap, HashMap};
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::constructive::clarke_wright;
use crate::exact_tsp::DEFAULT_MAX_EXACT;
use crate::instance_io::{Instance, NeighborLists, DEFAULT_GAMMA};
use crate::local_search::{decode_solution, run_local_search, FilterConfig, LsConfig, LsOutcome, SearchError};
use crate::model::{check_feasibility, gap_to_bks, write_solution, Cost, Solution};
use crate::route_memory::{GlobalMemory, MemoryConfig, DEFAULT_M_MAX};
use crate::space::{DecodeStats, Decoder, Space};

/// Environment variable holding the worker count.
pub const WORKERS_ENV: &str = "BSLS_WORKERS";

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub spaces: Vec<Space>,
    pub runs: usize,
    pub seed: u64,
    pub gamma: usize,
    pub filter: FilterConfig,
    pub tunneling: bool,
    pub m_max: usize,
    pub max_exact: usize,
    pub time_limit: Duration,
    /// Worker threads; `None` reads [`WORKERS_ENV`] and falls back to all cores.
    pub workers: Option<usize>,
    pub bks: HashMap<String, Cost>,
    pub emit_solutions: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            spaces: vec![Space::Classic],
            runs: 1,
            seed: 1,
            gamma: DEFAULT_GAMMA,
            filter: FilterConfig::Adaptive(Default::default()),
            tunneling: true,
            m_max: DEFAULT_M_MAX,
            max_exact: DEFAULT_MAX_EXACT,
            time_limit: Duration::from_secs(600),
            workers: None,
            bks: HashMap::new(),
            emit_solutions: None,
        }
    }
}

/// One row of the run report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub instance: String,
    pub seed: u64,
    pub space: String,
    pub k: Option<usize>,
    pub n: usize,
    pub initial_cost: Cost,
    pub cost: Cost,
    pub bks: Option<Cost>,
    pub gap: Option<f64>,
    pub routes: usize,
    pub feasible: bool,
    pub converged: bool,
    pub time_s: f64,
    pub iterations: u64,
    pub evaluations: u64,
    pub decoder_calls: u64,
    pub bs_passes: u64,
    pub exact_fallbacks: u64,
    pub memory_hit_rate: f64,
    pub filtered: u64,
    pub psi_initial: f64,
    pub psi_min: f64,
    pub psi_max: f64,
    pub psi_final: f64,
}

/// Column names of [`RunReport`], in serialization order.
pub const REPORT_COLUMNS: [&str; 24] = [
    "instance",
    "seed",
    "space",
    "k",
    "n",
    "initial_cost",
    "cost",
    "bks",
    "gap",
    "routes",
    "feasible",
    "converged",
    "time_s",
    "iterations",
    "evaluations",
    "decoder_calls",
    "bs_passes",
    "exact_fallbacks",
    "memory_hit_rate",
    "filtered",
    "psi_initial",
    "psi_min",
    "psi_max",
    "psi_final",
];

/// Mean and best values per `(instance, space, k)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateRow {
    pub instance: String,
    pub space: String,
    pub k: Option<usize>,
    pub runs: usize,
    pub mean_cost: f64,
    pub best_cost: Cost,
    pub mean_gap: Option<f64>,
    pub mean_time_s: f64,
}

pub const AGGREGATE_COLUMNS: [&str; 8] = [
    "instance",
    "space",
    "k",
    "runs",
    "mean_cost",
    "best_cost",
    "mean_gap",
    "mean_time_s",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Jsonl,
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "jsonl" => Ok(ReportFormat::Jsonl),
            other => Err(format!("unknown format `{other}`, expected csv or jsonl")),
        }
    }
}

/// Result of a single run.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub solution: Solution,
    pub report: RunReport,
    pub outcome: LsOutcome,
}

/// Clarke-Wright start, decoding in the target space, then local search.
pub fn solve(inst: &Instance, space: Space, cfg: &RunConfig, seed: u64) -> Result<RunResult, SearchError> {
    let start = Instant::now();
    let dm = inst.distance_matrix();
    let nl = NeighborLists::build(&dm, cfg.gamma);
    let decoder = match Decoder::for_space(space) {
        Decoder::Exact { max_passes, .. } => Decoder::Exact {
            max_exact: cfg.max_exact,
            max_passes,
        },
        d => d,
    };
    let mut memory = GlobalMemory::new(MemoryConfig {
        m_max: cfg.m_max,
        tunneling: cfg.tunneling,
        enabled: true,
    });
    let cw = clarke_wright(inst, &dm);
    let mut dstats = DecodeStats::default();
    let init = decode_solution(&cw, inst, &dm, &decoder, &mut memory, &mut dstats)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ls_cfg = LsConfig {
        filter: cfg.filter,
        time_limit: Some(cfg.time_limit.saturating_sub(start.elapsed())),
        max_evaluations: None,
        record_trace: false,
    };
    let mut outcome = run_local_search(inst, &dm, &nl, &init, decoder, &mut memory, &ls_cfg, &mut rng)?;
    outcome.stats.decode.decoder_calls += dstats.decoder_calls;
    outcome.stats.decode.bs_passes += dstats.bs_passes;
    outcome.stats.decode.exact_fallbacks += dstats.exact_fallbacks;
    let elapsed = start.elapsed().as_secs_f64();
    let sol = outcome.solution.clone();
    let bks = cfg.bks.get(&inst.name).copied();
    let st = &outcome.stats;
    let report = RunReport {
        instance: inst.name.clone(),
        seed,
        space: space.to_string(),
        k: space.k(),
        n: inst.num_customers(),
        initial_cost: cw.cost,
        cost: sol.cost,
        bks,
        gap: bks.and_then(|b| gap_to_bks(sol.cost, b).ok()),
        routes: sol.routes.len(),
        feasible: check_feasibility(&sol, inst).is_feasible(),
        converged: outcome.converged,
        time_s: elapsed,
        iterations: st.applied,
        evaluations: st.evaluations,
        decoder_calls: st.decode.decoder_calls,
        bs_passes: st.decode.bs_passes,
        exact_fallbacks: st.decode.exact_fallbacks,
        memory_hit_rate: st.memory.hit_rate(),
        filtered: st.filtered,
        psi_initial: finite_or(st.psi.initial),
        psi_min: finite_or(st.psi.min),
        psi_max: finite_or(st.psi.max),
        psi_final: finite_or(st.psi.last),
    };
    Ok(RunResult {
        solution: sol,
        report,
        outcome,
    })
}

fn finite_or(x: f64) -> f64 {
    if x.is_finite() {
        x
    } else {
        -1.0
    }
}

fn worker_count(cfg: &RunConfig) -> usize {
    cfg.workers
        .or_else(|| std::env::var(WORKERS_ENV).ok().and_then(|v| v.parse().ok()))
        .filter(|&w| w > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Runs every `(instance, space, run)` job; rows are sorted by instance, seed, then space.
///
/// Run `r` uses seed `cfg.seed + r`.
pub fn run_benchmark(instances: &[Instance], cfg: &RunConfig) -> Result<Vec<RunReport>, SearchError> {
    let mut jobs = Vec::new();
    for (ii, _) in instances.iter().enumerate() {
        for r in 0..cfg.runs {
            for (si, &space) in cfg.spaces.iter().enumerate() {
                jobs.push((ii, r, si, space));
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(worker_count(cfg))
        .build()
        .expect("thread pool");
    let results: Vec<Result<(usize, usize, usize, RunReport), SearchError>> = pool.install(|| {
        jobs.par_iter()
            .map(|&(ii, r, si, space)| {
                let inst = &instances[ii];
                let seed = cfg.seed.wrapping_add(r as u64);
                let res = solve(inst, space, cfg, seed)?;
                log::info!(
                    "{} {} seed {}: {} -> {} ({:.2}s)",
                    inst.name,
                    space,
                    seed,
                    res.report.initial_cost,
                    res.report.cost,
                    res.report.time_s
                );
                if let Some(dir) = &cfg.emit_solutions {
                    let file = dir.join(format!("{}.{}.{}.sol", inst.name, space.to_string().replace(':', "-"), seed));
                    if let Err(e) = std::fs::write(&file, write_solution(&res.solution)) {
                        log::error!("writing {}: {e}", file.display());
                    }
                }
                Ok((ii, r, si, res.report))
            })
            .collect()
    });
    let mut rows = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    rows.sort_by_key(|&(ii, r, si, _)| (ii, r, si));
    Ok(rows.into_iter().map(|(_, _, _, rep)| rep).collect())
}

/// Per-`(instance, space, k)` summary, in order of first appearance.
pub fn aggregate(rows: &[RunReport]) -> Vec<AggregateRow> {
    let mut order: Vec<(String, String)> = Vec::new();
    let mut groups: BTreeMap<(String, String), Vec<&RunReport>> = BTreeMap::new();
    for r in rows {
        let key = (r.instance.clone(), r.space.clone());
        if !groups.contains_key(&key) {
            order.push(key.clone());
        }
        groups.entry(key).or_default().push(r);
    }
    order
        .into_iter()
        .map(|key| {
            let g = &groups[&key];
            let n = g.len() as f64;
            let gaps: Vec<f64> = g.iter().filter_map(|r| r.gap).collect();
            AggregateRow {
                instance: key.0.clone(),
                space: g[0].space.clone(),
                k: g[0].k,
                runs: g.len(),
                mean_cost: g.iter().map(|r| r.cost as f64).sum::<f64>() / n,
                best_cost: g.iter().map(|r| r.cost).min().unwrap_or(0),
                mean_gap: if gaps.len() == g.len() && !gaps.is_empty() {
                    Some(gaps.iter().sum::<f64>() / gaps.len() as f64)
                } else {
                    None
                },
                mean_time_s: g.iter().map(|r| r.time_s).sum::<f64>() / n,
            }
        })
        .collect()
}

fn write_rows<T: Serialize>(rows: &[T], columns: &[&str], format: ReportFormat, w: impl Write) -> std::io::Result<()> {
    match format {
        ReportFormat::Csv => {
            let mut wr = csv::WriterBuilder::new().has_headers(false).from_writer(w);
            wr.write_record(columns)?;
            for r in rows {
                wr.serialize(r).map_err(std::io::Error::other)?;
            }
            wr.flush()
        }
        ReportFormat::Jsonl => {
            let mut w = w;
            for r in rows {
                serde_json::to_writer(&mut w, r)?;
                writeln!(w)?;
            }
            w.flush()
        }
    }
}

/// Writes one row per run. Zero rows give a header-only CSV or an empty JSONL file.
pub fn emit_report(rows: &[RunReport], format: ReportFormat, w: impl Write) -> std::io::Result<()> {
    write_rows(rows, &REPORT_COLUMNS, format, w)
}

/// Writes the aggregate block for `rows`.
pub fn emit_aggregates(rows: &[RunReport], format: ReportFormat, w: impl Write) -> std::io::Result<()> {
    write_rows(&aggregate(rows), &AGGREGATE_COLUMNS, format, w)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(instance: &str, seed: u64, cost: Cost) -> RunReport {
        RunReport {
            instance: instance.into(),
            seed,
            space: "bs:2".into(),
            k: Some(2),
            n: 3,
            initial_cost: cost + 5,
            cost,
            bks: Some(100),
            gap: gap_to_bks(cost, 100).ok(),
            routes: 1,
            feasible: true,
            converged: true,
            time_s: 0.5,
            iterations: 1,
            evaluations: 2,
            decoder_calls: 3,
            bs_passes: 4,
            exact_fallbacks: 0,
            memory_hit_rate: 0.25,
            filtered: 0,
            psi_initial: 0.1,
            psi_min: 0.1,
            psi_max: 0.1,
            psi_final: 0.1,
        }
    }

    #[test]
    fn csv_header_matches_fields() {
        let mut buf = Vec::new();
        {
            let mut wr = csv::Writer::from_writer(&mut buf);
            wr.serialize(row("a", 1, 100)).unwrap();
        }
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), REPORT_COLUMNS.join(","));
    }

    #[test]
    fn empty_report_is_header_only() {
        let mut buf = Vec::new();
        emit_report(&[], ReportFormat::Csv, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), format!("{}\n", REPORT_COLUMNS.join(",")));
        let mut buf = Vec::new();
        emit_report(&[], ReportFormat::Jsonl, &mut buf).unwrap();
        assert!(buf.is_empty());
    }

    #[test]
    fn aggregates_by_instance_and_space() {
        let rows = vec![row("a", 1, 100), row("a", 2, 110), row("b", 1, 90)];
        let agg = aggregate(&rows);
        assert_eq!(agg.len(), 2);
        assert_eq!(agg[0].mean_cost, 105.0);
        assert_eq!(agg[0].best_cost, 100);
        assert!((agg[0].mean_gap.unwrap() - 5.0).abs() < 1e-12);
        assert_eq!(agg[1].runs, 1);
        let mut buf = Vec::new();
        emit_aggregates(&rows, ReportFormat::Jsonl, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 2);
    }
}
