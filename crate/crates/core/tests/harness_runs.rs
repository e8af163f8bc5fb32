mod common;

use std::path::PathBuf;

use bsls_core::harness::{emit_aggregates, emit_report};
use bsls_core::model::{parse_solution, solution_cost};
use bsls_core::{run_benchmark, solve, FilterConfig, ReportFormat, RunConfig, RunReport, Solution, Space};

fn golden_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data/golden_micro.csv")
}

fn micro_config() -> RunConfig {
    RunConfig {
        spaces: vec![Space::Classic, Space::Bs(2), Space::Bs(4), Space::Exact],
        runs: 2,
        seed: 11,
        gamma: 8,
        workers: Some(2),
        bks: [("euc-25-5".to_string(), 3000)].into_iter().collect(),
        ..Default::default()
    }
}

fn without_time(mut rows: Vec<RunReport>) -> Vec<RunReport> {
    for r in &mut rows {
        r.time_s = 0.0;
    }
    rows
}

#[test]
fn micro_run_matches_golden_file() {
    let instances = vec![common::euclid_instance(25, 30, 5), common::matrix_instance(15, 12, false, 6)];
    let rows = without_time(run_benchmark(&instances, &micro_config()).unwrap());
    let mut got = Vec::new();
    emit_report(&rows, ReportFormat::Csv, &mut got).unwrap();
    let got = String::from_utf8(got).unwrap();
    let path = golden_path();
    if std::env::var_os("BSLS_BLESS").is_some() {
        std::fs::write(&path, &got).unwrap();
    }
    let want = std::fs::read_to_string(&path).expect("golden file missing; rerun with BSLS_BLESS=1");
    assert_eq!(got, want);
}

#[test]
fn reruns_are_identical_apart_from_time() {
    let instances = vec![common::euclid_instance(40, 50, 8)];
    let mut cfg = micro_config();
    cfg.filter = FilterConfig::Adaptive(Default::default());
    let a = without_time(run_benchmark(&instances, &cfg).unwrap());
    cfg.workers = Some(1);
    let b = without_time(run_benchmark(&instances, &cfg).unwrap());
    assert_eq!(a, b);
    let seeds: Vec<u64> = a.iter().map(|r| r.seed).collect();
    assert_eq!(seeds, vec![11, 11, 11, 11, 12, 12, 12, 12]);
}

#[test]
fn reported_cost_matches_recomputation_and_emitted_file() {
    let inst = common::euclid_instance(35, 40, 21);
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig {
        emit_solutions: Some(dir.path().to_path_buf()),
        ..micro_config()
    };
    let dm = inst.distance_matrix();
    for space in [Space::Classic, Space::Bs(3), Space::Exact] {
        let res = solve(&inst, space, &cfg, 3).unwrap();
        assert_eq!(res.report.cost, solution_cost(&res.solution, &dm));
        assert!(res.report.feasible);
        assert!(res.report.cost <= res.report.initial_cost);
        assert_eq!(res.report.iterations, res.outcome.stats.applied);
        if space == Space::Classic {
            assert_eq!(res.report.decoder_calls, 0);
        } else {
            assert!(res.report.decoder_calls > 0);
        }
    }
    let rows = run_benchmark(std::slice::from_ref(&inst), &RunConfig { runs: 1, ..cfg }).unwrap();
    for r in &rows {
        let file = dir.path().join(format!("{}.{}.{}.sol", r.instance, r.space.replace(':', "-"), r.seed));
        let (routes, stated) = parse_solution(&std::fs::read_to_string(file).unwrap()).unwrap();
        let sol = Solution::from_visits(routes, &inst, &dm);
        assert_eq!(sol.cost, r.cost);
        assert_eq!(stated, Some(r.cost));
    }
}

#[test]
fn jsonl_and_aggregates() {
    let instances = vec![common::euclid_instance(20, 30, 2)];
    let rows = run_benchmark(&instances, &RunConfig { runs: 2, ..micro_config() }).unwrap();
    let mut out = Vec::new();
    emit_report(&rows, ReportFormat::Jsonl, &mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    assert_eq!(text.lines().count(), rows.len());
    for (line, row) in text.lines().zip(&rows) {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["cost"], row.cost);
        assert_eq!(v["space"], row.space);
    }
    let mut agg = Vec::new();
    emit_aggregates(&rows, ReportFormat::Csv, &mut agg).unwrap();
    let agg = String::from_utf8(agg).unwrap();
    let classic: Vec<&RunReport> = rows.iter().filter(|r| r.space == "classic").collect();
    let mean = classic.iter().map(|r| r.cost as f64).sum::<f64>() / classic.len() as f64;
    let line = agg.lines().find(|l| l.contains(",classic,")).unwrap();
    let field: f64 = line.split(',').nth(4).unwrap().parse().unwrap();
    assert!((field - mean).abs() < 1e-9);
}
