// SPDX-License-Identifier: Apache-2.0

mod common;

use std::fs;

use lutobf::sweep::{run_sweep, write_outputs, CellStatus, RunConfig};

fn two_benchmarks(out: &std::path::Path) -> RunConfig {
    let root = common::repo_root().join("benchmarks");
    RunConfig {
        benchmarks: vec![
            root.join("iscas85/c432.bench"),
            root.join("iscas85/c880.bench"),
        ],
        gates: vec![16],
        force: true,
        output: out.to_path_buf(),
        ..RunConfig::default()
    }
}

#[test]
fn grid_cardinality_and_aggregate() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = two_benchmarks(dir.path());
    let summary = run_sweep(&cfg).unwrap();
    assert_eq!(summary.cells.len(), 12);
    assert_eq!(summary.evaluate.len(), 12);
    assert_eq!(summary.aggregate.len(), 6);
    for c in &summary.cells {
        assert_eq!(c.status, CellStatus::Ok, "{c:?}");
        assert!(c.equivalence.starts_with("sampled"), "{c:?}");
        assert!(c.sca_pass);
    }
    write_outputs(&summary, dir.path()).unwrap();
    let evaluate = fs::read_to_string(dir.path().join("evaluate.csv")).unwrap();
    assert_eq!(evaluate.lines().count(), 13);

    // Phi recomputed from the report's own averages.
    let report = fs::read_to_string(dir.path().join("report.csv")).unwrap();
    let mut lines = report.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = |name: &str| {
        header
            .iter()
            .position(|h| *h == name)
            .unwrap_or_else(|| panic!("{name}"))
    };
    let mut rows = 0;
    for line in lines {
        let f: Vec<f64> = line
            .split(',')
            .skip(2)
            .map(|v| v.parse().unwrap())
            .collect();
        let get = |name: &str| f[col(name) - 2];
        let phi = 0.5 * get("area_avg") + 0.5 * get("delay_avg");
        assert!((get("phi") - phi).abs() <= 0.0101, "{line}");
        rows += 1;
    }
    assert_eq!(rows, 6);
}

#[test]
fn rerun_is_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let cfg = two_benchmarks(dir.path());
        write_outputs(&run_sweep(&cfg).unwrap(), dir.path()).unwrap();
    }
    for name in [
        "evaluate.csv",
        "cells.csv",
        "stats.csv",
        "report.csv",
        "report.md",
        "report.json",
    ] {
        let x = fs::read(a.path().join(name)).unwrap();
        let y = fs::read(b.path().join(name)).unwrap();
        assert_eq!(x, y, "{name}");
    }
}

#[test]
fn small_benchmark_cells_are_skipped() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = two_benchmarks(dir.path());
    cfg.benchmarks = vec![common::repo_root().join("benchmarks/iscas85/c17.bench")];
    cfg.force = false;
    let summary = run_sweep(&cfg).unwrap();
    assert!(summary
        .cells
        .iter()
        .all(|c| c.status == CellStatus::Skipped));
    assert!(summary.evaluate.is_empty());
}

#[test]
fn bundled_config_loads() {
    let path = common::repo_root().join("benchmarks/sweep.conf");
    let cfg =
        RunConfig::from_kv(&fs::read_to_string(&path).unwrap(), path.parent().unwrap()).unwrap();
    cfg.validate().unwrap();
    assert_eq!(cfg.gates, vec![16, 32, 64]);
    assert_eq!(cfg.schemes.len(), 6);
    assert!(cfg.force);
}
