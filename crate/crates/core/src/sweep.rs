// SPDX-License-Identifier: Apache-2.0

//! Experiment driver over benchmarks, schemes and gate counts.
//!
//! Each cell obfuscates one benchmark, checks equivalence against the
//! original, measures overheads, and audits the result against the
//! partition and side-channel attacks. Outputs are written in a fixed order
//! and carry no timestamps, so equal configurations give equal files.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::attacks::{attacker_views, cpa_partition, sca_audit, CandidateModel};
use crate::cells::{CellError, CellLibrary};
use crate::evaluate::{
    aggregate, check_weights, evaluate_csv, render_report, AggregateRow, EvalError, OverheadReport,
    ReportFormat,
};
use crate::netlist::{
    parse_bench, EquivOptions, EquivVerdict, Netlist, ParseStats, EXHAUSTIVE_PI_LIMIT,
};
use crate::obfuscate::{obfuscate, ObfuscateError, Scheme};

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("config line {line}: {msg}")]
    Config { line: usize, msg: String },
    #[error("{0}")]
    Invalid(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Library(#[from] CellError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub benchmarks: Vec<PathBuf>,
    pub schemes: Vec<Scheme>,
    pub gates: Vec<usize>,
    pub alpha: f64,
    pub beta: f64,
    pub seed: u64,
    /// Cell library file; the bundled library when absent.
    pub library: Option<PathBuf>,
    pub output: PathBuf,
    /// Allow more than 5% of the gates to be obfuscated.
    pub force: bool,
    /// Random vectors per equivalence check above the exhaustive limit.
    pub vectors: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            benchmarks: Vec::new(),
            schemes: Scheme::ALL.to_vec(),
            gates: vec![16, 32, 64],
            alpha: 0.5,
            beta: 0.5,
            seed: 1,
            library: None,
            output: PathBuf::from("sweep_out"),
            force: false,
            vectors: 100_000,
        }
    }
}

fn split_list(value: &str) -> impl Iterator<Item = &str> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty())
}

impl RunConfig {
    /// Read `key = value` lines. Relative paths resolve against `base`.
    pub fn from_kv(text: &str, base: &Path) -> Result<Self, SweepError> {
        let mut cfg = RunConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| SweepError::Config {
                line: i + 1,
                msg: "expected key = value".into(),
            })?;
            cfg.set(key.trim(), value.trim(), base)
                .map_err(|msg| SweepError::Config { line: i + 1, msg })?;
        }
        Ok(cfg)
    }

    /// Set one option by name, as the config file and flags spell it.
    pub fn set(&mut self, key: &str, value: &str, base: &Path) -> Result<(), String> {
        let num = |v: &str| v.parse::<f64>().map_err(|e| format!("{key}: {e}"));
        match key {
            "benchmarks" => self.benchmarks = split_list(value).map(|p| base.join(p)).collect(),
            "schemes" => {
                self.schemes = if value == "all" {
                    Scheme::ALL.to_vec()
                } else {
                    split_list(value)
                        .map(str::parse)
                        .collect::<Result<_, _>>()?
                }
            }
            "gates" => {
                self.gates = split_list(value)
                    .map(|v| v.parse::<usize>().map_err(|e| format!("gates: {e}")))
                    .collect::<Result<_, _>>()?
            }
            "alpha" => self.alpha = num(value)?,
            "beta" => self.beta = num(value)?,
            "seed" => self.seed = value.parse().map_err(|e| format!("seed: {e}"))?,
            "library" => self.library = Some(base.join(value)),
            "output" => self.output = base.join(value),
            "force" => self.force = value.parse().map_err(|e| format!("force: {e}"))?,
            "vectors" => self.vectors = value.parse().map_err(|e| format!("vectors: {e}"))?,
            other => return Err(format!("unknown key `{other}`")),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), SweepError> {
        check_weights(self.alpha, self.beta)?;
        if self.benchmarks.is_empty() {
            return Err(SweepError::Invalid("no benchmarks given".into()));
        }
        if self.schemes.is_empty() {
            return Err(SweepError::Invalid("no schemes given".into()));
        }
        if self.gates.is_empty() || self.gates.contains(&0) {
            return Err(SweepError::Invalid("gate counts must be positive".into()));
        }
        for p in &self.benchmarks {
            if !p.is_file() {
                return Err(SweepError::Invalid(format!(
                    "benchmark {} does not exist",
                    p.display()
                )));
            }
        }
        Ok(())
    }

    pub fn load_library(&self) -> Result<CellLibrary, SweepError> {
        match &self.library {
            None => Ok(CellLibrary::bundled()),
            Some(p) => {
                let text = fs::read_to_string(p).map_err(|source| SweepError::Io {
                    path: p.clone(),
                    source,
                })?;
                Ok(CellLibrary::parse(&text)?)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellStatus {
    Ok,
    /// The cell does not apply to this benchmark, e.g. too few inner gates.
    Skipped,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub benchmark: String,
    pub scheme: String,
    #[serde(rename = "N")]
    pub n: usize,
    pub status: CellStatus,
    pub equivalence: String,
    pub luts: usize,
    pub cpa_stages: usize,
    pub cpa_dominant_log2: f64,
    pub cpa_naive_log2: f64,
    pub sca_pass: bool,
    pub detail: String,
    #[serde(skip)]
    pub overhead: Option<OverheadReport>,
}

impl CellResult {
    fn new(benchmark: &str, scheme: Scheme, n: usize) -> Self {
        CellResult {
            benchmark: benchmark.to_string(),
            scheme: scheme.to_string(),
            n,
            status: CellStatus::Failed,
            equivalence: String::new(),
            luts: 0,
            cpa_stages: 0,
            cpa_dominant_log2: 0.0,
            cpa_naive_log2: 0.0,
            sca_pass: false,
            detail: String::new(),
            overhead: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkStats {
    pub benchmark: String,
    pub stats: Option<ParseStats>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSummary {
    pub stats: Vec<BenchmarkStats>,
    pub cells: Vec<CellResult>,
    pub evaluate: Vec<OverheadReport>,
    pub aggregate: Vec<AggregateRow>,
}

fn verdict_label(v: &EquivVerdict) -> String {
    match v {
        EquivVerdict::EquivalentExhaustive => "exhaustive".into(),
        EquivVerdict::EquivalentSampled(k) => format!("sampled({k})"),
        EquivVerdict::Counterexample(_) => "counterexample".into(),
    }
}

/// Run one (benchmark, scheme, N) cell.
pub fn run_cell(
    name: &str,
    original: &Netlist,
    scheme: Scheme,
    n: usize,
    cfg: &RunConfig,
    lib: &CellLibrary,
) -> CellResult {
    let mut cell = CellResult::new(name, scheme, n);
    let (plan, out) = match obfuscate(original, scheme, n, cfg.seed, cfg.force) {
        Ok(r) => r,
        Err(e @ (ObfuscateError::InsufficientInner { .. } | ObfuscateError::OverLimit { .. })) => {
            cell.status = CellStatus::Skipped;
            cell.detail = e.to_string();
            return cell;
        }
        Err(e) => {
            cell.detail = e.to_string();
            return cell;
        }
    };
    cell.luts = out.masks.len();
    let opts = EquivOptions {
        exhaustive_limit: EXHAUSTIVE_PI_LIMIT,
        random_vectors: cfg.vectors,
        seed: cfg.seed,
    };
    match out.verify(original, &opts) {
        Ok(v) => {
            cell.equivalence = verdict_label(&v);
            if !v.is_equivalent() {
                cell.detail = "obfuscated netlist differs from the original".into();
                return cell;
            }
        }
        Err(e) => {
            cell.detail = e.to_string();
            return cell;
        }
    }
    let cpa = cpa_partition(&out.netlist, CandidateModel::AllMasks);
    cell.cpa_stages = cpa.stages.len();
    cell.cpa_dominant_log2 = cpa.dominant_log2_complexity;
    cell.cpa_naive_log2 = cpa.naive_log2_complexity;
    cell.sca_pass = match attacker_views(original, &plan) {
        Ok(views) => sca_audit(&views).passed(),
        Err(_) => false,
    };
    match OverheadReport::compute(
        name,
        &scheme.to_string(),
        n,
        original,
        &out.netlist,
        lib,
        cfg.alpha,
        cfg.beta,
    ) {
        Ok(r) => {
            cell.overhead = Some(r);
            cell.status = CellStatus::Ok;
        }
        Err(e) => cell.detail = e.to_string(),
    }
    cell
}

fn benchmark_name(p: &Path) -> String {
    p.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| p.display().to_string())
}

/// Run every cell of the grid. Cells run in parallel; results keep grid order.
pub fn run_sweep(cfg: &RunConfig) -> Result<SweepSummary, SweepError> {
    cfg.validate()?;
    let lib = cfg.load_library()?;
    let mut parsed: Vec<(String, Result<Netlist, String>)> = Vec::new();
    for p in &cfg.benchmarks {
        let name = benchmark_name(p);
        let text = fs::read_to_string(p).map_err(|source| SweepError::Io {
            path: p.clone(),
            source,
        })?;
        parsed.push((
            name.clone(),
            parse_bench(&text, &name).map_err(|e| e.to_string()),
        ));
    }
    let stats = parsed
        .iter()
        .map(|(name, r)| BenchmarkStats {
            benchmark: name.clone(),
            stats: r.as_ref().ok().map(|n| n.stats()),
            error: r.as_ref().err().cloned(),
        })
        .collect();

    let mut grid = Vec::new();
    for (name, r) in &parsed {
        for &scheme in &cfg.schemes {
            for &n in &cfg.gates {
                grid.push((name.as_str(), r, scheme, n));
            }
        }
    }
    let cells: Vec<CellResult> = grid
        .par_iter()
        .map(|&(name, r, scheme, n)| match r {
            Ok(netlist) => run_cell(name, netlist, scheme, n, cfg, &lib),
            Err(e) => {
                let mut c = CellResult::new(name, scheme, n);
                c.detail = format!("parse error: {e}");
                c
            }
        })
        .collect();
    let evaluate: Vec<OverheadReport> = cells.iter().filter_map(|c| c.overhead.clone()).collect();
    let aggregate = aggregate(&evaluate, cfg.alpha, cfg.beta)?;
    Ok(SweepSummary {
        stats,
        cells,
        evaluate,
        aggregate,
    })
}

fn cells_csv(cells: &[CellResult]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for c in cells {
        w.serialize(c).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
}

fn stats_csv(stats: &[BenchmarkStats]) -> String {
    let mut out = String::from("benchmark,pi,po,gates,nets,max_level,pruned,error\n");
    for s in stats {
        match &s.stats {
            Some(p) => out.push_str(&format!(
                "{},{},{},{},{},{},{},\n",
                s.benchmark,
                p.pi_count,
                p.po_count,
                p.gate_count,
                p.net_count,
                p.max_level,
                p.pruned_gates
            )),
            None => out.push_str(&format!(
                "{},,,,,,,\"{}\"\n",
                s.benchmark,
                s.error.as_deref().unwrap_or("").replace('"', "'")
            )),
        }
    }
    out
}

/// Write `evaluate.csv`, `cells.csv`, `stats.csv` and `report.{csv,md,json}`.
pub fn write_outputs(summary: &SweepSummary, dir: &Path) -> Result<Vec<PathBuf>, SweepError> {
    fs::create_dir_all(dir).map_err(|source| SweepError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let files = [
        ("evaluate.csv", evaluate_csv(&summary.evaluate)),
        ("cells.csv", cells_csv(&summary.cells)),
        ("stats.csv", stats_csv(&summary.stats)),
        (
            "report.csv",
            render_report(&summary.aggregate, ReportFormat::Csv),
        ),
        (
            "report.md",
            render_report(&summary.aggregate, ReportFormat::Markdown),
        ),
        (
            "report.json",
            render_report(&summary.aggregate, ReportFormat::Json),
        ),
    ];
    let mut written = Vec::new();
    for (name, body) in files {
        let path = dir.join(name);
        fs::write(&path, body).map_err(|source| SweepError::Io {
            path: path.clone(),
            source,
        })?;
        written.push(path);
    }
    Ok(written)
}
