// SPDX-License-Identifier: Apache-2.0

//! `lutobf` command-line driver.
//!
//! Exit codes: 0 success, 1 usage or I/O error, 2 parse error,
//! 3 verification failure.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;

use lutobf::attacks::{
    brute_force_attack, cpa_partition, ita_check, sca_audit, AttackKind, AttackReport,
    CandidateModel, OracleBudget,
};
use lutobf::cells::CellLibrary;
use lutobf::cones::classes_csv;
use lutobf::evaluate::{
    aggregate, evaluate_csv, parse_evaluate_csv, render_report, OverheadReport, ReportFormat,
};
use lutobf::netlist::{
    emit_bench, parse_bench, EmitOptions, EquivOptions, GateKind, Netlist, EXHAUSTIVE_PI_LIMIT,
};
use lutobf::sweep::{run_sweep, write_outputs, CellStatus, RunConfig};
use lutobf::{classify_gates, MaskTable, Scheme};

#[derive(Debug, Parser)]
#[command(
    name = "lutobf",
    version,
    about = "LUT-based netlist obfuscation and attack audits"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print interface and size statistics of .bench files.
    Stats {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
    },
    /// Print the gate classes of a netlist as CSV.
    Classify {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Replace gates by LUTs and write the attacker view and the secret masks.
    Obfuscate(ObfuscateArgs),
    /// Measure area and delay overheads of an obfuscated netlist.
    Evaluate(EvaluateArgs),
    /// Aggregate evaluate CSV rows per scheme and gate count.
    Report(ReportArgs),
    /// Run an attack against an obfuscated netlist and print a JSON report.
    Attack(AttackArgs),
    /// Run the benchmark × scheme × gate-count grid.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
struct ObfuscateArgs {
    /// One of mux_re, sram_re, sot_re, mux_unre, sram_unre, sot_unre.
    #[arg(long)]
    scheme: Scheme,
    #[arg(long)]
    gates: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    masks: PathBuf,
    /// Allow more than 5% of the gates to be obfuscated.
    #[arg(long)]
    force: bool,
    /// Tag emitted LUTs with their kind. Off by default so the output stays
    /// indistinguishable across kinds.
    #[arg(long)]
    show_kind: bool,
    /// Random vectors for the equivalence check above the exhaustive limit.
    #[arg(long, default_value_t = 100_000)]
    vectors: u64,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    #[arg(long)]
    orig: PathBuf,
    #[arg(long)]
    obf: PathBuf,
    /// Supplies the LUT kind for LUTs emitted without one.
    #[arg(long)]
    scheme: Scheme,
    #[arg(long)]
    gates: usize,
    #[arg(long)]
    benchmark: Option<String>,
    #[arg(long)]
    library: Option<PathBuf>,
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    #[arg(long, default_value_t = 0.5)]
    beta: f64,
    /// Omit the CSV header line.
    #[arg(long)]
    no_header: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
    Md,
}

#[derive(Debug, Args)]
struct ReportArgs {
    /// Evaluate CSV files.
    #[arg(long = "in", required = true)]
    inputs: Vec<PathBuf>,
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    #[arg(long, default_value_t = 0.5)]
    beta: f64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum AttackName {
    Cpa,
    Bfa,
    Ita,
    Sca,
}

#[derive(Debug, Args)]
struct AttackArgs {
    #[arg(value_enum)]
    attack: AttackName,
    #[arg(long = "in")]
    input: PathBuf,
    /// Original netlist queried as a black box.
    #[arg(long)]
    oracle: Option<PathBuf>,
    /// Secret masks, checked for membership in the consistent set.
    #[arg(long)]
    masks: Option<PathBuf>,
    /// Oracle queries above the exhaustive threshold.
    #[arg(long, default_value_t = 4096)]
    budget: u64,
    #[arg(long, default_value_t = 16)]
    exhaustive_threshold: usize,
    #[arg(long, default_value_t = 1 << 24)]
    max_candidates: u64,
    #[arg(long, default_value_t = 0x0bfa)]
    seed: u64,
    /// Per-cell candidate count for the partition attack; all masks if absent.
    #[arg(long)]
    candidates: Option<f64>,
    /// Further emissions of the same plan for the side-channel audit.
    #[arg(long)]
    compare: Vec<PathBuf>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// key = value file; flags given here override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    benchmarks: Vec<String>,
    #[arg(long)]
    schemes: Option<String>,
    #[arg(long)]
    gates: Option<String>,
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long)]
    beta: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    library: Option<String>,
    #[arg(long)]
    output: Option<String>,
    #[arg(long)]
    force: bool,
    #[arg(long)]
    vectors: Option<String>,
}

#[derive(Debug)]
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl Failure {
    fn usage(error: impl Into<anyhow::Error>) -> Self {
        Failure {
            code: 1,
            error: error.into(),
        }
    }
    fn parse(error: impl Into<anyhow::Error>) -> Self {
        Failure {
            code: 2,
            error: error.into(),
        }
    }
    fn verify(error: impl Into<anyhow::Error>) -> Self {
        Failure {
            code: 3,
            error: error.into(),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        Failure::usage(error)
    }
}

type CliResult = Result<(), Failure>;

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(Failure::usage)
}

fn write_text(path: &Path, text: &str) -> CliResult {
    fs::write(path, text)
        .with_context(|| format!("writing {}", path.display()))
        .map_err(Failure::usage)
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn read_netlist(path: &Path) -> Result<Netlist, Failure> {
    let text = read_text(path)?;
    parse_bench(&text, &stem(path))
        .with_context(|| format!("{}", path.display()))
        .map_err(Failure::parse)
}

fn read_masks(path: &Path) -> Result<MaskTable, Failure> {
    let text = read_text(path)?;
    MaskTable::from_csv(&text)
        .with_context(|| format!("{}", path.display()))
        .map_err(Failure::parse)
}

fn load_library(path: Option<&Path>) -> Result<CellLibrary, Failure> {
    match path {
        None => Ok(CellLibrary::bundled()),
        Some(p) => {
            let text = read_text(p)?;
            CellLibrary::parse(&text)
                .with_context(|| format!("{}", p.display()))
                .map_err(Failure::parse)
        }
    }
}

/// Write to stdout; a closed pipe (e.g. `| head`) ends output quietly.
fn out(text: &str) -> CliResult {
    match io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(Failure::usage(anyhow!(e))),
        _ => Ok(()),
    }
}

fn print_json(value: &AttackReport) -> CliResult {
    let text = serde_json::to_string_pretty(value).map_err(|e| Failure::usage(anyhow!(e)))?;
    out(&format!("{text}\n"))
}

fn cmd_stats(paths: &[PathBuf]) -> CliResult {
    out("benchmark,pi,po,gates,nets,max_level,pruned\n")?;
    for p in paths {
        let n = read_netlist(p)?;
        let s = n.stats();
        out(&format!(
            "{},{},{},{},{},{},{}\n",
            n.name(),
            s.pi_count,
            s.po_count,
            s.gate_count,
            s.net_count,
            s.max_level,
            s.pruned_gates
        ))?;
    }
    Ok(())
}

fn cmd_classify(input: &Path) -> CliResult {
    let n = read_netlist(input)?;
    out(&classes_csv(&classify_gates(&n)))
}

fn cmd_obfuscate(a: &ObfuscateArgs) -> CliResult {
    let original = read_netlist(&a.input)?;
    let (plan, out) = lutobf::obfuscate::obfuscate(&original, a.scheme, a.gates, a.seed, a.force)
        .map_err(Failure::usage)?;
    info!(
        "{}: {} gates replaced, {} skipped",
        original.name(),
        out.replaced.len(),
        out.skipped.len()
    );
    let opts = EquivOptions {
        exhaustive_limit: EXHAUSTIVE_PI_LIMIT,
        random_vectors: a.vectors,
        seed: a.seed,
    };
    let verdict = out.verify(&original, &opts).map_err(Failure::verify)?;
    if !verdict.is_equivalent() {
        return Err(Failure::verify(anyhow!(
            "obfuscated netlist differs from the original: {verdict:?}"
        )));
    }
    info!(
        "equivalence: {verdict:?}; plan of {} gates",
        plan.selected.len()
    );
    let view = EmitOptions {
        show_kind: a.show_kind,
        include_masks: false,
    };
    write_text(&a.out, &emit_bench(&out.netlist, &view))?;
    write_text(&a.masks, &out.masks.to_csv())
}

/// Give kind-less LUTs the kind of `scheme` so they can be costed.
fn with_lut_kind(n: &Netlist, scheme: Scheme) -> Result<Netlist, Failure> {
    let mut d = n.to_draft();
    for i in 0..d.gates().len() {
        let g = d.gate_mut(i);
        if let GateKind::Lut { kind: None, arity } = g.kind {
            g.kind = GateKind::Lut {
                kind: Some(scheme.lut_kind),
                arity,
            };
        }
    }
    d.build().map_err(Failure::parse)
}

fn cmd_evaluate(a: &EvaluateArgs) -> CliResult {
    let lib = load_library(a.library.as_deref())?;
    let original = read_netlist(&a.orig)?;
    let obfuscated = with_lut_kind(&read_netlist(&a.obf)?, a.scheme)?;
    let name = a
        .benchmark
        .clone()
        .unwrap_or_else(|| original.name().to_string());
    let row = OverheadReport::compute(
        &name,
        &a.scheme.to_string(),
        a.gates,
        &original,
        &obfuscated,
        &lib,
        a.alpha,
        a.beta,
    )
    .map_err(Failure::usage)?;
    let csv = evaluate_csv(&[row]);
    if a.no_header {
        out(&csv
            .lines()
            .skip(1)
            .map(|l| format!("{l}\n"))
            .collect::<String>())?;
    } else {
        out(&csv)?;
    }
    Ok(())
}

fn cmd_report(a: &ReportArgs) -> CliResult {
    let mut rows = Vec::new();
    for p in &a.inputs {
        let text = read_text(p)?;
        rows.extend(
            parse_evaluate_csv(&text)
                .with_context(|| format!("{}", p.display()))
                .map_err(Failure::parse)?,
        );
    }
    let agg = aggregate(&rows, a.alpha, a.beta).map_err(Failure::usage)?;
    let format = match a.format {
        Format::Csv => ReportFormat::Csv,
        Format::Json => ReportFormat::Json,
        Format::Md => ReportFormat::Markdown,
    };
    out(&render_report(&agg, format))
}

fn cmd_attack(a: &AttackArgs) -> CliResult {
    let budget = OracleBudget {
        max_queries: a.budget,
        exhaustive_threshold: a.exhaustive_threshold,
        max_candidates: a.max_candidates,
        seed: a.seed,
    };
    let report = match a.attack {
        AttackName::Cpa => {
            let n = read_netlist(&a.input)?;
            let model = a
                .candidates
                .map_or(CandidateModel::AllMasks, CandidateModel::Uniform);
            cpa_partition(&n, model)
        }
        AttackName::Bfa => {
            let n = read_netlist(&a.input)?;
            let oracle_path = a
                .oracle
                .as_ref()
                .ok_or_else(|| Failure::usage(anyhow!("bfa needs --oracle")))?;
            let oracle = read_netlist(oracle_path)?;
            let secret = a.masks.as_deref().map(read_masks).transpose()?;
            brute_force_attack(&n, &oracle, &budget, secret.as_ref()).map_err(Failure::usage)?
        }
        AttackName::Ita => {
            let n = read_netlist(&a.input)?;
            let mut r = AttackReport::new(AttackKind::Ita);
            r.ita = ita_check(&n, &budget).map_err(Failure::usage)?;
            r
        }
        AttackName::Sca => {
            let mut texts = vec![read_text(&a.input)?];
            for p in &a.compare {
                texts.push(read_text(p)?);
            }
            let mut r = AttackReport::new(AttackKind::Sca);
            r.sca = Some(sca_audit(&texts));
            r
        }
    };
    print_json(&report)
}

fn cmd_sweep(a: &SweepArgs) -> CliResult {
    let cwd = PathBuf::from(".");
    let mut cfg = match &a.config {
        Some(p) => {
            let base = p
                .parent()
                .map(Path::to_path_buf)
                .unwrap_or_else(|| cwd.clone());
            RunConfig::from_kv(&read_text(p)?, &base).map_err(Failure::parse)?
        }
        None => RunConfig::default(),
    };
    let mut set = |key: &str, value: &str| {
        cfg.set(key, value, &cwd)
            .map_err(|e| Failure::usage(anyhow!(e)))
    };
    if !a.benchmarks.is_empty() {
        set("benchmarks", &a.benchmarks.join(","))?;
    }
    let flags = [
        ("schemes", &a.schemes),
        ("gates", &a.gates),
        ("alpha", &a.alpha),
        ("beta", &a.beta),
        ("seed", &a.seed),
        ("library", &a.library),
        ("output", &a.output),
        ("vectors", &a.vectors),
    ];
    for (key, value) in flags {
        if let Some(v) = value {
            set(key, v)?;
        }
    }
    if a.force {
        set("force", "true")?;
    }
    let summary = run_sweep(&cfg).map_err(Failure::usage)?;
    let written = write_outputs(&summary, &cfg.output).map_err(Failure::usage)?;
    for w in &written {
        info!("wrote {}", w.display());
    }
    let count = |s: CellStatus| summary.cells.iter().filter(|c| c.status == s).count();
    out(&format!(
        "{} cells: {} ok, {} skipped, {} failed; outputs in {}\n",
        summary.cells.len(),
        count(CellStatus::Ok),
        count(CellStatus::Skipped),
        count(CellStatus::Failed),
        cfg.output.display()
    ))?;
    if summary
        .cells
        .iter()
        .any(|c| c.equivalence == "counterexample")
    {
        return Err(Failure::verify(anyhow!(
            "at least one cell failed its equivalence check"
        )));
    }
    Ok(())
}

fn run(cli: Cli) -> CliResult {
    match &cli.command {
        Command::Stats { paths } => cmd_stats(paths),
        Command::Classify { input } => cmd_classify(input),
        Command::Obfuscate(a) => cmd_obfuscate(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Report(a) => cmd_report(a),
        Command::Attack(a) => cmd_attack(a),
        Command::Sweep(a) => cmd_sweep(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
