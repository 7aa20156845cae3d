// SPDX-License-Identifier: Apache-2.0

//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion that has its inputs available did not pass.
//! Runs without the libtest harness so the lines are never captured.

mod common;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use common::RandCircuit;
use lutobf::attacks::{brute_force_attack, cpa_partition, CandidateModel, OracleBudget};
use lutobf::cells::{transistor_count, LutKind};
use lutobf::evaluate::composite_phi;
use lutobf::lut::{mux4_output, TwoInputFunction};
use lutobf::netlist::{emit_bench, parse_bench, EmitOptions, EquivOptions, EquivVerdict, Netlist};
use lutobf::obfuscate::{obfuscate, ObfuscateError};
use lutobf::sweep::{run_sweep, write_outputs, RunConfig};
use lutobf::Scheme;

struct Outcome {
    pass: bool,
    /// A required benchmark file is not in the repository.
    blocked: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Outcome {
            pass,
            blocked: false,
            detail: detail.into(),
        }
    }
}

fn find_benchmark(file: &str) -> Option<PathBuf> {
    let root = common::repo_root().join("benchmarks");
    for dir in fs::read_dir(&root).ok()? {
        let p = dir.ok()?.path().join(file);
        if p.is_file() {
            return Some(p);
        }
    }
    None
}

fn load(path: &Path) -> Netlist {
    let name = path.file_stem().unwrap().to_string_lossy().into_owned();
    parse_bench(&fs::read_to_string(path).unwrap(), &name).unwrap()
}

type TwoInput = fn(bool, bool) -> bool;

/// Configuration bits and the function each row names, written out by hand.
const TABLE_I: [(&str, TwoInput); 16] = [
    ("0001", |a, b| a & b),
    ("0010", |a, b| a & !b),
    ("0011", |a, _| a),
    ("0100", |a, b| !a & b),
    ("0101", |_, b| b),
    ("0110", |a, b| a ^ b),
    ("0111", |a, b| a | b),
    ("1000", |a, b| !(a | b)),
    ("1001", |a, b| !(a ^ b)),
    ("1010", |_, b| !b),
    ("1011", |a, b| a | !b),
    ("1100", |a, _| !a),
    ("1101", |a, b| !a | b),
    ("1110", |a, b| !(a & b)),
    ("1111", |_, _| true),
    ("0000", |_, _| false),
];

fn c1_table_one() -> Outcome {
    let start = Instant::now();
    let mut mismatches = 0;
    for (bits, f) in TABLE_I {
        let x: Vec<bool> = bits.chars().map(|c| c == '1').collect();
        let x = [x[0], x[1], x[2], x[3]];
        for (a, b) in [(false, false), (false, true), (true, false), (true, true)] {
            if mux4_output(x, a, b) != f(a, b) {
                mismatches += 1;
            }
        }
        let named = TwoInputFunction::ALL
            .iter()
            .find(|t| t.config_bits() == bits);
        match named {
            Some(t)
                if [(false, false), (false, true), (true, false), (true, true)]
                    .iter()
                    .all(|&(a, b)| t.eval(a, b) == f(a, b)) => {}
            _ => mismatches += 1,
        }
    }
    let elapsed = start.elapsed();
    Outcome::new(
        mismatches == 0 && elapsed < Duration::from_secs(1),
        format!("16 configurations, {mismatches} mismatches, {elapsed:?} (limit 1 s)"),
    )
}

fn c2_motivating_cpa() -> Outcome {
    let n = common::benchmark("regression/cpa_motivating.bench");
    let r = cpa_partition(&n, CandidateModel::Uniform(3.0));
    let dominant = 2f64.powf(r.dominant_log2_complexity);
    let naive = 2f64.powf(r.naive_log2_complexity);
    Outcome::new(
        (dominant - 9.0).abs() < 1e-9 && (naive - 27.0).abs() < 1e-9,
        format!("dominant {dominant}, naive {naive} (want 9 and 27, exact)"),
    )
}

fn c3_transistors() -> Outcome {
    let want = [
        (LutKind::MuxOnly, [6, 14, 30, 62]),
        (LutKind::SramLut, [30, 62, 126, 254]),
        (LutKind::SotLut, [27, 36, 53, 86]),
    ];
    let mut ok = true;
    for (kind, row) in want {
        for (i, &t) in row.iter().enumerate() {
            ok &= transistor_count(kind, i as u8 + 2).ok() == Some(t);
        }
    }
    let sram = transistor_count(LutKind::SramLut, 5).unwrap() as f64;
    let sot = transistor_count(LutKind::SotLut, 5).unwrap() as f64;
    let saving = 100.0 * (sram - sot) / sram;
    ok &= (saving - 66.1).abs() <= 0.5;
    Outcome::new(
        ok,
        format!("tables exact: {ok}, n=5 saving {saving:.2}% (want 66.1 +/- 0.5)"),
    )
}

fn c4_phi() -> Outcome {
    let rows = [
        (11.22, 24.17, 17.69, 0.01),
        (12.21, 20.36, 16.29, 0.01),
        (16.06, 33.20, 24.63, 0.01),
        (17.67, 28.49, 23.18, 0.15),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (a, d, want, tol) in rows {
        let phi = 100.0 * composite_phi(a / 100.0, d / 100.0, 0.5, 0.5).unwrap();
        ok &= (phi - want).abs() <= tol + 1e-9;
        parts.push(format!("{phi:.3} vs {want} (+/- {tol})"));
    }
    Outcome::new(ok, parts.join("; "))
}

fn c5_brute_force() -> Outcome {
    let re = Scheme::new(LutKind::SotLut, true);
    let budget = OracleBudget::default();
    let mut checked = 0;
    let mut ok = true;
    for count in 1..=3usize {
        let mut cases: Vec<Netlist> = vec![common::benchmark("iscas85/c17.bench")];
        cases.extend((0..40).map(|seed| RandCircuit::generate(seed, 8, 30, 3).netlist()));
        let mut done = 0;
        for (i, n) in cases.iter().enumerate() {
            if n.stats().pi_count > 10 {
                continue;
            }
            let Ok((_, out)) = obfuscate(n, re, count, i as u64 + 1, true) else {
                continue;
            };
            if out.masks.len() != count {
                continue;
            }
            let view = parse_bench(
                &emit_bench(&out.netlist, &EmitOptions::attacker_view()),
                "view",
            )
            .unwrap();
            let r = brute_force_attack(&view, n, &budget, Some(&out.masks)).unwrap();
            ok &=
                r.enumerated == Some(16u64.pow(count as u32)) && r.secret_consistent == Some(true);
            done += 1;
            if done == 4 {
                break;
            }
        }
        ok &= done > 0;
        checked += done;
    }
    let c432 = common::benchmark("iscas85/c432.bench");
    let (_, out) = obfuscate(&c432, re, 16, 1, true).unwrap();
    let r = brute_force_attack(&out.netlist, &c432, &budget, None).unwrap();
    let big = r.enumerated.is_none() && r.budget_exhausted && r.dominant_log2_complexity == 64.0;
    Outcome::new(
        ok && big,
        format!(
            "{checked} small cases sized 16^N with the secret included: {ok}; N=16 reports {} bits, enumerated {:?}",
            r.dominant_log2_complexity, r.enumerated
        ),
    )
}

fn c6_equivalence() -> Outcome {
    let start = Instant::now();
    let benches = common::bundled_benchmarks();
    let mut grid = Vec::new();
    for (rel, n) in &benches {
        for scheme in Scheme::ALL {
            for count in [1usize, 4, 16] {
                grid.push((rel.as_str(), n, scheme, count));
            }
        }
    }
    let opts = EquivOptions {
        random_vectors: 100_000,
        ..EquivOptions::default()
    };
    let results: Vec<Result<Option<(bool, bool)>, String>> = grid
        .par_iter()
        .map(|&(rel, n, scheme, count)| {
            let out = match obfuscate(n, scheme, count, 1, true) {
                Ok((_, out)) => out,
                Err(ObfuscateError::InsufficientInner { .. }) => return Ok(None),
                Err(e) => return Err(format!("{rel} {scheme} N={count}: {e}")),
            };
            let v = out.verify(n, &opts).map_err(|e| e.to_string())?;
            let small = n.stats().pi_count <= 20;
            let good = match v {
                EquivVerdict::EquivalentExhaustive => small,
                EquivVerdict::EquivalentSampled(k) => !small && k >= 100_000,
                EquivVerdict::Counterexample(_) => false,
            };
            Ok(Some((good, small)))
        })
        .collect();
    let elapsed = start.elapsed();
    let mut checked = 0;
    let mut exhaustive = 0;
    let mut skipped = 0;
    let mut failures = Vec::new();
    for (r, &(rel, _, scheme, count)) in results.iter().zip(&grid) {
        match r {
            Ok(None) => skipped += 1,
            Ok(Some((good, small))) => {
                checked += 1;
                exhaustive += usize::from(*small);
                if !good {
                    failures.push(format!("{rel} {scheme} N={count}"));
                }
            }
            Err(e) => failures.push(e.clone()),
        }
    }
    Outcome::new(
        failures.is_empty() && elapsed < Duration::from_secs(300),
        format!(
            "{checked} cells equivalent ({exhaustive} exhaustive), {skipped} without enough inner gates, \
             failures {failures:?}, {elapsed:?} (limit 300 s)"
        ),
    )
}

fn c7_ordering() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let benchmarks = common::bundled_benchmarks()
        .into_iter()
        .map(|(rel, _)| common::repo_root().join("benchmarks").join(rel))
        .collect();
    let cfg = RunConfig {
        benchmarks,
        gates: vec![16],
        force: true,
        vectors: 4096,
        output: dir.path().to_path_buf(),
        ..RunConfig::default()
    };
    let summary = run_sweep(&cfg).unwrap();
    let avg: BTreeMap<String, (f64, f64)> = summary
        .aggregate
        .iter()
        .map(|r| (r.scheme.clone(), (r.area_avg, r.delay_avg)))
        .collect();
    let (sram_u, sot_u, mux_u) = (avg["SRAM_unRE"].0, avg["SOT_unRE"].0, avg["MUX_unRE"].0);
    let (sot_re, sram_re) = (avg["SOT_RE"].1, avg["SRAM_RE"].1);
    let counts: Vec<usize> = summary.aggregate.iter().map(|r| r.benchmarks).collect();
    let same_set = counts.windows(2).all(|w| w[0] == w[1]);
    Outcome::new(
        same_set && sram_u > sot_u && sot_u > mux_u && (sot_re - sram_re).abs() < 1e-12,
        format!(
            "area SRAM_unRE {:.2}% > SOT_unRE {:.2}% > MUX_unRE {:.2}%; delay SOT_RE {:.4}% = SRAM_RE {:.4}% \
             over {} benchmarks",
            100.0 * sram_u,
            100.0 * sot_u,
            100.0 * mux_u,
            100.0 * sot_re,
            100.0 * sram_re,
            counts.first().copied().unwrap_or(0)
        ),
    )
}

fn c8_stats() -> Outcome {
    let want = [
        ("c432.bench", 36, 7),
        ("i2.bench", 201, 1),
        ("s713.bench", 54, 42),
        ("c6288.bench", 32, 32),
    ];
    let mut ok = true;
    let mut blocked = false;
    let mut parts = Vec::new();
    for (file, pi, po) in want {
        match find_benchmark(file) {
            None => {
                ok = false;
                blocked = true;
                parts.push(format!("{file} not bundled"));
            }
            Some(p) => {
                let s = load(&p).stats();
                ok &= (s.pi_count, s.po_count) == (pi, po);
                parts.push(format!(
                    "{file} {}/{} (want {pi}/{po})",
                    s.pi_count, s.po_count
                ));
            }
        }
    }
    Outcome {
        pass: ok,
        blocked,
        detail: parts.join("; "),
    }
}

fn c9_cpa_plans() -> Outcome {
    let mut ok = true;
    let mut blocked = false;
    let mut parts = Vec::new();
    for file in ["s1196.bench", "c2670.bench"] {
        let Some(p) = find_benchmark(file) else {
            ok = false;
            blocked = true;
            parts.push(format!("{file} not bundled"));
            continue;
        };
        let n = load(&p);
        let (_, out) = obfuscate(&n, Scheme::new(LutKind::SotLut, true), 16, 1, true).unwrap();
        let r = cpa_partition(&out.netlist, CandidateModel::AllMasks);
        let single = r.stages.len() == 1 && r.stages[0].gates.len() == 16;
        ok &= single && r.dominant_log2_complexity == 64.0;
        parts.push(format!(
            "{file} {} stage(s), dominant {} bits",
            r.stages.len(),
            r.dominant_log2_complexity
        ));
    }
    Outcome {
        pass: ok,
        blocked,
        detail: parts.join("; "),
    }
}

fn tree(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(dir).unwrap().to_string_lossy().into_owned();
                out.insert(rel, fs::read(&p).unwrap());
            }
        }
    }
    out
}

fn c10_determinism() -> Outcome {
    let conf = common::repo_root().join("benchmarks/sweep.conf");
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        let mut cfg =
            RunConfig::from_kv(&fs::read_to_string(&conf).unwrap(), conf.parent().unwrap())
                .unwrap();
        cfg.output = d.path().to_path_buf();
        write_outputs(&run_sweep(&cfg).unwrap(), d.path()).unwrap();
    }
    let (a, b) = (tree(dirs[0].path()), tree(dirs[1].path()));
    let cells = fs::read_to_string(dirs[0].path().join("cells.csv")).unwrap();
    let ok_cells = cells.lines().filter(|l| l.contains(",ok,")).count();
    Outcome::new(
        !a.is_empty() && a == b,
        format!(
            "{} files, {} ok cells, trees identical: {}",
            a.len(),
            ok_cells,
            a == b
        ),
    )
}

type Criterion = fn() -> Outcome;

fn main() -> ExitCode {
    let criteria: [(&str, Criterion); 10] = [
        ("1 two-input configuration table", c1_table_one),
        (
            "2 partition attack on the three-cell circuit",
            c2_motivating_cpa,
        ),
        ("3 transistor counts", c3_transistors),
        ("4 composite metric arithmetic", c4_phi),
        ("5 brute-force complexity", c5_brute_force),
        ("6 functional preservation", c6_equivalence),
        ("7 overhead ordering", c7_ordering),
        ("8 structural stats", c8_stats),
        ("9 partition resistance of plans", c9_cpa_plans),
        ("10 determinism", c10_determinism),
    ];
    let mut unexpected = Vec::new();
    for (name, run) in criteria {
        let o = run();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        let note = if o.blocked {
            " [benchmark missing]"
        } else {
            ""
        };
        println!("{tag} criterion {name}: {}{note}", o.detail);
        if !o.pass && !o.blocked {
            unexpected.push(name);
        }
    }
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        eprintln!("failing criteria: {unexpected:?}");
        ExitCode::FAILURE
    }
}
