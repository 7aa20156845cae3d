// SPDX-License-Identifier: Apache-2.0

//! Area, delay and overhead figures of an obfuscated netlist.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cells::{CellError, CellLibrary};
use crate::netlist::Netlist;
use crate::timing::{unit_delay, Timing};

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error(transparent)]
    Cell(#[from] CellError),
    #[error("weights must lie in [0, 1] and sum to 1, got alpha={alpha}, beta={beta}")]
    Weights { alpha: f64, beta: f64 },
    #[error("original {0} is zero; overhead undefined")]
    ZeroBaseline(&'static str),
}

/// Sum of cell areas.
pub fn static_area(n: &Netlist, lib: &CellLibrary) -> Result<f64, CellError> {
    n.gates()
        .iter()
        .map(|g| lib.model_for(&g.kind, g.arity()).map(|m| m.area))
        .sum()
}

/// Critical-path delay in ns under the library's lumped cell delays.
pub fn static_delay(n: &Netlist, lib: &CellLibrary) -> Result<f64, CellError> {
    Ok(Timing::library(n, lib)?.critical)
}

/// Critical-path delay in gate stages.
pub fn static_delay_unit(n: &Netlist) -> usize {
    unit_delay(n) as usize
}

pub fn check_weights(alpha: f64, beta: f64) -> Result<(), EvalError> {
    let in_range = (0.0..=1.0).contains(&alpha) && (0.0..=1.0).contains(&beta);
    if !in_range || (alpha + beta - 1.0).abs() > 1e-9 {
        return Err(EvalError::Weights { alpha, beta });
    }
    Ok(())
}

/// `alpha * area_overhead + beta * delay_overhead`.
pub fn composite_phi(
    area_overhead: f64,
    delay_overhead: f64,
    alpha: f64,
    beta: f64,
) -> Result<f64, EvalError> {
    check_weights(alpha, beta)?;
    Ok(alpha * area_overhead + beta * delay_overhead)
}

/// One row of the `evaluate` table. Overheads are fractions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverheadReport {
    pub benchmark: String,
    pub scheme: String,
    #[serde(rename = "N")]
    pub n: usize,
    pub area_orig: f64,
    pub area_obf: f64,
    pub delay_orig: f64,
    pub delay_obf: f64,
    pub area_ovh: f64,
    pub delay_ovh: f64,
    pub alpha: f64,
    pub beta: f64,
    pub phi: f64,
}

pub const EVALUATE_HEADER: &str =
    "benchmark,scheme,N,area_orig,area_obf,delay_orig,delay_obf,area_ovh,delay_ovh,alpha,beta,phi";

impl OverheadReport {
    #[allow(clippy::too_many_arguments)]
    pub fn compute(
        benchmark: &str,
        scheme: &str,
        n: usize,
        original: &Netlist,
        obfuscated: &Netlist,
        lib: &CellLibrary,
        alpha: f64,
        beta: f64,
    ) -> Result<Self, EvalError> {
        let area_orig = static_area(original, lib)?;
        let area_obf = static_area(obfuscated, lib)?;
        let delay_orig = static_delay(original, lib)?;
        let delay_obf = static_delay(obfuscated, lib)?;
        Self::from_figures(
            benchmark,
            scheme,
            n,
            (area_orig, area_obf),
            (delay_orig, delay_obf),
            alpha,
            beta,
        )
    }

    pub fn from_figures(
        benchmark: &str,
        scheme: &str,
        n: usize,
        (area_orig, area_obf): (f64, f64),
        (delay_orig, delay_obf): (f64, f64),
        alpha: f64,
        beta: f64,
    ) -> Result<Self, EvalError> {
        if area_orig <= 0.0 {
            return Err(EvalError::ZeroBaseline("area"));
        }
        if delay_orig <= 0.0 {
            return Err(EvalError::ZeroBaseline("delay"));
        }
        let area_ovh = (area_obf - area_orig) / area_orig;
        let delay_ovh = (delay_obf - delay_orig) / delay_orig;
        let phi = composite_phi(area_ovh, delay_ovh, alpha, beta)?;
        Ok(OverheadReport {
            benchmark: benchmark.to_string(),
            scheme: scheme.to_string(),
            n,
            area_orig,
            area_obf,
            delay_orig,
            delay_obf,
            area_ovh,
            delay_ovh,
            alpha,
            beta,
            phi,
        })
    }

    /// CSV line matching [`EVALUATE_HEADER`]; overheads kept to 0.01 %.
    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{:.2},{:.2},{:.4},{:.4},{:.4},{:.4},{},{},{:.4}",
            self.benchmark,
            self.scheme,
            self.n,
            self.area_orig,
            self.area_obf,
            self.delay_orig,
            self.delay_obf,
            self.area_ovh,
            self.delay_ovh,
            self.alpha,
            self.beta,
            self.phi
        )
    }
}

pub fn evaluate_csv(rows: &[OverheadReport]) -> String {
    let mut out = format!("{EVALUATE_HEADER}\n");
    for r in rows {
        out.push_str(&r.csv_line());
        out.push('\n');
    }
    out
}

pub fn parse_evaluate_csv(text: &str) -> Result<Vec<OverheadReport>, csv::Error> {
    csv::Reader::from_reader(text.as_bytes())
        .deserialize()
        .collect()
}

/// Max/min/avg overheads of one (scheme, N) over all benchmarks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub scheme: String,
    #[serde(rename = "N")]
    pub n: usize,
    pub benchmarks: usize,
    pub area_max: f64,
    pub area_min: f64,
    pub area_avg: f64,
    pub delay_max: f64,
    pub delay_min: f64,
    pub delay_avg: f64,
    pub alpha: f64,
    pub beta: f64,
    /// Composite metric of the averages.
    pub phi: f64,
}

/// Group rows by (scheme, N) in order of first appearance.
pub fn aggregate(
    rows: &[OverheadReport],
    alpha: f64,
    beta: f64,
) -> Result<Vec<AggregateRow>, EvalError> {
    check_weights(alpha, beta)?;
    let mut keys: Vec<(String, usize)> = Vec::new();
    for r in rows {
        let key = (r.scheme.clone(), r.n);
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    keys.into_iter()
        .map(|(scheme, n)| {
            let group: Vec<&OverheadReport> = rows
                .iter()
                .filter(|r| r.scheme == scheme && r.n == n)
                .collect();
            let count = group.len() as f64;
            let stats = |f: &dyn Fn(&OverheadReport) -> f64| {
                let vals: Vec<f64> = group.iter().map(|r| f(r)).collect();
                let max = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let min = vals.iter().copied().fold(f64::INFINITY, f64::min);
                (max, min, vals.iter().sum::<f64>() / count)
            };
            let (area_max, area_min, area_avg) = stats(&|r| r.area_ovh);
            let (delay_max, delay_min, delay_avg) = stats(&|r| r.delay_ovh);
            Ok(AggregateRow {
                scheme,
                n,
                benchmarks: group.len(),
                area_max,
                area_min,
                area_avg,
                delay_max,
                delay_min,
                delay_avg,
                alpha,
                beta,
                phi: composite_phi(area_avg, delay_avg, alpha, beta)?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
    Markdown,
}

impl std::str::FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            "md" | "markdown" => Ok(ReportFormat::Markdown),
            other => Err(format!("unknown report format `{other}` (csv, json, md)")),
        }
    }
}

/// Render aggregates. CSV and Markdown show percentages to 0.01 %.
pub fn render_report(rows: &[AggregateRow], format: ReportFormat) -> String {
    let pct = |x: f64| format!("{:.2}", x * 100.0);
    match format {
        ReportFormat::Json => {
            serde_json::to_string_pretty(rows).expect("plain data serializes") + "\n"
        }
        ReportFormat::Csv => {
            let mut out = String::from(
                "scheme,N,benchmarks,area_max,area_min,area_avg,delay_max,delay_min,delay_avg,alpha,beta,phi\n",
            );
            for r in rows {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{},{},{},{}",
                    r.scheme,
                    r.n,
                    r.benchmarks,
                    pct(r.area_max),
                    pct(r.area_min),
                    pct(r.area_avg),
                    pct(r.delay_max),
                    pct(r.delay_min),
                    pct(r.delay_avg),
                    r.alpha,
                    r.beta,
                    pct(r.phi)
                );
            }
            out
        }
        ReportFormat::Markdown => {
            let mut out = String::from(
                "| Scheme | N | Area max (%) | Area min (%) | Area avg (%) | Delay max (%) | Delay min (%) | Delay avg (%) | Phi (%) |\n\
                 |---|---|---|---|---|---|---|---|---|\n",
            );
            for r in rows {
                let _ = writeln!(
                    out,
                    "| {} | {} | {} | {} | {} | {} | {} | {} | {} |",
                    r.scheme,
                    r.n,
                    pct(r.area_max),
                    pct(r.area_min),
                    pct(r.area_avg),
                    pct(r.delay_max),
                    pct(r.delay_min),
                    pct(r.delay_avg),
                    pct(r.phi)
                );
            }
            out
        }
    }
}
