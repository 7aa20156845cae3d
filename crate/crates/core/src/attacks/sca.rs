// SPDX-License-Identifier: Apache-2.0

//! Side-channel audit of the emitted attacker view.
//!
//! The same plan is emitted once per LUT kind. The emissions must be byte
//! identical, and no LUT token may carry a kind tag or a mask.

use serde::{Deserialize, Serialize};

use crate::cells::LutKind;
use crate::netlist::{emit_bench, EmitOptions, Netlist};
use crate::obfuscate::{apply_plan, ObfuscateError, ObfuscationPlan, Scheme};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScaAudit {
    /// All emissions are byte identical.
    pub identical: bool,
    /// Offending lines, as `<emission>:<line>: <text>`.
    pub leaks: Vec<String>,
}

impl ScaAudit {
    pub fn passed(&self) -> bool {
        self.identical && self.leaks.is_empty()
    }
}

/// LUT tokens that reveal a kind or a mask.
fn leaky_lines(text: &str) -> Vec<(usize, String)> {
    text.lines()
        .enumerate()
        .filter(|(_, line)| {
            let code = line.split('#').next().unwrap_or("");
            let Some((_, rhs)) = code.split_once('=') else {
                return false;
            };
            let token = rhs.trim_start().split('(').next().unwrap_or("").trim();
            let Some(rest) = token.strip_prefix("LUT") else {
                return false;
            };
            !rest.chars().all(|c| c.is_ascii_digit())
        })
        .map(|(i, l)| (i + 1, l.to_string()))
        .collect()
}

pub fn sca_audit(emissions: &[String]) -> ScaAudit {
    let identical = emissions.windows(2).all(|w| w[0] == w[1]);
    let leaks = emissions
        .iter()
        .enumerate()
        .flat_map(|(e, text)| {
            leaky_lines(text)
                .into_iter()
                .map(move |(l, s)| format!("{e}:{l}: {s}"))
        })
        .collect();
    ScaAudit { identical, leaks }
}

/// Apply `plan` once per LUT kind and emit each result in the attacker view.
pub fn attacker_views(n: &Netlist, plan: &ObfuscationPlan) -> Result<Vec<String>, ObfuscateError> {
    LutKind::ALL
        .iter()
        .map(|&k| {
            let p = ObfuscationPlan {
                scheme: Scheme::new(k, plan.scheme.reconstruct),
                ..plan.clone()
            };
            let out = apply_plan(n, &p)?;
            Ok(emit_bench(&out.netlist, &EmitOptions::attacker_view()))
        })
        .collect()
}
