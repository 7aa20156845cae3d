// SPDX-License-Identifier: Apache-2.0

//! Circuit-partition attack: solve the obfuscated cells cone by cone.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{AttackKind, AttackReport, Stage};
use crate::cones::compute_mfics;
use crate::lut::LutMask;
use crate::netlist::{GateKind, Netlist};

/// Number of functions the attacker must consider per cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum CandidateModel {
    /// Every mask of the LUT's arity, `2^(2^m)`.
    AllMasks,
    /// The same count for every cell.
    Uniform(f64),
}

impl CandidateModel {
    pub fn log2(&self, arity: usize) -> f64 {
        match self {
            CandidateModel::AllMasks => LutMask::candidate_log2(arity),
            CandidateModel::Uniform(k) => k.log2(),
        }
    }
}

/// Peel output cones in order of fewest unresolved cells.
///
/// Each peel guesses the cone's unresolved cells jointly; cells settled by an
/// earlier peel count as known. A later peel with a single unknown cell is
/// recorded with size `2^0`, its function being read off the cone's
/// responses.
pub fn cpa_partition(n: &Netlist, model: CandidateModel) -> AttackReport {
    let arity_of = |g: usize| match n.gate(g).kind {
        GateKind::Lut { arity, .. } => arity as usize,
        _ => unreachable!("only LUT gates are tracked"),
    };
    let cones: Vec<(String, Vec<usize>)> = compute_mfics(n)
        .into_iter()
        .map(|m| {
            let luts = m
                .gates
                .into_iter()
                .filter(|&g| n.gate(g).kind.is_lut())
                .collect();
            (n.net_name(m.output).to_string(), luts)
        })
        .collect();
    let mut unresolved: BTreeSet<usize> = n.lut_gates().map(|g| g.id).collect();
    let mut report = AttackReport::new(AttackKind::Cpa);
    report.naive_log2_complexity = unresolved.iter().map(|&g| model.log2(arity_of(g))).sum();

    while !unresolved.is_empty() {
        let best = cones
            .iter()
            .map(|(name, luts)| {
                let open: Vec<usize> = luts
                    .iter()
                    .copied()
                    .filter(|g| unresolved.contains(g))
                    .collect();
                (name, open)
            })
            .filter(|(_, open)| !open.is_empty())
            .min_by_key(|(_, open)| open.len());
        let Some((name, open)) = best else {
            // LUTs outside every cone cannot be observed; guessed jointly.
            let gates: Vec<usize> = unresolved.iter().copied().collect();
            let log2_size = gates.iter().map(|&g| model.log2(arity_of(g))).sum();
            report.stages.push(Stage {
                gates,
                output: None,
                log2_size,
            });
            break;
        };
        let log2_size = if !report.stages.is_empty() && open.len() == 1 {
            0.0
        } else {
            open.iter().map(|&g| model.log2(arity_of(g))).sum()
        };
        for g in &open {
            unresolved.remove(g);
        }
        report.stages.push(Stage {
            gates: open,
            output: Some(name.clone()),
            log2_size,
        });
    }
    report.summarize_stages();
    report
}
