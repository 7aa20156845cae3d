// SPDX-License-Identifier: Apache-2.0

//! Brute-force attack: try every joint LUT configuration against the oracle.

use rayon::prelude::*;

use super::{AttackError, AttackKind, AttackReport, OracleBudget, Stage, CANDIDATE_CAP};
use crate::lut::LutMask;
use crate::masks::MaskTable;
use crate::netlist::{exhaustive_batch, random_batch, GateId, GateKind, Netlist, Simulator};

/// Input vectors applied to the oracle, packed 64 per batch.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuerySet {
    pub batches: Vec<Vec<u64>>,
    /// Lanes of each batch that hold a real vector.
    pub valid: Vec<u64>,
    pub vectors: u64,
    pub exhaustive: bool,
}

/// Every vector when `pis` is at most the threshold, otherwise
/// `max_queries` seeded random vectors.
pub fn query_set(pis: usize, budget: &OracleBudget) -> QuerySet {
    let (total, exhaustive) = if pis <= budget.exhaustive_threshold {
        (1u64 << pis, true)
    } else {
        (budget.max_queries, false)
    };
    let count = total.div_ceil(64);
    let batches = (0..count)
        .map(|b| {
            if exhaustive {
                exhaustive_batch(pis, b)
            } else {
                random_batch(budget.seed, b, pis)
            }
        })
        .collect();
    let valid = (0..count)
        .map(|b| {
            let left = total - b * 64;
            if left >= 64 {
                !0
            } else {
                (1u64 << left) - 1
            }
        })
        .collect();
    QuerySet {
        batches,
        valid,
        vectors: total,
        exhaustive,
    }
}

struct Checker<'a> {
    queries: &'a QuerySet,
    expected: Vec<Vec<u64>>,
    outputs: Vec<usize>,
}

impl Checker<'_> {
    fn consistent(&self, sim: &Simulator<'_>, values: &mut Vec<u64>) -> bool {
        for ((batch, want), valid) in self
            .queries
            .batches
            .iter()
            .zip(&self.expected)
            .zip(&self.queries.valid)
        {
            sim.eval_into(batch, values).expect("width checked");
            let differs = self
                .outputs
                .iter()
                .zip(want)
                .any(|(&o, &w)| (values[o] ^ w) & valid != 0);
            if differs {
                return false;
            }
        }
        true
    }
}

/// Decode a joint assignment; the first LUT is the most significant digit.
fn decode(luts: &[(GateId, usize)], mut index: u64) -> Vec<LutMask> {
    let mut masks = vec![LutMask::from_value(2, 0); luts.len()];
    for (slot, &(_, arity)) in masks.iter_mut().zip(luts).rev() {
        let radix = 1u64 << (1u64 << arity);
        *slot = LutMask::from_value(arity, (index % radix) as u32);
        index /= radix;
    }
    masks
}

/// Enumerate joint masks in lexicographic order, LUTs in gate-id order, and
/// keep those that agree with the oracle on every query. When the joint
/// space exceeds the budget only its size is reported.
pub fn brute_force_attack(
    obfuscated: &Netlist,
    oracle: &Netlist,
    budget: &OracleBudget,
    secret: Option<&MaskTable>,
) -> Result<AttackReport, AttackError> {
    budget.validate()?;
    if obfuscated.inputs().len() != oracle.inputs().len()
        || obfuscated.outputs().len() != oracle.outputs().len()
    {
        return Err(AttackError::Interface(format!(
            "{}/{} vs {}/{} inputs/outputs",
            obfuscated.inputs().len(),
            obfuscated.outputs().len(),
            oracle.inputs().len(),
            oracle.outputs().len()
        )));
    }
    let luts: Vec<(GateId, usize)> = obfuscated
        .lut_gates()
        .map(|g| match g.kind {
            GateKind::Lut { arity, .. } => (g.id, arity as usize),
            _ => unreachable!(),
        })
        .collect();
    let space_log2: f64 = luts.iter().map(|&(_, m)| LutMask::candidate_log2(m)).sum();

    let mut report = AttackReport::new(AttackKind::Bfa);
    report.naive_log2_complexity = space_log2;
    if !luts.is_empty() {
        report.stages.push(Stage {
            gates: luts.iter().map(|l| l.0).collect(),
            output: None,
            log2_size: space_log2,
        });
    }
    report.summarize_stages();

    let cap = budget.max_candidates.min(CANDIDATE_CAP);
    if space_log2 > (cap as f64).log2() {
        report.budget_exhausted = true;
        return Ok(report);
    }
    let total = 1u64 << space_log2 as u32;

    let queries = query_set(oracle.inputs().len(), budget);
    let reference = Simulator::new(oracle)?;
    let expected = queries
        .batches
        .iter()
        .map(|b| reference.eval_outputs(b))
        .collect::<Result<Vec<_>, _>>()?;
    let checker = Checker {
        queries: &queries,
        expected,
        outputs: obfuscated.outputs().to_vec(),
    };
    let base = Simulator::new(obfuscated)?;
    report.queries = Some(queries.vectors);

    let configure = |sim: &mut Simulator<'_>, index: u64| {
        for (&(g, _), m) in luts.iter().zip(decode(&luts, index)) {
            sim.set_mask(g, m).expect("arity matches");
        }
    };
    let (count, first) = (0..total)
        .into_par_iter()
        .map_init(
            || (base.clone(), Vec::new()),
            |(sim, values), index| {
                configure(sim, index);
                checker.consistent(sim, values).then_some(index)
            },
        )
        .flatten()
        .fold(|| (0u64, u64::MAX), |(c, f), i| (c + 1, f.min(i)))
        .reduce(|| (0u64, u64::MAX), |a, b| (a.0 + b.0, a.1.min(b.1)));

    report.enumerated = Some(total);
    report.consistent_candidate_count = Some(count);
    if count > 0 {
        let mut table = MaskTable::new();
        for (&(g, _), m) in luts.iter().zip(decode(&luts, first)) {
            table.insert(g, m);
        }
        report.recovered = Some(table);
    }
    if let Some(secret) = secret {
        let mut sim = base.clone();
        for (g, m) in secret.iter() {
            sim.set_mask(g, *m)?;
        }
        sim.check_configured()?;
        report.secret_consistent = Some(checker.consistent(&sim, &mut Vec::new()));
    }
    Ok(report)
}
