// SPDX-License-Identifier: Apache-2.0

//! IC-testing attack: justify a cell's inputs and sensitize its output.
//!
//! Values are three-valued. Every LUT other than the one under test drives
//! an unknown, so only what the attacker can establish without knowing any
//! other configuration counts. A LUT is resolvable when every row of its
//! truth table can be applied from the primary inputs while the LUT output
//! is observable at some primary output; its mask can then be read off.

use serde::{Deserialize, Serialize};

use super::{query_set, AttackError, OracleBudget};
use crate::netlist::{GateId, GateKind, Netlist, SimError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ItaReason {
    /// Some input row can never be applied.
    Justification,
    /// Some applicable row never reaches an output.
    Sensitization,
    /// Both of the above.
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "verdict", content = "reason")]
pub enum ItaVerdict {
    Resolvable,
    Protected(ItaReason),
    /// Sampling ended without settling the question.
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LutVerdict {
    pub gate: GateId,
    pub output: String,
    pub verdict: ItaVerdict,
    /// Rows applied while observable, as a bit set.
    pub observed_rows: u32,
}

/// Definitely-one and definitely-zero lane masks; neither means unknown.
type Tri = (u64, u64);

const UNKNOWN: Tri = (0, 0);

fn eval_tri(kind: GateKind, ins: &[Tri]) -> Tri {
    let and = |ins: &[Tri]| {
        ins.iter()
            .fold((!0u64, 0u64), |(o, z), &(a1, a0)| (o & a1, z | a0))
    };
    let or = |ins: &[Tri]| {
        ins.iter()
            .fold((0u64, !0u64), |(o, z), &(a1, a0)| (o | a1, z & a0))
    };
    let xor = |ins: &[Tri]| {
        ins.iter().skip(1).fold(ins[0], |(o, z), &(b1, b0)| {
            ((o & b0) | (z & b1), (o & b1) | (z & b0))
        })
    };
    let flip = |(o, z): Tri| (z, o);
    match kind {
        GateKind::And => and(ins),
        GateKind::Nand => flip(and(ins)),
        GateKind::Or => or(ins),
        GateKind::Nor => flip(or(ins)),
        GateKind::Xor => xor(ins),
        GateKind::Xnor => flip(xor(ins)),
        GateKind::Not => flip(ins[0]),
        GateKind::Buf => ins[0],
        GateKind::Dff | GateKind::Lut { .. } => UNKNOWN,
    }
}

/// Three-valued evaluation with every LUT unknown except `forced`, whose
/// output is pinned to the given constant.
fn simulate_tri(
    n: &Netlist,
    pi_words: &[u64],
    forced: Option<(GateId, bool)>,
    values: &mut Vec<Tri>,
) {
    values.clear();
    values.resize(n.nets().len(), UNKNOWN);
    for (&net, &w) in n.inputs().iter().zip(pi_words) {
        values[net] = (w, !w);
    }
    let mut buf = Vec::with_capacity(crate::netlist::MAX_FANIN);
    for &g in n.topo_order() {
        let gate = n.gate(g);
        values[gate.output] = match forced {
            Some((f, bit)) if f == g => {
                if bit {
                    (!0, 0)
                } else {
                    (0, !0)
                }
            }
            _ => {
                buf.clear();
                buf.extend(gate.fanin.iter().map(|&f| values[f]));
                eval_tri(gate.kind, &buf)
            }
        };
    }
}

/// Judge every LUT of `n`. Exact when the input count is within the budget's
/// exhaustive threshold; otherwise unresolved cases are inconclusive.
pub fn ita_check(n: &Netlist, budget: &OracleBudget) -> Result<Vec<LutVerdict>, AttackError> {
    budget.validate()?;
    if !n.is_combinational() {
        return Err(SimError::NotCombinational(n.name().to_string()).into());
    }
    let luts: Vec<GateId> = n.lut_gates().map(|g| g.id).collect();
    let queries = query_set(n.inputs().len(), budget);
    let mut justified = vec![0u32; luts.len()];
    let mut observed = vec![0u32; luts.len()];
    let mut ever_sensitized = vec![false; luts.len()];
    let (mut base, mut lo, mut hi) = (Vec::new(), Vec::new(), Vec::new());

    for (batch, &valid) in queries.batches.iter().zip(&queries.valid) {
        simulate_tri(n, batch, None, &mut base);
        for (i, &l) in luts.iter().enumerate() {
            let gate = n.gate(l);
            simulate_tri(n, batch, Some((l, false)), &mut lo);
            simulate_tri(n, batch, Some((l, true)), &mut hi);
            let sensitized = n.outputs().iter().fold(0u64, |acc, &o| {
                let (a1, a0) = lo[o];
                let (b1, b0) = hi[o];
                acc | (a1 & b0) | (a0 & b1)
            });
            ever_sensitized[i] |= sensitized & valid != 0;
            let m = gate.fanin.len();
            for row in 0..1usize << m {
                let mut lanes = valid;
                for (k, &f) in gate.fanin.iter().enumerate() {
                    let (one, zero) = base[f];
                    lanes &= if (row >> (m - 1 - k)) & 1 == 1 {
                        one
                    } else {
                        zero
                    };
                }
                if lanes != 0 {
                    justified[i] |= 1 << row;
                }
                if lanes & sensitized != 0 {
                    observed[i] |= 1 << row;
                }
            }
        }
    }

    Ok(luts
        .iter()
        .enumerate()
        .map(|(i, &l)| {
            let arity = match n.gate(l).kind {
                GateKind::Lut { arity, .. } => arity as u32,
                _ => unreachable!(),
            };
            let full = if arity == 5 {
                u32::MAX
            } else {
                (1u32 << (1u32 << arity)) - 1
            };
            let unjustified = justified[i] != full;
            let unobservable = !ever_sensitized[i] || observed[i] != justified[i];
            let verdict = match (
                observed[i] == full,
                queries.exhaustive,
                unjustified,
                unobservable,
            ) {
                (true, _, _, _) => ItaVerdict::Resolvable,
                (false, false, _, _) => ItaVerdict::Inconclusive,
                (false, true, true, true) => ItaVerdict::Protected(ItaReason::Both),
                (false, true, true, false) => ItaVerdict::Protected(ItaReason::Justification),
                (false, true, false, _) => ItaVerdict::Protected(ItaReason::Sensitization),
            };
            LutVerdict {
                gate: l,
                output: n.net_name(n.gate(l).output).to_string(),
                verdict,
                observed_rows: observed[i],
            }
        })
        .collect())
}
