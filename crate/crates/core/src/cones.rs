// SPDX-License-Identifier: Apache-2.0

//! Maximum fan-in cones and the gate classes they induce.
//!
//! The cone of a primary output is its transitive fan-in. Two gates belong to
//! the same class when exactly the same cones contain them; a partition attack
//! that peels cones one at a time can never separate them.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::netlist::{GateId, NetId, Netlist};

/// Transitive fan-in cone of one primary output.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mfic {
    /// Position in the output list.
    pub po_index: usize,
    pub output: NetId,
    /// Sorted gate ids.
    pub gates: Vec<GateId>,
}

impl Mfic {
    pub fn contains(&self, g: GateId) -> bool {
        self.gates.binary_search(&g).is_ok()
    }
}

/// One cone per primary output, in output order.
pub fn compute_mfics(n: &Netlist) -> Vec<Mfic> {
    n.outputs()
        .par_iter()
        .enumerate()
        .map(|(po_index, &output)| {
            let mut seen = vec![false; n.gates().len()];
            let mut stack: Vec<GateId> = n.driver_gate(output).into_iter().collect();
            while let Some(g) = stack.pop() {
                if std::mem::replace(&mut seen[g], true) {
                    continue;
                }
                for &f in &n.gate(g).fanin {
                    if let Some(d) = n.driver_gate(f) {
                        if !seen[d] {
                            stack.push(d);
                        }
                    }
                }
            }
            let gates = (0..seen.len()).filter(|&g| seen[g]).collect();
            Mfic {
                po_index,
                output,
                gates,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateClass {
    /// Sorted output nets whose cones contain every member.
    pub signature: Vec<NetId>,
    /// Sorted gate ids.
    pub members: Vec<GateId>,
    /// Members whose output is not a primary output.
    pub inner_members: Vec<GateId>,
}

/// Containing-cone signature of every gate, as sorted output net ids.
pub fn gate_signatures(n: &Netlist) -> Vec<Vec<NetId>> {
    let mut po_nets: Vec<NetId> = n.outputs().to_vec();
    po_nets.sort_unstable();
    po_nets.dedup();
    let words = po_nets.len().div_ceil(64).max(1);
    let bit_of: BTreeMap<NetId, usize> = po_nets.iter().enumerate().map(|(i, &p)| (p, i)).collect();

    // A gate lies in the cone of an output iff it drives it or feeds a gate
    // that does, so signatures accumulate against the evaluation order.
    let mut sig = vec![0u64; n.gates().len() * words];
    for &g in n.topo_order().iter().rev() {
        let out = n.gate(g).output;
        let mut acc = vec![0u64; words];
        if let Some(&b) = bit_of.get(&out) {
            acc[b / 64] |= 1 << (b % 64);
        }
        for &c in n.fanout(out) {
            for (a, s) in acc.iter_mut().zip(&sig[c * words..(c + 1) * words]) {
                *a |= s;
            }
        }
        sig[g * words..(g + 1) * words].copy_from_slice(&acc);
    }
    (0..n.gates().len())
        .map(|g| {
            let bits = &sig[g * words..(g + 1) * words];
            po_nets
                .iter()
                .enumerate()
                .filter(|(i, _)| bits[i / 64] >> (i % 64) & 1 == 1)
                .map(|(_, &p)| p)
                .collect()
        })
        .collect()
}

/// Partition gates by signature, most inner members first, ties broken by
/// signature in lexicographic order.
pub fn classify_gates(n: &Netlist) -> Vec<GateClass> {
    let mut by_sig: BTreeMap<Vec<NetId>, Vec<GateId>> = BTreeMap::new();
    for (g, s) in gate_signatures(n).into_iter().enumerate() {
        by_sig.entry(s).or_default().push(g);
    }
    let mut classes: Vec<GateClass> = by_sig
        .into_iter()
        .map(|(signature, members)| {
            let inner_members = members
                .iter()
                .copied()
                .filter(|&g| !n.is_output(n.gate(g).output))
                .collect();
            GateClass {
                signature,
                members,
                inner_members,
            }
        })
        .collect();
    classes.sort_by(|a, b| {
        b.inner_members
            .len()
            .cmp(&a.inner_members.len())
            .then_with(|| a.signature.cmp(&b.signature))
    });
    classes
}

/// `class_rank,signature_size,members,inner_members`, ranks from 1.
pub fn classes_csv(classes: &[GateClass]) -> String {
    let mut out = String::from("class_rank,signature_size,members,inner_members\n");
    for (i, c) in classes.iter().enumerate() {
        out.push_str(&format!(
            "{},{},{},{}\n",
            i + 1,
            c.signature.len(),
            c.members.len(),
            c.inner_members.len()
        ));
    }
    out
}
