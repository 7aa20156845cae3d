// SPDX-License-Identifier: Apache-2.0

//! Local rewrites that prepare gates for LUT replacement.
//!
//! [`reconstruct_to_2input`] reshapes a gate so that it ends in a 2-input
//! gate: wide gates become a balanced tree of their associative base
//! function with any inversion on the last stage, and inverters or buffers
//! are folded into the gate that drives them.
//! [`obfuscate_block_single_lut`] collapses a whole fan-in block into one LUT.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cells::{LutKind, MAX_LUT_ARITY, MIN_LUT_ARITY};
use crate::lut::LutMask;
use crate::netlist::{Draft, DraftGate, GateId, GateKind, Netlist};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RestructureError {
    #[error("`{0}` is driven by a primary input; nothing to absorb it into")]
    InputDriven(String),
    #[error("`{0}` is fed by another inverter or buffer")]
    InverterChain(String),
    #[error("`{0}` is fed by a LUT")]
    LutFanin(String),
    #[error("`{0}` is not a standard logic gate")]
    Unsupported(String),
    #[error("rewrite of `{0}` changed its function")]
    NotEquivalent(String),
}

/// Record of one reconstruction, by net name so it survives renumbering.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReconstructionStep {
    pub original: GateId,
    /// Output net of the rewritten gate; the trailing gate keeps driving it.
    pub output: String,
    /// Outputs of gates added by the rewrite.
    pub new_gates: Vec<String>,
    /// Kind of the trailing 2-input gate.
    pub trailing_kind: GateKind,
    /// Output of a gate folded into the trailing gate, if any.
    pub absorbed: Option<String>,
    /// Whether the absorbed gate was left without readers and removed.
    pub absorbed_removed: bool,
}

impl ReconstructionStep {
    /// Trailing gate id in `n`.
    pub fn trailing_gate(&self, n: &Netlist) -> Option<GateId> {
        n.gate_by_output_name(&self.output)
    }
}

/// Rewrite gate `gate` of `n` to end in a 2-input gate.
pub fn reconstruct_to_2input(
    n: &Netlist,
    gate: GateId,
) -> Result<(Netlist, ReconstructionStep), RestructureError> {
    let mut d = n.to_draft();
    let step = reconstruct_in_draft(&mut d, n.net_name(n.gate(gate).output), gate)?;
    let out = d
        .build()
        .expect("local rewrite keeps the netlist well formed");
    Ok((out, step))
}

/// Boolean function of the leaves that the rebuilt gates must reproduce.
type Reference = Box<dyn Fn(&[bool]) -> bool>;

/// Draft-level form of [`reconstruct_to_2input`]; `output` names the gate.
pub fn reconstruct_in_draft(
    d: &mut Draft,
    output: &str,
    original: GateId,
) -> Result<ReconstructionStep, RestructureError> {
    let idx = d
        .driver(output)
        .ok_or_else(|| RestructureError::Unsupported(output.to_string()))?;
    let gate = d.gate(idx).clone();
    let mut step = ReconstructionStep {
        original,
        output: output.to_string(),
        new_gates: Vec::new(),
        trailing_kind: gate.kind,
        absorbed: None,
        absorbed_removed: false,
    };

    let (leaves, reference): (Vec<String>, Reference) = match gate.kind {
        GateKind::Not | GateKind::Buf => {
            let src = gate.fanin[0].clone();
            let Some(src_idx) = d.driver(&src) else {
                return Err(RestructureError::InputDriven(output.to_string()));
            };
            let inner = d.gate(src_idx).clone();
            match inner.kind {
                GateKind::Not | GateKind::Buf => {
                    return Err(RestructureError::InverterChain(output.to_string()))
                }
                GateKind::Lut { .. } => return Err(RestructureError::LutFanin(output.to_string())),
                GateKind::Dff => return Err(RestructureError::Unsupported(src)),
                _ => {}
            }
            let invert = gate.kind == GateKind::Not;
            let kind = if invert {
                inner.kind.complemented().expect("standard gate")
            } else {
                inner.kind
            };
            let g = d.gate_mut(idx);
            g.kind = kind;
            g.fanin = inner.fanin.clone();
            step.absorbed = Some(src.clone());
            step.absorbed_removed = d.remove_if_dangling(&src);
            let inner_kind = inner.kind;
            (
                inner.fanin,
                Box::new(move |v: &[bool]| inner_kind.eval_bools(v) ^ invert),
            )
        }
        GateKind::Dff | GateKind::Lut { .. } => {
            return Err(RestructureError::Unsupported(output.to_string()))
        }
        kind => (
            gate.fanin.clone(),
            Box::new(move |v: &[bool]| kind.eval_bools(v)),
        ),
    };

    let idx = d.driver(output).expect("gate still present");
    let current = d.gate(idx).clone();
    if current.fanin.len() > 2 {
        let (base, inverted) = current
            .kind
            .base_and_inversion()
            .expect("wide gates are associative");
        let fanin = current.fanin.clone();
        let mid = fanin.len().div_ceil(2);
        let left = build_tree(d, output, base, &fanin[..mid], &mut step.new_gates);
        let right = build_tree(d, output, base, &fanin[mid..], &mut step.new_gates);
        let idx = d.driver(output).expect("gate still present");
        let g = d.gate_mut(idx);
        g.kind = if inverted {
            base.complemented().expect("associative base")
        } else {
            base
        };
        g.fanin = vec![left, right];
    }
    step.trailing_kind = d.gate(d.driver(output).expect("gate still present")).kind;

    if local_function(d, output, &leaves) != truth_table(leaves.len(), &*reference) {
        return Err(RestructureError::NotEquivalent(output.to_string()));
    }
    Ok(step)
}

/// Balanced tree of `base` over `leaves`; the left half takes the extra leaf.
fn build_tree(
    d: &mut Draft,
    output: &str,
    base: GateKind,
    leaves: &[String],
    added: &mut Vec<String>,
) -> String {
    if leaves.len() == 1 {
        return leaves[0].clone();
    }
    let mid = leaves.len().div_ceil(2);
    let left = build_tree(d, output, base, &leaves[..mid], added);
    let right = build_tree(d, output, base, &leaves[mid..], added);
    let name = d.fresh_name(output);
    let at = d.driver(output).expect("gate still present");
    d.insert_before(
        at,
        DraftGate {
            output: name.clone(),
            kind: base,
            fanin: vec![left, right],
            mask: None,
            origin: None,
        },
    );
    added.push(name.clone());
    name
}

fn truth_table(inputs: usize, f: &dyn Fn(&[bool]) -> bool) -> Vec<bool> {
    (0..1usize << inputs)
        .map(|row| {
            let v: Vec<bool> = (0..inputs)
                .map(|i| (row >> (inputs - 1 - i)) & 1 == 1)
                .collect();
            f(&v)
        })
        .collect()
}

/// Truth table of net `net` as a function of `leaves`, first leaf most
/// significant.
fn local_function(d: &Draft, net: &str, leaves: &[String]) -> Vec<bool> {
    fn eval(d: &Draft, net: &str, env: &HashMap<&str, bool>) -> bool {
        if let Some(&v) = env.get(net) {
            return v;
        }
        let g = d.gate(d.driver(net).expect("cone closes on the leaves"));
        let ins: Vec<bool> = g.fanin.iter().map(|f| eval(d, f, env)).collect();
        match (&g.kind, &g.mask) {
            (GateKind::Lut { .. }, Some(m)) => m.row(crate::lut::row_index(&ins)),
            (kind, _) => kind.eval_bools(&ins),
        }
    }
    truth_table(leaves.len(), &|v: &[bool]| {
        let env: HashMap<&str, bool> = leaves
            .iter()
            .map(|s| s.as_str())
            .zip(v.iter().copied())
            .collect();
        eval(d, net, &env)
    })
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BlockRefusal {
    #[error("gate {0} is not standard logic")]
    NotStandard(GateId),
    #[error("interior net `{0}` is read outside the block")]
    InteriorFanout(String),
    #[error("block has {count} distinct inputs; the limit is {max}")]
    TooManyInputs { count: usize, max: usize },
    #[error("block has {0} distinct inputs; a LUT needs at least two")]
    TooFewInputs(usize),
    #[error("maximum arity {0} outside 2..=5")]
    BadArity(usize),
}

/// Result of collapsing a block into one LUT.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockObfuscation {
    /// Rewritten netlist; the LUT carries no inline mask.
    pub netlist: Netlist,
    pub lut: GateId,
    pub mask: LutMask,
    /// Original gates merged into the LUT, root included.
    pub merged: Vec<GateId>,
}

/// Collapse the transitive fan-in of `root`, down to the primary inputs, into
/// a single LUT of kind `kind`. Inputs are ordered as the primary inputs.
pub fn obfuscate_block_single_lut(
    n: &Netlist,
    root: GateId,
    max_arity: usize,
    kind: LutKind,
) -> Result<BlockObfuscation, BlockRefusal> {
    if !(MIN_LUT_ARITY as usize..=MAX_LUT_ARITY as usize).contains(&max_arity) {
        return Err(BlockRefusal::BadArity(max_arity));
    }
    let mut cone = BTreeSet::new();
    let mut inputs = BTreeSet::new();
    let mut stack = vec![root];
    while let Some(g) = stack.pop() {
        let gate = n.gate(g);
        if !gate.kind.is_standard_logic() {
            return Err(BlockRefusal::NotStandard(g));
        }
        if !cone.insert(g) {
            continue;
        }
        for &f in &gate.fanin {
            match n.driver_gate(f) {
                Some(d) => stack.push(d),
                None => {
                    inputs.insert(f);
                }
            }
        }
    }
    for &g in &cone {
        if g == root {
            continue;
        }
        let out = n.gate(g).output;
        if n.is_output(out) || n.fanout(out).iter().any(|c| !cone.contains(c)) {
            return Err(BlockRefusal::InteriorFanout(n.net_name(out).to_string()));
        }
    }
    let pi_pos: HashMap<usize, usize> = n
        .inputs()
        .iter()
        .enumerate()
        .map(|(i, &net)| (net, i))
        .collect();
    let mut ordered: Vec<usize> = inputs.into_iter().collect();
    ordered.sort_by_key(|net| pi_pos[net]);
    if ordered.len() > max_arity {
        return Err(BlockRefusal::TooManyInputs {
            count: ordered.len(),
            max: max_arity,
        });
    }
    if ordered.len() < MIN_LUT_ARITY as usize {
        return Err(BlockRefusal::TooFewInputs(ordered.len()));
    }

    let mut d = n.to_draft();
    let leaves: Vec<String> = ordered
        .iter()
        .map(|&net| n.net_name(net).to_string())
        .collect();
    let root_name = n.net_name(n.gate(root).output).to_string();
    let table = local_function(&d, &root_name, &leaves);
    let mask = LutMask::from_bits(
        &table
            .iter()
            .map(|&b| if b { '1' } else { '0' })
            .collect::<String>(),
    )
    .expect("2..=5 inputs");
    for &g in cone.iter().rev() {
        if g != root {
            let name = n.net_name(n.gate(g).output);
            let idx = d.driver(name).expect("interior gate present");
            d.remove(idx);
        }
    }
    let idx = d.driver(&root_name).expect("root present");
    let g = d.gate_mut(idx);
    g.kind = GateKind::Lut {
        kind: Some(kind),
        arity: leaves.len() as u8,
    };
    g.fanin = leaves;
    g.mask = None;
    let netlist = d
        .build()
        .expect("block collapse keeps the netlist well formed");
    let lut = netlist
        .gate_by_output_name(&root_name)
        .expect("root kept its name");
    Ok(BlockObfuscation {
        netlist,
        lut,
        mask,
        merged: cone.into_iter().collect(),
    })
}
