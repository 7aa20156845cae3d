// SPDX-License-Identifier: Apache-2.0

//! Combinational gate-level netlists.
//!
//! A [`Netlist`] is immutable once built. All construction goes through
//! [`NetlistBuilder`], which checks single drivers, declared nets, fan-in
//! limits and acyclicity, prunes gates that reach no output, and numbers
//! gates in source order.

mod bench;
mod draft;
mod sim;

use std::collections::{HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cells::LutKind;
use crate::lut::LutMask;

pub use bench::{emit_bench, parse_bench, parse_bench_raw, EmitOptions};
pub use draft::{Draft, DraftGate};
pub use sim::{
    equivalence_check, equivalence_check_sims, exhaustive_batch, index_to_vector, pack,
    random_batch, simulate, EquivOptions, EquivVerdict, SimError, Simulator, EXHAUSTIVE_PI_LIMIT,
};

pub type NetId = usize;
pub type GateId = usize;

/// Widest gate accepted by the parser; matches the largest LUT arity.
pub const MAX_FANIN: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GateKind {
    And,
    Nand,
    Or,
    Nor,
    Xor,
    Xnor,
    Not,
    Buf,
    Dff,
    /// Reconfigurable cell. `kind` is `None` in the attacker view.
    Lut {
        kind: Option<LutKind>,
        arity: u8,
    },
}

impl GateKind {
    pub fn bench_name(&self) -> &'static str {
        match self {
            GateKind::And => "AND",
            GateKind::Nand => "NAND",
            GateKind::Or => "OR",
            GateKind::Nor => "NOR",
            GateKind::Xor => "XOR",
            GateKind::Xnor => "XNOR",
            GateKind::Not => "NOT",
            GateKind::Buf => "BUFF",
            GateKind::Dff => "DFF",
            GateKind::Lut { .. } => "LUT",
        }
    }

    pub fn from_bench_name(name: &str) -> Option<Self> {
        Some(match name.to_ascii_uppercase().as_str() {
            "AND" => GateKind::And,
            "NAND" => GateKind::Nand,
            "OR" => GateKind::Or,
            "NOR" => GateKind::Nor,
            "XOR" => GateKind::Xor,
            "XNOR" => GateKind::Xnor,
            "NOT" | "INV" => GateKind::Not,
            "BUFF" | "BUF" => GateKind::Buf,
            "DFF" => GateKind::Dff,
            _ => return None,
        })
    }

    pub fn is_lut(&self) -> bool {
        matches!(self, GateKind::Lut { .. })
    }

    /// AND/NAND/OR/NOR/XOR/XNOR/NOT/BUF.
    pub fn is_standard_logic(&self) -> bool {
        !matches!(self, GateKind::Dff | GateKind::Lut { .. })
    }

    /// Associative base function and whether the output is inverted.
    pub fn base_and_inversion(&self) -> Option<(GateKind, bool)> {
        Some(match self {
            GateKind::And => (GateKind::And, false),
            GateKind::Nand => (GateKind::And, true),
            GateKind::Or => (GateKind::Or, false),
            GateKind::Nor => (GateKind::Or, true),
            GateKind::Xor => (GateKind::Xor, false),
            GateKind::Xnor => (GateKind::Xor, true),
            _ => return None,
        })
    }

    /// Same function with the output inverted.
    pub fn complemented(&self) -> Option<GateKind> {
        Some(match self {
            GateKind::And => GateKind::Nand,
            GateKind::Nand => GateKind::And,
            GateKind::Or => GateKind::Nor,
            GateKind::Nor => GateKind::Or,
            GateKind::Xor => GateKind::Xnor,
            GateKind::Xnor => GateKind::Xor,
            GateKind::Not => GateKind::Buf,
            GateKind::Buf => GateKind::Not,
            _ => return None,
        })
    }

    fn check_arity(&self, n: usize) -> Result<(), String> {
        let ok = match self {
            GateKind::Not | GateKind::Buf | GateKind::Dff => n == 1,
            GateKind::Lut { arity, .. } => n == *arity as usize && (2..=5).contains(&n),
            _ => n >= 2,
        };
        if ok {
            Ok(())
        } else {
            Err(format!("{} cannot take {} inputs", self, n))
        }
    }

    /// Evaluate a standard gate on single bits.
    pub fn eval_bools(&self, inputs: &[bool]) -> bool {
        let mut words = [0u64; MAX_FANIN];
        for (w, &b) in words.iter_mut().zip(inputs) {
            *w = if b { !0 } else { 0 };
        }
        self.eval_words(&words[..inputs.len()]) & 1 == 1
    }

    /// Evaluate a standard gate on 64 packed vectors. LUT and DFF kinds are
    /// not handled here.
    pub fn eval_words(&self, inputs: &[u64]) -> u64 {
        match self {
            GateKind::And => inputs.iter().fold(!0, |a, &b| a & b),
            GateKind::Nand => !inputs.iter().fold(!0, |a, &b| a & b),
            GateKind::Or => inputs.iter().fold(0, |a, &b| a | b),
            GateKind::Nor => !inputs.iter().fold(0, |a, &b| a | b),
            GateKind::Xor => inputs.iter().fold(0, |a, &b| a ^ b),
            GateKind::Xnor => !inputs.iter().fold(0, |a, &b| a ^ b),
            GateKind::Not => !inputs[0],
            GateKind::Buf => inputs[0],
            GateKind::Dff | GateKind::Lut { .. } => unreachable!("{self} is not a standard gate"),
        }
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GateKind::Lut {
                kind: Some(k),
                arity,
            } => write!(f, "LUT{arity}_{}", k.tag().to_uppercase()),
            GateKind::Lut { kind: None, arity } => write!(f, "LUT{arity}"),
            other => f.write_str(other.bench_name()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gate {
    pub id: GateId,
    pub kind: GateKind,
    /// Ordered; LUT row indexing depends on it.
    pub fanin: Vec<NetId>,
    pub output: NetId,
    /// Inline configuration, only ever present on LUT gates.
    pub mask: Option<LutMask>,
}

impl Gate {
    pub fn arity(&self) -> usize {
        self.fanin.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Driver {
    Input,
    Gate(GateId),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Net {
    pub name: String,
    pub driver: Driver,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseStats {
    pub pi_count: usize,
    pub po_count: usize,
    pub gate_count: usize,
    pub net_count: usize,
    /// Longest input-to-output path in gate stages.
    pub max_level: usize,
    pub pruned_gates: usize,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum NetlistError {
    #[error("line {line}, column {column}: {msg}")]
    Syntax {
        line: usize,
        column: usize,
        msg: String,
    },
    #[error("net `{0}` has more than one driver")]
    MultiplyDriven(String),
    #[error("net `{0}` is used but never driven")]
    Undeclared(String),
    #[error("combinational cycle through net `{0}`")]
    Cycle(String),
    #[error("gate driving `{net}`: {msg}")]
    BadGate { net: String, msg: String },
    #[error(
        "gate driving `{net}` has {fanin} inputs; at most {max} are supported, decompose it first"
    )]
    FaninTooWide {
        net: String,
        fanin: usize,
        max: usize,
    },
}

/// Source position of a gate or declaration, for diagnostics.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Pos {
    pub line: usize,
    pub column: usize,
}

#[derive(Debug, Clone)]
struct PendingGate {
    output: String,
    kind: GateKind,
    fanin: Vec<String>,
    mask: Option<LutMask>,
    pos: Pos,
}

/// Collects declarations by name and validates them into a [`Netlist`].
#[derive(Debug, Clone, Default)]
pub struct NetlistBuilder {
    name: String,
    inputs: Vec<(String, Pos)>,
    outputs: Vec<(String, Pos)>,
    gates: Vec<PendingGate>,
}

impl NetlistBuilder {
    pub fn new(name: impl Into<String>) -> Self {
        NetlistBuilder {
            name: name.into(),
            ..Default::default()
        }
    }

    pub fn input(&mut self, name: impl Into<String>) -> &mut Self {
        self.inputs.push((name.into(), Pos::default()));
        self
    }

    pub fn output(&mut self, name: impl Into<String>) -> &mut Self {
        self.outputs.push((name.into(), Pos::default()));
        self
    }

    pub fn gate<S: AsRef<str>>(
        &mut self,
        output: impl Into<String>,
        kind: GateKind,
        fanin: &[S],
    ) -> &mut Self {
        self.gate_with_mask(output, kind, fanin, None)
    }

    pub fn gate_with_mask<S: AsRef<str>>(
        &mut self,
        output: impl Into<String>,
        kind: GateKind,
        fanin: &[S],
        mask: Option<LutMask>,
    ) -> &mut Self {
        self.gates.push(PendingGate {
            output: output.into(),
            kind,
            fanin: fanin.iter().map(|s| s.as_ref().to_string()).collect(),
            mask,
            pos: Pos::default(),
        });
        self
    }

    pub(crate) fn input_at(&mut self, name: String, pos: Pos) {
        self.inputs.push((name, pos));
    }

    pub(crate) fn output_at(&mut self, name: String, pos: Pos) {
        self.outputs.push((name, pos));
    }

    pub(crate) fn gate_at(
        &mut self,
        output: String,
        kind: GateKind,
        fanin: Vec<String>,
        mask: Option<LutMask>,
        pos: Pos,
    ) {
        self.gates.push(PendingGate {
            output,
            kind,
            fanin,
            mask,
            pos,
        });
    }

    pub fn build(&self) -> Result<Netlist, NetlistError> {
        let at = |pos: Pos, err: NetlistError| -> NetlistError {
            if pos.line > 0 {
                log::debug!("{} at line {}, column {}", err, pos.line, pos.column);
            }
            err
        };

        // Drivers by name.
        let mut driver: HashMap<&str, Option<usize>> = HashMap::new();
        for (name, pos) in &self.inputs {
            if driver.insert(name.as_str(), None).is_some() {
                return Err(at(*pos, NetlistError::MultiplyDriven(name.clone())));
            }
        }
        for (idx, g) in self.gates.iter().enumerate() {
            if g.fanin.len() > MAX_FANIN && !g.kind.is_lut() {
                return Err(at(
                    g.pos,
                    NetlistError::FaninTooWide {
                        net: g.output.clone(),
                        fanin: g.fanin.len(),
                        max: MAX_FANIN,
                    },
                ));
            }
            g.kind.check_arity(g.fanin.len()).map_err(|msg| {
                at(
                    g.pos,
                    NetlistError::BadGate {
                        net: g.output.clone(),
                        msg,
                    },
                )
            })?;
            match (&g.kind, &g.mask) {
                (GateKind::Lut { arity, .. }, Some(m)) if m.arity() != *arity as usize => {
                    let msg = format!("mask arity {} does not match LUT{}", m.arity(), arity);
                    return Err(at(
                        g.pos,
                        NetlistError::BadGate {
                            net: g.output.clone(),
                            msg,
                        },
                    ));
                }
                (kind, Some(_)) if !kind.is_lut() => {
                    let msg = "only LUT gates carry a mask".to_string();
                    return Err(at(
                        g.pos,
                        NetlistError::BadGate {
                            net: g.output.clone(),
                            msg,
                        },
                    ));
                }
                _ => {}
            }
            if driver.insert(g.output.as_str(), Some(idx)).is_some() {
                return Err(at(g.pos, NetlistError::MultiplyDriven(g.output.clone())));
            }
        }
        for g in &self.gates {
            for f in &g.fanin {
                if !driver.contains_key(f.as_str()) {
                    return Err(at(g.pos, NetlistError::Undeclared(f.clone())));
                }
            }
        }
        for (name, pos) in &self.outputs {
            if !driver.contains_key(name.as_str()) {
                return Err(at(*pos, NetlistError::Undeclared(name.clone())));
            }
        }

        // Keep gates that reach an output; flip-flops count as sinks so the
        // state logic survives until the combinational core is cut out.
        let mut keep = vec![false; self.gates.len()];
        let mut stack: Vec<usize> = Vec::new();
        for (name, _) in &self.outputs {
            if let Some(Some(g)) = driver.get(name.as_str()) {
                stack.push(*g);
            }
        }
        for (idx, g) in self.gates.iter().enumerate() {
            if g.kind == GateKind::Dff {
                stack.push(idx);
            }
        }
        while let Some(g) = stack.pop() {
            if keep[g] {
                continue;
            }
            keep[g] = true;
            for f in &self.gates[g].fanin {
                if let Some(Some(d)) = driver.get(f.as_str()) {
                    if !keep[*d] {
                        stack.push(*d);
                    }
                }
            }
        }
        let pruned = keep.iter().filter(|k| !**k).count();
        if pruned > 0 {
            log::warn!(
                "{}: pruned {} gate(s) that reach no output",
                self.name,
                pruned
            );
        }

        // Number nets: inputs first, then gate outputs in source order.
        let mut nets: Vec<Net> = Vec::new();
        let mut net_id: HashMap<&str, NetId> = HashMap::new();
        for (name, _) in &self.inputs {
            net_id.insert(name.as_str(), nets.len());
            nets.push(Net {
                name: name.clone(),
                driver: Driver::Input,
            });
        }
        let mut gates = Vec::new();
        for (idx, g) in self.gates.iter().enumerate() {
            if !keep[idx] {
                continue;
            }
            let id = gates.len();
            net_id.insert(g.output.as_str(), nets.len());
            nets.push(Net {
                name: g.output.clone(),
                driver: Driver::Gate(id),
            });
            gates.push(Gate {
                id,
                kind: g.kind,
                fanin: Vec::new(),
                output: nets.len() - 1,
                mask: g.mask,
            });
        }
        let mut gi = 0;
        for (idx, g) in self.gates.iter().enumerate() {
            if !keep[idx] {
                continue;
            }
            gates[gi].fanin = g.fanin.iter().map(|f| net_id[f.as_str()]).collect();
            gi += 1;
        }
        let inputs: Vec<NetId> = (0..self.inputs.len()).collect();
        let outputs: Vec<NetId> = self
            .outputs
            .iter()
            .map(|(n, _)| net_id[n.as_str()])
            .collect();

        Netlist::assemble(self.name.clone(), nets, inputs, outputs, gates, pruned)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Netlist {
    name: String,
    name_index: HashMap<String, NetId>,
    nets: Vec<Net>,
    inputs: Vec<NetId>,
    outputs: Vec<NetId>,
    gates: Vec<Gate>,
    /// Gates in evaluation order; flip-flop outputs act as sources.
    topo: Vec<GateId>,
    /// Consuming gates per net.
    fanout: Vec<Vec<GateId>>,
    /// Gate stages from the inputs, per net.
    levels: Vec<usize>,
    is_output: Vec<bool>,
    stats: ParseStats,
}

impl Netlist {
    fn assemble(
        name: String,
        nets: Vec<Net>,
        inputs: Vec<NetId>,
        outputs: Vec<NetId>,
        gates: Vec<Gate>,
        pruned: usize,
    ) -> Result<Self, NetlistError> {
        let mut fanout = vec![Vec::new(); nets.len()];
        for g in &gates {
            for &f in &g.fanin {
                fanout[f].push(g.id);
            }
        }
        for list in fanout.iter_mut() {
            list.dedup();
        }

        // Kahn's algorithm; a DFF does not propagate its input combinationally.
        let mut indegree: Vec<usize> = gates
            .iter()
            .map(|g| {
                if g.kind == GateKind::Dff {
                    0
                } else {
                    g.fanin.len()
                }
            })
            .collect();
        let mut ready: VecDeque<GateId> = gates
            .iter()
            .filter(|g| indegree[g.id] == 0)
            .map(|g| g.id)
            .collect();
        let mut topo = Vec::with_capacity(gates.len());
        let mut seen_net = vec![false; nets.len()];
        let release = |net: NetId, ready: &mut VecDeque<GateId>, indegree: &mut Vec<usize>| {
            for &c in &fanout[net] {
                if gates[c].kind == GateKind::Dff {
                    continue;
                }
                let mult = gates[c].fanin.iter().filter(|&&f| f == net).count();
                indegree[c] -= mult;
                if indegree[c] == 0 {
                    ready.push_back(c);
                }
            }
        };
        for &net in &inputs {
            if !seen_net[net] {
                seen_net[net] = true;
                release(net, &mut ready, &mut indegree);
            }
        }
        while let Some(g) = ready.pop_front() {
            topo.push(g);
            let out = gates[g].output;
            seen_net[out] = true;
            release(out, &mut ready, &mut indegree);
        }
        if topo.len() != gates.len() {
            let stuck = gates
                .iter()
                .find(|g| indegree[g.id] > 0)
                .expect("some gate left");
            return Err(NetlistError::Cycle(nets[stuck.output].name.clone()));
        }

        let mut levels = vec![0usize; nets.len()];
        for &g in &topo {
            let gate = &gates[g];
            levels[gate.output] = if gate.kind == GateKind::Dff {
                0
            } else {
                1 + gate.fanin.iter().map(|&f| levels[f]).max().unwrap_or(0)
            };
        }
        let mut is_output = vec![false; nets.len()];
        for &o in &outputs {
            is_output[o] = true;
        }
        let max_level = outputs
            .iter()
            .map(|&o| levels[o])
            .chain(
                gates
                    .iter()
                    .filter(|g| g.kind == GateKind::Dff)
                    .map(|g| levels[g.fanin[0]]),
            )
            .max()
            .unwrap_or(0);
        let stats = ParseStats {
            pi_count: inputs.len(),
            po_count: outputs.len(),
            gate_count: gates.len(),
            net_count: nets.len(),
            max_level,
            pruned_gates: pruned,
        };
        let name_index = nets
            .iter()
            .enumerate()
            .map(|(i, n)| (n.name.clone(), i))
            .collect();
        Ok(Netlist {
            name,
            name_index,
            nets,
            inputs,
            outputs,
            gates,
            topo,
            fanout,
            levels,
            is_output,
            stats,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn inputs(&self) -> &[NetId] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[NetId] {
        &self.outputs
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn gate(&self, id: GateId) -> &Gate {
        &self.gates[id]
    }

    pub fn nets(&self) -> &[Net] {
        &self.nets
    }

    pub fn net_name(&self, id: NetId) -> &str {
        &self.nets[id].name
    }

    pub fn net_by_name(&self, name: &str) -> Option<NetId> {
        self.name_index.get(name).copied()
    }

    pub fn gate_by_output_name(&self, name: &str) -> Option<GateId> {
        self.net_by_name(name).and_then(|n| self.driver_gate(n))
    }

    pub fn driver_gate(&self, net: NetId) -> Option<GateId> {
        match self.nets[net].driver {
            Driver::Gate(g) => Some(g),
            Driver::Input => None,
        }
    }

    /// Gates reading `net`.
    pub fn fanout(&self, net: NetId) -> &[GateId] {
        &self.fanout[net]
    }

    pub fn is_output(&self, net: NetId) -> bool {
        self.is_output[net]
    }

    /// Gate ids in evaluation order.
    pub fn topo_order(&self) -> &[GateId] {
        &self.topo
    }

    /// Gate stages between the inputs and `net`.
    pub fn level(&self, net: NetId) -> usize {
        self.levels[net]
    }

    pub fn stats(&self) -> ParseStats {
        self.stats
    }

    pub fn is_combinational(&self) -> bool {
        self.gates.iter().all(|g| g.kind != GateKind::Dff)
    }

    pub fn lut_gates(&self) -> impl Iterator<Item = &Gate> {
        self.gates.iter().filter(|g| g.kind.is_lut())
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Copy with every inline LUT mask removed.
    pub fn without_masks(&self) -> Netlist {
        let mut n = self.clone();
        for g in n.gates.iter_mut() {
            g.mask = None;
        }
        n
    }

    pub fn to_draft(&self) -> Draft {
        Draft::from_netlist(self)
    }
}

/// Cut every flip-flop: its output becomes a pseudo primary input and its
/// data input a pseudo primary output. Pseudo inputs follow the original
/// inputs and pseudo outputs follow the original outputs, both in flip-flop
/// order.
pub fn extract_combinational_core(n: &Netlist) -> Result<Netlist, NetlistError> {
    if n.is_combinational() {
        return Ok(n.clone());
    }
    let mut b = NetlistBuilder::new(n.name.clone());
    for &i in &n.inputs {
        b.input(n.net_name(i));
    }
    let dffs: Vec<&Gate> = n.gates.iter().filter(|g| g.kind == GateKind::Dff).collect();
    for g in &dffs {
        b.input(n.net_name(g.output));
    }
    for &o in &n.outputs {
        b.output(n.net_name(o));
    }
    for g in &dffs {
        b.output(n.net_name(g.fanin[0]));
    }
    for g in n.gates.iter().filter(|g| g.kind != GateKind::Dff) {
        let fanin: Vec<&str> = g.fanin.iter().map(|&f| n.net_name(f)).collect();
        b.gate_with_mask(n.net_name(g.output), g.kind, &fanin, g.mask);
    }
    b.build()
}
