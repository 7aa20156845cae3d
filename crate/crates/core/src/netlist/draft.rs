// SPDX-License-Identifier: Apache-2.0

//! Mutable, name-based copy of a netlist used while rewriting it.

use std::collections::{HashMap, HashSet};

use super::{GateId, GateKind, Netlist, NetlistBuilder, NetlistError};
use crate::lut::LutMask;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DraftGate {
    pub output: String,
    pub kind: GateKind,
    pub fanin: Vec<String>,
    pub mask: Option<LutMask>,
    /// Gate of the source netlist this one came from, if any.
    pub origin: Option<GateId>,
}

#[derive(Debug, Clone)]
pub struct Draft {
    name: String,
    inputs: Vec<String>,
    outputs: Vec<String>,
    gates: Vec<DraftGate>,
    index: HashMap<String, usize>,
    names: HashSet<String>,
    counter: usize,
}

impl Draft {
    pub fn from_netlist(n: &Netlist) -> Self {
        let inputs: Vec<String> = n
            .inputs()
            .iter()
            .map(|&i| n.net_name(i).to_string())
            .collect();
        let outputs = n
            .outputs()
            .iter()
            .map(|&o| n.net_name(o).to_string())
            .collect();
        let gates: Vec<DraftGate> = n
            .gates()
            .iter()
            .map(|g| DraftGate {
                output: n.net_name(g.output).to_string(),
                kind: g.kind,
                fanin: g.fanin.iter().map(|&f| n.net_name(f).to_string()).collect(),
                mask: g.mask,
                origin: Some(g.id),
            })
            .collect();
        let names = n.nets().iter().map(|net| net.name.clone()).collect();
        let mut d = Draft {
            name: n.name().to_string(),
            inputs,
            outputs,
            gates,
            index: HashMap::new(),
            names,
            counter: 0,
        };
        d.reindex();
        d
    }

    fn reindex(&mut self) {
        self.index = self
            .gates
            .iter()
            .enumerate()
            .map(|(i, g)| (g.output.clone(), i))
            .collect();
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn gates(&self) -> &[DraftGate] {
        &self.gates
    }

    pub fn gate(&self, idx: usize) -> &DraftGate {
        &self.gates[idx]
    }

    pub fn gate_mut(&mut self, idx: usize) -> &mut DraftGate {
        &mut self.gates[idx]
    }

    /// Position of the gate driving `net`.
    pub fn driver(&self, net: &str) -> Option<usize> {
        self.index.get(net).copied()
    }

    pub fn is_input(&self, net: &str) -> bool {
        self.inputs.iter().any(|i| i == net)
    }

    pub fn is_output(&self, net: &str) -> bool {
        self.outputs.iter().any(|o| o == net)
    }

    /// Gate input pins plus output ports reading `net`.
    pub fn use_count(&self, net: &str) -> usize {
        let pins: usize = self
            .gates
            .iter()
            .map(|g| g.fanin.iter().filter(|f| *f == net).count())
            .sum();
        pins + self.outputs.iter().filter(|o| *o == net).count()
    }

    /// A net name derived from `base` that is not used anywhere yet.
    pub fn fresh_name(&mut self, base: &str) -> String {
        loop {
            self.counter += 1;
            let candidate = format!("{base}_r{}", self.counter);
            if self.names.insert(candidate.clone()) {
                return candidate;
            }
        }
    }

    /// Insert `gate` in front of position `idx`; returns its position.
    pub fn insert_before(&mut self, idx: usize, gate: DraftGate) -> usize {
        self.names.insert(gate.output.clone());
        self.gates.insert(idx, gate);
        self.reindex();
        idx
    }

    pub fn remove(&mut self, idx: usize) -> DraftGate {
        let g = self.gates.remove(idx);
        self.reindex();
        g
    }

    /// Remove the gate driving `net` when nothing reads it any more.
    pub fn remove_if_dangling(&mut self, net: &str) -> bool {
        match self.driver(net) {
            Some(idx) if self.use_count(net) == 0 => {
                self.remove(idx);
                true
            }
            _ => false,
        }
    }

    pub fn build(&self) -> Result<Netlist, NetlistError> {
        let mut b = NetlistBuilder::new(self.name.clone());
        for i in &self.inputs {
            b.input(i.as_str());
        }
        for o in &self.outputs {
            b.output(o.as_str());
        }
        for g in &self.gates {
            b.gate_with_mask(g.output.as_str(), g.kind, &g.fanin, g.mask);
        }
        b.build()
    }
}
