// SPDX-License-Identifier: Apache-2.0

//! Static timing on the gate graph with lumped per-gate delays.

use crate::cells::{CellError, CellLibrary};
use crate::netlist::{Gate, GateId, GateKind, Netlist};

/// Arrival, required time and slack for every net and gate.
#[derive(Debug, Clone, PartialEq)]
pub struct Timing {
    /// Latest arrival per net.
    pub arrival: Vec<f64>,
    /// Latest required time per net against the critical delay.
    pub required: Vec<f64>,
    pub critical: f64,
}

impl Timing {
    /// Longest-path analysis with `delay(gate)` per gate.
    pub fn compute(n: &Netlist, delay: impl Fn(&Gate) -> f64) -> Self {
        let nets = n.nets().len();
        let mut arrival = vec![0.0f64; nets];
        for &g in n.topo_order() {
            let gate = n.gate(g);
            if gate.kind == GateKind::Dff {
                continue;
            }
            let latest = gate.fanin.iter().map(|&f| arrival[f]).fold(0.0, f64::max);
            arrival[gate.output] = latest + delay(gate);
        }
        let critical = n.outputs().iter().map(|&o| arrival[o]).fold(0.0, f64::max);
        let mut required = vec![f64::INFINITY; nets];
        for &o in n.outputs() {
            required[o] = critical;
        }
        for &g in n.topo_order().iter().rev() {
            let gate = n.gate(g);
            if gate.kind == GateKind::Dff {
                continue;
            }
            let at_inputs = required[gate.output] - delay(gate);
            for &f in &gate.fanin {
                required[f] = required[f].min(at_inputs);
            }
        }
        Timing {
            arrival,
            required,
            critical,
        }
    }

    /// Every gate costs one stage.
    pub fn unit(n: &Netlist) -> Self {
        Self::compute(n, |_| 1.0)
    }

    /// Per-cell delays from `lib`.
    pub fn library(n: &Netlist, lib: &CellLibrary) -> Result<Self, CellError> {
        let delays = gate_delays(n, lib)?;
        Ok(Self::compute(n, |g| delays[g.id]))
    }

    pub fn slack(&self, n: &Netlist, g: GateId) -> f64 {
        let out = n.gate(g).output;
        self.required[out] - self.arrival[out]
    }
}

/// Library delay of every gate, indexed by gate id.
pub fn gate_delays(n: &Netlist, lib: &CellLibrary) -> Result<Vec<f64>, CellError> {
    n.gates()
        .iter()
        .map(|g| lib.model_for(&g.kind, g.arity()).map(|m| m.delay))
        .collect()
}

/// Critical-path delay in gate stages.
pub fn unit_delay(n: &Netlist) -> f64 {
    Timing::unit(n).critical
}
