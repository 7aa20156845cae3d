// SPDX-License-Identifier: Apache-2.0

//! Out-of-band LUT configurations, the secret kept by the design house.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lut::{LutError, LutMask};
use crate::netlist::{GateId, GateKind, Netlist};

#[derive(Debug, Error)]
pub enum MaskError {
    #[error("mask table: {0}")]
    Csv(#[from] csv::Error),
    #[error("mask table row for gate {gate}: {source}")]
    Mask { gate: GateId, source: LutError },
    #[error("mask for gate {0}, which is not a LUT of that arity")]
    NotALut(GateId),
    #[error("gate {0} appears twice in the mask table")]
    Duplicate(GateId),
}

#[derive(Debug, Serialize, Deserialize)]
struct Row {
    gate_id: GateId,
    arity: usize,
    mask_hex: String,
}

/// LUT configuration per gate id of the obfuscated netlist.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaskTable {
    masks: BTreeMap<GateId, LutMask>,
}

impl MaskTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, gate: GateId, mask: LutMask) -> Option<LutMask> {
        self.masks.insert(gate, mask)
    }

    pub fn get(&self, gate: GateId) -> Option<&LutMask> {
        self.masks.get(&gate)
    }

    pub fn len(&self) -> usize {
        self.masks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masks.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (GateId, &LutMask)> {
        self.masks.iter().map(|(g, m)| (*g, m))
    }

    /// Masks already written inline in `netlist`.
    pub fn from_inline(netlist: &Netlist) -> Self {
        let masks = netlist
            .gates()
            .iter()
            .filter_map(|g| g.mask.map(|m| (g.id, m)))
            .collect();
        MaskTable { masks }
    }

    /// Copy of `netlist` with every mask of this table written inline.
    pub fn apply_inline(&self, netlist: &Netlist) -> Result<Netlist, MaskError> {
        let mut d = netlist.to_draft();
        let mut by_origin = BTreeMap::new();
        for (i, g) in d.gates().iter().enumerate() {
            if let Some(o) = g.origin {
                by_origin.insert(o, i);
            }
        }
        for (&gate, mask) in &self.masks {
            let idx = *by_origin.get(&gate).ok_or(MaskError::NotALut(gate))?;
            let g = d.gate_mut(idx);
            match g.kind {
                GateKind::Lut { arity, .. } if arity as usize == mask.arity() => {
                    g.mask = Some(*mask)
                }
                _ => return Err(MaskError::NotALut(gate)),
            }
        }
        Ok(d.build().expect("rewriting masks keeps the netlist valid"))
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        for (&gate_id, m) in &self.masks {
            w.serialize(Row {
                gate_id,
                arity: m.arity(),
                mask_hex: m.to_hex(),
            })
            .expect("in-memory write");
        }
        if self.masks.is_empty() {
            w.write_record(["gate_id", "arity", "mask_hex"])
                .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
    }

    pub fn from_csv(text: &str) -> Result<Self, MaskError> {
        let mut r = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let mut table = MaskTable::new();
        for row in r.deserialize() {
            let row: Row = row?;
            let mask =
                LutMask::from_hex(row.arity, &row.mask_hex).map_err(|source| MaskError::Mask {
                    gate: row.gate_id,
                    source,
                })?;
            if table.insert(row.gate_id, mask).is_some() {
                return Err(MaskError::Duplicate(row.gate_id));
            }
        }
        Ok(table)
    }
}
