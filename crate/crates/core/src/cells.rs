// SPDX-License-Identifier: Apache-2.0

//! Cell area, delay and transistor-count models.
//!
//! Standard cells are looked up by name (`NAND2`, `INV`, `XOR3`, ...). The
//! three reconfigurable LUT families are keyed by `(LutKind, arity)` for
//! arities 2 through 5. LUT records in a library file may omit `area` and
//! `transistors`: transistors then come from [`transistor_count`] and area is
//! scaled from the NAND2 cell by transistor ratio (NAND2 has four devices).

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::netlist::GateKind;

/// The library bundled with the crate.
pub const BUNDLED_LIBRARY: &str = include_str!("../data/osu035_like.lib");

pub const MIN_LUT_ARITY: u8 = 2;
pub const MAX_LUT_ARITY: u8 = 5;

const NAND2_TRANSISTORS: u32 = 4;

const MUX_TRANSISTORS: [u32; 4] = [6, 14, 30, 62];
const SRAM_TRANSISTORS: [u32; 4] = [30, 62, 126, 254];
const SOT_TRANSISTORS: [u32; 4] = [27, 36, 53, 86];

/// Physical realization of a reconfigurable cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LutKind {
    MuxOnly,
    SramLut,
    SotLut,
}

impl LutKind {
    pub const ALL: [LutKind; 3] = [LutKind::MuxOnly, LutKind::SramLut, LutKind::SotLut];

    /// Lower-case tag used by the CLI and the library file (`mux`, `sram`, `sot`).
    pub fn tag(self) -> &'static str {
        match self {
            LutKind::MuxOnly => "mux",
            LutKind::SramLut => "sram",
            LutKind::SotLut => "sot",
        }
    }
}

impl fmt::Display for LutKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for LutKind {
    type Err = CellError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "mux" => Ok(LutKind::MuxOnly),
            "sram" => Ok(LutKind::SramLut),
            "sot" => Ok(LutKind::SotLut),
            other => Err(CellError::UnknownLutKind(other.to_string())),
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum CellError {
    #[error("LUT arity {0} out of range 2..=5")]
    ArityOutOfRange(u8),
    #[error("unknown LUT kind `{0}`")]
    UnknownLutKind(String),
    #[error("library line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("missing required cell `{0}`")]
    MissingRequiredCell(String),
    #[error("cell `{0}` has a negative or zero area")]
    NegativeArea(String),
    #[error("cell `{0}` has a negative delay")]
    NegativeDelay(String),
    #[error("cell `{0}` has a zero transistor count")]
    ZeroTransistors(String),
    #[error("duplicate cell `{0}`")]
    DuplicateCell(String),
    #[error("LUT {kind} values decrease from m={arity} to m={next}")]
    NonMonotonic { kind: LutKind, arity: u8, next: u8 },
    #[error("SRAM and SOT LUTs of arity {0} must share one delay value")]
    DelayMismatch(u8),
    #[error("no cell for {0}")]
    MissingCell(String),
}

/// Transistor count of an `arity`-input reconfigurable cell.
pub fn transistor_count(kind: LutKind, arity: u8) -> Result<u32, CellError> {
    if !(MIN_LUT_ARITY..=MAX_LUT_ARITY).contains(&arity) {
        return Err(CellError::ArityOutOfRange(arity));
    }
    let idx = (arity - MIN_LUT_ARITY) as usize;
    Ok(match kind {
        LutKind::MuxOnly => MUX_TRANSISTORS[idx],
        LutKind::SramLut => SRAM_TRANSISTORS[idx],
        LutKind::SotLut => SOT_TRANSISTORS[idx],
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellModel {
    pub name: String,
    /// Library area units.
    pub area: f64,
    /// Worst pin-to-pin delay in ns.
    pub delay: f64,
    pub transistors: u32,
    /// Reconfiguration energy in pJ; informational only.
    pub energy_reconfig: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellLibrary {
    pub name: String,
    cells: BTreeMap<String, CellModel>,
    luts: BTreeMap<(LutKind, u8), CellModel>,
}

/// Standard cells every library must define.
pub const REQUIRED_CELLS: [&str; 8] = [
    "INV", "BUF", "NAND2", "NOR2", "AND2", "OR2", "XOR2", "XNOR2",
];

struct LutRecord {
    line: usize,
    area: Option<f64>,
    delay: f64,
    transistors: Option<u32>,
    energy: Option<f64>,
}

impl CellLibrary {
    pub fn bundled() -> Self {
        Self::parse(BUNDLED_LIBRARY).expect("bundled cell library is valid")
    }

    /// Parse the line-oriented library format:
    ///
    /// ```text
    /// library <name>
    /// cell <NAME> area=<f> delay_ns=<f> transistors=<int>
    /// lut <mux|sram|sot> m=<2..5> [area=<f>] delay_ns=<f> [transistors=<int>] [energy_pj=<f>]
    /// ```
    pub fn parse(text: &str) -> Result<Self, CellError> {
        let mut name = String::from("unnamed");
        let mut cells = BTreeMap::new();
        let mut lut_records: BTreeMap<(LutKind, u8), LutRecord> = BTreeMap::new();

        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let mut tokens = content.split_whitespace();
            let directive = tokens.next().unwrap_or_default();
            let syntax = |msg: &str| CellError::Syntax {
                line,
                msg: msg.to_string(),
            };
            match directive {
                "library" => {
                    name = tokens
                        .next()
                        .ok_or_else(|| syntax("missing library name"))?
                        .to_string();
                }
                "cell" => {
                    let cell_name = tokens.next().ok_or_else(|| syntax("missing cell name"))?;
                    let fields = parse_fields(tokens, line)?;
                    let area = fields
                        .float("area", line)?
                        .ok_or_else(|| syntax("missing area"))?;
                    let delay = fields
                        .float("delay_ns", line)?
                        .ok_or_else(|| syntax("missing delay_ns"))?;
                    let transistors = fields
                        .int("transistors", line)?
                        .ok_or_else(|| syntax("missing transistors"))?;
                    let model = CellModel {
                        name: cell_name.to_string(),
                        area,
                        delay,
                        transistors,
                        energy_reconfig: None,
                    };
                    validate_model(&model)?;
                    if cells.insert(cell_name.to_string(), model).is_some() {
                        return Err(CellError::DuplicateCell(cell_name.to_string()));
                    }
                }
                "lut" => {
                    let kind: LutKind = tokens
                        .next()
                        .ok_or_else(|| syntax("missing LUT kind"))?
                        .parse()
                        .map_err(|_| syntax("LUT kind must be mux, sram or sot"))?;
                    let fields = parse_fields(tokens, line)?;
                    let arity = fields.int("m", line)?.ok_or_else(|| syntax("missing m"))?;
                    let arity =
                        u8::try_from(arity).map_err(|_| CellError::ArityOutOfRange(u8::MAX))?;
                    if !(MIN_LUT_ARITY..=MAX_LUT_ARITY).contains(&arity) {
                        return Err(CellError::ArityOutOfRange(arity));
                    }
                    let record = LutRecord {
                        line,
                        area: fields.float("area", line)?,
                        delay: fields
                            .float("delay_ns", line)?
                            .ok_or_else(|| syntax("missing delay_ns"))?,
                        transistors: fields.int("transistors", line)?,
                        energy: fields.float("energy_pj", line)?,
                    };
                    if lut_records.insert((kind, arity), record).is_some() {
                        return Err(CellError::DuplicateCell(lut_name(kind, arity)));
                    }
                }
                other => return Err(syntax(&format!("unknown directive `{other}`"))),
            }
        }

        for required in REQUIRED_CELLS {
            if !cells.contains_key(required) {
                return Err(CellError::MissingRequiredCell(required.to_string()));
            }
        }
        let nand2_area = cells["NAND2"].area;

        let mut luts = BTreeMap::new();
        for arity in MIN_LUT_ARITY..=MAX_LUT_ARITY {
            for kind in LutKind::ALL {
                let delay = match lut_records.get(&(kind, arity)) {
                    Some(r) => r.delay,
                    None => {
                        // SRAM and SOT cells share their delay, so one record serves both.
                        let sibling = match kind {
                            LutKind::SramLut => lut_records.get(&(LutKind::SotLut, arity)),
                            LutKind::SotLut => lut_records.get(&(LutKind::SramLut, arity)),
                            LutKind::MuxOnly => None,
                        };
                        sibling
                            .map(|r| r.delay)
                            .ok_or_else(|| CellError::MissingRequiredCell(lut_name(kind, arity)))?
                    }
                };
                let record = lut_records.get(&(kind, arity));
                let transistors = match record.and_then(|r| r.transistors) {
                    Some(t) => t,
                    None => transistor_count(kind, arity)?,
                };
                let area = record
                    .and_then(|r| r.area)
                    .unwrap_or(nand2_area * transistors as f64 / NAND2_TRANSISTORS as f64);
                let model = CellModel {
                    name: lut_name(kind, arity),
                    area,
                    delay,
                    transistors,
                    energy_reconfig: record.and_then(|r| r.energy),
                };
                if let Some(r) = record {
                    log::trace!("lut {} from line {}", model.name, r.line);
                }
                validate_model(&model)?;
                luts.insert((kind, arity), model);
            }
            if luts[&(LutKind::SramLut, arity)].delay != luts[&(LutKind::SotLut, arity)].delay {
                return Err(CellError::DelayMismatch(arity));
            }
        }

        for kind in LutKind::ALL {
            for arity in MIN_LUT_ARITY..MAX_LUT_ARITY {
                let a = &luts[&(kind, arity)];
                let b = &luts[&(kind, arity + 1)];
                if b.area < a.area || b.delay < a.delay || b.transistors < a.transistors {
                    return Err(CellError::NonMonotonic {
                        kind,
                        arity,
                        next: arity + 1,
                    });
                }
            }
        }

        Ok(CellLibrary { name, cells, luts })
    }

    pub fn cell(&self, name: &str) -> Option<&CellModel> {
        self.cells.get(name)
    }

    pub fn lut(&self, kind: LutKind, arity: u8) -> Result<&CellModel, CellError> {
        self.luts
            .get(&(kind, arity))
            .ok_or_else(|| CellError::MissingCell(lut_name(kind, arity)))
    }

    /// Model for a gate of the given kind and fan-in count.
    pub fn model_for(&self, kind: &GateKind, arity: usize) -> Result<&CellModel, CellError> {
        match kind {
            GateKind::Lut {
                kind: Some(lk),
                arity,
            } => self.lut(*lk, *arity),
            GateKind::Lut { kind: None, arity } => Err(CellError::MissingCell(format!(
                "LUT{arity} with hidden kind"
            ))),
            std => {
                let name = standard_cell_name(std, arity);
                self.cells.get(&name).ok_or(CellError::MissingCell(name))
            }
        }
    }

    pub fn cells(&self) -> impl Iterator<Item = &CellModel> {
        self.cells.values()
    }

    pub fn luts(&self) -> impl Iterator<Item = (&(LutKind, u8), &CellModel)> {
        self.luts.iter()
    }
}

/// Library name of a standard gate: `INV`, `BUF`, `DFF`, or kind plus arity (`NAND3`).
pub fn standard_cell_name(kind: &GateKind, arity: usize) -> String {
    match kind {
        GateKind::Not => "INV".to_string(),
        GateKind::Buf => "BUF".to_string(),
        GateKind::Dff => "DFF".to_string(),
        GateKind::Lut { arity, .. } => format!("LUT{arity}"),
        other => format!("{}{}", other.bench_name(), arity),
    }
}

fn lut_name(kind: LutKind, arity: u8) -> String {
    format!("lut {} m={}", kind.tag(), arity)
}

fn validate_model(model: &CellModel) -> Result<(), CellError> {
    if model.area.is_nan() || model.area <= 0.0 {
        return Err(CellError::NegativeArea(model.name.clone()));
    }
    if model.delay.is_nan() || model.delay < 0.0 {
        return Err(CellError::NegativeDelay(model.name.clone()));
    }
    if model.transistors == 0 {
        return Err(CellError::ZeroTransistors(model.name.clone()));
    }
    Ok(())
}

struct Fields(BTreeMap<String, String>);

impl Fields {
    fn float(&self, key: &str, line: usize) -> Result<Option<f64>, CellError> {
        self.0
            .get(key)
            .map(|v| {
                v.parse::<f64>().map_err(|_| CellError::Syntax {
                    line,
                    msg: format!("`{key}` is not a number"),
                })
            })
            .transpose()
    }

    fn int(&self, key: &str, line: usize) -> Result<Option<u32>, CellError> {
        self.0
            .get(key)
            .map(|v| {
                v.parse::<u32>().map_err(|_| CellError::Syntax {
                    line,
                    msg: format!("`{key}` is not a non-negative integer"),
                })
            })
            .transpose()
    }
}

fn parse_fields<'a>(
    tokens: impl Iterator<Item = &'a str>,
    line: usize,
) -> Result<Fields, CellError> {
    let mut map = BTreeMap::new();
    for tok in tokens {
        let (k, v) = tok.split_once('=').ok_or_else(|| CellError::Syntax {
            line,
            msg: format!("expected key=value, found `{tok}`"),
        })?;
        if map.insert(k.to_string(), v.to_string()).is_some() {
            return Err(CellError::Syntax {
                line,
                msg: format!("repeated field `{k}`"),
            });
        }
    }
    Ok(Fields(map))
}
