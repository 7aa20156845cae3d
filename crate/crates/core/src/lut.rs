// SPDX-License-Identifier: Apache-2.0

//! LUT masks and their semantics.
//!
//! A mask of arity `m` holds `2^m` output bits. Row `i` is selected when the
//! ordered fan-in spells `i` in binary with the first input as the most
//! significant bit, so for a 2-input LUT the row is `2*A + B`. Written as a
//! bit string, row 0 comes first: NAND2 is `1110`. Hex encodings read that
//! same string as a big-endian binary number (NAND2 is `e`).

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::netlist::GateKind;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LutError {
    #[error("LUT arity {0} out of range 2..=5")]
    ArityOutOfRange(usize),
    #[error("expected {expected} inputs, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("invalid mask `{0}`")]
    InvalidMask(String),
    #[error("{0} has no LUT truth table")]
    UnsupportedKind(String),
}

/// Truth table of an `m`-input LUT, `2 <= m <= 5`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LutMask {
    arity: u8,
    /// Bit `i` is the output for input row `i`.
    table: u32,
}

impl LutMask {
    pub fn new(arity: usize, table: u32) -> Result<Self, LutError> {
        if !(2..=5).contains(&arity) {
            return Err(LutError::ArityOutOfRange(arity));
        }
        let rows = 1u64 << arity;
        if (table as u64) >> rows != 0 && rows < 32 {
            return Err(LutError::InvalidMask(format!("{table:#x}")));
        }
        Ok(LutMask {
            arity: arity as u8,
            table,
        })
    }

    /// Build a mask from its bit string, row 0 first (`"1110"` is NAND2).
    pub fn from_bits(bits: &str) -> Result<Self, LutError> {
        let arity = match bits.len() {
            4 => 2,
            8 => 3,
            16 => 4,
            32 => 5,
            _ => return Err(LutError::InvalidMask(bits.to_string())),
        };
        let mut table = 0u32;
        for (row, c) in bits.chars().enumerate() {
            match c {
                '0' => {}
                '1' => table |= 1 << row,
                _ => return Err(LutError::InvalidMask(bits.to_string())),
            }
        }
        Ok(LutMask { arity, table })
    }

    /// Parse the big-endian hex form used in `.bench` files and mask tables.
    pub fn from_hex(arity: usize, hex: &str) -> Result<Self, LutError> {
        if !(2..=5).contains(&arity) {
            return Err(LutError::ArityOutOfRange(arity));
        }
        let rows = 1usize << arity;
        let digits = hex.trim().trim_start_matches("0x");
        if digits.is_empty() || digits.len() > rows / 4 {
            return Err(LutError::InvalidMask(hex.to_string()));
        }
        let value =
            u32::from_str_radix(digits, 16).map_err(|_| LutError::InvalidMask(hex.to_string()))?;
        Ok(Self::from_value(arity, value))
    }

    /// Mask whose bit string, read as a big-endian number, equals `value`.
    /// Iterating `value` over `0..2^(2^m)` visits every mask in lexicographic
    /// order of the bit string.
    pub fn from_value(arity: usize, value: u32) -> Self {
        let rows = 1u32 << arity;
        let table = value.reverse_bits() >> (32 - rows);
        LutMask {
            arity: arity as u8,
            table,
        }
    }

    pub fn value(&self) -> u32 {
        let rows = self.rows() as u32;
        self.table.reverse_bits() >> (32 - rows)
    }

    pub fn to_hex(&self) -> String {
        let width = self.rows() / 4;
        format!("{:0width$x}", self.value(), width = width)
    }

    pub fn to_bits(&self) -> String {
        (0..self.rows())
            .map(|r| if self.row(r) { '1' } else { '0' })
            .collect()
    }

    pub fn arity(&self) -> usize {
        self.arity as usize
    }

    pub fn rows(&self) -> usize {
        1 << self.arity
    }

    /// Raw row table, bit `i` = output of row `i`.
    pub fn table(&self) -> u32 {
        self.table
    }

    pub fn row(&self, row: usize) -> bool {
        (self.table >> row) & 1 == 1
    }

    pub fn complement(&self) -> Self {
        let rows = self.rows() as u32;
        let full = if rows == 32 {
            u32::MAX
        } else {
            (1u32 << rows) - 1
        };
        LutMask {
            arity: self.arity,
            table: !self.table & full,
        }
    }

    /// Number of distinct masks of the given arity, `2^(2^m)`, as a log2.
    pub fn candidate_log2(arity: usize) -> f64 {
        (1usize << arity) as f64
    }

    /// Every mask of `arity` in lexicographic bit-string order.
    pub fn all(arity: usize) -> impl Iterator<Item = LutMask> {
        let count = 1u64 << (1u64 << arity);
        (0..count).map(move |v| LutMask::from_value(arity, v as u32))
    }
}

impl fmt::Display for LutMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_bits())
    }
}

/// Row index selected by `inputs`, first input most significant.
pub fn row_index(inputs: &[bool]) -> usize {
    inputs.iter().fold(0, |acc, &b| (acc << 1) | b as usize)
}

pub fn eval_lut(mask: &LutMask, inputs: &[bool]) -> Result<bool, LutError> {
    if inputs.len() != mask.arity() {
        return Err(LutError::ArityMismatch {
            expected: mask.arity(),
            got: inputs.len(),
        });
    }
    Ok(mask.row(row_index(inputs)))
}

/// Output of a 4:1 multiplexer with data lines `x = [x1, x2, x3, x4]` and
/// select lines `a`, `b`:  `!a!b x1 + !a b x2 + a!b x3 + a b x4`.
pub fn mux4_output(x: [bool; 4], a: bool, b: bool) -> bool {
    (!a && !b && x[0]) || (!a && b && x[1]) || (a && !b && x[2]) || (a && b && x[3])
}

/// Truth table of a standard gate kind with `arity` inputs.
pub fn mask_of_kind(kind: &GateKind, arity: usize) -> Result<LutMask, LutError> {
    if !(2..=5).contains(&arity) {
        return Err(LutError::ArityOutOfRange(arity));
    }
    if !kind.is_standard_logic() || matches!(kind, GateKind::Not | GateKind::Buf) {
        return Err(LutError::UnsupportedKind(kind.bench_name().to_string()));
    }
    let mut table = 0u32;
    let mut inputs = vec![false; arity];
    for row in 0..(1usize << arity) {
        for (i, v) in inputs.iter_mut().enumerate() {
            *v = (row >> (arity - 1 - i)) & 1 == 1;
        }
        if kind.eval_bools(&inputs) {
            table |= 1 << row;
        }
    }
    LutMask::new(arity, table)
}

/// The sixteen two-input Boolean functions a MUX4X1 can realize, in the
/// order of the usual configuration table (AND first, constant zero last).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TwoInputFunction {
    And,
    AAndNotB,
    A,
    NotAAndB,
    B,
    Xor,
    Or,
    Nor,
    Xnor,
    NotB,
    AOrNotB,
    NotA,
    NotAOrB,
    Nand,
    Const1,
    Const0,
}

impl TwoInputFunction {
    pub const ALL: [TwoInputFunction; 16] = [
        TwoInputFunction::And,
        TwoInputFunction::AAndNotB,
        TwoInputFunction::A,
        TwoInputFunction::NotAAndB,
        TwoInputFunction::B,
        TwoInputFunction::Xor,
        TwoInputFunction::Or,
        TwoInputFunction::Nor,
        TwoInputFunction::Xnor,
        TwoInputFunction::NotB,
        TwoInputFunction::AOrNotB,
        TwoInputFunction::NotA,
        TwoInputFunction::NotAOrB,
        TwoInputFunction::Nand,
        TwoInputFunction::Const1,
        TwoInputFunction::Const0,
    ];

    /// Configuration bits `x1 x2 x3 x4`.
    pub fn config_bits(self) -> &'static str {
        use TwoInputFunction::*;
        match self {
            And => "0001",
            AAndNotB => "0010",
            A => "0011",
            NotAAndB => "0100",
            B => "0101",
            Xor => "0110",
            Or => "0111",
            Nor => "1000",
            Xnor => "1001",
            NotB => "1010",
            AOrNotB => "1011",
            NotA => "1100",
            NotAOrB => "1101",
            Nand => "1110",
            Const1 => "1111",
            Const0 => "0000",
        }
    }

    pub fn mask(self) -> LutMask {
        LutMask::from_bits(self.config_bits()).expect("4-bit literal")
    }

    pub fn from_mask(mask: &LutMask) -> Option<Self> {
        if mask.arity() != 2 {
            return None;
        }
        Self::ALL.into_iter().find(|f| f.mask() == *mask)
    }

    /// The function written as a Boolean expression, independent of the mask.
    pub fn eval(self, a: bool, b: bool) -> bool {
        use TwoInputFunction::*;
        match self {
            And => a && b,
            AAndNotB => a && !b,
            A => a,
            NotAAndB => !a && b,
            B => b,
            Xor => a ^ b,
            Or => a || b,
            Nor => !(a || b),
            Xnor => a == b,
            NotB => !b,
            AOrNotB => a || !b,
            NotA => !a,
            NotAOrB => !a || b,
            Nand => !(a && b),
            Const1 => true,
            Const0 => false,
        }
    }

    pub fn name(self) -> &'static str {
        use TwoInputFunction::*;
        match self {
            And => "A & B",
            AAndNotB => "A & !B",
            A => "A",
            NotAAndB => "!A & B",
            B => "B",
            Xor => "A ^ B",
            Or => "A | B",
            Nor => "!(A | B)",
            Xnor => "!(A ^ B)",
            NotB => "!B",
            AOrNotB => "A | !B",
            NotA => "!A",
            NotAOrB => "!A | B",
            Nand => "!(A & B)",
            Const1 => "1",
            Const0 => "0",
        }
    }
}
