// SPDX-License-Identifier: Apache-2.0

//! Bit-parallel simulation and combinational equivalence checking.
//!
//! Every net carries a `u64`: lane `j` is the value under the `j`-th vector of
//! a 64-vector batch.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{GateId, GateKind, Netlist};
use crate::lut::LutMask;

/// Up to this many primary inputs equivalence is proven by enumeration.
pub const EXHAUSTIVE_PI_LIMIT: usize = 20;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SimError {
    #[error("netlist `{0}` still contains flip-flops; extract the combinational core first")]
    NotCombinational(String),
    #[error("LUT gate {0} has no configuration")]
    MissingMask(GateId),
    #[error("gate {gate} is not a LUT{arity}")]
    NotALut { gate: GateId, arity: usize },
    #[error("expected {expected} input values, got {got}")]
    InputWidth { expected: usize, got: usize },
    #[error("interfaces differ: {0}")]
    InterfaceMismatch(String),
}

/// Evaluates one netlist under a chosen LUT configuration.
#[derive(Debug, Clone)]
pub struct Simulator<'a> {
    netlist: &'a Netlist,
    tables: Vec<Option<u32>>,
}

impl<'a> Simulator<'a> {
    /// Simulator using the inline masks. LUTs without one must be configured
    /// with [`Simulator::set_mask`] before evaluation.
    pub fn new(netlist: &'a Netlist) -> Result<Self, SimError> {
        if !netlist.is_combinational() {
            return Err(SimError::NotCombinational(netlist.name().to_string()));
        }
        let tables = netlist
            .gates()
            .iter()
            .map(|g| g.mask.map(|m| m.table()))
            .collect();
        Ok(Simulator { netlist, tables })
    }

    pub fn netlist(&self) -> &'a Netlist {
        self.netlist
    }

    pub fn set_mask(&mut self, gate: GateId, mask: LutMask) -> Result<(), SimError> {
        match self.netlist.gate(gate).kind {
            GateKind::Lut { arity, .. } if arity as usize == mask.arity() => {
                self.tables[gate] = Some(mask.table());
                Ok(())
            }
            _ => Err(SimError::NotALut {
                gate,
                arity: mask.arity(),
            }),
        }
    }

    /// Fails on the first LUT that is still unconfigured.
    pub fn check_configured(&self) -> Result<(), SimError> {
        for g in self.netlist.gates() {
            if g.kind.is_lut() && self.tables[g.id].is_none() {
                return Err(SimError::MissingMask(g.id));
            }
        }
        Ok(())
    }

    /// Evaluate a batch. `pi_words[i]` holds the 64 values of input `i`;
    /// `values` receives one word per net.
    pub fn eval_into(&self, pi_words: &[u64], values: &mut Vec<u64>) -> Result<(), SimError> {
        let n = self.netlist;
        if pi_words.len() != n.inputs().len() {
            return Err(SimError::InputWidth {
                expected: n.inputs().len(),
                got: pi_words.len(),
            });
        }
        values.clear();
        values.resize(n.nets().len(), 0);
        for (&net, &w) in n.inputs().iter().zip(pi_words) {
            values[net] = w;
        }
        let mut buf = [0u64; super::MAX_FANIN];
        for &gid in n.topo_order() {
            let g = n.gate(gid);
            for (slot, &f) in buf.iter_mut().zip(&g.fanin) {
                *slot = values[f];
            }
            let ins = &buf[..g.fanin.len()];
            values[g.output] = if g.kind.is_lut() {
                let table = self.tables[gid].ok_or(SimError::MissingMask(gid))?;
                lut_words(table, ins)
            } else {
                g.kind.eval_words(ins)
            };
        }
        Ok(())
    }

    /// Output words, one per primary output.
    pub fn eval_outputs(&self, pi_words: &[u64]) -> Result<Vec<u64>, SimError> {
        let mut values = Vec::new();
        self.eval_into(pi_words, &mut values)?;
        Ok(self.netlist.outputs().iter().map(|&o| values[o]).collect())
    }

    pub fn eval_vector(&self, inputs: &[bool]) -> Result<Vec<bool>, SimError> {
        let words: Vec<u64> = inputs.iter().map(|&b| if b { 1 } else { 0 }).collect();
        Ok(self
            .eval_outputs(&words)?
            .into_iter()
            .map(|w| w & 1 == 1)
            .collect())
    }
}

/// Evaluate a LUT on packed words by Shannon expansion on the first input,
/// which selects between the upper and lower halves of the table.
pub(crate) fn lut_words(table: u32, inputs: &[u64]) -> u64 {
    match inputs.split_first() {
        None => {
            if table & 1 == 1 {
                !0
            } else {
                0
            }
        }
        Some((&sel, rest)) => {
            let half = 1u32 << rest.len();
            let lo_mask = if half == 32 {
                u32::MAX
            } else {
                (1u32 << half) - 1
            };
            let lo = lut_words(table & lo_mask, rest);
            let hi = lut_words(table.checked_shr(half).unwrap_or(0), rest);
            (sel & hi) | (!sel & lo)
        }
    }
}

/// Simulate one vector using the netlist's inline masks.
pub fn simulate(netlist: &Netlist, inputs: &[bool]) -> Result<Vec<bool>, SimError> {
    let sim = Simulator::new(netlist)?;
    sim.check_configured()?;
    sim.eval_vector(inputs)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EquivOptions {
    /// Enumerate every vector when the input count is at most this.
    pub exhaustive_limit: usize,
    /// Random vectors applied after the structured ones otherwise.
    pub random_vectors: u64,
    pub seed: u64,
}

impl Default for EquivOptions {
    fn default() -> Self {
        EquivOptions {
            exhaustive_limit: EXHAUSTIVE_PI_LIMIT,
            random_vectors: 1 << 16,
            seed: 0x5eed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum EquivVerdict {
    EquivalentExhaustive,
    /// No difference under this many vectors.
    EquivalentSampled(u64),
    /// First distinguishing input vector found.
    Counterexample(Vec<bool>),
}

impl EquivVerdict {
    pub fn is_equivalent(&self) -> bool {
        !matches!(self, EquivVerdict::Counterexample(_))
    }
}

/// Compare two netlists with the same interface, using their inline masks.
pub fn equivalence_check(
    a: &Netlist,
    b: &Netlist,
    opts: &EquivOptions,
) -> Result<EquivVerdict, SimError> {
    let sa = Simulator::new(a)?;
    let sb = Simulator::new(b)?;
    equivalence_check_sims(&sa, &sb, opts)
}

/// Compare two configured simulators output by output, in declaration order.
pub fn equivalence_check_sims(
    a: &Simulator<'_>,
    b: &Simulator<'_>,
    opts: &EquivOptions,
) -> Result<EquivVerdict, SimError> {
    let (na, nb) = (a.netlist(), b.netlist());
    if na.inputs().len() != nb.inputs().len() {
        return Err(SimError::InterfaceMismatch(format!(
            "{} vs {} primary inputs",
            na.inputs().len(),
            nb.inputs().len()
        )));
    }
    if na.outputs().len() != nb.outputs().len() {
        return Err(SimError::InterfaceMismatch(format!(
            "{} vs {} primary outputs",
            na.outputs().len(),
            nb.outputs().len()
        )));
    }
    let names = |n: &Netlist, nets: &[usize]| {
        nets.iter()
            .map(|&i| n.net_name(i).to_string())
            .collect::<Vec<_>>()
    };
    if names(na, na.inputs()) != names(nb, nb.inputs()) {
        return Err(SimError::InterfaceMismatch(
            "primary input names differ".into(),
        ));
    }
    if names(na, na.outputs()) != names(nb, nb.outputs()) {
        return Err(SimError::InterfaceMismatch(
            "primary output names differ".into(),
        ));
    }
    a.check_configured()?;
    b.check_configured()?;
    let pis = na.inputs().len();

    // Lanes that disagree on some output, or 0.
    let diff = |words: &[u64]| -> u64 {
        let oa = a.eval_outputs(words).expect("width checked");
        let ob = b.eval_outputs(words).expect("width checked");
        oa.iter().zip(&ob).fold(0, |acc, (x, y)| acc | (x ^ y))
    };

    if pis <= opts.exhaustive_limit {
        let total: u64 = 1 << pis;
        let batches = total.div_ceil(64);
        let valid = if total >= 64 { !0 } else { (1u64 << total) - 1 };
        let hit = (0..batches).into_par_iter().find_map_first(|batch| {
            let words = exhaustive_batch(pis, batch);
            let d = diff(&words) & valid;
            (d != 0).then(|| {
                let lane = d.trailing_zeros() as u64;
                index_to_vector(pis, batch * 64 + lane)
            })
        });
        return Ok(match hit {
            Some(v) => EquivVerdict::Counterexample(v),
            None => EquivVerdict::EquivalentExhaustive,
        });
    }

    // Structured vectors first: all zeros, all ones, then each one-hot.
    let mut structured: Vec<Vec<bool>> = vec![vec![false; pis], vec![true; pis]];
    for i in 0..pis {
        let mut v = vec![false; pis];
        v[i] = true;
        structured.push(v);
    }
    let mut checked = 0u64;
    for chunk in structured.chunks(64) {
        let words = pack(chunk, pis);
        let valid = if chunk.len() == 64 {
            !0
        } else {
            (1u64 << chunk.len()) - 1
        };
        let d = diff(&words) & valid;
        if d != 0 {
            return Ok(EquivVerdict::Counterexample(
                chunk[d.trailing_zeros() as usize].clone(),
            ));
        }
        checked += chunk.len() as u64;
    }

    let batches = opts.random_vectors.div_ceil(64);
    let hit = (0..batches).into_par_iter().find_map_first(|batch| {
        let words = random_batch(opts.seed, batch, pis);
        let remaining = opts.random_vectors - batch * 64;
        let valid = if remaining >= 64 {
            !0
        } else {
            (1u64 << remaining) - 1
        };
        let d = diff(&words) & valid;
        (d != 0).then(|| {
            let lane = d.trailing_zeros();
            words
                .iter()
                .map(|w| (w >> lane) & 1 == 1)
                .collect::<Vec<bool>>()
        })
    });
    Ok(match hit {
        Some(v) => EquivVerdict::Counterexample(v),
        None => EquivVerdict::EquivalentSampled(checked + opts.random_vectors),
    })
}

/// Input words for vectors `batch*64 .. batch*64+63` of the enumeration in
/// which input 0 is the most significant bit of the vector index.
pub fn exhaustive_batch(pis: usize, batch: u64) -> Vec<u64> {
    const LANE_PATTERNS: [u64; 6] = [
        0xAAAA_AAAA_AAAA_AAAA,
        0xCCCC_CCCC_CCCC_CCCC,
        0xF0F0_F0F0_F0F0_F0F0,
        0xFF00_FF00_FF00_FF00,
        0xFFFF_0000_FFFF_0000,
        0xFFFF_FFFF_0000_0000,
    ];
    (0..pis)
        .map(|i| {
            let bit = pis - 1 - i;
            if bit < 6 {
                LANE_PATTERNS[bit]
            } else if ((batch * 64) >> bit) & 1 == 1 {
                !0
            } else {
                0
            }
        })
        .collect()
}

/// Vector number `index` of the enumeration, input 0 first.
pub fn index_to_vector(pis: usize, index: u64) -> Vec<bool> {
    (0..pis)
        .map(|i| (index >> (pis - 1 - i)) & 1 == 1)
        .collect()
}

/// Deterministic random input words for one batch.
pub fn random_batch(seed: u64, batch: u64, pis: usize) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(batch);
    (0..pis).map(|_| rng.next_u64()).collect()
}

/// Pack up to 64 vectors into input words.
pub fn pack(vectors: &[Vec<bool>], pis: usize) -> Vec<u64> {
    let mut words = vec![0u64; pis];
    for (lane, v) in vectors.iter().enumerate() {
        for (w, &b) in words.iter_mut().zip(v) {
            if b {
                *w |= 1 << lane;
            }
        }
    }
    words
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::parse_bench;

    const C17: &str = "INPUT(1)\nINPUT(2)\nINPUT(3)\nINPUT(6)\nINPUT(7)\nOUTPUT(22)\nOUTPUT(23)\n\
        10 = NAND(1, 3)\n11 = NAND(3, 6)\n16 = NAND(2, 11)\n19 = NAND(11, 7)\n\
        22 = NAND(10, 16)\n23 = NAND(16, 19)\n";

    #[test]
    fn c17_vectors() {
        let n = parse_bench(C17, "c17").unwrap();
        let nand = |a: bool, b: bool| !(a && b);
        for v in 0..32u32 {
            let x: Vec<bool> = (0..5).map(|i| (v >> (4 - i)) & 1 == 1).collect();
            let (i1, i2, i3, i6, i7) = (x[0], x[1], x[2], x[3], x[4]);
            let n10 = nand(i1, i3);
            let n11 = nand(i3, i6);
            let n16 = nand(i2, n11);
            let n19 = nand(n11, i7);
            assert_eq!(
                simulate(&n, &x).unwrap(),
                vec![nand(n10, n16), nand(n16, n19)]
            );
        }
    }

    #[test]
    fn lut_words_matches_rows() {
        for arity in 1..=5usize {
            let rows = 1usize << arity;
            let table: u32 = 0x9e37_79b9
                & if rows == 32 {
                    u32::MAX
                } else {
                    (1 << rows) - 1
                };
            let ins = exhaustive_batch(arity, 0);
            let out = lut_words(table, &ins);
            for lane in 0..rows {
                assert_eq!(
                    (out >> lane) & 1,
                    ((table >> lane) & 1) as u64,
                    "arity {arity} row {lane}"
                );
            }
        }
    }

    #[test]
    fn enumeration_order() {
        let words = exhaustive_batch(8, 1);
        let v = index_to_vector(8, 64 + 5);
        let lane: Vec<bool> = words.iter().map(|w| (w >> 5) & 1 == 1).collect();
        assert_eq!(v, lane);
    }

    #[test]
    fn detects_difference() {
        let a = parse_bench("INPUT(a)\nINPUT(b)\nOUTPUT(f)\nf = AND(a, b)\n", "a").unwrap();
        let b = parse_bench("INPUT(a)\nINPUT(b)\nOUTPUT(f)\nf = OR(a, b)\n", "b").unwrap();
        let renamed = parse_bench("INPUT(a)\nINPUT(c)\nOUTPUT(f)\nf = OR(a, c)\n", "c").unwrap();
        assert!(matches!(
            equivalence_check(&a, &renamed, &EquivOptions::default()),
            Err(SimError::InterfaceMismatch(_))
        ));
        let v = equivalence_check(&a, &b, &EquivOptions::default()).unwrap();
        assert_eq!(v, EquivVerdict::Counterexample(vec![false, true]));
        assert_eq!(
            equivalence_check(&a, &a, &EquivOptions::default()).unwrap(),
            EquivVerdict::EquivalentExhaustive
        );
    }

    #[test]
    fn sampled_mode() {
        let a = parse_bench(
            "INPUT(a)\nINPUT(b)\nINPUT(c)\nOUTPUT(f)\nf = AND(a, b, c)\n",
            "a",
        )
        .unwrap();
        let opts = EquivOptions {
            exhaustive_limit: 2,
            random_vectors: 100,
            seed: 1,
        };
        assert_eq!(
            equivalence_check(&a, &a, &opts).unwrap(),
            EquivVerdict::EquivalentSampled(105)
        );
        let b = parse_bench(
            "INPUT(a)\nINPUT(b)\nINPUT(c)\nOUTPUT(f)\nf = NAND(a, b, c)\n",
            "b",
        )
        .unwrap();
        assert_eq!(
            equivalence_check(&a, &b, &opts).unwrap(),
            EquivVerdict::Counterexample(vec![false; 3])
        );
    }

    #[test]
    fn unconfigured_lut() {
        let n = parse_bench("INPUT(a)\nINPUT(b)\nOUTPUT(f)\nf = LUT2(a, b)\n", "l").unwrap();
        assert_eq!(simulate(&n, &[true, true]), Err(SimError::MissingMask(0)));
        let mut s = Simulator::new(&n).unwrap();
        s.set_mask(0, LutMask::from_bits("0110").unwrap()).unwrap();
        assert_eq!(s.eval_vector(&[true, false]).unwrap(), vec![true]);
        assert!(s
            .set_mask(0, LutMask::from_bits("01101001").unwrap())
            .is_err());
    }
}
