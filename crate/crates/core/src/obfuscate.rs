// SPDX-License-Identifier: Apache-2.0

//! Candidate selection and LUT replacement.
//!
//! Candidates are the inner gates of the largest gate class, or of the top
//! classes taken whole when one class is too small. Within that pool gates are
//! picked one at a time by unit-delay slack, recomputed after every pick with
//! the chosen gates slowed to two stages, so replacements land off the
//! critical paths where possible.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cells::LutKind;
use crate::cones::{classify_gates, GateClass};
use crate::lut::mask_of_kind;
use crate::masks::MaskTable;
use crate::netlist::{
    equivalence_check_sims, EquivOptions, EquivVerdict, GateId, GateKind, Netlist, SimError,
    Simulator,
};
use crate::restructure::{reconstruct_in_draft, ReconstructionStep};
use crate::timing::Timing;

/// Largest share of the gate count that may be obfuscated without `force`.
pub const GATE_SHARE_LIMIT: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Scheme {
    pub lut_kind: LutKind,
    /// Reshape each gate to end in a 2-input gate before replacing that gate.
    pub reconstruct: bool,
}

impl Scheme {
    pub const ALL: [Scheme; 6] = [
        Scheme {
            lut_kind: LutKind::MuxOnly,
            reconstruct: true,
        },
        Scheme {
            lut_kind: LutKind::SramLut,
            reconstruct: true,
        },
        Scheme {
            lut_kind: LutKind::SotLut,
            reconstruct: true,
        },
        Scheme {
            lut_kind: LutKind::MuxOnly,
            reconstruct: false,
        },
        Scheme {
            lut_kind: LutKind::SramLut,
            reconstruct: false,
        },
        Scheme {
            lut_kind: LutKind::SotLut,
            reconstruct: false,
        },
    ];

    pub fn new(lut_kind: LutKind, reconstruct: bool) -> Self {
        Scheme {
            lut_kind,
            reconstruct,
        }
    }

    /// Command-line spelling, e.g. `sot_unre`.
    pub fn cli_name(&self) -> String {
        format!(
            "{}_{}",
            self.lut_kind.tag(),
            if self.reconstruct { "re" } else { "unre" }
        )
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{}_{}",
            self.lut_kind.tag().to_uppercase(),
            if self.reconstruct { "RE" } else { "unRE" }
        )
    }
}

impl std::str::FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.to_ascii_lowercase();
        let (kind, mode) = lower
            .split_once('_')
            .ok_or_else(|| format!("bad scheme `{s}`"))?;
        let lut_kind: LutKind = kind.parse().map_err(|_| format!("bad scheme `{s}`"))?;
        let reconstruct = match mode {
            "re" => true,
            "unre" => false,
            _ => {
                return Err(format!(
                    "bad scheme `{s}` (expected <mux|sram|sot>_<re|unre>)"
                ))
            }
        };
        Ok(Scheme {
            lut_kind,
            reconstruct,
        })
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ObfuscateError {
    #[error("the number of gates to obfuscate must be at least 1")]
    ZeroGates,
    #[error("{requested} gates requested but only {available} inner gates exist")]
    InsufficientInner { requested: usize, available: usize },
    #[error(
        "{requested} gates exceed 5% of {gate_count} gates (limit {limit}); pass force to override"
    )]
    OverLimit {
        requested: usize,
        limit: usize,
        gate_count: usize,
    },
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("only {replaced} of {requested} gates could be replaced")]
    BacklogExhausted { replaced: usize, requested: usize },
}

/// Ordered pick plus the fallbacks used when a pick cannot be replaced.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Selection {
    pub selected: Vec<GateId>,
    pub backlog: Vec<GateId>,
    /// Rank (0-based) of every class that contributed to `selected`.
    pub classes: Vec<usize>,
}

/// Seed-keyed tie-break value per gate.
fn tie_keys(gates: usize, seed: u64) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..gates).map(|_| rng.next_u64()).collect()
}

/// Largest subset space searched exhaustively in a partly used class.
pub const EXACT_SUBSET_LIMIT: u64 = 20_000;

fn binomial(n: usize, k: usize) -> u64 {
    (0..k).fold(1u64, |acc, i| {
        acc.saturating_mul((n - i) as u64) / (i as u64 + 1)
    })
}

fn critical_with(n: &Netlist, slow: &[bool]) -> f64 {
    Timing::compute(n, |g| if slow[g.id] { 2.0 } else { 1.0 }).critical
}

/// First `take`-subset of `ranked`, in lexicographic order of rank, whose
/// critical delay beats `best`; `None` when none does.
fn exact_pick(
    n: &Netlist,
    chosen: &[bool],
    ranked: &[GateId],
    take: usize,
    mut best: f64,
) -> Option<Vec<GateId>> {
    let mut mark = chosen.to_vec();
    let mut idx: Vec<usize> = (0..take).collect();
    let mut found = None;
    loop {
        for &i in &idx {
            mark[ranked[i]] = true;
        }
        let d = critical_with(n, &mark);
        for &i in &idx {
            mark[ranked[i]] = false;
        }
        if d < best {
            best = d;
            found = Some(idx.iter().map(|&i| ranked[i]).collect());
        }
        let mut i = take;
        while i > 0 && idx[i - 1] == i - 1 + ranked.len() - take {
            i -= 1;
        }
        if i == 0 {
            return found;
        }
        idx[i - 1] += 1;
        for j in i..take {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Pick `count` gates, ranked by slack (largest first), then the seeded
/// key, then gate id. When the last class is only partly used and its
/// subsets are few enough, the subset with the lowest critical delay is
/// taken instead of the greedy picks if it is strictly better.
pub fn select_candidates(
    n: &Netlist,
    classes: &[GateClass],
    count: usize,
    seed: u64,
) -> Result<Selection, ObfuscateError> {
    if count == 0 {
        return Err(ObfuscateError::ZeroGates);
    }
    let available: usize = classes.iter().map(|c| c.inner_members.len()).sum();
    if count > available {
        return Err(ObfuscateError::InsufficientInner {
            requested: count,
            available,
        });
    }
    let keys = tie_keys(n.gates().len(), seed);
    let mut chosen = vec![false; n.gates().len()];
    let mut selected = Vec::with_capacity(count);
    let mut used = Vec::new();

    let slack_order = |chosen: &[bool], pool: &mut Vec<GateId>| {
        let t = Timing::compute(n, |g| if chosen[g.id] { 2.0 } else { 1.0 });
        pool.sort_by(|&a, &b| {
            t.slack(n, b)
                .partial_cmp(&t.slack(n, a))
                .expect("finite slack")
                .then(keys[a].cmp(&keys[b]))
                .then(a.cmp(&b))
        });
    };

    let mut rank = 0;
    while selected.len() < count {
        let class = &classes[rank];
        let mut pool: Vec<GateId> = class.inner_members.clone();
        if !pool.is_empty() {
            used.push(rank);
        }
        let take = pool.len().min(count - selected.len());
        slack_order(&chosen, &mut pool);
        let ranked = pool.clone();
        let before = chosen.clone();
        let start = selected.len();
        for _ in 0..take {
            slack_order(&chosen, &mut pool);
            let g = pool.remove(0);
            chosen[g] = true;
            selected.push(g);
        }
        let partial = take > 0 && take < ranked.len();
        if partial && binomial(ranked.len(), take) <= EXACT_SUBSET_LIMIT {
            let greedy = critical_with(n, &chosen);
            if let Some(better) = exact_pick(n, &before, &ranked, take, greedy) {
                chosen = before;
                for &g in &better {
                    chosen[g] = true;
                }
                selected.truncate(start);
                selected.extend(better);
            }
        }
        rank += 1;
    }

    let mut backlog = Vec::new();
    let last = *used.last().expect("count >= 1");
    for class in &classes[last..] {
        let mut pool: Vec<GateId> = class
            .inner_members
            .iter()
            .copied()
            .filter(|&g| !chosen[g])
            .collect();
        slack_order(&chosen, &mut pool);
        backlog.extend(pool);
    }
    Ok(Selection {
        selected,
        backlog,
        classes: used,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObfuscationPlan {
    pub scheme: Scheme,
    pub target: usize,
    pub seed: u64,
    pub selected: Vec<GateId>,
    pub backlog: Vec<GateId>,
    pub classes: Vec<usize>,
}

impl ObfuscationPlan {
    /// Plan that replaces nothing.
    pub fn empty(scheme: Scheme, seed: u64) -> Self {
        ObfuscationPlan {
            scheme,
            target: 0,
            seed,
            selected: Vec::new(),
            backlog: Vec::new(),
            classes: Vec::new(),
        }
    }
}

/// Largest gate count allowed without `force`.
pub fn gate_limit(n: &Netlist) -> usize {
    (n.gates().len() as f64 * GATE_SHARE_LIMIT).floor() as usize
}

pub fn plan_obfuscation(
    n: &Netlist,
    scheme: Scheme,
    count: usize,
    seed: u64,
    force: bool,
) -> Result<ObfuscationPlan, ObfuscateError> {
    if !n.is_combinational() {
        return Err(SimError::NotCombinational(n.name().to_string()).into());
    }
    let limit = gate_limit(n);
    if count > limit && !force {
        return Err(ObfuscateError::OverLimit {
            requested: count,
            limit,
            gate_count: n.gates().len(),
        });
    }
    let classes = classify_gates(n);
    let sel = select_candidates(n, &classes, count, seed)?;
    Ok(ObfuscationPlan {
        scheme,
        target: count,
        seed,
        selected: sel.selected,
        backlog: sel.backlog,
        classes: sel.classes,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Obfuscated {
    /// LUT gates carry their kind but no inline mask.
    pub netlist: Netlist,
    /// The secret configuration, keyed by gate id of `netlist`.
    pub masks: MaskTable,
    /// Original gate ids actually replaced, in replacement order.
    pub replaced: Vec<GateId>,
    pub steps: Vec<ReconstructionStep>,
    /// Original gate ids that could not be replaced, with the reason.
    pub skipped: Vec<(GateId, String)>,
}

impl Obfuscated {
    /// Compare against `original` with the secret masks loaded.
    pub fn verify(
        &self,
        original: &Netlist,
        opts: &EquivOptions,
    ) -> Result<EquivVerdict, SimError> {
        let mut sim = Simulator::new(&self.netlist)?;
        for (g, m) in self.masks.iter() {
            sim.set_mask(g, *m)?;
        }
        let reference = Simulator::new(original)?;
        equivalence_check_sims(&reference, &sim, opts)
    }

    pub fn lut_gates(&self) -> Vec<GateId> {
        self.masks.iter().map(|(g, _)| g).collect()
    }
}

/// Replace the planned gates. Gates that cannot be replaced are skipped and
/// the next backlog gate is tried instead.
pub fn apply_plan(n: &Netlist, plan: &ObfuscationPlan) -> Result<Obfuscated, ObfuscateError> {
    let mut d = n.to_draft();
    let lut_kind = plan.scheme.lut_kind;
    let mut done: Vec<(GateId, String, crate::lut::LutMask)> = Vec::new();
    let mut steps = Vec::new();
    let mut skipped = Vec::new();

    for &g in plan.selected.iter().chain(&plan.backlog) {
        if done.len() == plan.target {
            break;
        }
        let name = n.net_name(n.gate(g).output).to_string();
        let Some(idx) = d.driver(&name) else {
            skipped.push((g, "absorbed by an earlier rewrite".to_string()));
            continue;
        };
        let kind = d.gate(idx).kind;
        if kind.is_lut() {
            skipped.push((g, "already a LUT".to_string()));
            continue;
        }
        let arity = d.gate(idx).fanin.len();
        let lut_arity = if plan.scheme.reconstruct || arity == 1 {
            match reconstruct_in_draft(&mut d, &name, g) {
                Ok(step) => {
                    steps.push(step);
                    2
                }
                Err(e) => {
                    log::info!("{}: gate {} not replaced: {}", n.name(), g, e);
                    skipped.push((g, e.to_string()));
                    continue;
                }
            }
        } else {
            arity
        };
        let idx = d.driver(&name).expect("rewritten gate keeps its output");
        let gate = d.gate_mut(idx);
        let mask = mask_of_kind(&gate.kind, lut_arity).expect("standard gate of arity 2..=5");
        gate.kind = GateKind::Lut {
            kind: Some(lut_kind),
            arity: lut_arity as u8,
        };
        gate.mask = None;
        done.push((g, name, mask));
    }
    if done.len() < plan.target {
        return Err(ObfuscateError::BacklogExhausted {
            replaced: done.len(),
            requested: plan.target,
        });
    }

    let netlist = d
        .build()
        .expect("replacement keeps the netlist well formed");
    let mut masks = MaskTable::new();
    for (_, name, mask) in &done {
        masks.insert(
            netlist
                .gate_by_output_name(name)
                .expect("replaced gate kept its output"),
            *mask,
        );
    }
    Ok(Obfuscated {
        netlist,
        masks,
        replaced: done.into_iter().map(|(g, _, _)| g).collect(),
        steps,
        skipped,
    })
}

/// Plan and apply in one step.
pub fn obfuscate(
    n: &Netlist,
    scheme: Scheme,
    count: usize,
    seed: u64,
    force: bool,
) -> Result<(ObfuscationPlan, Obfuscated), ObfuscateError> {
    let plan = plan_obfuscation(n, scheme, count, seed, force)?;
    let out = apply_plan(n, &plan)?;
    Ok((plan, out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::parse_bench;

    #[test]
    fn scheme_names() {
        for s in Scheme::ALL {
            assert_eq!(s.cli_name().parse::<Scheme>().unwrap(), s);
            assert_eq!(s.to_string().parse::<Scheme>().unwrap(), s);
        }
        assert_eq!(Scheme::ALL[5].to_string(), "SOT_unRE");
        assert!("sot".parse::<Scheme>().is_err());
        assert!("foo_re".parse::<Scheme>().is_err());
    }

    #[test]
    fn nand_becomes_lut() {
        let n = parse_bench(
            "INPUT(a)\nINPUT(b)\nOUTPUT(f)\ng = NAND(a, b)\nf = NOT(g)\n",
            "t",
        )
        .unwrap();
        let scheme: Scheme = "sot_re".parse().unwrap();
        let plan = ObfuscationPlan {
            target: 1,
            selected: vec![0],
            ..ObfuscationPlan::empty(scheme, 0)
        };
        let out = apply_plan(&n, &plan).unwrap();
        let lut = out.lut_gates()[0];
        assert_eq!(
            out.netlist.gate(lut).kind,
            GateKind::Lut {
                kind: Some(LutKind::SotLut),
                arity: 2
            }
        );
        assert_eq!(out.masks.get(lut).unwrap().to_bits(), "1110");
        assert!(out
            .verify(&n, &EquivOptions::default())
            .unwrap()
            .is_equivalent());
    }

    #[test]
    fn empty_plan_is_identity() {
        let n = parse_bench("INPUT(a)\nINPUT(b)\nOUTPUT(f)\nf = NAND(a, b)\n", "t").unwrap();
        let out = apply_plan(&n, &ObfuscationPlan::empty(Scheme::ALL[0], 0)).unwrap();
        assert_eq!(out.netlist, n);
        assert!(out.masks.is_empty());
    }

    #[test]
    fn zero_and_limits() {
        let n = parse_bench(
            "INPUT(a)\nINPUT(b)\nOUTPUT(f)\ng = NAND(a, b)\nf = NOT(g)\n",
            "t",
        )
        .unwrap();
        let classes = classify_gates(&n);
        assert_eq!(
            select_candidates(&n, &classes, 0, 1),
            Err(ObfuscateError::ZeroGates)
        );
        assert_eq!(
            select_candidates(&n, &classes, 2, 1),
            Err(ObfuscateError::InsufficientInner {
                requested: 2,
                available: 1
            })
        );
        assert!(matches!(
            plan_obfuscation(&n, Scheme::ALL[0], 1, 1, false),
            Err(ObfuscateError::OverLimit { .. })
        ));
        assert!(plan_obfuscation(&n, Scheme::ALL[0], 1, 1, true).is_ok());
    }

    #[test]
    fn refused_gate_replaced_from_backlog() {
        // `x` is an inverter on a primary input and cannot be reconstructed.
        let text =
            "INPUT(a)\nINPUT(b)\nINPUT(c)\nOUTPUT(f)\nx = NOT(a)\ny = AND(b, c)\nf = OR(x, y)\n";
        let n = parse_bench(text, "t").unwrap();
        let x = n.gate_by_output_name("x").unwrap();
        let y = n.gate_by_output_name("y").unwrap();
        let plan = ObfuscationPlan {
            target: 1,
            selected: vec![x],
            backlog: vec![y],
            ..ObfuscationPlan::empty(Scheme::ALL[2], 0)
        };
        let out = apply_plan(&n, &plan).unwrap();
        assert_eq!(out.replaced, vec![y]);
        assert_eq!(out.skipped.len(), 1);
        let unre = ObfuscationPlan {
            scheme: Scheme::ALL[5],
            ..plan
        };
        assert_eq!(apply_plan(&n, &unre).unwrap().replaced, vec![y]);
    }
}
