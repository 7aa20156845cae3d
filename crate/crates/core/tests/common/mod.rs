// SPDX-License-Identifier: Apache-2.0

//! Shared helpers: a seeded random-circuit generator that keeps its own gate
//! list, so tests can check the library against straightforward re-derivations.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};
use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use lutobf::netlist::parse_bench;
use lutobf::Netlist;

pub const KINDS: [&str; 8] = ["AND", "NAND", "OR", "NOR", "XOR", "XNOR", "NOT", "BUFF"];

#[derive(Debug, Clone)]
pub struct RandCircuit {
    pub pis: Vec<String>,
    pub pos: Vec<String>,
    /// (output, kind, fanin) in file order.
    pub gates: Vec<(String, String, Vec<String>)>,
    pub text: String,
}

pub fn eval_kind(kind: &str, v: &[bool]) -> bool {
    let parity = v.iter().filter(|&&b| b).count() % 2 == 1;
    match kind {
        "AND" => v.iter().all(|&b| b),
        "NAND" => !v.iter().all(|&b| b),
        "OR" => v.iter().any(|&b| b),
        "NOR" => !v.iter().any(|&b| b),
        "XOR" => parity,
        "XNOR" => !parity,
        "NOT" => !v[0],
        "BUFF" => v[0],
        other => panic!("no oracle for {other}"),
    }
}

impl RandCircuit {
    /// `gates` random gates over `pis` inputs with fan-in up to `max_fanin`.
    /// Every net without readers becomes an output, plus a few extra taps.
    pub fn generate(seed: u64, pis: usize, gates: usize, max_fanin: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pi_names: Vec<String> = (0..pis).map(|i| format!("i{i}")).collect();
        let mut nets = pi_names.clone();
        let mut list = Vec::new();
        for g in 0..gates {
            let kind = KINDS[rng.gen_range(0..KINDS.len())];
            let arity = if kind == "NOT" || kind == "BUFF" {
                1
            } else {
                rng.gen_range(2..=max_fanin.min(nets.len()).max(2))
            };
            let fanin: Vec<String> = nets
                .choose_multiple(&mut rng, arity.min(nets.len()))
                .cloned()
                .collect();
            let (kind, fanin) = if fanin.len() < arity {
                ("BUFF", vec![fanin[0].clone()])
            } else {
                (kind, fanin)
            };
            let out = format!("g{g}");
            list.push((out.clone(), kind.to_string(), fanin));
            nets.push(out);
        }
        let used: BTreeSet<&String> = list.iter().flat_map(|(_, _, f)| f.iter()).collect();
        let mut pos: Vec<String> = list
            .iter()
            .map(|(o, _, _)| o)
            .filter(|o| !used.contains(o))
            .cloned()
            .collect();
        for (o, _, _) in &list {
            if !pos.contains(o) && rng.gen_bool(0.1) {
                pos.push(o.clone());
            }
        }
        let mut text = String::new();
        for p in &pi_names {
            text.push_str(&format!("INPUT({p})\n"));
        }
        for p in &pos {
            text.push_str(&format!("OUTPUT({p})\n"));
        }
        for (o, k, f) in &list {
            text.push_str(&format!("{o} = {k}({})\n", f.join(", ")));
        }
        RandCircuit {
            pis: pi_names,
            pos,
            gates: list,
            text,
        }
    }

    pub fn netlist(&self) -> Netlist {
        parse_bench(&self.text, "rand").expect("generated text parses")
    }

    fn driver(&self) -> HashMap<&str, usize> {
        self.gates
            .iter()
            .enumerate()
            .map(|(i, (o, _, _))| (o.as_str(), i))
            .collect()
    }

    /// Recursive evaluation, outputs in declaration order.
    pub fn eval(&self, inputs: &[bool]) -> Vec<bool> {
        let driver = self.driver();
        let mut memo: HashMap<String, bool> = self
            .pis
            .iter()
            .cloned()
            .zip(inputs.iter().copied())
            .collect();
        fn value(
            c: &RandCircuit,
            d: &HashMap<&str, usize>,
            net: &str,
            memo: &mut HashMap<String, bool>,
        ) -> bool {
            if let Some(&v) = memo.get(net) {
                return v;
            }
            let (_, kind, fanin) = &c.gates[d[net]];
            let ins: Vec<bool> = fanin.iter().map(|f| value(c, d, f, memo)).collect();
            let v = eval_kind(kind, &ins);
            memo.insert(net.to_string(), v);
            v
        }
        self.pos
            .iter()
            .map(|p| value(self, &driver, p, &mut memo))
            .collect()
    }

    /// Longest input-to-output path in gates, by walking every path.
    pub fn longest_path_dfs(&self) -> usize {
        let driver = self.driver();
        let mut best = 0;
        let mut stack: Vec<(&str, usize)> = self.pos.iter().map(|p| (p.as_str(), 0)).collect();
        while let Some((net, depth)) = stack.pop() {
            match driver.get(net) {
                None => best = best.max(depth),
                Some(&g) => {
                    for f in &self.gates[g].2 {
                        stack.push((f.as_str(), depth + 1));
                    }
                }
            }
        }
        best
    }

    /// Whether a directed path leads from the output of gate `g` to net `to`.
    pub fn reaches(&self, g: usize, to: &str) -> bool {
        let mut seen = vec![false; self.gates.len()];
        let mut frontier = vec![self.gates[g].0.clone()];
        while let Some(net) = frontier.pop() {
            if net == to {
                return true;
            }
            for (i, (o, _, f)) in self.gates.iter().enumerate() {
                if !seen[i] && f.contains(&net) {
                    seen[i] = true;
                    frontier.push(o.clone());
                }
            }
        }
        false
    }
}

pub fn repo_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn benchmark(rel: &str) -> Netlist {
    let path = repo_root().join("benchmarks").join(rel);
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    let name = path.file_stem().unwrap().to_string_lossy().into_owned();
    parse_bench(&text, &name).expect("bundled benchmark parses")
}

/// Every bundled benchmark, as (relative path, netlist).
pub fn bundled_benchmarks() -> Vec<(String, Netlist)> {
    let mut out = Vec::new();
    for dir in ["iscas85", "iscas89", "epfl"] {
        let mut files: Vec<_> = std::fs::read_dir(repo_root().join("benchmarks").join(dir))
            .unwrap()
            .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
            .filter(|f| f.ends_with(".bench"))
            .collect();
        files.sort();
        for f in files {
            let rel = format!("{dir}/{f}");
            out.push((rel.clone(), benchmark(&rel)));
        }
    }
    out
}
