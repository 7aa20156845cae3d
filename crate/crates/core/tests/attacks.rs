// SPDX-License-Identifier: Apache-2.0

mod common;

use proptest::prelude::*;

use common::RandCircuit;
use lutobf::attacks::{
    brute_force_attack, cpa_partition, ita_check, sca_audit, CandidateModel, ItaVerdict,
    OracleBudget,
};
use lutobf::netlist::{emit_bench, parse_bench, EmitOptions, Netlist};
use lutobf::obfuscate::obfuscate;
use lutobf::{apply_plan, LutKind, ObfuscationPlan, Scheme};

fn motivating() -> Netlist {
    common::benchmark("regression/cpa_motivating.bench")
}

#[test]
fn motivating_circuit_cpa_split() {
    let r = cpa_partition(&motivating(), CandidateModel::Uniform(3.0));
    assert_eq!(r.stages.len(), 2);
    assert_eq!(r.stages[0].gates.len(), 2);
    assert_eq!(r.stages[1].log2_size, 0.0);
    assert!((2f64.powf(r.dominant_log2_complexity) - 9.0).abs() < 1e-9);
    assert!((2f64.powf(r.naive_log2_complexity) - 27.0).abs() < 1e-9);
    assert!((2f64.powf(r.total_log2_complexity) - 10.0).abs() < 1e-9);
}

#[test]
fn motivating_cone_excludes_third_cell() {
    let n = motivating();
    let mfics = lutobf::compute_mfics(&n);
    let c = |name: &str| n.gate_by_output_name(name).unwrap();
    assert!(mfics[0].contains(c("c1")) && mfics[0].contains(c("c2")));
    assert!(!mfics[0].contains(c("c3")));
}

/// Obfuscate `count` gates of a small circuit; returns (original, obfuscated, secret).
fn small_case(
    seed: u64,
    count: usize,
    scheme: Scheme,
) -> Option<(Netlist, lutobf::obfuscate::Obfuscated)> {
    let c = RandCircuit::generate(seed, 6, 24, 3);
    let n = c.netlist();
    let (_, out) = obfuscate(&n, scheme, count, seed, true).ok()?;
    (out.masks.len() == count).then_some((n, out))
}

#[test]
fn brute_force_space_is_sixteen_to_the_n() {
    let re = Scheme::new(LutKind::SotLut, true);
    for count in 1..=3 {
        let mut done = 0;
        for seed in 0..40 {
            let Some((n, out)) = small_case(seed, count, re) else {
                continue;
            };
            let view = parse_bench(
                &emit_bench(&out.netlist, &EmitOptions::attacker_view()),
                "v",
            )
            .unwrap();
            let r =
                brute_force_attack(&view, &n, &OracleBudget::default(), Some(&out.masks)).unwrap();
            assert_eq!(r.enumerated, Some(16u64.pow(count as u32)), "seed {seed}");
            assert_eq!(r.secret_consistent, Some(true));
            assert!(r.consistent_candidate_count.unwrap() >= 1);
            done += 1;
            if done == 3 {
                break;
            }
        }
        assert!(done > 0, "no usable circuit for {count} LUTs");
    }
}

#[test]
fn brute_force_space_mixed_arity() {
    let text = "INPUT(a)\nINPUT(b)\nINPUT(c)\nOUTPUT(f)\nx = AND(a, b, c)\nf = XOR(x, a)\n";
    let n = parse_bench(text, "mix").unwrap();
    let all = ObfuscationPlan {
        target: 2,
        selected: vec![0, 1],
        ..ObfuscationPlan::empty(Scheme::new(LutKind::MuxOnly, false), 1)
    };
    let out = apply_plan(&n, &all).unwrap();
    let r =
        brute_force_attack(&out.netlist, &n, &OracleBudget::default(), Some(&out.masks)).unwrap();
    assert_eq!(r.enumerated, Some(256 * 16));
    assert_eq!(r.secret_consistent, Some(true));
}

#[test]
fn sixteen_lut2_report_64_bits_without_enumerating() {
    let n = common::benchmark("iscas85/c432.bench");
    let (_, out) = obfuscate(&n, Scheme::new(LutKind::SotLut, true), 16, 1, true).unwrap();
    let r = brute_force_attack(&out.netlist, &n, &OracleBudget::default(), None).unwrap();
    assert!(r.budget_exhausted);
    assert_eq!(r.enumerated, None);
    assert_eq!(r.dominant_log2_complexity, 64.0);
}

#[test]
fn produced_plans_are_one_cpa_stage() {
    for rel in [
        "iscas85/c432.bench",
        "iscas85/c2670.bench",
        "iscas85/c880.bench",
    ] {
        let n = common::benchmark(rel);
        let (plan, out) = obfuscate(&n, Scheme::new(LutKind::SotLut, true), 16, 1, true).unwrap();
        let r = cpa_partition(&out.netlist, CandidateModel::AllMasks);
        if plan.classes.len() == 1 {
            assert_eq!(r.stages.len(), 1, "{rel}");
            assert_eq!(r.dominant_log2_complexity, 64.0, "{rel}");
        }
        assert!(r.dominant_log2_complexity <= r.naive_log2_complexity);
    }
}

#[test]
fn c432_has_no_resolvable_lut() {
    let n = common::benchmark("iscas85/c432.bench");
    let (_, out) = obfuscate(&n, Scheme::new(LutKind::SotLut, true), 16, 1, true).unwrap();
    let verdicts = ita_check(&out.netlist, &OracleBudget::default()).unwrap();
    assert_eq!(verdicts.len(), 16);
    assert!(verdicts.iter().all(|v| v.verdict != ItaVerdict::Resolvable));
}

#[test]
fn resolvable_implies_unique_recovery() {
    let budget = OracleBudget::default();
    let unre = Scheme::new(LutKind::SramLut, false);
    let mut resolvable = 0;
    for seed in 0..60 {
        let Some((n, out)) = small_case(seed, 3, unre) else {
            continue;
        };
        for v in ita_check(&out.netlist, &budget).unwrap() {
            if v.verdict != ItaVerdict::Resolvable {
                continue;
            }
            resolvable += 1;
            let original = n.gate_by_output_name(&v.output).unwrap();
            let plan = ObfuscationPlan {
                target: 1,
                selected: vec![original],
                ..ObfuscationPlan::empty(unre, seed)
            };
            let single = apply_plan(&n, &plan).unwrap();
            let r = brute_force_attack(&single.netlist, &n, &budget, Some(&single.masks)).unwrap();
            assert_eq!(
                r.consistent_candidate_count,
                Some(1),
                "seed {seed}, {}",
                v.output
            );
            assert_eq!(r.recovered.as_ref(), Some(&single.masks));
        }
    }
    assert!(resolvable > 0, "no resolvable LUT among the samples");
}

#[test]
fn audit_flags_masks_and_tags() {
    let n = common::benchmark("iscas85/c17.bench");
    let (_, out) = obfuscate(&n, Scheme::ALL[0], 2, 1, true).unwrap();
    let clean = emit_bench(&out.netlist, &EmitOptions::attacker_view());
    let with_masks = emit_bench(&out.netlist.without_masks(), &EmitOptions::defender_view());
    assert!(sca_audit(&[clean.clone(), clean.clone(), clean.clone()]).passed());
    assert!(!sca_audit(&[clean.clone(), with_masks]).passed());
    let inline = out.masks.apply_inline(&out.netlist).unwrap();
    let leaky = emit_bench(
        &inline,
        &EmitOptions {
            show_kind: false,
            include_masks: true,
        },
    );
    assert!(!sca_audit(&[leaky]).passed());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn dominant_never_exceeds_naive(seed in any::<u64>(), count in 1usize..6, re in any::<bool>()) {
        let c = RandCircuit::generate(seed, 5, 30, 4);
        let n = c.netlist();
        if let Ok((_, out)) = obfuscate(&n, Scheme::new(LutKind::SotLut, re), count, seed, true) {
            let r = cpa_partition(&out.netlist, CandidateModel::AllMasks);
            prop_assert!(r.dominant_log2_complexity <= r.naive_log2_complexity + 1e-9);
            prop_assert!(r.dominant_log2_complexity <= r.total_log2_complexity + 1e-9);
            let covered: usize = r.stages.iter().map(|s| s.gates.len()).sum();
            prop_assert_eq!(covered, out.masks.len());
        }
    }
}
