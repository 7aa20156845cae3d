// SPDX-License-Identifier: Apache-2.0

//! Restore attacks against an obfuscated netlist.
//!
//! The attacker holds the emitted netlist (LUT arity and wiring, no masks)
//! and, for the oracle-guided attacks, a working chip of the original design
//! that answers input vectors with output vectors.

mod bfa;
mod cpa;
mod ita;
mod sca;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::masks::MaskTable;
use crate::netlist::{GateId, SimError};

pub use bfa::{brute_force_attack, query_set, QuerySet};
pub use cpa::{cpa_partition, CandidateModel};
pub use ita::{ita_check, ItaReason, ItaVerdict, LutVerdict};
pub use sca::{attacker_views, sca_audit, ScaAudit};

#[derive(Debug, Error)]
pub enum AttackError {
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("oracle and obfuscated netlist differ in interface: {0}")]
    Interface(String),
    #[error("query budget must be at least 1")]
    EmptyBudget,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AttackKind {
    Cpa,
    Bfa,
    Ita,
    Sca,
}

/// How much the attacker may query and enumerate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleBudget {
    /// Random vectors applied when the input count is above the threshold.
    pub max_queries: u64,
    /// Up to this many primary inputs every vector is applied.
    pub exhaustive_threshold: usize,
    /// Largest joint mask space the brute-force attack will walk.
    pub max_candidates: u64,
    pub seed: u64,
}

/// Hard ceiling on `max_candidates`.
pub const CANDIDATE_CAP: u64 = 1 << 32;

impl Default for OracleBudget {
    fn default() -> Self {
        OracleBudget {
            max_queries: 4096,
            exhaustive_threshold: 16,
            max_candidates: 1 << 24,
            seed: 0x0bfa,
        }
    }
}

impl OracleBudget {
    pub fn validate(&self) -> Result<(), AttackError> {
        if self.max_queries == 0 {
            return Err(AttackError::EmptyBudget);
        }
        Ok(())
    }
}

/// LUTs resolved together and the size of their joint candidate space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stage {
    pub gates: Vec<GateId>,
    /// Primary output whose cone the stage was peeled from, if any.
    pub output: Option<String>,
    pub log2_size: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackReport {
    pub attack: AttackKind,
    pub stages: Vec<Stage>,
    /// log2 of the sum of stage sizes.
    pub total_log2_complexity: f64,
    /// Largest stage, log2.
    pub dominant_log2_complexity: f64,
    /// All LUTs guessed jointly, log2.
    pub naive_log2_complexity: f64,
    /// First consistent assignment found by enumeration.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub recovered: Option<MaskTable>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub consistent_candidate_count: Option<u64>,
    /// Number of joint assignments walked.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub enumerated: Option<u64>,
    /// Whether the known secret lies in the consistent set.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub secret_consistent: Option<bool>,
    /// Vectors applied to the oracle.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub queries: Option<u64>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub ita: Vec<LutVerdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sca: Option<ScaAudit>,
    /// The budget stopped the attack before it finished.
    pub budget_exhausted: bool,
}

impl AttackReport {
    pub fn new(attack: AttackKind) -> Self {
        AttackReport {
            attack,
            stages: Vec::new(),
            total_log2_complexity: 0.0,
            dominant_log2_complexity: 0.0,
            naive_log2_complexity: 0.0,
            recovered: None,
            consistent_candidate_count: None,
            enumerated: None,
            secret_consistent: None,
            queries: None,
            ita: Vec::new(),
            sca: None,
            budget_exhausted: false,
        }
    }

    /// Fill total and dominant figures from the stages.
    pub(crate) fn summarize_stages(&mut self) {
        let sizes: Vec<f64> = self.stages.iter().map(|s| s.log2_size).collect();
        self.dominant_log2_complexity = sizes.iter().copied().fold(0.0, f64::max);
        self.total_log2_complexity = log2_sum(&sizes);
    }
}

/// `log2(sum 2^x)` without overflow.
pub fn log2_sum(logs: &[f64]) -> f64 {
    let Some(max) = logs.iter().copied().reduce(f64::max) else {
        return 0.0;
    };
    max + logs.iter().map(|x| (x - max).exp2()).sum::<f64>().log2()
}
