//! The three erasure decoding strategies and outcome classification.
//!
//! All three share the same front end: SCL decoding of the inner polar
//! code giving candidate information words with exact metrics. They
//! differ in how the list is expurgated and when the best candidate is
//! accepted:
//!
//! * reference: expurgate by the full CRC, accept the most likely
//!   survivor, erase when none survives;
//! * Algorithm A: expurgate by the `delta1` pruning constraints, accept
//!   the most likely survivor only if the `delta2` detection constraints
//!   also hold;
//! * Algorithm B: expurgate by the full CRC and accept the most likely
//!   survivor only if its likelihood beats the sum of the other
//!   survivors' likelihoods by the factor `2^(nT)`.

use crate::channel::ObservationBlock;
use crate::crc::{CrcSpec, OuterSplit};
use crate::error::{Error, Result};
use crate::polar::{scl_decode, DecoderList, PolarCode};

/// Decoding scheme selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    Reference,
    AlgA,
    AlgB,
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Scheme::Reference => write!(f, "reference"),
            Scheme::AlgA => write!(f, "alg-a"),
            Scheme::AlgB => write!(f, "alg-b"),
        }
    }
}

/// Threshold for Algorithm B. `Disabled` makes the test always pass and
/// exists for regression equivalence with the reference scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Threshold {
    Disabled,
    Value(f64),
}

impl Threshold {
    pub fn value(&self) -> Option<f64> {
        match *self {
            Threshold::Disabled => None,
            Threshold::Value(t) => Some(t),
        }
    }
}

/// Full configuration of one detector.
#[derive(Debug, Clone)]
pub struct DetectorConfig {
    pub scheme: Scheme,
    pub list_size: usize,
    /// Required for AlgA; also used by the other schemes for the full
    /// CRC membership test.
    pub delta1: usize,
    pub threshold: Threshold,
}

impl DetectorConfig {
    pub fn validate(&self, crc: &CrcSpec) -> Result<()> {
        if self.list_size == 0 {
            return Err(Error::Config("list size must be at least 1".into()));
        }
        if self.delta1 > crc.delta() {
            return Err(Error::Config(format!(
                "delta1 = {} exceeds CRC parity count {}",
                self.delta1,
                crc.delta()
            )));
        }
        if let Threshold::Value(t) = self.threshold {
            if !(t >= 0.0) {
                return Err(Error::Config(format!("threshold T = {t} must be >= 0")));
            }
        }
        Ok(())
    }
}

/// Three-way outcome of one decoding trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Correct,
    Erasure,
    Undetected,
}

/// Classified result of one trial.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeOutcome {
    pub verdict: Verdict,
    pub accepted_word: Option<Vec<u8>>,
}

/// Classify an accepted message (or erasure) against the truth: erasures
/// count toward the total error probability only, accepted wrong words
/// are undetected errors.
pub fn classify(accepted: Option<&[u8]>, truth: &[u8]) -> DecodeOutcome {
    match accepted {
        None => DecodeOutcome {
            verdict: Verdict::Erasure,
            accepted_word: None,
        },
        Some(w) => DecodeOutcome {
            verdict: if w == truth {
                Verdict::Correct
            } else {
                Verdict::Undetected
            },
            accepted_word: Some(w.to_vec()),
        },
    }
}

/// Per-candidate data extracted once from a decoder list so that every
/// scheme and every parameter choice can be evaluated without re-decoding.
#[derive(Debug, Clone)]
pub struct ListAnalysis {
    /// (syndrome mask, metric) per candidate, in list order (metric
    /// descending). Bit i of the mask is canonical parity equation i.
    pub entries: Vec<(u64, f64)>,
    delta: usize,
}

impl ListAnalysis {
    pub fn new(list: &DecoderList, split: &OuterSplit) -> Result<Self> {
        let entries = list
            .entries
            .iter()
            .map(|e| Ok((split.syndrome(&e.info)?, e.metric)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            entries,
            delta: split.base().delta(),
        })
    }

    fn full_mask(&self) -> u64 {
        if self.delta == 0 {
            0
        } else {
            (1u64 << self.delta) - 1
        }
    }

    /// Reference scheme: index of the best full-CRC survivor.
    pub fn reference_decision(&self) -> Option<usize> {
        let mask = self.full_mask();
        self.entries.iter().position(|&(s, _)| s & mask == 0)
    }

    /// Algorithm A at pruning size `delta1`: `(best survivor of the
    /// pruning check, detection verdict)`; `None` when the pruned list is
    /// empty (Case 1 erasure).
    pub fn alg_a_decision(&self, delta1: usize) -> Option<(usize, bool)> {
        let prune_mask = if delta1 == 0 { 0 } else { (1u64 << delta1) - 1 };
        let detect_mask = self.full_mask() & !prune_mask;
        self.entries
            .iter()
            .position(|&(s, _)| s & prune_mask == 0)
            .map(|idx| (idx, self.entries[idx].0 & detect_mask == 0))
    }

    /// Algorithm B case analysis on the full-CRC expurgated list.
    pub fn alg_b_case(&self) -> AlgBCase {
        let mask = self.full_mask();
        let mut survivors = self
            .entries
            .iter()
            .enumerate()
            .filter(|(_, &(s, _))| s & mask == 0)
            .map(|(i, &(_, m))| (i, m));
        let Some((best, best_metric)) = survivors.next() else {
            return AlgBCase::Empty;
        };
        // Stable log-sum-exp over the remaining survivors' metrics.
        let rest: Vec<f64> = survivors.map(|(_, m)| m).collect();
        if rest.is_empty() {
            return AlgBCase::Singleton { best };
        }
        let denom = crate::special::log_sum_exp(&rest);
        AlgBCase::Multi {
            best,
            // log2 of Forney's list ratio.
            margin_log2: (best_metric - denom) / std::f64::consts::LN_2,
        }
    }
}

/// Outcome structure of Algorithm B before the threshold comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AlgBCase {
    /// Case 1: empty expurgated list, erasure.
    Empty,
    /// Case 2: a single survivor is accepted unconditionally.
    Singleton { best: usize },
    /// Case 3: the most likely survivor is accepted iff
    /// `margin_log2 >= n T`.
    Multi { best: usize, margin_log2: f64 },
}

impl AlgBCase {
    /// Accepted candidate index under threshold `t` with `n` channel uses.
    pub fn accepted(&self, t: Threshold, n_uses: usize) -> Option<usize> {
        match *self {
            AlgBCase::Empty => None,
            AlgBCase::Singleton { best } => Some(best),
            AlgBCase::Multi { best, margin_log2 } => match t {
                Threshold::Disabled => Some(best),
                Threshold::Value(t) => (margin_log2 >= n_uses as f64 * t).then_some(best),
            },
        }
    }
}

fn decode_list(
    obs: &ObservationBlock,
    code: &PolarCode,
    crc: &CrcSpec,
    list_size: usize,
) -> Result<DecoderList> {
    if code.h() != crc.codeword_len() {
        return Err(Error::Config(format!(
            "polar h = {} does not match CRC codeword length {}",
            code.h(),
            crc.codeword_len()
        )));
    }
    scl_decode(&obs.bit_llrs(), code, list_size)
}

fn message_of(list: &DecoderList, idx: usize, crc: &CrcSpec) -> Vec<u8> {
    list.entries[idx].info[..crc.message_len()].to_vec()
}

/// Reference CA-SCL decoder: accepted message, or `None` for an erasure.
pub fn decode_reference(
    obs: &ObservationBlock,
    code: &PolarCode,
    crc: &CrcSpec,
    list_size: usize,
) -> Result<Option<Vec<u8>>> {
    let list = decode_list(obs, code, crc, list_size)?;
    let split = crate::crc::split_outer(crc, crc.delta())?;
    let analysis = ListAnalysis::new(&list, &split)?;
    Ok(analysis
        .reference_decision()
        .map(|idx| message_of(&list, idx, crc)))
}

/// Algorithm A: split-CRC decoding.
pub fn decode_alg_a(
    obs: &ObservationBlock,
    code: &PolarCode,
    split: &OuterSplit,
    list_size: usize,
) -> Result<Option<Vec<u8>>> {
    let crc = split.base();
    let list = decode_list(obs, code, crc, list_size)?;
    let analysis = ListAnalysis::new(&list, split)?;
    Ok(analysis
        .alg_a_decision(split.delta1())
        .and_then(|(idx, detect_ok)| detect_ok.then(|| message_of(&list, idx, crc))))
}

/// Algorithm B: list-approximated Forney threshold test.
pub fn decode_alg_b(
    obs: &ObservationBlock,
    code: &PolarCode,
    crc: &CrcSpec,
    list_size: usize,
    threshold: Threshold,
) -> Result<Option<Vec<u8>>> {
    if let Threshold::Value(t) = threshold {
        if !(t >= 0.0) {
            return Err(Error::invalid(format!("threshold T = {t} must be >= 0")));
        }
    }
    let list = decode_list(obs, code, crc, list_size)?;
    let split = crate::crc::split_outer(crc, crc.delta())?;
    let analysis = ListAnalysis::new(&list, &split)?;
    Ok(analysis
        .alg_b_case()
        .accepted(threshold, obs.n_uses())
        .map(|idx| message_of(&list, idx, crc)))
}
