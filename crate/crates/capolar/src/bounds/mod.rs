//! Numerical evaluation of the achievability bounds: the error-exponent
//! bound of the optimum erasure decoder, the CRC-outer-code bound, the
//! generalized-information-density threshold bound, and SNR-threshold
//! searches on all of them.

pub mod forney;
pub mod rcu;
pub mod saddlepoint;
pub mod threshold;

pub use forney::{forney_bound, forney_e0, forney_exponents, quantize_biawgn};
pub use rcu::{rcu_bound, thm1_bounds, thm2_bounds, BoundChannel, Thm2Eval};
pub use saddlepoint::{
    cgf_terms, gen_info_density, pairwise_psi, pairwise_psi_tilde, saddlepoint_tail,
    saddlepoint_tail_with, CgfTerms, GTable, SaddlepointQuery, TailResult,
};
pub use threshold::{
    evaluate_at_snr, snr_threshold_bound, BoundFamily, BoundKind, BoundRecord, BoundThreshold,
    ThresholdSearch,
};

use crate::error::{Error, Result};

/// A discrete memoryless channel given by an input distribution and a
/// transition matrix `P(y|x)` indexed `[x][y]`.
#[derive(Debug, Clone)]
pub struct DmcSpec {
    input_probs: Vec<f64>,
    transition: Vec<Vec<f64>>,
}

impl DmcSpec {
    pub fn new(input_probs: Vec<f64>, transition: Vec<Vec<f64>>) -> Result<Self> {
        if input_probs.is_empty() || transition.len() != input_probs.len() {
            return Err(Error::invalid(
                "input distribution and transition matrix sizes differ",
            ));
        }
        let sum_x: f64 = input_probs.iter().sum();
        if (sum_x - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!(
                "input probabilities sum to {sum_x}, not 1"
            )));
        }
        let cols = transition[0].len();
        for (x, row) in transition.iter().enumerate() {
            if row.len() != cols {
                return Err(Error::invalid("ragged transition matrix"));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > 1e-12 {
                return Err(Error::invalid(format!(
                    "transition row {x} sums to {s}, not 1"
                )));
            }
            if row.iter().any(|&p| p < 0.0) {
                return Err(Error::invalid("negative transition probability"));
            }
        }
        Ok(Self {
            input_probs,
            transition,
        })
    }

    pub fn num_inputs(&self) -> usize {
        self.input_probs.len()
    }

    pub fn num_outputs(&self) -> usize {
        self.transition[0].len()
    }

    pub fn input_probs(&self) -> &[f64] {
        &self.input_probs
    }

    pub fn transition(&self) -> &[Vec<f64>] {
        &self.transition
    }
}

/// Parameters a bound was evaluated at.
#[derive(Debug, Clone, serde::Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BoundParams {
    Rcu,
    Thm1 { delta: usize },
    Thm2 { s: f64, lambda: f64 },
    Forney { t: f64, e1: f64, e2: f64 },
}

/// An evaluated `(eps_T, eps_U)` pair.
#[derive(Debug, Clone, serde::Serialize)]
pub struct BoundResult {
    pub eps_t: f64,
    pub eps_u: f64,
    pub params: BoundParams,
    /// Largest Monte Carlo standard error among the reported quantities
    /// (zero for the exponent bound, which is deterministic).
    pub mc_std_err: f64,
    /// Set when the relative standard error exceeds 20%, meaning the
    /// sample budget is too small for the magnitude being estimated.
    pub low_confidence: bool,
}
