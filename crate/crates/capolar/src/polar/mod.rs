//! Polar code construction and encoding.
//!
//! Construction uses density evolution under the Gaussian approximation
//! (two-piece Trifonov-style phi function), tracking the mean LLR of each
//! synthetic channel for a biAWGN design channel. Encoding applies the
//! Kronecker-power transform in natural bit order (no bit-reversal).

pub mod scl;

pub use scl::{codeword_loglik, scl_decode, DecoderList, ListEntry, SclDecoder};

use crate::error::{Error, Result};
use std::f64::consts::PI;

/// An inner polar code: blocklength, frozen set, and the reliability
/// ordering it was derived from.
#[derive(Debug, Clone)]
pub struct PolarCode {
    n_c: usize,
    h: usize,
    frozen_mask: Vec<bool>,
    frozen_set: Vec<usize>,
    info_set: Vec<usize>,
    /// All indices, most reliable first.
    reliability_order: Vec<usize>,
    design_snr_db: f64,
}

impl PolarCode {
    /// Blocklength in bits.
    pub fn n_c(&self) -> usize {
        self.n_c
    }

    /// Number of unfrozen (information) positions, `h = k + delta`.
    pub fn h(&self) -> usize {
        self.h
    }

    pub fn frozen_set(&self) -> &[usize] {
        &self.frozen_set
    }

    /// Unfrozen positions in ascending order; input bit `j` of the encoder
    /// is placed at `info_set()[j]`.
    pub fn info_set(&self) -> &[usize] {
        &self.info_set
    }

    pub fn frozen_mask(&self) -> &[bool] {
        &self.frozen_mask
    }

    pub fn reliability_order(&self) -> &[usize] {
        &self.reliability_order
    }

    pub fn design_snr_db(&self) -> f64 {
        self.design_snr_db
    }

    /// Inner code rate h / n_c.
    pub fn rate_inner(&self) -> f64 {
        self.h as f64 / self.n_c as f64
    }

    /// Rebuild a code from an explicit frozen set (import path).
    pub fn from_frozen_set(n_c: usize, frozen: &[usize]) -> Result<Self> {
        validate_blocklength(n_c)?;
        let mut mask = vec![false; n_c];
        for &i in frozen {
            if i >= n_c {
                return Err(Error::invalid(format!("frozen index {i} out of range")));
            }
            if mask[i] {
                return Err(Error::invalid(format!("duplicate frozen index {i}")));
            }
            mask[i] = true;
        }
        let h = n_c - frozen.len();
        if h == 0 {
            return Err(Error::invalid("all positions frozen"));
        }
        let mut frozen_set: Vec<usize> = frozen.to_vec();
        frozen_set.sort_unstable();
        let info_set: Vec<usize> = (0..n_c).filter(|&i| !mask[i]).collect();
        let reliability_order: Vec<usize> =
            info_set.iter().chain(frozen_set.iter()).cloned().collect();
        Ok(Self {
            n_c,
            h,
            frozen_mask: mask,
            frozen_set,
            info_set,
            reliability_order,
            design_snr_db: f64::NAN,
        })
    }

    /// Frozen set as a plain text index list, one index per line, sorted.
    pub fn frozen_set_text(&self) -> String {
        let mut s = String::new();
        for &i in &self.frozen_set {
            s.push_str(&i.to_string());
            s.push('\n');
        }
        s
    }

    /// Parse the plain text frozen-set format.
    pub fn from_frozen_text(n_c: usize, text: &str) -> Result<Self> {
        let mut frozen = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let idx: usize = line
                .parse()
                .map_err(|e| Error::Parse(format!("bad frozen index {line:?}: {e}")))?;
            frozen.push(idx);
        }
        Self::from_frozen_set(n_c, &frozen)
    }
}

fn validate_blocklength(n_c: usize) -> Result<()> {
    if !n_c.is_power_of_two() || n_c < 2 {
        return Err(Error::invalid(format!(
            "blocklength {n_c} must be a power of two >= 2"
        )));
    }
    Ok(())
}

/// Design a polar code for a biAWGN channel at the given design Eb/N0.
///
/// The noise variance of the design channel follows from
/// `Eb/N0 = 1 / (2 R sigma^2)` at the inner code rate `R = h / n_c`; the
/// all-zero-codeword mean LLR is `2 / sigma^2`. The `h` synthetic channels
/// with the largest evolved mean LLR become the information set.
pub fn design_ga(n_c: usize, h: usize, design_snr_db: f64) -> Result<PolarCode> {
    validate_blocklength(n_c)?;
    if h == 0 || h > n_c {
        return Err(Error::invalid(format!(
            "unfrozen count {h} must satisfy 0 < h <= {n_c}"
        )));
    }
    let rate = h as f64 / n_c as f64;
    let sigma2 = 1.0 / (2.0 * rate * 10f64.powf(design_snr_db / 10.0));
    let m0 = 2.0 / sigma2;

    let stages = n_c.trailing_zeros() as usize;
    let means: Vec<f64> = (0..n_c)
        .map(|i| {
            let mut m = m0;
            for level in (0..stages).rev() {
                m = if (i >> level) & 1 == 0 {
                    ga_minus(m)
                } else {
                    2.0 * m
                };
            }
            m
        })
        .collect();

    let mut order: Vec<usize> = (0..n_c).collect();
    order.sort_by(|&a, &b| {
        means[b]
            .partial_cmp(&means[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });

    let mut frozen_set: Vec<usize> = order[h..].to_vec();
    frozen_set.sort_unstable();
    let mut mask = vec![false; n_c];
    for &i in &frozen_set {
        mask[i] = true;
    }
    let info_set: Vec<usize> = (0..n_c).filter(|&i| !mask[i]).collect();
    Ok(PolarCode {
        n_c,
        h,
        frozen_mask: mask,
        frozen_set,
        info_set,
        reliability_order: order,
        design_snr_db,
    })
}

/// log phi(x): two-piece approximation of the mean-LLR attenuation
/// function, evaluated in the log domain so that very reliable channels
/// do not underflow.
pub(crate) fn log_phi(x: f64) -> f64 {
    debug_assert!(x >= 0.0);
    if x < 10.0 {
        // Clamped at zero: the fitted piece slightly exceeds 1 near x = 0.
        (0.0218 - 0.4527 * x.powf(0.86)).min(0.0)
    } else {
        -0.25 * x + 0.5 * (PI / x).ln() + (-10.0 / (7.0 * x)).ln_1p()
    }
}

/// Inverse of `log_phi` (monotone decreasing).
fn log_phi_inv(target: f64) -> f64 {
    debug_assert!(target <= 0.0);
    if target == 0.0 {
        return 0.0;
    }
    if target > log_phi(10.0) {
        // Closed form on the fitted piece.
        return ((0.0218 - target) / 0.4527).powf(1.0 / 0.86);
    }
    // Bisection on the asymptotic piece.
    let mut lo = 10.0f64;
    let mut hi = 20.0f64;
    while log_phi(hi) > target {
        lo = hi;
        hi *= 2.0;
        if hi > 1e12 {
            return hi;
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if log_phi(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-9 * hi.max(1.0) {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Check-node (minus) combination of two equal-mean branches:
/// phi(m-) = 1 - (1 - phi(m))^2, evaluated in log space.
fn ga_minus(m: f64) -> f64 {
    let lp = log_phi(m);
    // log(1 - (1 - p)^2) = log(p) + log(2 - p)
    let combined = lp + (2.0 - lp.exp()).ln();
    log_phi_inv(combined.min(0.0))
}

/// Encode `h` information bits into an `n_c`-bit polar codeword.
///
/// Information bits go to the unfrozen positions (ascending index order),
/// frozen positions carry zeros, and the Kronecker-power transform is
/// applied in natural order.
pub fn polar_encode(v: &[u8], code: &PolarCode) -> Result<Vec<u8>> {
    if v.len() != code.h {
        return Err(Error::invalid(format!(
            "information word length {} does not match h = {}",
            v.len(),
            code.h
        )));
    }
    let mut u = vec![0u8; code.n_c];
    for (j, &pos) in code.info_set.iter().enumerate() {
        u[pos] = v[j];
    }
    polar_transform(&mut u);
    Ok(u)
}

/// In-place Kronecker-power (butterfly) transform.
pub(crate) fn polar_transform(bits: &mut [u8]) {
    let n = bits.len();
    let mut step = 1;
    while step < n {
        let mut i = 0;
        while i < n {
            for j in i..i + step {
                bits[j] ^= bits[j + step];
            }
            i += 2 * step;
        }
        step *= 2;
    }
}
