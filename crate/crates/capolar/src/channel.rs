//! Channel simulation: biAWGN/BPSK, the block-memoryless phase-noise
//! channel with QPSK and pilot-based phase estimation, and the per-symbol
//! log-likelihood tables consumed by the decoders.
//!
//! Phase conventions. The channel applies `y = exp(j theta) x + z`. The
//! receiver works with the mismatched per-symbol likelihood
//!
//! ```text
//! q(y, x, th) = 1/(2 pi sigma^2) exp(-|y - exp(-j th) x|^2 / (2 sigma^2))
//! ```
//!
//! whose parameter `th` reproduces the matched law at `th = -theta`
//! (note the negated rotation inside `q`). [`estimate_phase_ml`] returns
//! the forward estimate of `theta` itself; the receiver pipeline stores
//! the pilot ML fit of the `q` parameter, which is its negative.

use crate::error::{Error, Result};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use std::f64::consts::{FRAC_1_SQRT_2, PI, TAU};

/// Channel family selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChannelKind {
    BiAwgn,
    PhaseNoise,
}

/// Channel model parameters.
///
/// `Eb/N0` and `sigma` are linked by `Eb/N0 = 1 / (2 R sigma^2)` for both
/// models, with `R` in information bits per channel use.
#[derive(Debug, Clone, Copy)]
pub struct ChannelConfig {
    pub kind: ChannelKind,
    pub sigma: f64,
    pub n_pilots: usize,
    pub rate_bpcu: f64,
}

impl ChannelConfig {
    pub fn bi_awgn(ebn0_db: f64, rate_bpcu: f64) -> Result<Self> {
        Ok(Self {
            kind: ChannelKind::BiAwgn,
            sigma: snr_to_sigma(ebn0_db, rate_bpcu)?,
            n_pilots: 0,
            rate_bpcu,
        })
    }

    pub fn phase_noise(ebn0_db: f64, rate_bpcu: f64, n_pilots: usize) -> Result<Self> {
        Ok(Self {
            kind: ChannelKind::PhaseNoise,
            sigma: snr_to_sigma(ebn0_db, rate_bpcu)?,
            n_pilots,
            rate_bpcu,
        })
    }

    pub fn ebn0_db(&self) -> f64 {
        sigma_to_snr(self.sigma, self.rate_bpcu)
    }

    /// Same channel at a different operating SNR.
    pub fn at_ebn0(&self, ebn0_db: f64) -> Result<Self> {
        Ok(Self {
            sigma: snr_to_sigma(ebn0_db, self.rate_bpcu)?,
            ..*self
        })
    }

    /// Bits carried per channel use by the modulation (1 for BPSK,
    /// 2 for QPSK).
    pub fn bits_per_use(&self) -> usize {
        match self.kind {
            ChannelKind::BiAwgn => 1,
            ChannelKind::PhaseNoise => 2,
        }
    }
}

/// Noise standard deviation per real dimension from Eb/N0 in dB:
/// `sigma = sqrt(1 / (2 R 10^(x/10)))`.
pub fn snr_to_sigma(ebn0_db: f64, rate_bpcu: f64) -> Result<f64> {
    if !(rate_bpcu > 0.0) {
        return Err(Error::invalid(format!(
            "rate must be positive, got {rate_bpcu}"
        )));
    }
    Ok((1.0 / (2.0 * rate_bpcu * 10f64.powf(ebn0_db / 10.0))).sqrt())
}

/// Inverse of [`snr_to_sigma`].
pub fn sigma_to_snr(sigma: f64, rate_bpcu: f64) -> f64 {
    10.0 * (1.0 / (2.0 * rate_bpcu * sigma * sigma)).log10()
}

/// Per-position, per-constellation-point log-likelihood table.
///
/// Column index is the bits-index of the point: for BPSK the code bit
/// itself, for QPSK `(b_I << 1) | b_Q` with the in-phase bit first.
#[derive(Debug, Clone)]
pub struct SymbolLogliks {
    points: usize,
    ll: Vec<f64>,
}

impl SymbolLogliks {
    pub fn new(points: usize, ll: Vec<f64>) -> Self {
        assert!(points.is_power_of_two() && points >= 2);
        assert_eq!(ll.len() % points, 0);
        Self { points, ll }
    }

    /// Number of symbol positions.
    pub fn len(&self) -> usize {
        self.ll.len() / self.points
    }

    pub fn is_empty(&self) -> bool {
        self.ll.is_empty()
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.points.trailing_zeros() as usize
    }

    #[inline]
    pub fn get(&self, position: usize, point: usize) -> f64 {
        self.ll[position * self.points + point]
    }

    /// Bits-index of a constellation point from its code bits (MSB first).
    #[inline]
    pub fn index_of_bits(bits: &[u8]) -> usize {
        bits.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize)
    }

    /// Exact per-bit LLRs `ln P(y|b=0) - ln P(y|b=1)` with the other bits
    /// of the same symbol marginalized uniformly.
    pub fn bit_llrs(&self) -> Vec<f64> {
        let bps = self.bits_per_symbol();
        let mut out = Vec::with_capacity(self.len() * bps);
        for i in 0..self.len() {
            for b in 0..bps {
                let shift = bps - 1 - b;
                let (mut num, mut den) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
                for p in 0..self.points {
                    let v = self.get(i, p);
                    if (p >> shift) & 1 == 0 {
                        num = lse2(num, v);
                    } else {
                        den = lse2(den, v);
                    }
                }
                out.push(num - den);
            }
        }
        out
    }
}

#[inline]
fn lse2(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// One transmitted block as seen by the receiver.
#[derive(Debug, Clone)]
pub struct ObservationBlock {
    pub payload_obs: Vec<Complex64>,
    pub pilot_obs: Vec<Complex64>,
    /// True channel rotation (phase-noise only).
    pub theta_true: Option<f64>,
    /// Phase parameter plugged into the mismatched likelihood `q`; under
    /// pilot ML estimation this is the negative of the forward phase
    /// estimate (see the module docs).
    pub theta_hat: Option<f64>,
    pub symbol_logliks: SymbolLogliks,
}

impl ObservationBlock {
    /// Number of channel uses in the payload.
    pub fn n_uses(&self) -> usize {
        self.payload_obs.len()
    }

    pub fn bit_llrs(&self) -> Vec<f64> {
        self.symbol_logliks.bit_llrs()
    }
}

/// BPSK map 0 -> +1, 1 -> -1.
#[inline]
pub fn bpsk_symbol(bit: u8) -> f64 {
    1.0 - 2.0 * f64::from(bit)
}

/// Gray-mapped QPSK point for a bits-index `(b_I << 1) | b_Q`.
#[inline]
pub fn qpsk_point(index: usize) -> Complex64 {
    let b_i = (index >> 1) & 1;
    let b_q = index & 1;
    Complex64::new(
        FRAC_1_SQRT_2 * (1.0 - 2.0 * b_i as f64),
        FRAC_1_SQRT_2 * (1.0 - 2.0 * b_q as f64),
    )
}

/// Map a bit vector (even length, in-phase bit first) onto QPSK symbols.
pub fn qpsk_modulate(bits: &[u8]) -> Result<Vec<Complex64>> {
    if bits.len() % 2 != 0 {
        return Err(Error::invalid("QPSK needs an even number of bits"));
    }
    Ok(bits
        .chunks_exact(2)
        .map(|p| qpsk_point(SymbolLogliks::index_of_bits(p)))
        .collect())
}

/// All-identical pilot sequence; the ML phase estimate depends only on
/// `y conj(x)`, so any fixed unit-modulus sequence is equivalent.
pub fn pilot_sequence(n_pilots: usize) -> Vec<Complex64> {
    vec![Complex64::new(FRAC_1_SQRT_2, FRAC_1_SQRT_2); n_pilots]
}

/// Transmit BPSK bits over the biAWGN channel and fill the matched
/// per-symbol log-likelihood table.
pub fn transmit_biawgn(x_bits: &[u8], sigma: f64, rng: &mut impl Rng) -> ObservationBlock {
    assert!(sigma > 0.0);
    let n = x_bits.len();
    let norm = -0.5 * (2.0 * PI * sigma * sigma).ln();
    let inv = 1.0 / (2.0 * sigma * sigma);
    let mut payload = Vec::with_capacity(n);
    let mut ll = Vec::with_capacity(2 * n);
    for &b in x_bits {
        let y = bpsk_symbol(b) + sigma * rng.sample::<f64, _>(StandardNormal);
        payload.push(Complex64::new(y, 0.0));
        ll.push(norm - (y - 1.0) * (y - 1.0) * inv); // bit 0 -> +1
        ll.push(norm - (y + 1.0) * (y + 1.0) * inv); // bit 1 -> -1
    }
    ObservationBlock {
        payload_obs: payload,
        pilot_obs: Vec::new(),
        theta_true: None,
        theta_hat: None,
        symbol_logliks: SymbolLogliks::new(2, ll),
    }
}

/// Mismatched per-symbol log-likelihood
/// `ln q(y, x, th) = -ln(2 pi sigma^2) - |y - exp(-j th) x|^2 / (2 sigma^2)`.
pub fn mismatched_loglik(y: Complex64, x: Complex64, theta_hat: f64, sigma: f64) -> f64 {
    let rotated = Complex64::from_polar(1.0, -theta_hat) * x;
    let d = y - rotated;
    -(2.0 * PI * sigma * sigma).ln() - d.norm_sqr() / (2.0 * sigma * sigma)
}

/// Forward ML estimate of the block rotation from pilot observations:
/// `arg(sum_p y_p conj(s_p))`.
pub fn estimate_phase_ml(pilot_obs: &[Complex64], pilot_syms: &[Complex64]) -> Result<f64> {
    if pilot_obs.is_empty() || pilot_obs.len() != pilot_syms.len() {
        return Err(Error::Config(
            "phase estimation needs a non-empty pilot field".into(),
        ));
    }
    let acc: Complex64 = pilot_obs
        .iter()
        .zip(pilot_syms)
        .map(|(y, s)| y * s.conj())
        .sum();
    Ok(acc.arg())
}

fn complex_noise(sigma: f64, rng: &mut impl Rng) -> Complex64 {
    Complex64::new(
        sigma * rng.sample::<f64, _>(StandardNormal),
        sigma * rng.sample::<f64, _>(StandardNormal),
    )
}

/// Transmit QPSK symbols over the block-memoryless phase-noise channel
/// with a freshly drawn uniform rotation.
pub fn transmit_phase_noise(
    x_syms: &[Complex64],
    sigma: f64,
    n_pilots: usize,
    rng: &mut impl Rng,
) -> Result<ObservationBlock> {
    let theta = TAU * rng.random::<f64>();
    transmit_phase_noise_with_theta(x_syms, sigma, n_pilots, theta, rng)
}

/// Same as [`transmit_phase_noise`] with the rotation injected (tests,
/// conditional analyses).
pub fn transmit_phase_noise_with_theta(
    x_syms: &[Complex64],
    sigma: f64,
    n_pilots: usize,
    theta: f64,
    rng: &mut impl Rng,
) -> Result<ObservationBlock> {
    assert!(sigma > 0.0);
    if n_pilots == 0 {
        return Err(Error::Config(
            "mismatched decoding requires at least one pilot symbol".into(),
        ));
    }
    let rot = Complex64::from_polar(1.0, theta);
    let pilots = pilot_sequence(n_pilots);
    let pilot_obs: Vec<Complex64> = pilots
        .iter()
        .map(|s| rot * s + complex_noise(sigma, rng))
        .collect();
    let payload_obs: Vec<Complex64> = x_syms
        .iter()
        .map(|x| rot * x + complex_noise(sigma, rng))
        .collect();

    // Pilot ML fit of the q parameter = negated forward estimate.
    let theta_hat = -estimate_phase_ml(&pilot_obs, &pilots)?;

    let mut block = ObservationBlock {
        payload_obs,
        pilot_obs,
        theta_true: Some(theta),
        theta_hat: None,
        symbol_logliks: SymbolLogliks::new(4, Vec::new()),
    };
    set_phase_param(&mut block, theta_hat, sigma);
    Ok(block)
}

/// Set the q-parameter used by the receiver and recompute the per-symbol
/// log-likelihood table (used for perfect-CSI baselines in tests).
pub fn set_phase_param(block: &mut ObservationBlock, theta_hat: f64, sigma: f64) {
    let n = block.payload_obs.len();
    let mut ll = Vec::with_capacity(4 * n);
    for &y in &block.payload_obs {
        for p in 0..4 {
            ll.push(mismatched_loglik(y, qpsk_point(p), theta_hat, sigma));
        }
    }
    block.theta_hat = Some(theta_hat);
    block.symbol_logliks = SymbolLogliks::new(4, ll);
}
