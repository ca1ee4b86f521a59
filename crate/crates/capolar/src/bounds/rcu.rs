//! Monte Carlo evaluation of the RCU-based achievability bounds, with the
//! inner pairwise probabilities computed by the saddlepoint approximation.
//!
//! Samples are drawn from counter-based ChaCha streams keyed by sample
//! index, so evaluations are reproducible, shardable, and identical
//! across worker counts; nothing is stored, every pass regenerates its
//! samples from the seed (common random numbers across parameter
//! searches for free).

use super::saddlepoint::{cgf_sum, pairwise_psi, GTable};
use super::{saddlepoint, BoundParams, BoundResult};
use crate::channel::{pilot_sequence, qpsk_point};
use crate::error::{Error, Result};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use std::f64::consts::{LN_2, TAU};

const CHUNK: u64 = 512;

/// Channel hooks for the bound sampler: draws one `(x, y)` pair and
/// produces the per-position log-likelihood rows (up to a shared
/// per-position constant) plus the transmitted codeword's log-likelihood.
#[derive(Debug, Clone, Copy)]
pub enum BoundChannel {
    BiAwgn {
        sigma: f64,
    },
    /// Mismatched evaluation: every sample draws a rotation and a pilot
    /// field, the likelihoods use the pilot-fitted q parameter, and the
    /// outer Monte Carlo average realizes the averaging over the true and
    /// estimated phase.
    PhaseNoise {
        sigma: f64,
        n_pilots: usize,
        /// Forces the q parameter to the negated true rotation (matched
        /// likelihoods) instead of estimating it from pilots.
        perfect_csi: bool,
    },
}

impl BoundChannel {
    pub fn points(&self) -> usize {
        match self {
            BoundChannel::BiAwgn { .. } => 2,
            BoundChannel::PhaseNoise { .. } => 4,
        }
    }

    /// Fill `g` with `n_uses * points` log-likelihood values and return
    /// the transmitted sequence's summed log-likelihood.
    pub fn sample_into_pub(
        &self,
        n_uses: usize,
        rng: &mut ChaCha8Rng,
        g: &mut Vec<f64>,
    ) -> f64 {
        self.sample_into(n_uses, rng, g)
    }

    fn sample_into(&self, n_uses: usize, rng: &mut ChaCha8Rng, g: &mut Vec<f64>) -> f64 {
        g.clear();
        match *self {
            BoundChannel::BiAwgn { sigma } => {
                let inv = 1.0 / (2.0 * sigma * sigma);
                let mut omega = 0.0;
                for _ in 0..n_uses {
                    let x: f64 = if rng.random::<bool>() { 1.0 } else { -1.0 };
                    let y = x + sigma * rng.sample::<f64, _>(StandardNormal);
                    let g0 = -(y - 1.0) * (y - 1.0) * inv;
                    let g1 = -(y + 1.0) * (y + 1.0) * inv;
                    omega += if x > 0.0 { g0 } else { g1 };
                    g.push(g0);
                    g.push(g1);
                }
                omega
            }
            BoundChannel::PhaseNoise {
                sigma,
                n_pilots,
                perfect_csi,
            } => {
                let inv = 1.0 / (2.0 * sigma * sigma);
                let theta = TAU * rng.random::<f64>();
                let rot = Complex64::from_polar(1.0, theta);
                let theta_hat = if perfect_csi {
                    -theta
                } else {
                    let pilots = pilot_sequence(n_pilots);
                    let mut acc = Complex64::new(0.0, 0.0);
                    for s in &pilots {
                        let y = rot * s
                            + Complex64::new(
                                sigma * rng.sample::<f64, _>(StandardNormal),
                                sigma * rng.sample::<f64, _>(StandardNormal),
                            );
                        acc += y * s.conj();
                    }
                    -acc.arg()
                };
                let derot = Complex64::from_polar(1.0, theta_hat);
                let mut omega = 0.0;
                for _ in 0..n_uses {
                    let xi = rng.random_range(0..4usize);
                    let y = rot * qpsk_point(xi)
                        + Complex64::new(
                            sigma * rng.sample::<f64, _>(StandardNormal),
                            sigma * rng.sample::<f64, _>(StandardNormal),
                        );
                    // |y - e^{-j th} x|^2 = |e^{j th} y - x|^2
                    let w = derot * y;
                    for p in 0..4 {
                        g.push(-(w - qpsk_point(p)).norm_sqr() * inv);
                    }
                    omega += g[g.len() - 4 + xi];
                }
                omega
            }
        }
    }
}

/// Streamed Monte Carlo mean/standard-error of `M` per-sample outputs.
/// Chunked so parallel execution reproduces the serial sums exactly.
fn mc_eval<const M: usize>(
    channel: BoundChannel,
    n_uses: usize,
    samples: u64,
    seed: u64,
    eval: impl Fn(&GTable, f64) -> [f64; M] + Sync,
) -> ([f64; M], [f64; M]) {
    assert!(samples > 0);
    let chunks = samples.div_ceil(CHUNK);
    let partials: Vec<([f64; M], [f64; M])> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut sums = [0.0; M];
            let mut sq = [0.0; M];
            let mut scratch: Vec<f64> = Vec::new();
            for i in c * CHUNK..((c + 1) * CHUNK).min(samples) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(i);
                let omega = channel.sample_into(n_uses, &mut rng, &mut scratch);
                let table = GTable::new(channel.points(), std::mem::take(&mut scratch));
                let out = eval(&table, omega);
                scratch = table.into_inner();
                for m in 0..M {
                    sums[m] += out[m];
                    sq[m] += out[m] * out[m];
                }
            }
            (sums, sq)
        })
        .collect();
    let mut sums = [0.0; M];
    let mut sq = [0.0; M];
    for (s, q) in partials {
        for m in 0..M {
            sums[m] += s[m];
            sq[m] += q[m];
        }
    }
    let n = samples as f64;
    let mut means = [0.0; M];
    let mut ses = [0.0; M];
    for m in 0..M {
        means[m] = sums[m] / n;
        let var = (sq[m] / n - means[m] * means[m]).max(0.0);
        ses[m] = (var / n).sqrt();
    }
    (means, ses)
}

/// `min(1, (2^k - 1) psi)` without losing precision for large k.
#[inline]
fn union_clip(k_bits: usize, psi: f64) -> f64 {
    let log2_term = k_bits as f64 + psi.max(1e-320).log2();
    if log2_term >= 0.0 {
        1.0f64.min((2f64.powi(k_bits as i32) - 1.0) * psi)
    } else {
        ((2f64).powi(k_bits as i32) - 1.0) * psi
    }
}

/// Plain RCU bound `E[min{1, (2^k - 1) psi}]` on the block error
/// probability of a `(k, n)` code.
pub fn rcu_bound(
    k: usize,
    n_uses: usize,
    channel: BoundChannel,
    samples: u64,
    seed: u64,
) -> BoundResult {
    let (means, ses) = mc_eval::<1>(channel, n_uses, samples, seed, |table, omega| {
        [union_clip(k, pairwise_psi(table, omega).prob)]
    });
    let eps = means[0].clamp(0.0, 1.0);
    BoundResult {
        eps_t: eps,
        eps_u: eps,
        params: BoundParams::Rcu,
        mc_std_err: ses[0],
        low_confidence: ses[0] > 0.2 * eps.max(f64::MIN_POSITIVE),
    }
}

/// CRC-outer-code bound: `eps_T = RCU(k + delta, n)` and
/// `eps_U = eps_T 2^(-delta)` exactly.
pub fn thm1_bounds(
    k: usize,
    n_uses: usize,
    delta: usize,
    channel: BoundChannel,
    samples: u64,
    seed: u64,
) -> BoundResult {
    let inner = rcu_bound(k + delta, n_uses, channel, samples, seed);
    BoundResult {
        eps_t: inner.eps_t,
        eps_u: inner.eps_t * 2f64.powi(-(delta as i32)),
        params: BoundParams::Thm1 { delta },
        mc_std_err: inner.mc_std_err,
        low_confidence: inner.low_confidence,
    }
}

/// Generalized-information-density threshold bound at fixed `(s, lambda)`
/// (`lambda` in bits per channel use).
pub fn thm2_bounds(
    k: usize,
    n_uses: usize,
    s: f64,
    lambda: f64,
    channel: BoundChannel,
    samples: u64,
    seed: u64,
) -> Result<BoundResult> {
    if !(s > 0.0) {
        return Err(Error::invalid("thm2 requires s > 0"));
    }
    let n_lambda_ln = n_uses as f64 * lambda * LN_2;
    let (means, ses) = mc_eval::<2>(channel, n_uses, samples, seed, |table, omega| {
        let psi = pairwise_psi(table, omega).prob;
        let gamma_s = cgf_sum(table, s).value;
        // iota_s >= n lambda  <=>  s omega - gamma(s) >= n lambda ln2
        let pass = s * omega - gamma_s >= n_lambda_ln;
        let t_term = if pass { union_clip(k, psi) } else { 1.0 };
        let ln_lambda_tilde = (n_lambda_ln + gamma_s) / s;
        let psi_tilde = saddlepoint::pairwise_psi_tilde_at(table, omega, ln_lambda_tilde).prob;
        [t_term, union_clip(k, psi_tilde)]
    });
    let se = ses[0].max(ses[1]);
    Ok(BoundResult {
        eps_t: means[0].clamp(0.0, 1.0),
        eps_u: means[1].clamp(0.0, 1.0),
        params: BoundParams::Thm2 { s, lambda },
        mc_std_err: se,
        low_confidence: ses[0] > 0.2 * means[0].max(f64::MIN_POSITIVE)
            || ses[1] > 0.2 * means[1].max(f64::MIN_POSITIVE),
    })
}

/// Reusable evaluator for the threshold bound at one fixed `s`: caches
/// the lambda-independent per-sample quantities so that the lambda search
/// only re-evaluates the thresholded pairwise probability.
pub struct Thm2Eval {
    k: usize,
    n_uses: usize,
    channel: BoundChannel,
    samples: u64,
    seed: u64,
    s: f64,
    /// Per-sample `min(1, (2^k-1) psi)`.
    clipped_psi: Vec<f64>,
    /// Per-sample `s * omega_x - gamma^(n)(s)` in nats.
    tilted_margin: Vec<f64>,
    /// Per-sample `gamma^(n)(s)` in nats.
    gamma_s: Vec<f64>,
}

impl Thm2Eval {
    pub fn new(
        k: usize,
        n_uses: usize,
        channel: BoundChannel,
        samples: u64,
        seed: u64,
        s: f64,
    ) -> Result<Self> {
        if !(s > 0.0) {
            return Err(Error::invalid("thm2 requires s > 0"));
        }
        let chunks = samples.div_ceil(CHUNK);
        let rows: Vec<Vec<(f64, f64, f64)>> = (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut out = Vec::with_capacity(CHUNK as usize);
                let mut scratch: Vec<f64> = Vec::new();
                for i in c * CHUNK..((c + 1) * CHUNK).min(samples) {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    rng.set_stream(i);
                    let omega = channel.sample_into(n_uses, &mut rng, &mut scratch);
                    let table = GTable::new(channel.points(), std::mem::take(&mut scratch));
                    let psi = pairwise_psi(&table, omega).prob;
                    let gs = cgf_sum(&table, s).value;
                    scratch = table.into_inner();
                    out.push((union_clip(k, psi), s * omega - gs, gs));
                }
                out
            })
            .collect();
        let mut clipped_psi = Vec::with_capacity(samples as usize);
        let mut tilted_margin = Vec::with_capacity(samples as usize);
        let mut gamma_s = Vec::with_capacity(samples as usize);
        for chunk in rows {
            for (c, t, g) in chunk {
                clipped_psi.push(c);
                tilted_margin.push(t);
                gamma_s.push(g);
            }
        }
        Ok(Self {
            k,
            n_uses,
            channel,
            samples,
            seed,
            s,
            clipped_psi,
            tilted_margin,
            gamma_s,
        })
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    /// `(eps_t, std_err)` at `lambda`, from the cached pass.
    pub fn eps_t(&self, lambda: f64) -> (f64, f64) {
        let thr = self.n_uses as f64 * lambda * LN_2;
        let mut sum = 0.0;
        let mut sq = 0.0;
        for (&c, &t) in self.clipped_psi.iter().zip(&self.tilted_margin) {
            let v = if t >= thr { c } else { 1.0 };
            sum += v;
            sq += v * v;
        }
        let n = self.samples as f64;
        let mean = sum / n;
        ((sum / n).clamp(0.0, 1.0), ((sq / n - mean * mean).max(0.0) / n).sqrt())
    }

    /// `(eps_u, std_err)` at `lambda`.
    ///
    /// Samples whose information density clears the threshold satisfy
    /// `omega_x >= ln lambda~`, where `psi~` collapses to the cached
    /// `psi`; only the (rare at operating points) thresholded samples are
    /// regenerated from their counter streams and re-evaluated at
    /// `omega = ln lambda~`.
    pub fn eps_u(&self, lambda: f64) -> (f64, f64) {
        let n_lambda_ln = self.n_uses as f64 * lambda * LN_2;
        let s = self.s;
        let k = self.k;
        let chunks = self.samples.div_ceil(CHUNK);
        let partials: Vec<(f64, f64)> = (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut sum = 0.0;
                let mut sq = 0.0;
                let mut scratch: Vec<f64> = Vec::new();
                for i in c * CHUNK..((c + 1) * CHUNK).min(self.samples) {
                    let idx = i as usize;
                    let v = if self.tilted_margin[idx] >= n_lambda_ln {
                        self.clipped_psi[idx]
                    } else {
                        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                        rng.set_stream(i);
                        let omega =
                            self.channel.sample_into(self.n_uses, &mut rng, &mut scratch);
                        let table =
                            GTable::new(self.channel.points(), std::mem::take(&mut scratch));
                        let ln_lambda_tilde = (n_lambda_ln + self.gamma_s[idx]) / s;
                        let psi_tilde =
                            saddlepoint::pairwise_psi_tilde_at(&table, omega, ln_lambda_tilde)
                                .prob;
                        scratch = table.into_inner();
                        union_clip(k, psi_tilde)
                    };
                    sum += v;
                    sq += v * v;
                }
                (sum, sq)
            })
            .collect();
        let (sum, sq) = partials
            .into_iter()
            .fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
        let n = self.samples as f64;
        let mean = sum / n;
        (mean.clamp(0.0, 1.0), ((sq / n - mean * mean).max(0.0) / n).sqrt())
    }

    /// Smallest-`eps_t` lambda with `eps_u = target`: `eps_u` is
    /// non-increasing in lambda, so bisection applies. `guess` warm-starts
    /// the bracket (continuation across s values and SNR points). Returns
    /// `(lambda, eps_t, eps_u)`.
    pub fn optimize_lambda(&self, target_eps_u: f64, guess: Option<f64>) -> Result<(f64, f64, f64)> {
        const LAMBDA_FLOOR: f64 = -64.0;
        // Grow a bracket around the guess; eps_u falls with lambda.
        let center = guess.unwrap_or(0.0).clamp(LAMBDA_FLOOR, 64.0);
        let mut step = 0.25;
        let mut lo = center - step;
        let mut hi = center + step;
        while self.eps_u(hi).0 > target_eps_u {
            lo = hi;
            step *= 2.0;
            hi += step;
            if hi > 64.0 {
                return Err(Error::NotFound(format!(
                    "eps_u stays above {target_eps_u} out to lambda = {hi}"
                )));
            }
        }
        loop {
            let (u_lo, _) = self.eps_u(lo);
            if u_lo > target_eps_u {
                break;
            }
            if lo <= LAMBDA_FLOOR {
                // The constraint is slack even without thresholding.
                let (t, _) = self.eps_t(lo);
                return Ok((lo, t, u_lo));
            }
            hi = lo;
            step *= 2.0;
            lo = (lo - step).max(LAMBDA_FLOOR);
        }
        let mut u_mid = f64::NAN;
        let mut mid = 0.5 * (lo + hi);
        for _ in 0..30 {
            mid = 0.5 * (lo + hi);
            u_mid = self.eps_u(mid).0;
            if (u_mid - target_eps_u).abs() <= 5e-3 * target_eps_u {
                break;
            }
            if u_mid > target_eps_u {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let (t, _) = self.eps_t(mid);
        Ok((mid, t, u_mid))
    }
}
