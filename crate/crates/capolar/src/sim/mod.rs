//! Monte Carlo campaign engine: reproducible seeded trials, deterministic
//! parallel aggregation, stopping rules, and Clopper-Pearson interval
//! estimates of the total and undetected error probabilities.
//!
//! Every trial `t` of a campaign derives its randomness from the stream
//! `(master_seed, t)` of a counter-based generator, so shard layout and
//! worker count cannot change the totals. One SCL decode per trial feeds
//! all schemes and all detector parameters at once: the per-candidate
//! CRC syndromes and exact metrics are enough to evaluate every pruning
//! split and every threshold after the fact.

pub mod sweep;
pub mod threshold;

pub use threshold::{
    snr_threshold_sim, SchemeParams, SchemeThreshold, SearchOpts, Targets, ThresholdSim,
};

use crate::channel::{qpsk_modulate, transmit_biawgn, transmit_phase_noise, ChannelConfig, ChannelKind};
use crate::crc::{crc_encode, split_outer, CrcSpec, OuterSplit};
use crate::detect::{AlgBCase, DetectorConfig, ListAnalysis, Scheme, Threshold};
use crate::error::{Error, Result};
use crate::polar::{polar_encode, PolarCode, SclDecoder};
use crate::special::clopper_pearson;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::time::{Duration, Instant};

/// A CRC-aided polar code: inner polar code plus outer CRC.
#[derive(Debug, Clone)]
pub struct SimCode {
    pub polar: PolarCode,
    pub crc: CrcSpec,
}

impl SimCode {
    pub fn new(polar: PolarCode, crc: CrcSpec) -> Result<Self> {
        if polar.h() != crc.codeword_len() {
            return Err(Error::Config(format!(
                "polar h = {} but CRC codeword length = {}",
                polar.h(),
                crc.codeword_len()
            )));
        }
        Ok(Self { polar, crc })
    }

    pub fn k(&self) -> usize {
        self.crc.message_len()
    }

    pub fn n_c(&self) -> usize {
        self.polar.n_c()
    }

    /// Channel uses under the given modulation.
    pub fn n_uses(&self, channel: &ChannelConfig) -> usize {
        self.n_c() / channel.bits_per_use()
    }
}

/// Campaign stopping rule: stop at `min_undetected` undetected errors or
/// `min_total_errors` total errors or `max_trials`, whichever first.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct StoppingRule {
    pub min_undetected: u64,
    pub min_total_errors: u64,
    pub max_trials: u64,
}

impl Default for StoppingRule {
    fn default() -> Self {
        Self {
            min_undetected: 100,
            min_total_errors: 10_000,
            max_trials: 1_000_000_000,
        }
    }
}

/// One simulation job: code, detector, channel operating point, stopping
/// rule, and the master seed.
#[derive(Debug, Clone)]
pub struct SimJob {
    pub code: SimCode,
    pub detector: DetectorConfig,
    pub channel: ChannelConfig,
    pub stopping: StoppingRule,
    pub seed: u64,
}

impl SimJob {
    pub fn validate(&self) -> Result<()> {
        self.detector.validate(&self.code.crc)?;
        if self.code.n_c() % self.channel.bits_per_use() != 0 {
            return Err(Error::Config(format!(
                "blocklength {} not divisible by {} bits per channel use",
                self.code.n_c(),
                self.channel.bits_per_use()
            )));
        }
        if self.channel.kind == ChannelKind::PhaseNoise && self.channel.n_pilots == 0 {
            return Err(Error::Config("phase-noise channel needs pilots".into()));
        }
        if self.stopping.max_trials == 0 {
            return Err(Error::Config("max_trials must be positive".into()));
        }
        // u64::MAX disables a quota; a finite quota must be satisfiable.
        if self.stopping.min_undetected != u64::MAX
            && self.stopping.max_trials < self.stopping.min_undetected
        {
            return Err(Error::Config(
                "max_trials cannot satisfy the undetected-error quota".into(),
            ));
        }
        Ok(())
    }
}

/// How a campaign ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SimStatus {
    /// An error quota of the stopping rule was met.
    ErrorQuotaMet,
    /// The trial budget ran out first; counts are partial.
    BudgetExhausted,
}

/// Aggregated result of one campaign.
#[derive(Debug, Clone, serde::Serialize)]
pub struct SimResult {
    pub trials: u64,
    pub total_errors: u64,
    pub undetected_errors: u64,
    pub tep_hat: f64,
    pub uep_hat: f64,
    /// 95% Clopper-Pearson intervals.
    pub tep_ci: (f64, f64),
    pub uep_ci: (f64, f64),
    pub status: SimStatus,
    pub ebn0_db: f64,
    #[serde(skip)]
    pub wall_time: Duration,
}

impl SimResult {
    fn from_counts(
        trials: u64,
        total_errors: u64,
        undetected_errors: u64,
        status: SimStatus,
        ebn0_db: f64,
        wall_time: Duration,
    ) -> Self {
        let tep_ci = clopper_pearson(total_errors, trials, 0.95);
        let uep_ci = clopper_pearson(undetected_errors, trials, 0.95);
        Self {
            trials,
            total_errors,
            undetected_errors,
            tep_hat: total_errors as f64 / trials as f64,
            uep_hat: undetected_errors as f64 / trials as f64,
            tep_ci,
            uep_ci,
            status,
            ebn0_db,
            wall_time,
        }
    }
}

/// Shared-decode tally: per-trial outcomes folded into counts for every
/// Algorithm A split at once, plus the Algorithm B case statistics with
/// the acceptance margins kept for threshold sweeps.
#[derive(Debug, Clone)]
pub struct CampaignTally {
    pub trials: u64,
    /// Accepted-and-correct count per `delta1` in `0..=delta`
    /// (`delta1 = delta` is the reference scheme).
    pub a_correct: Vec<u64>,
    /// Accepted-and-wrong count per `delta1`.
    pub a_undetected: Vec<u64>,
    pub b_empty: u64,
    pub b_singleton_correct: u64,
    pub b_singleton_wrong: u64,
    /// log2 margins of multi-survivor trials whose best candidate is wrong.
    pub b_wrong_margins: Vec<f64>,
    /// Same for trials whose best candidate is correct.
    pub b_correct_margins: Vec<f64>,
}

impl CampaignTally {
    pub fn new(delta: usize) -> Self {
        Self {
            trials: 0,
            a_correct: vec![0; delta + 1],
            a_undetected: vec![0; delta + 1],
            b_empty: 0,
            b_singleton_correct: 0,
            b_singleton_wrong: 0,
            b_wrong_margins: Vec::new(),
            b_correct_margins: Vec::new(),
        }
    }

    pub fn merge(&mut self, other: CampaignTally) {
        self.trials += other.trials;
        for (a, b) in self.a_correct.iter_mut().zip(other.a_correct) {
            *a += b;
        }
        for (a, b) in self.a_undetected.iter_mut().zip(other.a_undetected) {
            *a += b;
        }
        self.b_empty += other.b_empty;
        self.b_singleton_correct += other.b_singleton_correct;
        self.b_singleton_wrong += other.b_singleton_wrong;
        self.b_wrong_margins.extend(other.b_wrong_margins);
        self.b_correct_margins.extend(other.b_correct_margins);
    }

    /// `(total_errors, undetected)` of Algorithm A at `delta1`.
    pub fn alg_a_counts(&self, delta1: usize) -> (u64, u64) {
        (
            self.trials - self.a_correct[delta1],
            self.a_undetected[delta1],
        )
    }

    /// `(total_errors, undetected)` of the reference scheme.
    pub fn reference_counts(&self) -> (u64, u64) {
        self.alg_a_counts(self.a_correct.len() - 1)
    }

    /// `(total_errors, undetected)` of Algorithm B at threshold `t` with
    /// `n_uses` channel uses. Margins are scanned linearly; callers doing
    /// threshold optimization should use sorted copies instead.
    pub fn alg_b_counts(&self, t: Threshold, n_uses: usize) -> (u64, u64) {
        match t {
            Threshold::Disabled => {
                let wrong = self.b_singleton_wrong + self.b_wrong_margins.len() as u64;
                let correct = self.b_singleton_correct + self.b_correct_margins.len() as u64;
                (self.trials - correct, wrong)
            }
            Threshold::Value(t) => {
                let nt = n_uses as f64 * t;
                let wrong_acc = self.b_wrong_margins.iter().filter(|&&m| m >= nt).count() as u64;
                let correct_acc =
                    self.b_correct_margins.iter().filter(|&&m| m >= nt).count() as u64;
                (
                    self.trials - self.b_singleton_correct - correct_acc,
                    self.b_singleton_wrong + wrong_acc,
                )
            }
        }
    }
}

/// Immutable per-campaign state shared across trials.
pub struct Campaign {
    code: SimCode,
    channel: ChannelConfig,
    list_size: usize,
    seed: u64,
    split: OuterSplit,
    codeword_checked: bool,
}

/// Trials per parallel task; fixed so parallel merges are layout-free.
const TRIAL_SHARD: u64 = 256;

impl Campaign {
    pub fn new(code: SimCode, channel: ChannelConfig, list_size: usize, seed: u64) -> Result<Self> {
        let split = split_outer(&code.crc, 0)?;
        Ok(Self {
            code,
            channel,
            list_size,
            seed,
            split,
            codeword_checked: false,
        })
    }

    pub fn delta(&self) -> usize {
        self.code.crc.delta()
    }

    pub fn n_uses(&self) -> usize {
        self.code.n_uses(&self.channel)
    }

    fn run_trial(
        &self,
        t: u64,
        decoder: &mut SclDecoder,
        tally: &mut CampaignTally,
    ) -> Result<()> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(t);
        let k = self.code.k();
        let msg: Vec<u8> = (0..k).map(|_| rng.random_range(0..2u8)).collect();
        let v = crc_encode(&msg, &self.code.crc)?;
        let x = polar_encode(&v, &self.code.polar)?;
        let obs = match self.channel.kind {
            ChannelKind::BiAwgn => transmit_biawgn(&x, self.channel.sigma, &mut rng),
            ChannelKind::PhaseNoise => transmit_phase_noise(
                &qpsk_modulate(&x)?,
                self.channel.sigma,
                self.channel.n_pilots,
                &mut rng,
            )?,
        };
        let list = decoder.decode(&obs.bit_llrs(), &self.code.polar, self.list_size)?;
        let analysis = ListAnalysis::new(&list, &self.split)?;

        tally.trials += 1;
        for delta1 in 0..=self.delta() {
            if let Some((idx, detect_ok)) = analysis.alg_a_decision(delta1) {
                if detect_ok {
                    if list.entries[idx].info == v {
                        tally.a_correct[delta1] += 1;
                    } else {
                        tally.a_undetected[delta1] += 1;
                    }
                }
            }
        }
        match analysis.alg_b_case() {
            AlgBCase::Empty => tally.b_empty += 1,
            AlgBCase::Singleton { best } => {
                if list.entries[best].info == v {
                    tally.b_singleton_correct += 1;
                } else {
                    tally.b_singleton_wrong += 1;
                }
            }
            AlgBCase::Multi { best, margin_log2 } => {
                if list.entries[best].info == v {
                    tally.b_correct_margins.push(margin_log2);
                } else {
                    tally.b_wrong_margins.push(margin_log2);
                }
            }
        }
        Ok(())
    }

    /// Run trials `[start, start + count)` in parallel and return their
    /// tally; identical totals for any worker count.
    pub fn run_trials(&self, start: u64, count: u64) -> Result<CampaignTally> {
        let shards = count.div_ceil(TRIAL_SHARD);
        let partials: Vec<Result<CampaignTally>> = (0..shards)
            .into_par_iter()
            .map(|s| {
                let mut local = CampaignTally::new(self.delta());
                let mut decoder = SclDecoder::new();
                let from = start + s * TRIAL_SHARD;
                let to = (from + TRIAL_SHARD).min(start + count);
                for t in from..to {
                    self.run_trial(t, &mut decoder, &mut local)?;
                }
                Ok(local)
            })
            .collect();
        let mut total = CampaignTally::new(self.delta());
        for p in partials {
            total.merge(p?);
        }
        Ok(total)
    }

    /// Sanity probe: one noiseless-equivalent encode/check round trip.
    fn check_once(&mut self) -> Result<()> {
        if !self.codeword_checked {
            let msg = vec![0u8; self.code.k()];
            let v = crc_encode(&msg, &self.code.crc)?;
            polar_encode(&v, &self.code.polar)?;
            self.codeword_checked = true;
        }
        Ok(())
    }
}

/// Counts of the configured detector extracted from a shared tally.
pub fn config_counts(
    tally: &CampaignTally,
    detector: &DetectorConfig,
    n_uses: usize,
) -> (u64, u64) {
    match detector.scheme {
        Scheme::Reference => tally.reference_counts(),
        Scheme::AlgA => tally.alg_a_counts(detector.delta1),
        Scheme::AlgB => tally.alg_b_counts(detector.threshold, n_uses),
    }
}

/// Wave schedule: exponentially growing batches so cheap failures exit
/// fast while long campaigns amortize the bookkeeping.
fn next_wave(current: u64) -> u64 {
    (current * 2).min(131_072)
}

/// Run one Monte Carlo campaign to its stopping rule.
pub fn run_montecarlo(job: &SimJob) -> Result<SimResult> {
    job.validate()?;
    let start_time = Instant::now();
    let mut campaign = Campaign::new(
        job.code.clone(),
        job.channel,
        job.detector.list_size,
        job.seed,
    )?;
    campaign.check_once()?;
    let n_uses = campaign.n_uses();

    let mut tally = CampaignTally::new(campaign.delta());
    let mut wave = 4096u64.min(job.stopping.max_trials);
    let mut status = SimStatus::BudgetExhausted;
    while tally.trials < job.stopping.max_trials {
        let count = wave.min(job.stopping.max_trials - tally.trials);
        let batch = campaign.run_trials(tally.trials, count)?;
        tally.merge(batch);
        let (errors, undetected) = config_counts(&tally, &job.detector, n_uses);
        if undetected >= job.stopping.min_undetected || errors >= job.stopping.min_total_errors {
            status = SimStatus::ErrorQuotaMet;
            break;
        }
        wave = next_wave(wave);
    }
    let (errors, undetected) = config_counts(&tally, &job.detector, n_uses);
    Ok(SimResult::from_counts(
        tally.trials,
        errors,
        undetected,
        status,
        job.channel.ebn0_db(),
        start_time.elapsed(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polar::design_ga;
    use crate::special::q_func;

    fn toy_job(sigma_ebn0_db: f64, seed: u64) -> SimJob {
        let crc = CrcSpec::from_hex("0x43", 10).unwrap();
        let polar = design_ga(32, crc.codeword_len(), 3.0).unwrap();
        SimJob {
            code: SimCode::new(polar, crc).unwrap(),
            detector: DetectorConfig {
                scheme: Scheme::Reference,
                list_size: 8,
                delta1: 6,
                threshold: Threshold::Disabled,
            },
            channel: ChannelConfig::bi_awgn(sigma_ebn0_db, 10.0 / 32.0).unwrap(),
            stopping: StoppingRule {
                min_undetected: 50,
                min_total_errors: 500,
                max_trials: 20_000,
            },
            seed,
        }
    }

    #[test]
    fn noiseless_job_sees_no_errors() {
        let mut job = toy_job(40.0, 1);
        job.stopping.max_trials = 10_000;
        let res = run_montecarlo(&job).unwrap();
        assert_eq!(res.total_errors, 0);
        assert_eq!(res.undetected_errors, 0);
        assert_eq!(res.status, SimStatus::BudgetExhausted);
        assert_eq!(res.trials, 10_000);
        assert_eq!(res.tep_ci.0, 0.0);
    }

    #[test]
    fn rate_one_toy_matches_analytic_bpsk_block_error() {
        // n_c = 2, h = 2, no CRC: the decoder is exact ML per block, so
        // TEP = 1 - (1 - Q(1/sigma))^2.
        let crc = CrcSpec::none(2);
        let polar = PolarCode::from_frozen_set(2, &[]).unwrap();
        let sigma = 1.0f64;
        let rate = 1.0;
        let job = SimJob {
            code: SimCode::new(polar, crc).unwrap(),
            detector: DetectorConfig {
                scheme: Scheme::Reference,
                list_size: 2,
                delta1: 0,
                threshold: Threshold::Disabled,
            },
            channel: ChannelConfig {
                kind: ChannelKind::BiAwgn,
                sigma,
                n_pilots: 0,
                rate_bpcu: rate,
            },
            stopping: StoppingRule {
                min_undetected: u64::MAX,
                min_total_errors: u64::MAX,
                max_trials: 40_000,
            },
            seed: 9,
        };
        let res = run_montecarlo(&job).unwrap();
        let p_bit = q_func(1.0 / sigma);
        let analytic = 1.0 - (1.0 - p_bit) * (1.0 - p_bit);
        let se = (analytic * (1.0 - analytic) / res.trials as f64).sqrt();
        assert!(
            (res.tep_hat - analytic).abs() < 4.0 * se,
            "tep {} vs analytic {analytic}",
            res.tep_hat
        );
        // Errorless acceptance never happens silently at rate 1: every
        // error is undetected (no CRC, always accepts).
        assert_eq!(res.total_errors, res.undetected_errors);
    }

    #[test]
    fn same_seed_reproduces_bitwise() {
        let a = run_montecarlo(&toy_job(2.0, 7)).unwrap();
        let b = run_montecarlo(&toy_job(2.0, 7)).unwrap();
        assert_eq!(a.trials, b.trials);
        assert_eq!(a.total_errors, b.total_errors);
        assert_eq!(a.undetected_errors, b.undetected_errors);
        assert_eq!(a.tep_hat.to_bits(), b.tep_hat.to_bits());
    }

    #[test]
    fn shard_layout_does_not_change_totals() {
        let job = toy_job(2.0, 11);
        let campaign = Campaign::new(
            job.code.clone(),
            job.channel,
            job.detector.list_size,
            job.seed,
        )
        .unwrap();
        let pool1 = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let pool3 = rayon::ThreadPoolBuilder::new()
            .num_threads(3)
            .build()
            .unwrap();
        let t1 = pool1.install(|| campaign.run_trials(0, 10_000)).unwrap();
        let t3 = pool3.install(|| campaign.run_trials(0, 10_000)).unwrap();
        assert_eq!(t1.trials, t3.trials);
        assert_eq!(t1.a_correct, t3.a_correct);
        assert_eq!(t1.a_undetected, t3.a_undetected);
        assert_eq!(t1.b_empty, t3.b_empty);
        let mut m1 = t1.b_wrong_margins.clone();
        let mut m3 = t3.b_wrong_margins.clone();
        m1.sort_by(f64::total_cmp);
        m3.sort_by(f64::total_cmp);
        assert_eq!(m1, m3);

        // Split-run equivalence: two half campaigns merge to the full one.
        let mut half = campaign.run_trials(0, 5_000).unwrap();
        half.merge(campaign.run_trials(5_000, 5_000).unwrap());
        assert_eq!(half.a_correct, t1.a_correct);
        assert_eq!(half.trials, t1.trials);
    }

    #[test]
    fn uep_never_exceeds_tep_across_schemes_and_params() {
        let job = toy_job(1.0, 13);
        let campaign = Campaign::new(job.code.clone(), job.channel, 8, job.seed).unwrap();
        let tally = campaign.run_trials(0, 20_000).unwrap();
        let n_uses = campaign.n_uses();
        for delta1 in 0..=campaign.delta() {
            let (errs, undet) = tally.alg_a_counts(delta1);
            assert!(undet <= errs, "UEP > TEP at delta1 = {delta1}");
        }
        for t in [0.0, 0.01, 0.05, 0.2] {
            let (errs, undet) = tally.alg_b_counts(Threshold::Value(t), n_uses);
            assert!(undet <= errs, "UEP > TEP at T = {t}");
        }
        let (errs, undet) = tally.alg_b_counts(Threshold::Disabled, n_uses);
        assert!(undet <= errs);
    }

    #[test]
    fn alg_b_counts_monotone_in_threshold() {
        let job = toy_job(1.0, 17);
        let campaign = Campaign::new(job.code.clone(), job.channel, 8, job.seed).unwrap();
        let tally = campaign.run_trials(0, 20_000).unwrap();
        let n_uses = campaign.n_uses();
        let mut prev_undet = u64::MAX;
        let mut prev_errs = 0u64;
        for t in [0.0, 0.02, 0.05, 0.1, 0.3, 1.0] {
            let (errs, undet) = tally.alg_b_counts(Threshold::Value(t), n_uses);
            assert!(undet <= prev_undet, "undetected must fall with T");
            assert!(errs >= prev_errs, "erasures must grow with T");
            prev_undet = undet;
            prev_errs = errs;
        }
    }

    #[test]
    fn stopping_rule_quota_reported() {
        // Low SNR: plenty of errors, the quota trips quickly.
        let mut job = toy_job(-2.0, 19);
        job.stopping = StoppingRule {
            min_undetected: u64::MAX,
            min_total_errors: 200,
            max_trials: 1_000_000,
        };
        let res = run_montecarlo(&job).unwrap();
        assert_eq!(res.status, SimStatus::ErrorQuotaMet);
        assert!(res.total_errors >= 200);
        assert!(res.trials < 1_000_000);
    }

    #[test]
    fn invalid_jobs_rejected() {
        let mut job = toy_job(2.0, 1);
        job.stopping.max_trials = 0;
        assert!(run_montecarlo(&job).is_err());
        let mut job2 = toy_job(2.0, 1);
        job2.detector.delta1 = 99;
        assert!(job2.validate().is_err());
        let mut job3 = toy_job(2.0, 1);
        job3.channel.kind = ChannelKind::PhaseNoise;
        job3.channel.n_pilots = 0;
        assert!(job3.validate().is_err());
    }
}
