//! SNR-threshold search for simulated coding schemes: the smallest Eb/N0
//! at which a scheme meets the target error-probability pair, optimized
//! over the scheme's detection parameters.
//!
//! A point passes only when the Clopper-Pearson upper bounds of both
//! estimates clear the targets, which guards the bisection boundary
//! against optimistic Monte Carlo noise. A point is abandoned early when
//! even the parameter-optimal counts have lower confidence bounds above
//! a target. One shared campaign per SNR point serves every scheme and
//! every parameter value, and evaluated points are cached so several
//! scheme searches can share their bisections.

use super::{Campaign, CampaignTally, SimCode};
use crate::channel::ChannelConfig;
use crate::detect::Scheme;
use crate::error::{Error, Result};
use crate::special::clopper_pearson;
use std::collections::HashMap;

/// Target error probabilities.
#[derive(Debug, Clone, Copy)]
pub struct Targets {
    pub eps_t: f64,
    pub eps_u: f64,
}

impl Targets {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps_u <= self.eps_t && self.eps_u > 0.0) {
            return Err(Error::invalid("targets must satisfy 0 < eps_U* <= eps_T*"));
        }
        Ok(())
    }
}

/// Search options.
#[derive(Debug, Clone, Copy)]
pub struct SearchOpts {
    pub bracket_db: (f64, f64),
    /// Bisection tolerance in dB (0.05 for simulations).
    pub tol_db: f64,
    pub seed: u64,
    /// Trial budget per SNR point; a point that stays undecided fails.
    pub max_trials_per_point: u64,
}

impl Default for SearchOpts {
    fn default() -> Self {
        Self {
            bracket_db: (1.0, 7.0),
            tol_db: 0.05,
            seed: 0x5eed,
            max_trials_per_point: 1_500_000,
        }
    }
}

/// Detection parameters selected at a passing point.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
#[serde(tag = "scheme", rename_all = "kebab-case")]
pub enum SchemeParams {
    Reference,
    AlgA { delta1: usize },
    AlgB { t: f64 },
}

/// Search outcome for one scheme.
#[derive(Debug, Clone, serde::Serialize)]
pub struct SchemeThreshold {
    pub scheme: Scheme,
    pub ebn0_db: f64,
    pub params: SchemeParams,
    pub trials_at_threshold: u64,
    pub tep_at_threshold: f64,
    pub uep_at_threshold: f64,
}

#[derive(Debug, Clone)]
enum PointVerdict {
    Pass {
        params: SchemeParams,
        tep: f64,
        uep: f64,
        trials: u64,
    },
    Fail,
}

impl PointVerdict {
    fn passed(&self) -> bool {
        matches!(self, PointVerdict::Pass { .. })
    }
}

/// Per-scheme pass/fail analysis of a tally.
struct TallyJudge<'a> {
    tally: &'a CampaignTally,
    sorted_wrong: Vec<f64>,
    sorted_correct: Vec<f64>,
    n_uses: usize,
    targets: Targets,
}

enum Judgement {
    Pass(SchemeParams, f64, f64),
    Undecided,
    Hopeless,
}

impl<'a> TallyJudge<'a> {
    fn new(tally: &'a CampaignTally, n_uses: usize, targets: Targets) -> Self {
        let mut sorted_wrong = tally.b_wrong_margins.clone();
        let mut sorted_correct = tally.b_correct_margins.clone();
        sorted_wrong.sort_by(f64::total_cmp);
        sorted_correct.sort_by(f64::total_cmp);
        Self {
            tally,
            sorted_wrong,
            sorted_correct,
            n_uses,
            targets,
        }
    }

    fn ci(&self, count: u64) -> (f64, f64) {
        clopper_pearson(count, self.tally.trials, 0.95)
    }

    fn pass_fail(&self, errors: u64, undetected: u64) -> (bool, bool) {
        let (tep_lo, tep_hi) = self.ci(errors);
        let (uep_lo, uep_hi) = self.ci(undetected);
        let pass = tep_hi <= self.targets.eps_t && uep_hi <= self.targets.eps_u;
        let hopeless = tep_lo > self.targets.eps_t || uep_lo > self.targets.eps_u;
        (pass, hopeless)
    }

    fn judge_reference(&self) -> Judgement {
        let (errors, undetected) = self.tally.reference_counts();
        match self.pass_fail(errors, undetected) {
            (true, _) => Judgement::Pass(
                SchemeParams::Reference,
                errors as f64 / self.tally.trials as f64,
                undetected as f64 / self.tally.trials as f64,
            ),
            (false, true) => Judgement::Hopeless,
            _ => Judgement::Undecided,
        }
    }

    fn judge_alg_a(&self) -> Judgement {
        let mut all_hopeless = true;
        let mut best: Option<(u64, usize)> = None;
        for delta1 in 0..self.tally.a_correct.len() {
            let (errors, undetected) = self.tally.alg_a_counts(delta1);
            let (pass, hopeless) = self.pass_fail(errors, undetected);
            if pass && best.map_or(true, |(e, _)| errors < e) {
                best = Some((errors, delta1));
            }
            all_hopeless &= hopeless;
        }
        if let Some((errors, delta1)) = best {
            let undetected = self.tally.alg_a_counts(delta1).1;
            return Judgement::Pass(
                SchemeParams::AlgA { delta1 },
                errors as f64 / self.tally.trials as f64,
                undetected as f64 / self.tally.trials as f64,
            );
        }
        if all_hopeless {
            Judgement::Hopeless
        } else {
            Judgement::Undecided
        }
    }

    /// Counts at the threshold that keeps only wrong margins at or above
    /// `margin_floor` among the multi-survivor acceptances.
    fn alg_b_counts_excluding(&self, excluded_wrong: usize) -> (u64, u64, f64) {
        // Excluding the j smallest nonnegative wrong margins (T = 0 never
        // accepts a negative margin since Lambda >= 2^(nT) >= 1).
        let first_nonneg = self.sorted_wrong.partition_point(|&m| m < 0.0);
        let nonneg = &self.sorted_wrong[first_nonneg..];
        let j = excluded_wrong.min(nonneg.len());
        let t = if j == 0 {
            0.0
        } else {
            (nonneg[j - 1] / self.n_uses as f64).max(0.0) + 1e-9
        };
        let nt = self.n_uses as f64 * t;
        let wrong_acc = (nonneg.len() - j) as u64;
        let correct_acc =
            (self.sorted_correct.len() - self.sorted_correct.partition_point(|&m| m < nt)) as u64;
        let undetected = self.tally.b_singleton_wrong + wrong_acc;
        let errors = self.tally.trials - self.tally.b_singleton_correct - correct_acc;
        (errors, undetected, t)
    }

    fn judge_alg_b(&self) -> Judgement {
        // uep(j) falls and tep(j) grows as more wrong margins are
        // excluded; pick the smallest exclusion meeting the UEP target.
        let first_nonneg = self.sorted_wrong.partition_point(|&m| m < 0.0);
        let max_j = self.sorted_wrong.len() - first_nonneg;
        let feasible_j = (0..=max_j).find(|&j| {
            let (_, undetected, _) = self.alg_b_counts_excluding(j);
            self.ci(undetected).1 <= self.targets.eps_u
        });
        if let Some(j) = feasible_j {
            let (errors, undetected, t) = self.alg_b_counts_excluding(j);
            if self.ci(errors).1 <= self.targets.eps_t {
                return Judgement::Pass(
                    SchemeParams::AlgB { t },
                    errors as f64 / self.tally.trials as f64,
                    undetected as f64 / self.tally.trials as f64,
                );
            }
        }
        // Hopeless when even the extremes are out of reach: the UEP floor
        // is the singleton-wrong rate, the TEP floor sits at T = 0.
        let (uep_floor_lo, _) = self.ci(self.tally.b_singleton_wrong);
        let (min_errors, _, _) = self.alg_b_counts_excluding(0);
        let (tep_floor_lo, _) = self.ci(min_errors);
        if uep_floor_lo > self.targets.eps_u || tep_floor_lo > self.targets.eps_t {
            Judgement::Hopeless
        } else {
            Judgement::Undecided
        }
    }

    fn judge(&self, scheme: Scheme) -> Judgement {
        match scheme {
            Scheme::Reference => self.judge_reference(),
            Scheme::AlgA => self.judge_alg_a(),
            Scheme::AlgB => self.judge_alg_b(),
        }
    }
}

/// Threshold searcher with a shared point cache.
pub struct ThresholdSim {
    code: SimCode,
    channel_base: ChannelConfig,
    list_size: usize,
    targets: Targets,
    opts: SearchOpts,
    schemes: Vec<Scheme>,
    cache: HashMap<i64, HashMap<u8, PointVerdict>>,
}

fn scheme_key(s: Scheme) -> u8 {
    match s {
        Scheme::Reference => 0,
        Scheme::AlgA => 1,
        Scheme::AlgB => 2,
    }
}

impl ThresholdSim {
    pub fn new(
        code: SimCode,
        channel_base: ChannelConfig,
        list_size: usize,
        targets: Targets,
        opts: SearchOpts,
        schemes: Vec<Scheme>,
    ) -> Result<Self> {
        targets.validate()?;
        if schemes.is_empty() {
            return Err(Error::invalid("no schemes to search"));
        }
        Ok(Self {
            code,
            channel_base,
            list_size,
            targets,
            opts,
            schemes,
            cache: HashMap::new(),
        })
    }

    fn snr_key(snr_db: f64) -> i64 {
        (snr_db * 1e6).round() as i64
    }

    fn evaluate_point(&mut self, ebn0_db: f64) -> Result<&HashMap<u8, PointVerdict>> {
        let key = Self::snr_key(ebn0_db);
        if !self.cache.contains_key(&key) {
            let channel = self.channel_base.at_ebn0(ebn0_db)?;
            let campaign = Campaign::new(self.code.clone(), channel, self.list_size, self.opts.seed)?;
            let n_uses = campaign.n_uses();
            let mut tally = CampaignTally::new(campaign.delta());
            let mut verdicts: HashMap<u8, PointVerdict> = HashMap::new();
            let mut wave = 4096u64;
            while (verdicts.len() as usize) < self.schemes.len()
                && tally.trials < self.opts.max_trials_per_point
            {
                let count = wave.min(self.opts.max_trials_per_point - tally.trials);
                tally.merge(campaign.run_trials(tally.trials, count)?);
                let judge = TallyJudge::new(&tally, n_uses, self.targets);
                for &scheme in &self.schemes {
                    if verdicts.contains_key(&scheme_key(scheme)) {
                        continue;
                    }
                    match judge.judge(scheme) {
                        Judgement::Pass(params, tep, uep) => {
                            verdicts.insert(
                                scheme_key(scheme),
                                PointVerdict::Pass {
                                    params,
                                    tep,
                                    uep,
                                    trials: tally.trials,
                                },
                            );
                        }
                        Judgement::Hopeless => {
                            verdicts.insert(scheme_key(scheme), PointVerdict::Fail);
                        }
                        Judgement::Undecided => {}
                    }
                }
                wave = super::next_wave(wave);
            }
            for &scheme in &self.schemes {
                verdicts
                    .entry(scheme_key(scheme))
                    .or_insert(PointVerdict::Fail);
            }
            self.cache.insert(key, verdicts);
        }
        Ok(&self.cache[&key])
    }

    fn verdict(&mut self, ebn0_db: f64, scheme: Scheme) -> Result<PointVerdict> {
        if !self.schemes.contains(&scheme) {
            return Err(Error::invalid(format!(
                "scheme {scheme} not registered with this searcher"
            )));
        }
        Ok(self.evaluate_point(ebn0_db)?[&scheme_key(scheme)].clone())
    }

    /// Bisect the SNR threshold of one scheme.
    pub fn search(&mut self, scheme: Scheme) -> Result<SchemeThreshold> {
        let (mut lo, mut hi) = self.opts.bracket_db;
        if self.verdict(lo, scheme)?.passed() {
            return Err(Error::NotFound(format!(
                "{scheme} already meets the targets at the bracket bottom {lo} dB"
            )));
        }
        if !self.verdict(hi, scheme)?.passed() {
            return Err(Error::NotFound(format!(
                "{scheme} misses the targets across the whole bracket (top {hi} dB)"
            )));
        }
        while hi - lo > self.opts.tol_db {
            let mid = 0.5 * (lo + hi);
            if self.verdict(mid, scheme)?.passed() {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        match self.verdict(hi, scheme)? {
            PointVerdict::Pass {
                params,
                tep,
                uep,
                trials,
            } => Ok(SchemeThreshold {
                scheme,
                ebn0_db: hi,
                params,
                trials_at_threshold: trials,
                tep_at_threshold: tep,
                uep_at_threshold: uep,
            }),
            PointVerdict::Fail => unreachable!("bisection keeps hi passing"),
        }
    }
}

/// One-call threshold search for a single scheme (Definition-3 style).
pub fn snr_threshold_sim(
    code: SimCode,
    channel_base: ChannelConfig,
    scheme: Scheme,
    list_size: usize,
    targets: Targets,
    opts: SearchOpts,
) -> Result<SchemeThreshold> {
    ThresholdSim::new(code, channel_base, list_size, targets, opts, vec![scheme])?.search(scheme)
}
