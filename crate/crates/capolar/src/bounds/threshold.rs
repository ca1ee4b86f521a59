//! SNR-threshold searches on the achievability bounds: the smallest Eb/N0
//! at which a bound meets the target `(eps_T*, eps_U*)` pair.

use super::forney::{forney_bound, quantize_biawgn};
use super::rcu::{rcu_bound, thm1_bounds, BoundChannel, Thm2Eval};
use super::BoundParams;
use crate::channel::snr_to_sigma;
use crate::error::{Error, Result};

/// Which bound to search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundKind {
    Rcu,
    Thm1,
    Thm2,
    Forney,
}

/// Channel family, parameterized by the operating Eb/N0.
#[derive(Debug, Clone, Copy)]
pub enum BoundFamily {
    BiAwgn {
        rate_bpcu: f64,
    },
    PhaseNoise {
        rate_bpcu: f64,
        n_pilots: usize,
    },
}

impl BoundFamily {
    pub fn rate(&self) -> f64 {
        match *self {
            BoundFamily::BiAwgn { rate_bpcu } => rate_bpcu,
            BoundFamily::PhaseNoise { rate_bpcu, .. } => rate_bpcu,
        }
    }

    pub fn channel_at(&self, ebn0_db: f64) -> Result<BoundChannel> {
        let sigma = snr_to_sigma(ebn0_db, self.rate())?;
        Ok(match *self {
            BoundFamily::BiAwgn { .. } => BoundChannel::BiAwgn { sigma },
            BoundFamily::PhaseNoise { n_pilots, .. } => BoundChannel::PhaseNoise {
                sigma,
                n_pilots,
                perfect_csi: false,
            },
        })
    }
}

/// Search configuration.
#[derive(Debug, Clone, Copy)]
pub struct ThresholdSearch {
    pub n_uses: usize,
    pub k: usize,
    pub eps_t_target: f64,
    pub eps_u_target: f64,
    pub samples: u64,
    pub seed: u64,
    pub snr_lo_db: f64,
    pub snr_hi_db: f64,
    /// Bisection tolerance in dB (0.01 for bounds).
    pub tol_db: f64,
}

impl ThresholdSearch {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps_u_target <= self.eps_t_target) {
            return Err(Error::invalid("targets must satisfy eps_U* <= eps_T*"));
        }
        if self.snr_lo_db >= self.snr_hi_db {
            return Err(Error::invalid("empty SNR bracket"));
        }
        Ok(())
    }

    /// Parity budget `delta = ceil(log2(eps_T*/eps_U*))` used by the
    /// outer-code bound (base-2 log, matching the `2^-delta` UEP factor).
    pub fn delta_for_targets(&self) -> usize {
        (self.eps_t_target / self.eps_u_target).log2().ceil().max(0.0) as usize
    }
}

/// Result of a bound threshold search.
#[derive(Debug, Clone, serde::Serialize)]
pub struct BoundThreshold {
    pub kind: BoundKind,
    pub ebn0_db: f64,
    /// Bound parameters at the threshold point.
    pub params: BoundParams,
    pub eps_t: f64,
    pub eps_u: f64,
}

/// One evaluated bound point (JSON record of the `bound` subcommand).
#[derive(Debug, Clone, serde::Serialize)]
pub struct BoundRecord {
    pub which: BoundKind,
    pub ebn0_db: f64,
    pub params: BoundParams,
    pub eps_t: f64,
    pub eps_u: f64,
    pub mc_std_err: f64,
}

/// Optimize `(s, lambda)` of the threshold bound at one SNR: pin
/// `eps_U = eps_U*` by bisection on lambda for each `s`, minimize the
/// resulting `eps_T` over `s` by coarse grid plus golden-section
/// refinement.
pub fn thm2_optimize(
    k: usize,
    n_uses: usize,
    channel: BoundChannel,
    samples: u64,
    seed: u64,
    eps_u_target: f64,
    s_grid: &[f64],
) -> Result<(BoundParams, f64, f64, f64)> {
    thm2_optimize_hinted(k, n_uses, channel, samples, seed, eps_u_target, s_grid, None)
}

/// Like [`thm2_optimize`], warm-started from a previous `(s, lambda)`
/// optimum (continuation along an SNR sweep): skips the coarse s grid and
/// refines locally.
#[allow(clippy::too_many_arguments)]
pub fn thm2_optimize_hinted(
    k: usize,
    n_uses: usize,
    channel: BoundChannel,
    samples: u64,
    seed: u64,
    eps_u_target: f64,
    s_grid: &[f64],
    hint: Option<(f64, f64)>,
) -> Result<(BoundParams, f64, f64, f64)> {
    assert!(!s_grid.is_empty());
    let last_lambda = std::cell::Cell::new(hint.map(|(_, l)| l));
    let eval_s = |s: f64| -> Result<(f64, f64, f64)> {
        let ev = Thm2Eval::new(k, n_uses, channel, samples, seed, s)?;
        let (lambda, eps_t, eps_u) = ev.optimize_lambda(eps_u_target, last_lambda.get())?;
        last_lambda.set(Some(lambda));
        Ok((lambda, eps_t, eps_u))
    };

    // (s, lambda, eps_t, eps_u)
    let (coarse, window) = match hint {
        Some((s0, _)) => {
            let (lambda, eps_t, eps_u) = eval_s(s0)?;
            ((s0, lambda, eps_t, eps_u), 0.35)
        }
        None => {
            let mut best: Option<(f64, f64, f64, f64)> = None;
            for &s in s_grid {
                let (lambda, eps_t, eps_u) = eval_s(s)?;
                if best.map_or(true, |b| eps_t < b.2) {
                    best = Some((s, lambda, eps_t, eps_u));
                }
            }
            (best.expect("nonempty grid"), grid_step(s_grid))
        }
    };

    // Golden-section refinement around the incumbent.
    let (mut a, mut b) = ((coarse.0 - window).max(1e-3), coarse.0 + window);
    const PHI: f64 = 0.618_033_988_749_894_8;
    let mut x1 = b - PHI * (b - a);
    let mut x2 = a + PHI * (b - a);
    let mut f1 = eval_s(x1)?;
    let mut f2 = eval_s(x2)?;
    let mut best = coarse;
    for _ in 0..6 {
        if f1.1 <= f2.1 {
            if f1.1 < best.2 {
                best = (x1, f1.0, f1.1, f1.2);
            }
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - PHI * (b - a);
            f1 = eval_s(x1)?;
        } else {
            if f2.1 < best.2 {
                best = (x2, f2.0, f2.1, f2.2);
            }
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + PHI * (b - a);
            f2 = eval_s(x2)?;
        }
    }
    // Standard error of the winning eps_t estimate.
    let se = Thm2Eval::new(k, n_uses, channel, samples, seed, best.0)?
        .eps_t(best.1)
        .1;
    Ok((
        BoundParams::Thm2 {
            s: best.0,
            lambda: best.1,
        },
        best.2,
        best.3,
        se,
    ))
}

fn grid_step(grid: &[f64]) -> f64 {
    if grid.len() < 2 {
        0.25
    } else {
        grid[1] - grid[0]
    }
}

/// Default s grid for the threshold-bound optimization.
pub fn default_s_grid() -> Vec<f64> {
    (1..=8).map(|i| 0.25 * i as f64).collect()
}

/// Quantizer resolution for the exponent bound.
const FORNEY_LEVELS: usize = 2000;
const FORNEY_SPAN_SIGMAS: f64 = 8.0;

/// Evaluate one bound at one SNR.
pub fn evaluate_at_snr(
    kind: BoundKind,
    family: BoundFamily,
    search: &ThresholdSearch,
    ebn0_db: f64,
) -> Result<BoundRecord> {
    let record = |b: super::BoundResult| BoundRecord {
        which: kind,
        ebn0_db,
        params: b.params,
        eps_t: b.eps_t,
        eps_u: b.eps_u,
        mc_std_err: b.mc_std_err,
    };
    match kind {
        BoundKind::Rcu => Ok(record(rcu_bound(
            search.k,
            search.n_uses,
            family.channel_at(ebn0_db)?,
            search.samples,
            search.seed,
        ))),
        BoundKind::Thm1 => {
            let delta = search.delta_for_targets();
            Ok(record(thm1_bounds(
                search.k,
                search.n_uses,
                delta,
                family.channel_at(ebn0_db)?,
                search.samples,
                search.seed,
            )))
        }
        BoundKind::Thm2 => {
            let (params, eps_t, eps_u, se) = thm2_optimize(
                search.k,
                search.n_uses,
                family.channel_at(ebn0_db)?,
                search.samples,
                search.seed,
                search.eps_u_target,
                &default_s_grid(),
            )?;
            Ok(BoundRecord {
                which: kind,
                ebn0_db,
                params,
                eps_t,
                eps_u,
                mc_std_err: se,
            })
        }
        BoundKind::Forney => {
            let BoundFamily::BiAwgn { rate_bpcu } = family else {
                return Err(Error::Config(
                    "the exponent bound is evaluated on the quantized biAWGN channel only".into(),
                ));
            };
            // T chosen so eps_U/eps_T matches the target ratio exactly.
            let t = (search.eps_t_target / search.eps_u_target).log2() / search.n_uses as f64;
            let sigma = snr_to_sigma(ebn0_db, rate_bpcu)?;
            let dmc = quantize_biawgn(sigma, FORNEY_LEVELS, FORNEY_SPAN_SIGMAS)?;
            let b = forney_bound(search.n_uses, search.k as f64 / search.n_uses as f64, t, &dmc)?;
            Ok(record(b))
        }
    }
}

/// Bisect the smallest Eb/N0 at which `kind` meets the targets.
///
/// The outer-code bound is bisected against `eps_T*` (its parity budget
/// already guarantees the UEP ratio); the threshold bound pins
/// `eps_U = eps_U*` pointwise and is likewise bisected against `eps_T*`.
pub fn snr_threshold_bound(
    kind: BoundKind,
    family: BoundFamily,
    search: &ThresholdSearch,
) -> Result<BoundThreshold> {
    search.validate()?;
    // Continuation state for the threshold bound's (s, lambda) optimum.
    let hint = std::cell::Cell::new(None::<(f64, f64)>);
    let passes = |snr: f64| -> Result<bool> {
        let (eps_t, eps_u) = if kind == BoundKind::Thm2 {
            let (params, eps_t, eps_u, _) = thm2_optimize_hinted(
                search.k,
                search.n_uses,
                family.channel_at(snr)?,
                search.samples,
                search.seed,
                search.eps_u_target,
                &default_s_grid(),
                hint.get(),
            )?;
            if let BoundParams::Thm2 { s, lambda } = params {
                hint.set(Some((s, lambda)));
            }
            (eps_t, eps_u)
        } else {
            let r = evaluate_at_snr(kind, family, search, snr)?;
            (r.eps_t, r.eps_u)
        };
        Ok(eps_t <= search.eps_t_target && eps_u <= search.eps_u_target)
    };
    if passes(search.snr_lo_db)? {
        return Err(Error::NotFound(format!(
            "bound already meets the targets at the bracket bottom {} dB",
            search.snr_lo_db
        )));
    }
    if !passes(search.snr_hi_db)? {
        return Err(Error::NotFound(format!(
            "bound misses the targets at the bracket top {} dB",
            search.snr_hi_db
        )));
    }
    let (mut lo, mut hi) = (search.snr_lo_db, search.snr_hi_db);
    while hi - lo > search.tol_db {
        let mid = 0.5 * (lo + hi);
        if passes(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let r = evaluate_at_snr(kind, family, search, hi)?;
    Ok(BoundThreshold {
        kind,
        ebn0_db: hi,
        params: r.params,
        eps_t: r.eps_t,
        eps_u: r.eps_u,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn search(n: usize, k: usize, samples: u64) -> ThresholdSearch {
        ThresholdSearch {
            n_uses: n,
            k,
            eps_t_target: 1e-3,
            eps_u_target: 1e-5,
            samples,
            seed: 42,
            snr_lo_db: 0.0,
            snr_hi_db: 9.0,
            tol_db: 0.05,
        }
    }

    #[test]
    fn delta_selection_matches_target_ratio() {
        let s = search(64, 32, 1000);
        assert_eq!(s.delta_for_targets(), 7); // ceil(log2(100))
        let equal = ThresholdSearch {
            eps_u_target: 1e-3,
            ..s
        };
        assert_eq!(equal.delta_for_targets(), 0);
    }

    #[test]
    fn validation_rejects_bad_targets() {
        let mut s = search(64, 32, 1000);
        s.eps_u_target = 1e-2;
        assert!(s.validate().is_err());
    }

    #[test]
    fn forney_threshold_pins_uep_ratio() {
        let family = BoundFamily::BiAwgn { rate_bpcu: 0.5 };
        let s = search(64, 32, 1);
        let res = snr_threshold_bound(BoundKind::Forney, family, &s).unwrap();
        // At the threshold both constraints hold and the ratio is exact.
        assert!(res.eps_t <= 1e-3);
        let ratio = res.eps_u / res.eps_t;
        assert!((ratio - 1e-2).abs() < 1e-12, "ratio {ratio}");
        // The exponent bound at n = 64 sits several dB above capacity.
        assert!(res.ebn0_db > 3.0 && res.ebn0_db < 9.0, "{}", res.ebn0_db);
    }

    #[test]
    fn thm1_threshold_bisection_converges() {
        let family = BoundFamily::BiAwgn { rate_bpcu: 0.5 };
        let s = search(64, 32, 20_000);
        let res = snr_threshold_bound(BoundKind::Thm1, family, &s).unwrap();
        assert!(res.eps_t <= 1e-3);
        assert!(res.eps_u <= 1e-5);
        // Moving 0.2 dB below the threshold must violate the target.
        let below = evaluate_at_snr(BoundKind::Thm1, family, &s, res.ebn0_db - 0.2).unwrap();
        assert!(below.eps_t > 1e-3);
    }

    #[test]
    fn unreachable_targets_reported() {
        let family = BoundFamily::BiAwgn { rate_bpcu: 0.5 };
        let mut s = search(64, 32, 2_000);
        s.snr_hi_db = 0.5; // far below any feasible operating point
        s.snr_lo_db = 0.0;
        assert!(matches!(
            snr_threshold_bound(BoundKind::Thm1, family, &s),
            Err(Error::NotFound(_))
        ));
    }
}
