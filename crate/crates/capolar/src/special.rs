//! Scalar special functions used by the bound engine and the campaign
//! statistics: error functions, Gaussian tails, log-gamma, the regularized
//! incomplete beta function, and exact binomial (Clopper-Pearson) intervals.
//!
//! Everything here is self-contained f64 code. The error-function family
//! follows Cody's rational Chebyshev approximations (SPECFUN `calerf`),
//! which stay accurate deep into the tail and provide the scaled
//! complement `erfcx` needed by the saddlepoint evaluator.

use std::f64::consts::PI;

const ERF_THRESH_SMALL: f64 = 0.46875;
const ERF_THRESH_MID: f64 = 4.0;

// Coefficients for |x| <= 0.46875 (erf).
const ERF_A: [f64; 5] = [
    3.16112374387056560e0,
    1.13864154151050156e2,
    3.77485237685302021e2,
    3.20937758913846947e3,
    1.85777706184603153e-1,
];
const ERF_B: [f64; 4] = [
    2.36012909523441209e1,
    2.44024637934444173e2,
    1.28261652607737228e3,
    2.84423683343917062e3,
];

// Coefficients for 0.46875 < |x| <= 4.0 (erfc, scaled).
const ERF_C: [f64; 9] = [
    5.64188496988670089e-1,
    8.88314979438837594e0,
    6.61191906371416295e1,
    2.98635138197400131e2,
    8.81952221241769090e2,
    1.71204761263407058e3,
    2.05107837782607147e3,
    1.23033935479799725e3,
    2.15311535474403846e-8,
];
const ERF_D: [f64; 8] = [
    1.57449261107098347e1,
    1.17693950891312499e2,
    5.37181101862009858e2,
    1.62138957456669019e3,
    3.29079923573345963e3,
    4.36261909014324716e3,
    3.43936767414372164e3,
    1.23033935480374942e3,
];

// Coefficients for |x| > 4.0 (erfc, scaled).
const ERF_P: [f64; 6] = [
    3.05326634961232344e-1,
    3.60344899949804439e-1,
    1.25781726111229246e-1,
    1.60837851487422766e-2,
    6.58749161529837803e-4,
    1.63153871373020978e-2,
];
const ERF_Q: [f64; 5] = [
    2.56852019228982242e0,
    1.87295284992346047e0,
    5.27905102951428412e-1,
    6.05183413124413191e-2,
    2.33520497626869185e-3,
];

const INV_SQRT_PI: f64 = 0.564_189_583_547_756_3;

/// erfc(x)·exp(x²) for the mid and far regimes; valid for y > 0.46875.
fn erfcx_scaled_pos(y: f64) -> f64 {
    if y <= ERF_THRESH_MID {
        let mut xnum = ERF_C[8] * y;
        let mut xden = y;
        for i in 0..7 {
            xnum = (xnum + ERF_C[i]) * y;
            xden = (xden + ERF_D[i]) * y;
        }
        (xnum + ERF_C[7]) / (xden + ERF_D[7])
    } else {
        let z = 1.0 / (y * y);
        let mut xnum = ERF_P[5] * z;
        let mut xden = z;
        for i in 0..4 {
            xnum = (xnum + ERF_P[i]) * z;
            xden = (xden + ERF_Q[i]) * z;
        }
        let r = z * (xnum + ERF_P[4]) / (xden + ERF_Q[4]);
        (INV_SQRT_PI - r) / y
    }
}

/// exp(-y²) computed with the split-argument trick to preserve accuracy
/// of the product erfc = exp(-y²)·erfcx.
fn exp_neg_sq(y: f64) -> f64 {
    let ysq = (y * 16.0).trunc() / 16.0;
    let del = (y - ysq) * (y + ysq);
    (-ysq * ysq).exp() * (-del).exp()
}

/// Error function.
pub fn erf(x: f64) -> f64 {
    let y = x.abs();
    if y <= ERF_THRESH_SMALL {
        let z = y * y;
        let mut xnum = ERF_A[4] * z;
        let mut xden = z;
        for i in 0..3 {
            xnum = (xnum + ERF_A[i]) * z;
            xden = (xden + ERF_B[i]) * z;
        }
        x * (xnum + ERF_A[3]) / (xden + ERF_B[3])
    } else {
        let e = 1.0 - erfc_pos(y);
        if x < 0.0 {
            -e
        } else {
            e
        }
    }
}

fn erfc_pos(y: f64) -> f64 {
    if y <= ERF_THRESH_SMALL {
        1.0 - erf(y)
    } else if y > 26.6 {
        0.0
    } else {
        exp_neg_sq(y) * erfcx_scaled_pos(y)
    }
}

/// Complementary error function.
pub fn erfc(x: f64) -> f64 {
    if x < 0.0 {
        2.0 - erfc_pos(-x)
    } else {
        erfc_pos(x)
    }
}

/// Scaled complementary error function erfcx(x) = exp(x²)·erfc(x).
///
/// Does not overflow or underflow for large positive x, which is what the
/// saddlepoint prefactor needs.
pub fn erfcx(x: f64) -> f64 {
    if x < 0.0 {
        // 2 exp(x²) - erfcx(-x); overflows (correctly) for very negative x.
        let e = (x * x).exp();
        2.0 * e - erfcx(-x)
    } else if x <= ERF_THRESH_SMALL {
        (x * x).exp() * (1.0 - erf(x))
    } else {
        erfcx_scaled_pos(x)
    }
}

/// Gaussian tail Q(x) = P[N(0,1) > x].
pub fn q_func(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Natural log of the gamma function (Lanczos, g = 7, 9 terms).
pub fn ln_gamma(x: f64) -> f64 {
    const G: [f64; 9] = [
        0.999_999_999_999_809_93,
        676.520_368_121_885_1,
        -1259.139_216_722_402_8,
        771.323_428_777_653_13,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        // Reflection.
        (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x)
    } else {
        let x = x - 1.0;
        let mut a = G[0];
        let t = x + 7.5;
        for (i, &g) in G.iter().enumerate().skip(1) {
            a += g / (x + i as f64);
        }
        0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
    }
}

/// Regularized incomplete beta function I_x(a, b).
pub fn inc_beta(a: f64, b: f64, x: f64) -> f64 {
    assert!(a > 0.0 && b > 0.0, "inc_beta requires positive parameters");
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    // The continued fraction converges rapidly for x < (a+1)/(a+b+2);
    // use the symmetry I_x(a,b) = 1 - I_{1-x}(b,a) otherwise.
    if x < (a + 1.0) / (a + b + 2.0) {
        ln_front.exp() * beta_cf(a, b, x) / a
    } else {
        1.0 - ln_front.exp() * beta_cf(b, a, 1.0 - x) / b
    }
}

/// Lentz's continued fraction for the incomplete beta function.
fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-15;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..300 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Inverse of I_x(a, b) in x, by bisection (monotone in x).
pub fn inc_beta_inv(a: f64, b: f64, p: f64) -> f64 {
    assert!((0.0..=1.0).contains(&p));
    if p <= 0.0 {
        return 0.0;
    }
    if p >= 1.0 {
        return 1.0;
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if inc_beta(a, b, mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Two-sided Clopper-Pearson interval for `successes` out of `trials`
/// at the given confidence level (e.g. 0.95).
pub fn clopper_pearson(successes: u64, trials: u64, confidence: f64) -> (f64, f64) {
    assert!(trials > 0, "clopper_pearson requires at least one trial");
    assert!(successes <= trials);
    let alpha = 1.0 - confidence;
    let k = successes as f64;
    let n = trials as f64;
    let lo = if successes == 0 {
        0.0
    } else {
        inc_beta_inv(k, n - k + 1.0, alpha / 2.0)
    };
    let hi = if successes == trials {
        1.0
    } else {
        inc_beta_inv(k + 1.0, n - k, 1.0 - alpha / 2.0)
    };
    (lo, hi)
}

/// Numerically stable log(1 + exp(x)).
pub fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Stable log(sum(exp(v))) over a slice.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let m = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    let s: f64 = values.iter().map(|&v| (v - m).exp()).sum();
    m + s.ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference values from standard tables (15+ significant digits).
    #[test]
    fn erf_reference_values() {
        let cases = [
            (0.0, 0.0),
            (0.1, 0.1124629160182849),
            (0.5, 0.5204998778130465),
            (1.0, 0.8427007929497149),
            (2.0, 0.9953222650189527),
            (-1.0, -0.8427007929497149),
        ];
        for (x, want) in cases {
            assert!((erf(x) - want).abs() < 1e-14, "erf({x})");
        }
    }

    #[test]
    fn erfc_reference_values() {
        let cases = [
            (0.5, 0.47950012218695346),
            (1.0, 0.15729920705028513),
            (2.0, 0.004677734981047266),
            (3.0, 2.2090496998585441e-5),
            (5.0, 1.5374597944280349e-12),
            (10.0, 2.088487583762545e-45),
            (-1.0, 1.842700792949715),
        ];
        for (x, want) in cases {
            let got = erfc(x);
            assert!(
                (got - want).abs() / want.abs().max(1e-300) < 1e-12,
                "erfc({x}) = {got}, want {want}"
            );
        }
    }

    #[test]
    fn erfcx_consistent_with_erfc() {
        for &x in &[0.1f64, 0.5, 1.0, 2.0, 4.0, 6.0, 10.0, 20.0] {
            let direct = (x * x).exp() * erfc(x);
            let scaled = erfcx(x);
            assert!(
                (scaled - direct).abs() / direct < 1e-10,
                "erfcx({x}): {scaled} vs {direct}"
            );
        }
        // Far tail: asymptotic 1/(x sqrt(pi)).
        let x = 1.0e4;
        let asym = 1.0 / (x * PI.sqrt());
        assert!((erfcx(x) - asym).abs() / asym < 1e-6);
    }

    #[test]
    fn q_func_tails() {
        assert!((q_func(0.0) - 0.5).abs() < 1e-15);
        // Q(3) = 0.0013498980316300945
        assert!((q_func(3.0) - 0.0013498980316300945).abs() < 1e-15);
        assert!((normal_cdf(1.0) + q_func(1.0) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn ln_gamma_reference_values() {
        assert!((ln_gamma(0.5) - 0.5723649429247001).abs() < 1e-12);
        assert!((ln_gamma(1.0)).abs() < 1e-12);
        assert!((ln_gamma(5.0) - 24f64.ln()).abs() < 1e-12);
        assert!((ln_gamma(10.5) - 13.940625219403764).abs() < 1e-10);
    }

    #[test]
    fn inc_beta_integer_cases() {
        // I_x(2,5) = 1 - (1-x)^6 - 6 x (1-x)^5 evaluated via binomial tail.
        let x = 0.3f64;
        let want = 1.0 - (0.7f64).powi(6) - 6.0 * 0.3 * (0.7f64).powi(5);
        assert!((inc_beta(2.0, 5.0, x) - want).abs() < 1e-12);
        assert!((inc_beta(2.0, 2.0, 0.5) - 0.5).abs() < 1e-12);
        // Symmetry.
        assert!((inc_beta(3.0, 4.0, 0.2) + inc_beta(4.0, 3.0, 0.8) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn inc_beta_inv_round_trip() {
        for &(a, b) in &[(1.0, 1.0), (2.0, 5.0), (30.0, 70.0), (0.5, 0.5)] {
            for &p in &[0.01, 0.2, 0.5, 0.9, 0.999] {
                let x = inc_beta_inv(a, b, p);
                assert!(
                    (inc_beta(a, b, x) - p).abs() < 1e-10,
                    "round trip a={a} b={b} p={p}"
                );
            }
        }
    }

    #[test]
    fn clopper_pearson_zero_successes_closed_form() {
        // With k = 0, the upper bound is 1 - (alpha/2)^(1/n).
        for &n in &[10u64, 100, 1000] {
            let (lo, hi) = clopper_pearson(0, n, 0.95);
            assert_eq!(lo, 0.0);
            let want = 1.0 - (0.025f64).powf(1.0 / n as f64);
            assert!((hi - want).abs() < 1e-9, "n={n}: {hi} vs {want}");
        }
    }

    #[test]
    fn clopper_pearson_all_successes_closed_form() {
        let (lo, hi) = clopper_pearson(50, 50, 0.95);
        assert_eq!(hi, 1.0);
        let want = (0.025f64).powf(1.0 / 50.0);
        assert!((lo - want).abs() < 1e-9);
    }

    #[test]
    fn clopper_pearson_brackets_point_estimate() {
        let (lo, hi) = clopper_pearson(13, 200, 0.95);
        let p = 13.0 / 200.0;
        assert!(lo < p && p < hi);
        assert!(lo > 0.03 && hi < 0.12);
    }

    #[test]
    fn softplus_and_lse() {
        assert!((softplus(0.0) - 2f64.ln()).abs() < 1e-15);
        assert!((softplus(50.0) - 50.0).abs() < 1e-12);
        assert!(softplus(-745.0) >= 0.0);
        let v = [1.0f64, 2.0, 3.0];
        let direct = (1f64.exp() + 2f64.exp() + 3f64.exp()).ln();
        assert!((log_sum_exp(&v) - direct).abs() < 1e-12);
        assert_eq!(log_sum_exp(&[f64::NEG_INFINITY]), f64::NEG_INFINITY);
    }
}
