//! The error-exponent achievability bound of the optimum erasure decoder
//! over a DMC, with output quantization for the biAWGN channel.

use super::{BoundParams, BoundResult, DmcSpec};
use crate::error::{Error, Result};
use crate::special::normal_cdf;

/// The two-parameter exponent function
/// `E0(s, rho) = -log2 sum_y (sum_x P(x) P(y|x)^(1-s)) (sum_x P(x) P(y|x)^(s/rho))^rho`.
pub fn forney_e0(s: f64, rho: f64, dmc: &DmcSpec) -> Result<f64> {
    if !(rho > 0.0 && rho <= 1.0 && s >= 0.0 && s <= rho) {
        return Err(Error::invalid(format!(
            "exponent parameters must satisfy 0 <= s <= rho <= 1, rho > 0; got s={s}, rho={rho}"
        )));
    }
    let px = dmc.input_probs();
    let tr = dmc.transition();
    let mut total = 0.0;
    for y in 0..dmc.num_outputs() {
        let mut a = 0.0;
        let mut b = 0.0;
        for x in 0..dmc.num_inputs() {
            let p = tr[x][y];
            // IEEE powf gives 0^e = 0 for e > 0 and 0^0 = 1, which is
            // the convention that keeps E0(0, rho) = 0 on channels with
            // structural zeros.
            a += px[x] * p.powf(1.0 - s);
            b += px[x] * p.powf(s / rho);
        }
        total += a * b.powf(rho);
    }
    Ok(-total.log2())
}

/// Objective of the exponent maximization at rate `r` and threshold `t`.
fn e1_objective(s: f64, rho: f64, r: f64, t: f64, dmc: &DmcSpec) -> f64 {
    match forney_e0(s, rho, dmc) {
        Ok(e0) => e0 - rho * r - s * t,
        Err(_) => f64::NEG_INFINITY,
    }
}

/// Erasure-decoder exponents `E1 = max_{0<=s<=rho<=1} [E0 - rho R - s T]`
/// and `E2 = E1 + T`, maximized by a grid scan over the (s, rho) triangle
/// followed by Nelder-Mead refinement.
pub fn forney_exponents(r: f64, t: f64, dmc: &DmcSpec) -> Result<(f64, f64)> {
    if !(r > 0.0) {
        return Err(Error::invalid("rate must be positive"));
    }
    if !(t >= 0.0) {
        return Err(Error::invalid("threshold must be nonnegative"));
    }
    const GRID: usize = 64;
    let mut best = (0.0f64, 1e-6f64, f64::NEG_INFINITY);
    for i in 0..=GRID {
        // rho in (0, 1]; avoid the removable singularity at rho = 0.
        let rho = (i as f64 / GRID as f64).max(1e-6);
        for j in 0..=GRID {
            let s = rho * j as f64 / GRID as f64;
            let v = e1_objective(s, rho, r, t, dmc);
            if v > best.2 {
                best = (s, rho, v);
            }
        }
    }
    let refined = nelder_mead_2d(
        |p| {
            let (s, rho) = clamp_triangle(p[0], p[1]);
            e1_objective(s, rho, r, t, dmc)
        },
        [best.0, best.1],
        0.5 / GRID as f64,
        200,
    );
    let e1 = refined.max(best.2).max(0.0); // attained at s = rho = 0
    Ok((e1, e1 + t))
}

fn clamp_triangle(s: f64, rho: f64) -> (f64, f64) {
    let rho = rho.clamp(1e-6, 1.0);
    let s = s.clamp(0.0, rho);
    (s, rho)
}

/// Basic Nelder-Mead maximization in two dimensions.
fn nelder_mead_2d(f: impl Fn([f64; 2]) -> f64, start: [f64; 2], scale: f64, iters: usize) -> f64 {
    let mut simplex = [
        start,
        [start[0] + scale, start[1]],
        [start[0], start[1] + scale],
    ];
    let mut values = simplex.map(&f);
    for _ in 0..iters {
        // Order best..worst.
        let mut idx = [0usize, 1, 2];
        idx.sort_by(|&a, &b| values[b].partial_cmp(&values[a]).unwrap());
        let (b, m, w) = (idx[0], idx[1], idx[2]);
        if (values[b] - values[w]).abs() < 1e-14 {
            break;
        }
        let centroid = [
            0.5 * (simplex[b][0] + simplex[m][0]),
            0.5 * (simplex[b][1] + simplex[m][1]),
        ];
        let reflect = [
            2.0 * centroid[0] - simplex[w][0],
            2.0 * centroid[1] - simplex[w][1],
        ];
        let fr = f(reflect);
        if fr > values[b] {
            let expand = [
                centroid[0] + 2.0 * (reflect[0] - centroid[0]),
                centroid[1] + 2.0 * (reflect[1] - centroid[1]),
            ];
            let fe = f(expand);
            if fe > fr {
                simplex[w] = expand;
                values[w] = fe;
            } else {
                simplex[w] = reflect;
                values[w] = fr;
            }
        } else if fr > values[m] {
            simplex[w] = reflect;
            values[w] = fr;
        } else {
            let contract = [
                centroid[0] + 0.5 * (simplex[w][0] - centroid[0]),
                centroid[1] + 0.5 * (simplex[w][1] - centroid[1]),
            ];
            let fc = f(contract);
            if fc > values[w] {
                simplex[w] = contract;
                values[w] = fc;
            } else {
                // Shrink toward the best vertex.
                for i in 0..3 {
                    if i != b {
                        simplex[i] = [
                            0.5 * (simplex[i][0] + simplex[b][0]),
                            0.5 * (simplex[i][1] + simplex[b][1]),
                        ];
                        values[i] = f(simplex[i]);
                    }
                }
            }
        }
    }
    values.into_iter().fold(f64::NEG_INFINITY, f64::max)
}

/// Exponent bound pair `eps_T = 2^(-n E1)`, `eps_U = 2^(-n E2)`.
pub fn forney_bound(n: usize, r: f64, t: f64, dmc: &DmcSpec) -> Result<BoundResult> {
    let (e1, e2) = forney_exponents(r, t, dmc)?;
    Ok(BoundResult {
        eps_t: 2f64.powf(-(n as f64) * e1).clamp(0.0, 1.0),
        eps_u: 2f64.powf(-(n as f64) * e2).clamp(0.0, 1.0),
        params: BoundParams::Forney { t, e1, e2 },
        mc_std_err: 0.0,
        low_confidence: false,
    })
}

/// Quantize the biAWGN channel with BPSK input into a DMC: `levels`
/// uniform output bins spanning `[-span, span]` with
/// `span = 1 + span_sigmas * sigma`, plus two tail bins, and a uniform
/// input distribution over ±1.
pub fn quantize_biawgn(sigma: f64, levels: usize, span_sigmas: f64) -> Result<DmcSpec> {
    if levels < 2 {
        return Err(Error::invalid("need at least two quantizer levels"));
    }
    if !(sigma > 0.0) {
        return Err(Error::invalid("sigma must be positive"));
    }
    let span = 1.0 + span_sigmas * sigma;
    let step = 2.0 * span / levels as f64;
    let mut edges = Vec::with_capacity(levels + 1);
    for i in 0..=levels {
        edges.push(-span + step * i as f64);
    }
    let mut transition = Vec::with_capacity(2);
    for &x in &[1.0f64, -1.0] {
        let cdf = |e: f64| normal_cdf((e - x) / sigma);
        let mut row = Vec::with_capacity(levels + 2);
        row.push(cdf(edges[0])); // lower tail
        for w in edges.windows(2) {
            row.push((cdf(w[1]) - cdf(w[0])).max(0.0));
        }
        row.push(1.0 - cdf(edges[levels])); // upper tail
        let s: f64 = row.iter().sum();
        // Renormalize the sub-1e-15 float residue so rows sum to one.
        for p in &mut row {
            *p /= s;
        }
        transition.push(row);
    }
    DmcSpec::new(vec![0.5, 0.5], transition)
}
