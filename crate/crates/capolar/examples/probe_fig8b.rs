use capolar::bounds::rcu::{BoundChannel, Thm2Eval};
use capolar::channel::snr_to_sigma;

fn main() {
    let samples: u64 = 40_000;
    let k = 50usize;
    let n = 100usize;
    // Fixed lambda calibrated by the union+Chernoff relation:
    // eps_u <= 2^(k - n*lambda) = eps_u* => lambda = (k + log2(1/eps_u*))/n
    let lambda = (k as f64 + (1e5f64).log2()) / n as f64;
    println!("fixed lambda = {lambda:.4}");
    let grid = [0.05f64, 0.1, 0.2, 0.35, 0.5, 0.75, 1.0, 1.25, 1.5, 2.0, 3.0, 4.0];
    let mut gammas = Vec::new();
    for &s in &grid {
        let passes = |snr: f64| -> bool {
            let sigma = snr_to_sigma(snr, 0.5).unwrap();
            let ch = BoundChannel::BiAwgn { sigma };
            let ev = Thm2Eval::new(k, n, ch, samples, 5, s).unwrap();
            let (t, _) = ev.eps_t(lambda);
            let (u, _) = ev.eps_u(lambda);
            t <= 1e-3 && u <= 1e-5
        };
        let (mut lo, mut hi) = (1.0f64, 10.0f64);
        for _ in 0..10 {
            let mid = 0.5 * (lo + hi);
            if passes(mid) { hi = mid } else { lo = mid }
        }
        gammas.push(hi);
        println!("  s={s}: gamma={hi:.3}");
    }
    let best = gammas.iter().cloned().fold(f64::INFINITY, f64::min);
    let worst = gammas.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    println!("improvement = {:.3} dB", worst - best);
}
