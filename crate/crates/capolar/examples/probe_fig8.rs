use capolar::bounds::rcu::{BoundChannel, Thm2Eval};
use capolar::channel::snr_to_sigma;

// gamma(s) per Fig-8-style sweep: pin eps_u = 1e-5 by lambda, bisect SNR
// until eps_t <= target (two candidate targets).
fn main() {
    let args: Vec<String> = std::env::args().collect();
    let samples: u64 = args.get(1).and_then(|x| x.parse().ok()).unwrap_or(60_000);
    let k = 50usize;
    let n = 100usize;
    for t_target in [1e-5f64, 1e-3] {
        print!("biAWGN k=50 n=100 target {t_target:.0e}: ");
        let mut gammas = Vec::new();
        for s in [0.25f64, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0] {
            let passes = |snr: f64| -> bool {
                let sigma = snr_to_sigma(snr, 0.5).unwrap();
                let ch = BoundChannel::BiAwgn { sigma };
                let ev = Thm2Eval::new(k, n, ch, samples, 5, s).unwrap();
                match ev.optimize_lambda(1e-5, None) {
                    Ok((_, t, _)) => t <= t_target,
                    Err(_) => false,
                }
            };
            let (mut lo, mut hi) = (1.0f64, 9.0f64);
            for _ in 0..9 {
                let mid = 0.5 * (lo + hi);
                if passes(mid) { hi = mid } else { lo = mid }
            }
            gammas.push(hi);
            print!("s={s}:{hi:.2} ");
        }
        let best = gammas.iter().cloned().fold(f64::INFINITY, f64::min);
        let worst = gammas.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        println!("\n  -> improvement worst-best = {:.3} dB", worst - best);
    }
}
