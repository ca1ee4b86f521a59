use capolar::bounds::rcu::{BoundChannel, Thm2Eval};
use capolar::channel::snr_to_sigma;

// Threshold of thm2 when eps_t is also compared against eps_u* (code-symmetry
// hypothesis for the paper's iteration), vs against eps_t*.
fn main() {
    let samples = 60_000u64;
    for (n, k) in [(64usize, 32usize), (264, 132)] {
        for t_target in [1e-3f64, 1e-5] {
            let passes = |snr: f64| -> bool {
                let sigma = snr_to_sigma(snr, 0.5).unwrap();
                let ch = BoundChannel::BiAwgn { sigma };
                let mut best = f64::INFINITY;
                let mut guess = None;
                for s in [0.5f64, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0] {
                    let ev = Thm2Eval::new(k, n, ch, samples, 5, s).unwrap();
                    if let Ok((l, t, _u)) = ev.optimize_lambda(1e-5, guess) {
                        guess = Some(l);
                        best = best.min(t);
                    }
                }
                best <= t_target
            };
            let (mut lo, mut hi) = (0.5f64, 8.0f64);
            for _ in 0..9 {
                let mid = 0.5 * (lo + hi);
                if passes(mid) {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            println!("thm2(n={n}) with eps_t target {t_target:.0e}: {hi:.3} dB");
        }
    }
}
