use capolar::bounds::rcu::{rcu_bound, BoundChannel};
use capolar::channel::snr_to_sigma;

fn main() {
    for (n, k, target) in [
        (128usize, 64usize, 1e-3f64),
        (64, 32, 1e-3),
        (264, 132, 1e-3),
    ] {
        let (mut lo, mut hi) = (0.0f64, 8.0f64);
        for _ in 0..11 {
            let mid = 0.5 * (lo + hi);
            let sigma = snr_to_sigma(mid, 0.5).unwrap();
            let b = rcu_bound(k, n, BoundChannel::BiAwgn { sigma }, 60_000, 17);
            if b.eps_t <= target {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        println!("RCU({k},{n}) = {target:.0e} at {hi:.3} dB");
    }
    // spot values for cross-checking against published RCU curves
    for snr in [3.0f64, 3.2] {
        let sigma = snr_to_sigma(snr, 0.5).unwrap();
        let b = rcu_bound(64, 128, BoundChannel::BiAwgn { sigma }, 200_000, 17);
        println!("RCU(64,128) at {snr} dB: eps = {:.3e} (se {:.1e})", b.eps_t, b.mc_std_err);
    }
}
