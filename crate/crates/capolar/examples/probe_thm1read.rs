use capolar::bounds::rcu::{rcu_bound, BoundChannel};
use capolar::channel::snr_to_sigma;

fn main() {
    // Bisect RCU(k+7, n) against two candidate targets.
    for (n, k) in [(64usize, 39usize), (264, 139)] {
        for target in [1e-3f64, 1e-5] {
            let (mut lo, mut hi) = (0.0f64, 8.0f64);
            for _ in 0..10 {
                let mid = 0.5 * (lo + hi);
                let sigma = snr_to_sigma(mid, 0.5).unwrap();
                let b = rcu_bound(k, n, BoundChannel::BiAwgn { sigma }, 40_000, 17);
                if b.eps_t <= target {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            println!("RCU({k},{n}) = {target:.0e} at {:.3} dB", hi);
        }
    }
}
