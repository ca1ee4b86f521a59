use capolar::bounds::rcu::{rcu_bound, BoundChannel};
use capolar::channel::snr_to_sigma;

fn main() {
    for (n, kd) in [(64usize, 37usize), (264, 137), (64, 39), (264, 139)] {
        for target in [1e-5f64] {
            let (mut lo, mut hi) = (0.0f64, 8.0f64);
            for _ in 0..11 {
                let mid = 0.5 * (lo + hi);
                let sigma = snr_to_sigma(mid, 0.5).unwrap();
                let b = rcu_bound(kd, n, BoundChannel::BiAwgn { sigma }, 60_000, 17);
                if b.eps_t <= target {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            println!("RCU({kd},{n}) = {target:.0e} at {hi:.3} dB");
        }
    }
}
