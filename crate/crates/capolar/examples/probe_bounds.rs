use capolar::bounds::threshold::{snr_threshold_bound, BoundFamily, BoundKind, ThresholdSearch};
use std::time::Instant;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let samples: u64 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(20_000);
    let family = BoundFamily::BiAwgn { rate_bpcu: 0.5 };
    for (n, k) in [(64usize, 32usize), (264, 132)] {
        let search = ThresholdSearch {
            n_uses: n,
            k,
            eps_t_target: 1e-3,
            eps_u_target: 1e-5,
            samples,
            seed: 17,
            snr_lo_db: 0.0,
            snr_hi_db: 8.0,
            tol_db: 0.01,
        };
        let mut row = format!("n={n}: ");
        for kind in [BoundKind::Thm1, BoundKind::Thm2, BoundKind::Forney] {
            let t0 = Instant::now();
            match snr_threshold_bound(kind, family, &search) {
                Ok(r) => {
                    row += &format!(
                        "{:?}={:.3}dB ({:.0}s, params {:?})  ",
                        kind,
                        r.ebn0_db,
                        t0.elapsed().as_secs_f64(),
                        r.params
                    )
                }
                Err(e) => row += &format!("{kind:?} ERR {e}  "),
            }
        }
        println!("{row}");
    }
}
