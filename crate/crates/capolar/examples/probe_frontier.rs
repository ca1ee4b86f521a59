use capolar::bounds::rcu::{BoundChannel, Thm2Eval};
use capolar::channel::snr_to_sigma;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let n: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(264);
    let k: usize = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(132);
    let snr: f64 = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(1.9);
    let s_par: f64 = args.get(4).and_then(|s| s.parse().ok()).unwrap_or(1.0);
    let samples: u64 = args.get(5).and_then(|s| s.parse().ok()).unwrap_or(100_000);
    let sigma = snr_to_sigma(snr, 0.5).unwrap();
    let ch = BoundChannel::BiAwgn { sigma };
    let ev = Thm2Eval::new(k, n, ch, samples, 5, s_par).unwrap();
    println!("n={n} k={k} snr={snr} s={s_par} samples={samples}");
    // lambda from mild to aggressive (bits/use)
    let kmax = 26;
    for i in 0..kmax {
        let lambda = 0.30 + 0.02 * i as f64;
        let (t, se_t) = ev.eps_t(lambda);
        let (u, se_u) = ev.eps_u(lambda);
        println!(
            "  l={lambda:.2}: eps_t={t:.3e} (se {se_t:.1e})  eps_u={u:.3e} (se {se_u:.1e})"
        );
    }
}
