use capolar::bounds::rcu::{BoundChannel, Thm2Eval};
use capolar::channel::snr_to_sigma;

fn main() {
    let n = 64usize;
    let k = 32usize;
    let samples = 40_000u64;
    for snr in [3.5f64, 4.0] {
        let sigma = snr_to_sigma(snr, 0.5).unwrap();
        let ch = BoundChannel::BiAwgn { sigma };
        println!("== snr {snr} dB (sigma {sigma:.4})");
        for s in [0.5f64, 0.75, 1.0, 1.5, 2.0] {
            let ev = Thm2Eval::new(k, n, ch, samples, 5, s).unwrap();
            // sweep lambda manually
            print!("  s={s}: ");
            for lambda in [0.3f64, 0.4, 0.45, 0.5, 0.55, 0.6] {
                let (u, _) = ev.eps_u(lambda);
                let (t, _) = ev.eps_t(lambda);
                print!("l={lambda}: t={t:.2e}/u={u:.2e}  ");
            }
            println!();
            match ev.optimize_lambda(1e-5, None) {
                Ok((l, t, u)) => println!("     opt: lambda={l:.4} eps_t={t:.3e} eps_u={u:.3e}"),
                Err(e) => println!("     opt ERR: {e}"),
            }
        }
    }
}
