use capolar::bounds::rcu::BoundChannel;
use capolar::bounds::saddlepoint::{cgf_sum, pairwise_psi, pairwise_psi_tilde_at, GTable};
use capolar::channel::snr_to_sigma;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::LN_2;

fn main() {
    let n = 64usize;
    let k = 32u32;
    let s = 1.0f64;
    let lambda = 0.55f64;
    let sigma = snr_to_sigma(3.5, 0.5).unwrap();
    let ch = BoundChannel::BiAwgn { sigma };
    let m = 2f64.powi(k as i32) - 1.0;
    let mut rows: Vec<(f64, f64, f64, f64, f64)> = Vec::new();
    let mut scratch = Vec::new();
    let mut sum_u = 0.0;
    let samples = 40_000u64;
    for i in 0..samples {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        rng.set_stream(i);
        let omega = ch.sample_into_pub(n, &mut rng, &mut scratch);
        let table = GTable::new(2, std::mem::take(&mut scratch));
        let psi = pairwise_psi(&table, omega).prob;
        let gs = cgf_sum(&table, s).value;
        let lnlt = (n as f64 * lambda * LN_2 + gs) / s;
        let psit = pairwise_psi_tilde_at(&table, omega, lnlt).prob;
        let u = (m * psit).min(1.0);
        sum_u += u;
        rows.push((u, psi, psit, omega, lnlt));
        scratch = table.into_inner();
    }
    println!("eps_u = {:.4e}", sum_u / samples as f64);
    rows.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    println!("top contributors (u, psi, psi~, omega_x, ln_lambda~):");
    for r in rows.iter().take(12) {
        println!(
            "  u={:.3e} psi={:.3e} psi~={:.3e} omega={:.2} lnlt={:.2} (omega-lnlt={:.2})",
            r.0, r.1, r.2, r.3, r.4, r.3 - r.4
        );
    }
}
