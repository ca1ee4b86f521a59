use capolar::channel::{transmit_biawgn, ChannelConfig};
use capolar::crc::{crc_encode, CrcSpec};
use capolar::polar::{design_ga, polar_encode, scl_decode};
use capolar::sim::{Campaign, CampaignTally, SimCode};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

fn main() {
    // raw scl speed
    for (n_c, l) in [(64usize, 8usize), (64, 32), (128, 32), (256, 8)] {
        let crc = CrcSpec::from_hex("0x89", n_c / 2 - 7).unwrap();
        let code = design_ga(n_c, crc.codeword_len(), 3.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let msg = vec![0u8; crc.message_len()];
        let v = crc_encode(&msg, &crc).unwrap();
        let x = polar_encode(&v, &code).unwrap();
        let sigma = 0.63;
        let obs = transmit_biawgn(&x, sigma, &mut rng);
        let llrs = obs.bit_llrs();
        let t0 = Instant::now();
        let iters = 2000;
        let mut acc = 0.0;
        for _ in 0..iters {
            let list = scl_decode(&llrs, &code, l).unwrap();
            acc += list.best().metric;
        }
        let dt = t0.elapsed().as_secs_f64();
        println!("scl n_c={n_c} L={l}: {:.1} us/decode (acc {acc:.1})", dt / iters as f64 * 1e6);
    }

    // full campaign trial cost (decode + channel + syndromes) at (128,64) L=32
    let crc = CrcSpec::from_hex("0x89", 64).unwrap();
    let code = design_ga(128, crc.codeword_len(), 3.0).unwrap();
    let sim = SimCode::new(code, crc).unwrap();
    let channel = ChannelConfig::bi_awgn(3.5, 0.5).unwrap();
    let campaign = Campaign::new(sim, channel, 32, 1).unwrap();
    let t0 = Instant::now();
    let tally: CampaignTally = campaign.run_trials(0, 20_000).unwrap();
    let dt = t0.elapsed().as_secs_f64();
    println!(
        "campaign (128,64) L=32 @3.5dB: {:.1} us/trial wall ({} trials, ref errors {})",
        dt / 20_000.0 * 1e6,
        tally.trials,
        tally.reference_counts().0
    );
}
