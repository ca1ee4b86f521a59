use capolar::channel::ChannelConfig;
use capolar::crc::CrcSpec;
use capolar::polar::design_ga;
use capolar::sim::{Campaign, SimCode};
use std::time::Instant;

fn main() {
    let crc = CrcSpec::from_hex("0x89", 64).unwrap();
    let code = design_ga(128, crc.codeword_len(), 3.0).unwrap();
    let sim = SimCode::new(code, crc).unwrap();
    let channel = ChannelConfig::bi_awgn(3.5, 0.5).unwrap();
    let campaign = Campaign::new(sim, channel, 32, 1).unwrap();
    for threads in [1usize, 2] {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        let t0 = Instant::now();
        let tally = pool.install(|| campaign.run_trials(0, 10_000)).unwrap();
        let dt = t0.elapsed().as_secs_f64();
        println!(
            "threads={threads}: {:.1} us/trial ({} trials)",
            dt / 10_000.0 * 1e6,
            tally.trials
        );
    }
}
