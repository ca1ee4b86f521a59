use capolar::channel::ChannelConfig;
use capolar::crc::CrcSpec;
use capolar::detect::Scheme;
use capolar::polar::design_ga;
use capolar::sim::{SearchOpts, SimCode, Targets, ThresholdSim};
use std::time::Instant;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let which = args.get(1).map(String::as_str).unwrap_or("c6");
    let max_trials: u64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(600_000);
    let design_snr: f64 = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(3.5);
    let targets = Targets { eps_t: 1e-3, eps_u: 1e-5 };
    match which {
        "c6" => {
            // (128,64) CRC-7 0x89, L=32, biAWGN
            let crc = CrcSpec::from_hex("0x89", 64).unwrap();
            let code = SimCode::new(design_ga(128, crc.codeword_len(), design_snr).unwrap(), crc).unwrap();
            let channel = ChannelConfig::bi_awgn(3.5, 0.5).unwrap();
            let opts = SearchOpts {
                bracket_db: (3.0, 4.4),
                tol_db: 0.05,
                seed: 2024,
                max_trials_per_point: max_trials,
            };
            let mut sim = ThresholdSim::new(code, channel, 32, targets, opts,
                vec![Scheme::Reference, Scheme::AlgA, Scheme::AlgB]).unwrap();
            for scheme in [Scheme::AlgB, Scheme::AlgA, Scheme::Reference] {
                let t0 = Instant::now();
                match sim.search(scheme) {
                    Ok(r) => println!(
                        "c6 {scheme}: gamma={:.3} dB params={:?} trials@thr={} tep={:.2e} uep={:.2e} ({:.0}s)",
                        r.ebn0_db, r.params, r.trials_at_threshold,
                        r.tep_at_threshold, r.uep_at_threshold, t0.elapsed().as_secs_f64()
                    ),
                    Err(e) => println!("c6 {scheme}: ERR {e}"),
                }
            }
        }
        "c7" => {
            let crc = CrcSpec::from_hex("0x43", 32).unwrap();
            let code = SimCode::new(design_ga(64, crc.codeword_len(), design_snr).unwrap(), crc).unwrap();
            let channel = ChannelConfig::bi_awgn(4.0, 0.5).unwrap();
            for list in [8usize, 32] {
                let opts = SearchOpts {
                    bracket_db: (3.2, 5.8),
                    tol_db: 0.05,
                    seed: 77,
                    max_trials_per_point: max_trials,
                };
                let mut sim = ThresholdSim::new(code.clone(), channel, list, targets, opts,
                    vec![Scheme::AlgA, Scheme::AlgB]).unwrap();
                let a = sim.search(Scheme::AlgA);
                let b = sim.search(Scheme::AlgB);
                match (a, b) {
                    (Ok(a), Ok(b)) => println!(
                        "c7 L={list}: algA={:.3} algB={:.3} gain={:.3} dB (params {:?} / {:?})",
                        a.ebn0_db, b.ebn0_db, a.ebn0_db - b.ebn0_db, a.params, b.params
                    ),
                    (a, b) => println!("c7 L={list}: a={a:?} b={b:?}"),
                }
            }
        }
        "c9" => {
            let list = args.get(4).and_then(|s| s.parse().ok()).unwrap_or(8);
            for n_c in [64usize, 128, 256] {
                let k = n_c / 2;
                let crc_hex = match n_c { 64 => "0x43", 128 => "0x89", _ => "0x1D5" };
                let crc = CrcSpec::from_hex(crc_hex, k).unwrap();
                let code = SimCode::new(design_ga(n_c, crc.codeword_len(), design_snr).unwrap(), crc).unwrap();
                let channel = ChannelConfig::phase_noise(6.0, 1.0, 10).unwrap();
                let opts = SearchOpts {
                    bracket_db: (3.0, 9.0),
                    tol_db: 0.05,
                    seed: 99,
                    max_trials_per_point: max_trials,
                };
                let mut sim = ThresholdSim::new(code, channel, list, targets, opts,
                    vec![Scheme::Reference, Scheme::AlgA, Scheme::AlgB]).unwrap();
                let t0 = Instant::now();
                let rf = sim.search(Scheme::Reference);
                let a = sim.search(Scheme::AlgA);
                let b = sim.search(Scheme::AlgB);
                let fmt = |r: &Result<capolar::sim::SchemeThreshold, capolar::Error>| match r {
                    Ok(x) => format!("{:.3}", x.ebn0_db),
                    Err(e) => format!("ERR({e})"),
                };
                println!(
                    "c9 n_c={n_c} L={list}: ref={} algA={} algB={} ({:.0}s)",
                    fmt(&rf), fmt(&a), fmt(&b), t0.elapsed().as_secs_f64()
                );
            }
        }
        other => eprintln!("unknown probe {other}"),
    }
}
