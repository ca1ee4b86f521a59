//! Batch CLI: polar code design, link-level Monte Carlo simulation,
//! SNR-threshold searches, achievability-bound evaluation, and grid
//! sweeps. Emits CSV for campaign tables and JSON for single records.

mod config;

use anyhow::{bail, Context, Result};
use capolar::bounds::threshold::{
    snr_threshold_bound, BoundFamily, BoundKind, ThresholdSearch,
};
use capolar::bounds::{evaluate_at_snr, BoundRecord};
use capolar::detect::{Scheme, Threshold};
use capolar::polar::design_ga;
use capolar::sim::sweep::{run_sweep, rows_to_csv, SweepCell, SweepRow};
use capolar::sim::{run_montecarlo, SearchOpts, Targets, ThresholdSim};
use clap::{Args, Parser, Subcommand};
use std::io::Write;
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "capolar",
    about = "CRC-aided polar codes: erasure decoding simulation and finite-blocklength bounds",
    version
)]
struct Cli {
    /// Worker threads for the Monte Carlo engines (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Design a polar code and emit its frozen set (one index per line).
    Design(DesignArgs),
    /// Simulate one operating point from a config file.
    Simulate(SimulateArgs),
    /// Search the SNR threshold of a scheme for target error rates.
    Threshold(ThresholdArgs),
    /// Evaluate an achievability bound at an SNR or search its threshold.
    Bound(BoundArgs),
    /// Run a Cartesian sweep with per-cell resume markers.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct DesignArgs {
    /// Blocklength in bits (power of two).
    #[arg(long)]
    n_c: usize,
    /// Number of unfrozen positions.
    #[arg(long)]
    h: usize,
    #[arg(long, default_value_t = 3.5)]
    design_snr_db: f64,
    /// Output file (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Emit the full result record as JSON instead of CSV.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct ThresholdArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BoundArgs {
    /// Which bound to evaluate.
    #[arg(long, value_parser = parse_bound_kind)]
    which: BoundKind,
    /// Blocklength in channel uses.
    #[arg(long)]
    n: usize,
    /// Information bits.
    #[arg(long)]
    k: usize,
    /// Evaluate at this Eb/N0 (dB); mutually exclusive with --targets.
    #[arg(long)]
    snr_db: Option<f64>,
    /// Search the SNR threshold for "eps_t,eps_u" targets.
    #[arg(long, value_parser = parse_targets)]
    targets: Option<(f64, f64)>,
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Channel family.
    #[arg(long, default_value = "bi-awgn")]
    channel: String,
    /// Pilot symbols for the phase-noise family.
    #[arg(long, default_value_t = 10)]
    n_pilots: usize,
    /// Rate in information bits per channel use (default k/n).
    #[arg(long)]
    rate: Option<f64>,
    /// SNR bracket for threshold searches.
    #[arg(long, num_args = 2, default_values_t = [ -2.0, 12.0 ])]
    bracket_db: Vec<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory for cell markers and the final CSV.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
}

fn parse_bound_kind(s: &str) -> Result<BoundKind, String> {
    match s {
        "rcu" => Ok(BoundKind::Rcu),
        "thm1" => Ok(BoundKind::Thm1),
        "thm2" => Ok(BoundKind::Thm2),
        "forney" => Ok(BoundKind::Forney),
        other => Err(format!(
            "unknown bound {other:?}; expected rcu|thm1|thm2|forney"
        )),
    }
}

fn parse_targets(s: &str) -> Result<(f64, f64), String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err("targets must be \"eps_t,eps_u\"".into());
    }
    let t: f64 = parts[0].trim().parse().map_err(|e| format!("{e}"))?;
    let u: f64 = parts[1].trim().parse().map_err(|e| format!("{e}"))?;
    Ok((t, u))
}

fn write_output(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)
            .with_context(|| format!("writing {}", path.display()))?,
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
        }
    }
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    if let Some(workers) = cli.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()
            .context("configuring worker pool")?;
    }
    match cli.command {
        Command::Design(args) => design(args),
        Command::Simulate(args) => simulate(args),
        Command::Threshold(args) => threshold(args),
        Command::Bound(args) => bound(args),
        Command::Sweep(args) => sweep(args),
    }
}

fn design(args: DesignArgs) -> Result<()> {
    let code = design_ga(args.n_c, args.h, args.design_snr_db)?;
    write_output(&args.out, &code.frozen_set_text())
}

fn simulate(args: SimulateArgs) -> Result<()> {
    let cfg = config::load(&args.config)?;
    let job = cfg.build_sim_job(args.seed)?;
    let result = run_montecarlo(&job)?;
    if args.json {
        let text = serde_json::to_string_pretty(&result)?;
        write_output(&args.out, &text)?;
    } else {
        let row = sim_row(&job, &result);
        write_output(&args.out, &rows_to_csv(&[row]))?;
    }
    Ok(())
}

fn sim_row(job: &capolar::sim::SimJob, result: &capolar::sim::SimResult) -> SweepRow {
    let delta = job.code.crc.delta();
    let (delta1, t) = match job.detector.scheme {
        Scheme::Reference => (delta, None),
        Scheme::AlgA => (job.detector.delta1, None),
        Scheme::AlgB => (delta, job.detector.threshold.value()),
    };
    SweepRow {
        scheme: job.detector.scheme.to_string(),
        n: job.code.n_uses(&job.channel),
        k: job.code.k(),
        l: job.detector.list_size,
        delta1,
        delta2: delta - delta1,
        t,
        channel: match job.channel.kind {
            capolar::channel::ChannelKind::BiAwgn => "bi-awgn".into(),
            capolar::channel::ChannelKind::PhaseNoise => "phase-noise".into(),
        },
        n_pilots: job.channel.n_pilots,
        ebn0_db: job.channel.ebn0_db(),
        trials: result.trials,
        total_errors: result.total_errors,
        undetected_errors: result.undetected_errors,
        tep: result.tep_hat,
        uep: result.uep_hat,
        tep_ci_hi: result.tep_ci.1,
        uep_ci_hi: result.uep_ci.1,
        seed: job.seed,
    }
}

fn threshold(args: ThresholdArgs) -> Result<()> {
    let cfg = config::load(&args.config)?;
    let code = cfg.build_code()?;
    let Some(targets) = cfg.run.targets else {
        bail!("[run] targets = {{ eps_t, eps_u }} is required for threshold searches");
    };
    let Some(detector) = cfg.detector.clone() else {
        bail!("threshold searches need a [detector] section (scheme + list_size)");
    };
    let bracket = cfg.run.bracket_db.unwrap_or([1.0, 7.0]);
    let channel_base = cfg.build_channel(&code, bracket[0])?;
    let opts = SearchOpts {
        bracket_db: (bracket[0], bracket[1]),
        tol_db: cfg.run.tol_db.unwrap_or(0.05),
        seed: args.seed.or(cfg.run.seed).unwrap_or(0),
        max_trials_per_point: cfg.run.max_trials_per_point.unwrap_or(1_500_000),
    };
    let mut sim = ThresholdSim::new(
        code,
        channel_base,
        detector.list_size,
        Targets {
            eps_t: targets.eps_t,
            eps_u: targets.eps_u,
        },
        opts,
        vec![detector.scheme],
    )?;
    let outcome = sim.search(detector.scheme)?;
    write_output(&args.out, &serde_json::to_string_pretty(&outcome)?)?;
    Ok(())
}

fn bound(args: BoundArgs) -> Result<()> {
    let rate = args.rate.unwrap_or(args.k as f64 / args.n as f64);
    let family = match args.channel.as_str() {
        "bi-awgn" => BoundFamily::BiAwgn { rate_bpcu: rate },
        "phase-noise" => BoundFamily::PhaseNoise {
            rate_bpcu: rate,
            n_pilots: args.n_pilots,
        },
        other => bail!("unknown channel family {other:?}"),
    };
    let (eps_t_target, eps_u_target) = args.targets.unwrap_or((1e-3, 1e-5));
    let search = ThresholdSearch {
        n_uses: args.n,
        k: args.k,
        eps_t_target,
        eps_u_target,
        samples: args.samples,
        seed: args.seed,
        snr_lo_db: args.bracket_db[0],
        snr_hi_db: args.bracket_db[1],
        tol_db: 0.01,
    };
    let text = match (args.snr_db, args.targets) {
        (Some(snr), None) => {
            let record: BoundRecord = evaluate_at_snr(args.which, family, &search, snr)?;
            serde_json::to_string_pretty(&record)?
        }
        (None, Some(_)) => {
            let result = snr_threshold_bound(args.which, family, &search)?;
            serde_json::to_string_pretty(&result)?
        }
        (Some(_), Some(_)) => bail!("--snr-db and --targets are mutually exclusive"),
        (None, None) => bail!("one of --snr-db or --targets is required"),
    };
    write_output(&args.out, &text)?;
    Ok(())
}

fn sweep(args: SweepArgs) -> Result<()> {
    let cfg = config::load(&args.config)?;
    let Some(sweep_cfg) = &cfg.sweep else {
        bail!("sweep needs a [sweep] section");
    };
    let code = cfg.build_code()?;
    let delta = code.crc.delta();
    let seed = args.seed.or(cfg.run.seed).unwrap_or(0);
    let stopping = cfg.stopping();

    let mut cells = Vec::new();
    for &scheme in &sweep_cfg.schemes {
        for &list_size in &sweep_cfg.list_sizes {
            for &ebn0 in &sweep_cfg.ebn0_db {
                let channel = cfg.build_channel(&code, ebn0)?;
                let detector_variants: Vec<(String, capolar::detect::DetectorConfig)> =
                    match scheme {
                        Scheme::Reference => vec![(
                            "reference".into(),
                            capolar::detect::DetectorConfig {
                                scheme,
                                list_size,
                                delta1: delta,
                                threshold: Threshold::Disabled,
                            },
                        )],
                        Scheme::AlgA => {
                            let splits = sweep_cfg
                                .delta1_values
                                .clone()
                                .unwrap_or_else(|| (0..=delta).collect());
                            splits
                                .into_iter()
                                .map(|d1| {
                                    (
                                        format!("alg-a_d1-{d1}"),
                                        capolar::detect::DetectorConfig {
                                            scheme,
                                            list_size,
                                            delta1: d1,
                                            threshold: Threshold::Disabled,
                                        },
                                    )
                                })
                                .collect()
                        }
                        Scheme::AlgB => {
                            let ts = sweep_cfg.thresholds.clone().unwrap_or_default();
                            if ts.is_empty() {
                                vec![(
                                    "alg-b_disabled".into(),
                                    capolar::detect::DetectorConfig {
                                        scheme,
                                        list_size,
                                        delta1: delta,
                                        threshold: Threshold::Disabled,
                                    },
                                )]
                            } else {
                                ts.into_iter()
                                    .map(|t| {
                                        (
                                            format!("alg-b_t-{t}"),
                                            capolar::detect::DetectorConfig {
                                                scheme,
                                                list_size,
                                                delta1: delta,
                                                threshold: Threshold::Value(t),
                                            },
                                        )
                                    })
                                    .collect()
                            }
                        }
                    };
                for (tag, detector) in detector_variants {
                    cells.push(SweepCell {
                        label: format!("{tag}_L{list_size}_{ebn0:.3}dB"),
                        job: capolar::sim::SimJob {
                            code: code.clone(),
                            detector,
                            channel,
                            stopping,
                            seed,
                        },
                    });
                }
            }
        }
    }

    let (rows, failures) = run_sweep(&cells, &args.out)?;
    let csv_path = args.out.join("results.csv");
    std::fs::write(&csv_path, rows_to_csv(&rows))?;
    eprintln!(
        "sweep: {} cells done, {} failed, table at {}",
        rows.len(),
        failures.len(),
        csv_path.display()
    );
    for f in &failures {
        eprintln!("  failed cell {}: {}", f.label, f.error);
    }
    Ok(())
}
