//! TOML configuration schema mirroring the simulation job structure.

use anyhow::{bail, Context, Result};
use capolar::channel::ChannelConfig;
use capolar::crc::CrcSpec;
use capolar::detect::{DetectorConfig, Scheme, Threshold};
use capolar::polar::{design_ga, PolarCode};
use capolar::sim::{SimCode, SimJob, StoppingRule};
use serde::Deserialize;
use std::path::Path;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub code: CodeSection,
    #[serde(default)]
    pub detector: Option<DetectorSection>,
    pub channel: ChannelSection,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub sweep: Option<SweepSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodeSection {
    pub n_c: usize,
    pub k: usize,
    /// Full CRC polynomial as a hex literal, e.g. "0x89"; "0x1" disables
    /// the outer code.
    pub crc_poly: String,
    #[serde(default = "default_design_snr")]
    pub design_snr_db: f64,
    /// Optional frozen-set import (one index per line); replaces the GA
    /// construction.
    #[serde(default)]
    pub frozen_file: Option<String>,
}

fn default_design_snr() -> f64 {
    3.5
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorSection {
    pub scheme: Scheme,
    pub list_size: usize,
    #[serde(default)]
    pub delta1: Option<usize>,
    #[serde(default)]
    pub threshold_t: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSection {
    pub kind: capolar::channel::ChannelKind,
    #[serde(default)]
    pub n_pilots: usize,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    #[serde(default)]
    pub ebn0_db: Option<f64>,
    #[serde(default)]
    pub targets: Option<TargetsSection>,
    #[serde(default)]
    pub bracket_db: Option<[f64; 2]>,
    #[serde(default)]
    pub tol_db: Option<f64>,
    #[serde(default)]
    pub min_undetected: Option<u64>,
    #[serde(default)]
    pub min_total_errors: Option<u64>,
    #[serde(default)]
    pub max_trials: Option<u64>,
    #[serde(default)]
    pub max_trials_per_point: Option<u64>,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
pub struct TargetsSection {
    pub eps_t: f64,
    pub eps_u: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub schemes: Vec<Scheme>,
    pub list_sizes: Vec<usize>,
    pub ebn0_db: Vec<f64>,
    /// Pruning sizes for alg-a cells; defaults to every split.
    #[serde(default)]
    pub delta1_values: Option<Vec<usize>>,
    /// Thresholds for alg-b cells; defaults to the disabled test.
    #[serde(default)]
    pub thresholds: Option<Vec<f64>>,
}

pub fn load(path: &Path) -> Result<FileConfig> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
}

impl FileConfig {
    pub fn build_code(&self) -> Result<SimCode> {
        let crc = CrcSpec::from_hex(&self.code.crc_poly, self.code.k)?;
        let h = crc.codeword_len();
        let polar = match &self.code.frozen_file {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading frozen set {path}"))?;
                let code = PolarCode::from_frozen_text(self.code.n_c, &text)?;
                if code.h() != h {
                    bail!(
                        "frozen set leaves {} unfrozen positions but the CRC needs h = {h}",
                        code.h()
                    );
                }
                code
            }
            None => design_ga(self.code.n_c, h, self.code.design_snr_db)?,
        };
        Ok(SimCode::new(polar, crc)?)
    }

    pub fn rate_bpcu(&self, code: &SimCode) -> f64 {
        let bits_per_use = match self.channel.kind {
            capolar::channel::ChannelKind::BiAwgn => 1,
            capolar::channel::ChannelKind::PhaseNoise => 2,
        };
        code.k() as f64 / (code.n_c() / bits_per_use) as f64
    }

    pub fn build_channel(&self, code: &SimCode, ebn0_db: f64) -> Result<ChannelConfig> {
        let rate = self.rate_bpcu(code);
        Ok(match self.channel.kind {
            capolar::channel::ChannelKind::BiAwgn => ChannelConfig::bi_awgn(ebn0_db, rate)?,
            capolar::channel::ChannelKind::PhaseNoise => {
                ChannelConfig::phase_noise(ebn0_db, rate, self.channel.n_pilots)?
            }
        })
    }

    pub fn build_detector(&self, crc: &CrcSpec) -> Result<DetectorConfig> {
        let Some(section) = &self.detector else {
            bail!("this command needs a [detector] section");
        };
        let detector = detector_from_section(section, crc)?;
        detector.validate(crc)?;
        Ok(detector)
    }

    pub fn stopping(&self) -> StoppingRule {
        let d = StoppingRule::default();
        StoppingRule {
            min_undetected: self.run.min_undetected.unwrap_or(d.min_undetected),
            min_total_errors: self.run.min_total_errors.unwrap_or(d.min_total_errors),
            max_trials: self.run.max_trials.unwrap_or(d.max_trials),
        }
    }

    pub fn build_sim_job(&self, seed_override: Option<u64>) -> Result<SimJob> {
        let code = self.build_code()?;
        let Some(ebn0) = self.run.ebn0_db else {
            bail!("[run] ebn0_db is required for simulate");
        };
        let channel = self.build_channel(&code, ebn0)?;
        let detector = self.build_detector(&code.crc)?;
        Ok(SimJob {
            code,
            detector,
            channel,
            stopping: self.stopping(),
            seed: seed_override.or(self.run.seed).unwrap_or(0),
        })
    }
}

pub fn detector_from_section(section: &DetectorSection, crc: &CrcSpec) -> Result<DetectorConfig> {
    let delta = crc.delta();
    let detector = match section.scheme {
        Scheme::Reference => DetectorConfig {
            scheme: Scheme::Reference,
            list_size: section.list_size,
            delta1: delta,
            threshold: Threshold::Disabled,
        },
        Scheme::AlgA => DetectorConfig {
            scheme: Scheme::AlgA,
            list_size: section.list_size,
            delta1: section
                .delta1
                .context("alg-a needs `delta1` in [detector]")?,
            threshold: Threshold::Disabled,
        },
        Scheme::AlgB => DetectorConfig {
            scheme: Scheme::AlgB,
            list_size: section.list_size,
            delta1: delta,
            threshold: match section.threshold_t {
                Some(t) => Threshold::Value(t),
                None => Threshold::Disabled,
            },
        },
    };
    Ok(detector)
}
