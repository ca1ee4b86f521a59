//! Grid sweeps: run a batch of simulation jobs with per-cell completion
//! markers so an interrupted sweep resumes where it stopped.

use super::{run_montecarlo, SimJob};
use crate::channel::ChannelKind;
use crate::detect::{Scheme, Threshold};
use crate::error::Result;
use std::path::Path;

/// One sweep cell: a unique label plus the job it runs.
pub struct SweepCell {
    pub label: String,
    pub job: SimJob,
}

/// Flattened result row (one CSV line per cell).
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct SweepRow {
    pub scheme: String,
    pub n: usize,
    pub k: usize,
    pub l: usize,
    pub delta1: usize,
    pub delta2: usize,
    pub t: Option<f64>,
    pub channel: String,
    pub n_pilots: usize,
    pub ebn0_db: f64,
    pub trials: u64,
    pub total_errors: u64,
    pub undetected_errors: u64,
    pub tep: f64,
    pub uep: f64,
    pub tep_ci_hi: f64,
    pub uep_ci_hi: f64,
    pub seed: u64,
}

/// Marker payload: either a finished row or the error that stopped the cell.
#[derive(Debug, serde::Serialize, serde::Deserialize)]
#[serde(untagged)]
enum CellMarker {
    Done(SweepRow),
    Failed { error: String },
}

fn sanitize(label: &str) -> String {
    label
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '.' || c == '_' || c == '-' {
                c
            } else {
                '-'
            }
        })
        .collect()
}

fn row_from(job: &SimJob, result: &super::SimResult) -> SweepRow {
    let delta = job.code.crc.delta();
    let (delta1, delta2, t) = match job.detector.scheme {
        Scheme::Reference => (delta, 0, None),
        Scheme::AlgA => (job.detector.delta1, delta - job.detector.delta1, None),
        Scheme::AlgB => match job.detector.threshold {
            Threshold::Disabled => (delta, 0, None),
            Threshold::Value(t) => (delta, 0, Some(t)),
        },
    };
    SweepRow {
        scheme: job.detector.scheme.to_string(),
        n: job.code.n_uses(&job.channel),
        k: job.code.k(),
        l: job.detector.list_size,
        delta1,
        delta2,
        t,
        channel: match job.channel.kind {
            ChannelKind::BiAwgn => "bi-awgn".into(),
            ChannelKind::PhaseNoise => "phase-noise".into(),
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

/// Per-cell failure report.
#[derive(Debug, Clone)]
pub struct CellFailure {
    pub label: String,
    pub error: String,
}

/// Run (or resume) a sweep. Completed cells are skipped via their marker
/// files; failed cells are recorded and the sweep continues.
pub fn run_sweep(cells: &[SweepCell], out_dir: &Path) -> Result<(Vec<SweepRow>, Vec<CellFailure>)> {
    std::fs::create_dir_all(out_dir)?;
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for cell in cells {
        let marker = out_dir.join(format!("cell_{}.json", sanitize(&cell.label)));
        if marker.exists() {
            let text = std::fs::read_to_string(&marker)?;
            match serde_json::from_str::<CellMarker>(&text) {
                Ok(CellMarker::Done(row)) => {
                    rows.push(row);
                    continue;
                }
                Ok(CellMarker::Failed { error }) => {
                    failures.push(CellFailure {
                        label: cell.label.clone(),
                        error,
                    });
                    continue;
                }
                Err(_) => { /* unreadable marker: rerun the cell */ }
            }
        }
        match run_montecarlo(&cell.job) {
            Ok(result) => {
                let row = row_from(&cell.job, &result);
                std::fs::write(&marker, serde_json::to_string_pretty(&CellMarker::Done(row.clone()))?)?;
                rows.push(row);
            }
            Err(e) => {
                let error = e.to_string();
                std::fs::write(
                    &marker,
                    serde_json::to_string_pretty(&CellMarker::Failed {
                        error: error.clone(),
                    })?,
                )?;
                failures.push(CellFailure {
                    label: cell.label.clone(),
                    error,
                });
            }
        }
    }
    Ok((rows, failures))
}

/// Fixed-column CSV encoding of sweep rows.
pub fn rows_to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(
        "scheme,n,k,l,delta1,delta2,t,channel,n_pilots,ebn0_db,trials,total_errors,undetected_errors,tep,uep,tep_ci_hi,uep_ci_hi,seed\n",
    );
    for r in rows {
        let t = r.t.map_or(String::new(), |t| format!("{t}"));
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.scheme,
            r.n,
            r.k,
            r.l,
            r.delta1,
            r.delta2,
            t,
            r.channel,
            r.n_pilots,
            r.ebn0_db,
            r.trials,
            r.total_errors,
            r.undetected_errors,
            r.tep,
            r.uep,
            r.tep_ci_hi,
            r.uep_ci_hi,
            r.seed
        ));
    }
    out
}

impl From<serde_json::Error> for crate::Error {
    fn from(e: serde_json::Error) -> Self {
        crate::Error::Parse(e.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::ChannelConfig;
    use crate::crc::CrcSpec;
    use crate::detect::DetectorConfig;
    use crate::polar::design_ga;
    use crate::sim::{SimCode, StoppingRule};

    fn tiny_cell(label: &str, seed: u64) -> SweepCell {
        let crc = CrcSpec::from_hex("0x43", 8).unwrap();
        let polar = design_ga(32, crc.codeword_len(), 3.0).unwrap();
        SweepCell {
            label: label.into(),
            job: SimJob {
                code: SimCode::new(polar, crc).unwrap(),
                detector: DetectorConfig {
                    scheme: Scheme::Reference,
                    list_size: 4,
                    delta1: 6,
                    threshold: Threshold::Disabled,
                },
                channel: ChannelConfig::bi_awgn(2.0, 0.25).unwrap(),
                stopping: StoppingRule {
                    min_undetected: 5,
                    min_total_errors: 50,
                    max_trials: 5_000,
                },
                seed,
            },
        }
    }

    #[test]
    fn empty_grid_yields_empty_table() {
        let dir = std::env::temp_dir().join("capolar_sweep_empty");
        let (rows, failures) = run_sweep(&[], &dir).unwrap();
        assert!(rows.is_empty() && failures.is_empty());
        assert_eq!(
            rows_to_csv(&rows).lines().count(),
            1,
            "header only for an empty sweep"
        );
    }

    #[test]
    fn grid_rows_and_resume_idempotence() {
        let dir = std::env::temp_dir().join(format!("capolar_sweep_{}", std::process::id()));
        let _ = std::fs::remove_dir_all(&dir);
        let cells = vec![
            tiny_cell("a_2.0dB", 1),
            tiny_cell("b_2.0dB", 2),
            tiny_cell("c_2.0dB", 3),
            tiny_cell("d_2.0dB", 4),
        ];
        let (rows, failures) = run_sweep(&cells, &dir).unwrap();
        assert_eq!(rows.len(), 4);
        assert!(failures.is_empty());
        let csv = rows_to_csv(&rows);
        assert_eq!(csv.lines().count(), 5);
        assert!(csv.starts_with("scheme,n,k,l,delta1"));

        // Rerun: marker files short-circuit, totals identical.
        let (rows2, _) = run_sweep(&cells, &dir).unwrap();
        assert_eq!(rows2.len(), 4);
        for (a, b) in rows.iter().zip(&rows2) {
            assert_eq!(a.trials, b.trials);
            assert_eq!(a.total_errors, b.total_errors);
        }
        let _ = std::fs::remove_dir_all(&dir);
    }

    #[test]
    fn failed_cells_are_recorded_and_skipped() {
        let dir = std::env::temp_dir().join(format!("capolar_sweep_fail_{}", std::process::id()));
        let _ = std::fs::remove_dir_all(&dir);
        let mut bad = tiny_cell("bad", 1);
        bad.job.stopping.max_trials = 0; // invalid on purpose
        let cells = vec![bad, tiny_cell("good", 2)];
        let (rows, failures) = run_sweep(&cells, &dir).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(failures.len(), 1);
        assert_eq!(failures[0].label, "bad");
        // Resume keeps the failure note without rerunning.
        let (rows2, failures2) = run_sweep(&cells, &dir).unwrap();
        assert_eq!(rows2.len(), 1);
        assert_eq!(failures2.len(), 1);
        let _ = std::fs::remove_dir_all(&dir);
    }
}
