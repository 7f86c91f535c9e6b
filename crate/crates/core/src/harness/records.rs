use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::algorithms::{Algorithm, Mode};
use crate::bandit::Family;
use crate::error::{Error, Result};

pub const TRIAL_HEADER: [&str; 11] =
    ["algorithm", "family", "n", "k", "mode", "trial", "seed", "total_samples", "correct", "capped", "wall_time_ns"];

pub const SUMMARY_HEADER: [&str; 10] =
    ["algorithm", "family", "n", "k", "mode", "trials", "mean_samples", "stderr_samples", "accuracy", "capped"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub algorithm: Algorithm,
    pub family: Family,
    pub n: usize,
    pub k: usize,
    pub mode: Mode,
    pub trial: u64,
    pub seed: u64,
    pub total_samples: u64,
    pub correct: bool,
    pub capped: bool,
    pub wall_time_ns: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub algorithm: Algorithm,
    pub family: Family,
    pub n: usize,
    pub k: usize,
    pub mode: Mode,
    pub trials: u64,
    pub mean_samples: f64,
    /// Sample standard deviation over `√trials`; 0 for a single trial.
    pub stderr_samples: f64,
    pub accuracy: f64,
    pub capped: u64,
}

/// One summary row per (algorithm, family, n, k, mode), in order of first
/// appearance.
pub fn aggregate(records: &[TrialRecord]) -> Vec<SummaryRow> {
    let mut groups: Vec<(&TrialRecord, Vec<&TrialRecord>)> = Vec::new();
    for r in records {
        let key = |g: &TrialRecord| (g.algorithm, g.family, g.n, g.k, g.mode) == (r.algorithm, r.family, r.n, r.k, r.mode);
        match groups.iter_mut().find(|(head, _)| key(head)) {
            Some((_, members)) => members.push(r),
            None => groups.push((r, vec![r])),
        }
    }
    groups
        .into_iter()
        .map(|(head, members)| {
            let count = members.len() as f64;
            let mean = members.iter().map(|r| r.total_samples as f64).sum::<f64>() / count;
            let stderr = if members.len() > 1 {
                let var = members.iter().map(|r| (r.total_samples as f64 - mean).powi(2)).sum::<f64>() / (count - 1.0);
                (var / count).sqrt()
            } else {
                0.0
            };
            SummaryRow {
                algorithm: head.algorithm,
                family: head.family,
                n: head.n,
                k: head.k,
                mode: head.mode,
                trials: members.len() as u64,
                mean_samples: mean,
                stderr_samples: stderr,
                accuracy: members.iter().filter(|r| r.correct).count() as f64 / count,
                capped: members.iter().filter(|r| r.capped).count() as u64,
            }
        })
        .collect()
}

fn write_rows<S: Serialize>(path: &Path, header: &[&str], rows: &[S]) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut wtr = csv::WriterBuilder::new().has_headers(false).from_writer(file);
    wtr.write_record(header)?;
    for row in rows {
        wtr.serialize(row)?;
    }
    wtr.flush().map_err(|e| Error::io(path, e))
}

fn read_rows<D: DeserializeOwned>(path: &Path, header: &[&str]) -> Result<Vec<D>> {
    let mut rdr = csv::Reader::from_path(path)?;
    let found = rdr.headers()?;
    if found.iter().ne(header.iter().copied()) {
        return Err(Error::Config(format!(
            "{}: header `{}` does not match `{}`",
            path.display(),
            found.iter().collect::<Vec<_>>().join(","),
            header.join(",")
        )));
    }
    rdr.deserialize().map(|row| row.map_err(Error::from)).collect()
}

/// Writes the trial CSV; an empty slice gives a header-only file.
pub fn write_records(path: impl AsRef<Path>, records: &[TrialRecord]) -> Result<()> {
    write_rows(path.as_ref(), &TRIAL_HEADER, records)
}

pub fn read_records(path: impl AsRef<Path>) -> Result<Vec<TrialRecord>> {
    read_rows(path.as_ref(), &TRIAL_HEADER)
}

pub fn write_summary(path: impl AsRef<Path>, rows: &[SummaryRow]) -> Result<()> {
    write_rows(path.as_ref(), &SUMMARY_HEADER, rows)
}

pub fn read_summary(path: impl AsRef<Path>) -> Result<Vec<SummaryRow>> {
    read_rows(path.as_ref(), &SUMMARY_HEADER)
}
