//! File outputs. Every file is written to a temporary sibling and renamed
//! into place, so readers never observe a partial file.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::stability_lab::LemmaReport;

use super::engine::{AggregateReport, TrajectoryRecord};

pub const TRAJECTORIES_FILE: &str = "trajectories.csv";
pub const AGGREGATE_FILE: &str = "aggregate.json";
pub const LEMMAS_FILE: &str = "lemmas.json";

/// One row of `trajectories.csv`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub rep: u64,
    pub checkpoint: u64,
    pub arm: usize,
    pub count: u64,
    pub mean: f64,
    pub std: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub regret: f64,
}

pub fn trajectory_rows(records: &[TrajectoryRecord]) -> Vec<TrajectoryRow> {
    let mut rows = Vec::new();
    for rec in records {
        for cp in &rec.checkpoints {
            for (arm, (est, ci)) in cp.estimates.iter().zip(&cp.intervals).enumerate() {
                rows.push(TrajectoryRow {
                    rep: rec.rep,
                    checkpoint: cp.t,
                    arm,
                    count: cp.counts[arm],
                    mean: est.mean,
                    std: est.sample_std,
                    ci_lo: ci.lower,
                    ci_hi: ci.upper,
                    regret: cp.regret,
                });
            }
        }
    }
    rows
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| LabError::io(dir, e))
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let file_name = path
        .file_name()
        .ok_or_else(|| LabError::io(path, std::io::Error::other("not a file path")))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(file_name);
    tmp_name.push(format!(".tmp-{}", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    result.map_err(|e| {
        let _ = fs::remove_file(&tmp);
        LabError::io(path, e)
    })
}

fn to_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("report serializes");
    bytes.push(b'\n');
    bytes
}

/// Paths written by [`write_report`].
#[derive(Clone, Debug, PartialEq)]
pub struct ReportPaths {
    pub trajectories: PathBuf,
    pub aggregate: PathBuf,
}

/// Writes `trajectories.csv` and `aggregate.json` into `dir`.
pub fn write_report(
    report: &AggregateReport,
    records: &[TrajectoryRecord],
    dir: &Path,
) -> Result<ReportPaths> {
    ensure_dir(dir)?;
    let trajectories = dir.join(TRAJECTORIES_FILE);
    let mut writer = csv::Writer::from_writer(Vec::new());
    for row in trajectory_rows(records) {
        writer.serialize(row).map_err(|source| LabError::Csv {
            path: trajectories.clone(),
            source,
        })?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| LabError::io(&trajectories, e.into_error()))?;
    write_atomic(&trajectories, &bytes)?;

    let aggregate = dir.join(AGGREGATE_FILE);
    write_atomic(&aggregate, &to_json(report))?;
    Ok(ReportPaths {
        trajectories,
        aggregate,
    })
}

pub fn write_lemmas(report: &LemmaReport, dir: &Path) -> Result<PathBuf> {
    ensure_dir(dir)?;
    let path = dir.join(LEMMAS_FILE);
    write_atomic(&path, &to_json(report))?;
    Ok(path)
}

pub fn read_trajectories(path: &Path) -> Result<Vec<TrajectoryRow>> {
    let mut reader = csv::Reader::from_path(path).map_err(|source| LabError::Csv {
        path: path.to_path_buf(),
        source,
    })?;
    reader
        .deserialize()
        .map(|row| {
            row.map_err(|source| LabError::Csv {
                path: path.to_path_buf(),
                source,
            })
        })
        .collect()
}

pub fn read_aggregate(path: &Path) -> Result<AggregateReport> {
    let text = fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
    serde_json::from_str(&text).map_err(|source| LabError::Json {
        path: path.to_path_buf(),
        source,
    })
}
