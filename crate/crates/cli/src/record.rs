//! Result records, campaign CSV streams and artifact files.

use std::fs::{self, OpenOptions};
use std::path::{Path, PathBuf};
use std::process::Command;

use hole_lab::montecarlo::McEstimate;
use hole_lab::rng::GENERATOR_NAME;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;
pub const CAMPAIGN_FILE: &str = "campaign.csv";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Provenance {
    pub git_revision: String,
    pub generator: String,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResultRecord {
    pub schema_version: u32,
    pub timestamp: String,
    pub config: Value,
    pub results: Value,
    pub provenance: Provenance,
}

impl ResultRecord {
    pub fn new(config: Value, results: Value, seed: Option<u64>) -> Self {
        ResultRecord {
            schema_version: SCHEMA_VERSION,
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            config,
            results,
            provenance: Provenance {
                git_revision: git_revision(),
                generator: GENERATOR_NAME.to_string(),
                seed,
            },
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("records serialize")
    }
}

fn git_revision() -> String {
    Command::new("git")
        .args(["rev-parse", "--short=12", "HEAD"])
        .output()
        .ok()
        .filter(|o| o.status.success())
        .and_then(|o| String::from_utf8(o.stdout).ok())
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .unwrap_or_else(|| "unknown".to_string())
}

/// One line of a campaign stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignRow {
    pub m: usize,
    #[serde(rename = "N")]
    pub n: u64,
    pub r: f64,
    pub k: u64,
    pub trials: u64,
    pub hits: u64,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub boundary_flag_rate: f64,
    pub seed: u64,
    pub trial_start: u64,
}

impl From<&McEstimate> for CampaignRow {
    fn from(e: &McEstimate) -> Self {
        CampaignRow {
            m: e.m,
            n: e.n,
            r: e.r,
            k: e.k,
            trials: e.trials,
            hits: e.hits,
            p_hat: e.p_hat,
            ci_low: e.ci_low,
            ci_high: e.ci_high,
            boundary_flag_rate: e.boundary_flag_rate,
            seed: e.seed,
            trial_start: e.trial_start,
        }
    }
}

impl CampaignRow {
    /// Rebuilds the estimate; intervals are recomputed from the counts.
    pub fn to_estimate(&self) -> Result<McEstimate, CliError> {
        let flagged = (self.boundary_flag_rate * self.trials as f64).round() as u64;
        Ok(McEstimate::from_counts(
            (self.m, self.n, self.r, self.k),
            self.trials,
            self.hits,
            flagged,
            self.seed,
            self.trial_start,
        )?)
    }
}

pub fn append_rows(path: &Path, rows: &[CampaignRow]) -> Result<(), CliError> {
    let fresh = fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
    let file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| io_error(path, e))?;
    let mut w = csv::WriterBuilder::new()
        .has_headers(fresh)
        .from_writer(file);
    for row in rows {
        w.serialize(row)
            .map_err(|e| CliError::Usage(format!("writing {}: {e}", path.display())))?;
    }
    w.flush().map_err(|e| io_error(path, e))
}

pub fn read_rows(path: &Path) -> Result<Vec<CampaignRow>, CliError> {
    let mut r = csv::Reader::from_path(path)
        .map_err(|e| CliError::Usage(format!("reading {}: {e}", path.display())))?;
    r.deserialize()
        .map(|row| row.map_err(|e| CliError::Usage(format!("reading {}: {e}", path.display()))))
        .collect()
}

/// Artifact directory given by `--out`, created on demand.
#[derive(Debug, Clone)]
pub struct OutDir(Option<PathBuf>);

impl OutDir {
    pub fn new(dir: Option<PathBuf>) -> Result<Self, CliError> {
        if let Some(d) = &dir {
            fs::create_dir_all(d).map_err(|e| io_error(d, e))?;
        }
        Ok(OutDir(dir))
    }

    pub fn path(&self, name: &str) -> Option<PathBuf> {
        self.0.as_ref().map(|d| d.join(name))
    }

    pub fn write(&self, name: &str, contents: &str) -> Result<(), CliError> {
        if let Some(p) = self.path(name) {
            fs::write(&p, contents).map_err(|e| io_error(&p, e))?;
        }
        Ok(())
    }

    pub fn append_campaign(&self, rows: &[CampaignRow]) -> Result<(), CliError> {
        match self.path(CAMPAIGN_FILE) {
            Some(p) => append_rows(&p, rows),
            None => Ok(()),
        }
    }
}

fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError::Usage(format!("{}: {e}", path.display()))
}
