use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

pub const THRESHOLDS_SCHEMA: u32 = 1;

/// The frozen thresholds shipped with the crate.
pub fn default_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("thresholds.json")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Calibrated,
    Uncalibrated,
}

/// One frozen number and where it came from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Entry {
    pub key: String,
    pub lemma: String,
    pub param: String,
    pub value: f64,
    /// Quantile of the calibration sample the value was read from, if any.
    pub quantile: Option<f64>,
    /// Calibration seed range, `a..b` (half-open).
    pub seeds: Option<String>,
    pub samples: u64,
    pub source: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdsFile {
    pub schema: u32,
    pub status: Status,
    /// Sorted by key.
    pub entries: Vec<Entry>,
}

impl ThresholdsFile {
    pub fn new(mut entries: Vec<Entry>) -> ThresholdsFile {
        entries.sort_by(|a, b| a.key.cmp(&b.key));
        ThresholdsFile { schema: THRESHOLDS_SCHEMA, status: Status::Calibrated, entries }
    }

    pub fn load(path: &Path) -> Result<ThresholdsFile> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let t: ThresholdsFile = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        if t.schema != THRESHOLDS_SCHEMA {
            bail!("{}: schema {} (expected {})", path.display(), t.schema, THRESHOLDS_SCHEMA);
        }
        Ok(t)
    }

    /// Loads a file and refuses anything that did not come out of `calibrate`.
    pub fn load_calibrated(path: &Path) -> Result<ThresholdsFile> {
        let t = ThresholdsFile::load(path)?;
        if t.status != Status::Calibrated {
            bail!("{} is not calibrated; run `dcolor calibrate` first", path.display());
        }
        Ok(t)
    }

    pub fn entry(&self, key: &str) -> Result<&Entry> {
        self.entries.iter().find(|e| e.key == key).with_context(|| format!("threshold '{key}' missing from the calibration file"))
    }

    pub fn get(&self, key: &str) -> Result<f64> {
        Ok(self.entry(key)?.value)
    }

    /// Pretty JSON with a trailing newline; identical input gives identical bytes.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("thresholds serialize");
        s.push('\n');
        s
    }
}
