//! JSON reports written by the checks: one object per check and an index
//! listing every run.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::Result;
use crate::output::to_json_string;

/// Outcome of one check in the fixed report layout.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    /// Registry name of the check that produced the report.
    pub claim: String,
    pub family: String,
    pub level: u32,
    pub s: Option<f64>,
    pub parameters: Map<String, Value>,
    pub statistics: Map<String, Value>,
    pub seed: u64,
    pub pass: bool,
}

impl CheckReport {
    pub fn new(claim: &str, family: &str, level: u32, s: Option<f64>, seed: u64) -> Self {
        Self {
            claim: claim.to_string(),
            family: family.to_string(),
            level,
            s,
            parameters: Map::new(),
            statistics: Map::new(),
            seed,
            pass: false,
        }
    }

    pub fn parameter<T: Serialize>(mut self, key: &str, value: T) -> Result<Self> {
        self.parameters
            .insert(key.to_string(), serde_json::to_value(value)?);
        Ok(self)
    }

    pub fn statistic<T: Serialize>(mut self, key: &str, value: T) -> Result<Self> {
        self.statistics
            .insert(key.to_string(), serde_json::to_value(value)?);
        Ok(self)
    }

    pub fn with_pass(mut self, pass: bool) -> Self {
        self.pass = pass;
        self
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(to_json_string(self)?)
    }

    /// File name used when the report is written into a directory.
    pub fn file_name(&self) -> String {
        match self.s {
            Some(s) => format!("{}_{}_m{}_s{}.json", self.claim, self.family, self.level, s),
            None => format!("{}_{}_m{}.json", self.claim, self.family, self.level),
        }
    }
}

/// One line of the index file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndexEntry {
    pub claim: String,
    pub file: String,
    pub pass: bool,
    /// Error message when the check could not run.
    pub error: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ReportIndex {
    pub runs: Vec<IndexEntry>,
}

impl ReportIndex {
    pub fn all_pass(&self) -> bool {
        !self.runs.is_empty() && self.runs.iter().all(|r| r.pass)
    }
}

/// Writes `report` into `dir` and returns the index entry pointing at it.
pub fn write_report(dir: &Path, report: &CheckReport) -> Result<IndexEntry> {
    std::fs::create_dir_all(dir)?;
    let file = report.file_name();
    let mut f = std::fs::File::create(dir.join(&file))?;
    f.write_all(report.to_json()?.as_bytes())?;
    f.write_all(b"\n")?;
    Ok(IndexEntry {
        claim: report.claim.clone(),
        file,
        pass: report.pass,
        error: None,
    })
}

pub fn write_index(dir: &Path, index: &ReportIndex) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut f = std::fs::File::create(dir.join("index.json"))?;
    f.write_all(to_json_string(index)?.as_bytes())?;
    f.write_all(b"\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_layout() {
        let r = CheckReport::new("hke", "gasket", 5, None, 7)
            .parameter("points", [0, 1, 2])
            .unwrap()
            .statistic("slope", -0.6875)
            .unwrap()
            .with_pass(true);
        let json: Value = serde_json::from_str(&r.to_json().unwrap()).unwrap();
        for key in [
            "claim",
            "family",
            "level",
            "s",
            "parameters",
            "statistics",
            "seed",
            "pass",
        ] {
            assert!(json.get(key).is_some(), "missing {key}");
        }
        assert_eq!(json["statistics"]["slope"], -0.6875);
        assert_eq!(r.file_name(), "hke_gasket_m5.json");
        let back: CheckReport = serde_json::from_value(json).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn writes_files_and_index() {
        let dir = tempfile::tempdir().unwrap();
        let r = CheckReport::new("lle", "interval", 5, Some(0.5), 1).with_pass(true);
        let entry = write_report(dir.path(), &r).unwrap();
        let index = ReportIndex { runs: vec![entry] };
        write_index(dir.path(), &index).unwrap();
        assert!(dir.path().join("lle_interval_m5_s0.5.json").exists());
        let text = std::fs::read_to_string(dir.path().join("index.json")).unwrap();
        let back: ReportIndex = serde_json::from_str(&text).unwrap();
        assert!(back.all_pass());
    }
}
