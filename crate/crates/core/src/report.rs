//! Run artifacts: manifest, metric summary, plot-ready tables.
//!
//! A report is written as `<name>.json` (manifest, metrics, resolved
//! config), `<name>.txt` (human-readable reference/simulated comparison)
//! and one `<name>_<table>.csv` per series. Output is a pure function of
//! the inputs: no timestamps or host data are recorded.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::engine::scenario::hex_string;
use crate::Result;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    /// Preset names or files the configuration was resolved from.
    pub scenario_sources: Vec<String>,
    pub seed: u64,
    pub duration_s: f64,
    pub output_dir: String,
    pub analyses: Vec<String>,
    pub tool_version: String,
    /// SHA-256 over every resolved scenario and analysis setting.
    pub config_hash: String,
}

/// Combines several per-scenario hashes into one.
pub fn combine_hashes<'a>(hashes: impl IntoIterator<Item = &'a str>) -> String {
    let mut h = Sha256::new();
    for s in hashes {
        h.update(s.as_bytes());
        h.update([0u8]);
    }
    hex_string(&h.finalize())
}

/// A reported number, optionally next to a published reference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metric {
    pub name: String,
    pub value: f64,
    pub error: Option<f64>,
    pub reference: Option<f64>,
    pub reference_error: Option<f64>,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub note: String,
}

impl Metric {
    pub fn new(name: impl Into<String>, value: f64) -> Self {
        Self { name: name.into(), value, error: None, reference: None, reference_error: None, note: String::new() }
    }

    pub fn err(mut self, e: f64) -> Self {
        self.error = Some(e);
        self
    }

    pub fn reference(mut self, r: f64) -> Self {
        self.reference = Some(r);
        self
    }

    pub fn reference_err(mut self, r: f64, e: f64) -> Self {
        self.reference = Some(r);
        self.reference_error = Some(e);
        self
    }

    pub fn note(mut self, n: impl Into<String>) -> Self {
        self.note = n.into();
        self
    }
}

/// Delimited table; cells are pre-formatted so output is byte-stable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: impl Into<String>, columns: &[&str]) -> Self {
        Self { name: name.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn push_nums(&mut self, row: &[f64]) {
        self.push(row.iter().map(|v| num(*v)).collect());
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.join(","));
            out.push('\n');
        }
        out
    }

    /// Column parsed as numbers; cells that do not parse are skipped.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().filter_map(|r| r[k].parse().ok()).collect())
    }
}

/// Shortest round-trip representation.
pub fn num(v: f64) -> String {
    format!("{v}")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub name: String,
    pub manifest: RunManifest,
    pub metrics: Vec<Metric>,
    /// Every fit and reconstruction in the run converged.
    pub converged: bool,
    pub notes: Vec<String>,
    /// Resolved configuration echoed verbatim (TOML).
    pub resolved_config: String,
    #[serde(skip)]
    pub tables: Vec<Table>,
}

impl Report {
    pub fn metric(&self, name: &str) -> Option<&Metric> {
        self.metrics.iter().find(|m| m.name == name)
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn summary_text(&self) -> String {
        let mut s = String::new();
        let m = &self.manifest;
        let _ = writeln!(s, "{} (muxent {})", self.name, m.tool_version);
        let _ = writeln!(s, "sources: {}", m.scenario_sources.join(", "));
        let _ = writeln!(s, "seed {}  duration {} s  config {}", m.seed, m.duration_s, &m.config_hash[..16.min(m.config_hash.len())]);
        let _ = writeln!(s);
        let _ = writeln!(s, "{:<34} {:>24} {:>24}", "metric", "simulated", "reference");
        for x in &self.metrics {
            let _ = writeln!(s, "{:<34} {:>24} {:>24}", x.name, fmt_pm(Some(x.value), x.error), fmt_pm(x.reference, x.reference_error));
            if !x.note.is_empty() {
                let _ = writeln!(s, "    note: {}", x.note);
            }
        }
        for n in &self.notes {
            let _ = writeln!(s, "* {n}");
        }
        let _ = writeln!(s, "converged: {}", self.converged);
        s
    }

    /// Writes all artifacts into `dir` and returns their paths.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut paths = Vec::new();
        let json = dir.join(format!("{}.json", self.name));
        std::fs::write(&json, serde_json::to_string_pretty(self).expect("report serialises") + "\n")?;
        paths.push(json);
        let txt = dir.join(format!("{}.txt", self.name));
        std::fs::write(&txt, self.summary_text())?;
        paths.push(txt);
        for t in &self.tables {
            let p = dir.join(format!("{}_{}.csv", self.name, t.name));
            std::fs::write(&p, t.to_csv())?;
            paths.push(p);
        }
        Ok(paths)
    }
}

fn fmt_pm(v: Option<f64>, e: Option<f64>) -> String {
    match (v, e) {
        (None, _) => "-".into(),
        (Some(v), None) => sig(v),
        (Some(v), Some(e)) => format!("{} +/- {}", sig(v), sig(e)),
    }
}

fn sig(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e5 || v.abs() < 1e-3) {
        format!("{v:.3e}")
    } else {
        format!("{v:.4}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report() -> Report {
        let mut t = Table::new("series", &["x", "y"]);
        t.push_nums(&[1.0, 0.1]);
        Report {
            name: "demo".into(),
            manifest: RunManifest {
                scenario_sources: vec!["builtin:cw_energy_time".into()],
                seed: 1,
                duration_s: 1.0,
                output_dir: ".".into(),
                analyses: vec!["car".into()],
                tool_version: TOOL_VERSION.into(),
                config_hash: "ab".repeat(32),
            },
            metrics: vec![Metric::new("car", 80.0).err(4.0).reference(80.0)],
            converged: true,
            notes: vec![],
            resolved_config: String::new(),
            tables: vec![t],
        }
    }

    #[test]
    fn csv_and_summary() {
        let r = report();
        assert_eq!(r.tables[0].to_csv(), "x,y\n1,0.1\n");
        let s = r.summary_text();
        assert!(s.contains("80.0000 +/- 4.0000"));
        assert_eq!(r.tables[0].column("y").unwrap(), vec![0.1]);
    }

    #[test]
    fn writes_all_files() {
        let dir = std::env::temp_dir().join(format!("muxent-report-{}", std::process::id()));
        let paths = report().write(&dir).unwrap();
        assert_eq!(paths.len(), 3);
        assert!(paths.iter().all(|p| p.is_file()));
        std::fs::remove_dir_all(dir).unwrap();
    }
}
