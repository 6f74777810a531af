use serde::{Deserialize, Serialize};

use crate::engine::AnalyzerSetting;
use crate::qstate::{born_probability, DensityMatrix, Projector};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountsRow {
    pub label: String,
    pub signal: AnalyzerSetting,
    pub idler: AnalyzerSetting,
    pub coincidences: u64,
    /// Mean accidental count expected in the coincidence window.
    #[serde(default)]
    pub accidentals: f64,
}

impl CountsRow {
    pub fn projector(&self) -> Projector {
        Projector::product(&self.signal.state(), &self.idler.state())
    }
}

/// Sixteen two-qubit measurement settings with their counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountsRecord16 {
    pub rows: Vec<CountsRow>,
    pub integration_time_s: f64,
}

impl CountsRecord16 {
    pub fn new(rows: Vec<CountsRow>, integration_time_s: f64) -> Result<Self> {
        if rows.len() != 16 {
            return Err(Error::MissingSetting(format!("expected 16 settings, got {}", rows.len())));
        }
        Ok(Self { rows, integration_time_s })
    }

    /// Rows with the given settings and zero counts.
    pub fn from_settings(settings: &[(AnalyzerSetting, AnalyzerSetting)], integration_time_s: f64) -> Result<Self> {
        let rows = settings
            .iter()
            .map(|&(s, i)| CountsRow {
                label: format!("{}{}", s.label(), i.label()),
                signal: s,
                idler: i,
                coincidences: 0,
                accidentals: 0.0,
            })
            .collect();
        Self::new(rows, integration_time_s)
    }

    /// Born probabilities of each row's projector for `rho`.
    pub fn probabilities(&self, rho: &DensityMatrix) -> Vec<f64> {
        self.rows.iter().map(|r| born_probability(rho, &r.projector())).collect()
    }

    pub fn counts(&self) -> Vec<u64> {
        self.rows.iter().map(|r| r.coincidences).collect()
    }

    pub fn with_counts(&self, counts: &[u64]) -> Self {
        let mut out = self.clone();
        for (r, &c) in out.rows.iter_mut().zip(counts) {
            r.coincidences = c;
        }
        out
    }

    pub fn total(&self) -> u64 {
        self.rows.iter().map(|r| r.coincidences).sum()
    }

    /// `label,coincidences,accidentals` rows with a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("label,coincidences,accidentals\n");
        for r in &self.rows {
            out.push_str(&format!("{},{},{}\n", r.label, r.coincidences, r.accidentals));
        }
        out
    }
}
