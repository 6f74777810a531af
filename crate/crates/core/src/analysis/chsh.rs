//! CHSH S-parameter from polarizer-angle counts.
//!
//! `E(a, b) = (N(a,b) + N(a',b') - N(a,b') - N(a',b)) / sum` where primes
//! denote the orthogonal polarizer orientation. The four correlators are
//! combined with signs fixed from the ideal target state, never from data.

use serde::{Deserialize, Serialize};

use crate::analysis::record::{CountsRecord16, CountsRow};
use crate::engine::AnalyzerSetting;
use crate::qstate::{born_probability, DensityMatrix, Projector, QubitState};
use crate::{Error, Result};

/// Polarizer angles in degrees: `a`, `a'` for the signal, `b`, `b'` for the idler.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChshAngles {
    pub a: f64,
    pub a_prime: f64,
    pub b: f64,
    pub b_prime: f64,
}

impl ChshAngles {
    /// Signal at -22.5/67.5 and 22.5/112.5 degrees, idler at -45/45 and 0/90.
    pub fn standard() -> Self {
        Self { a: -22.5, a_prime: 22.5, b: -45.0, b_prime: 0.0 }
    }

    /// Correlator pairs in the order `(a,b), (a,b'), (a',b), (a',b')`.
    pub fn pairs(&self) -> [(f64, f64); 4] {
        [(self.a, self.b), (self.a, self.b_prime), (self.a_prime, self.b), (self.a_prime, self.b_prime)]
    }

    /// The 16 polarizer settings (each angle and its orthogonal partner).
    pub fn settings(&self) -> Vec<(AnalyzerSetting, AnalyzerSetting)> {
        let mut out = Vec::with_capacity(16);
        for (s, i) in self.pairs() {
            for (ds, di) in [(0.0, 0.0), (0.0, 90.0), (90.0, 0.0), (90.0, 90.0)] {
                out.push((AnalyzerSetting::LinearDeg(s + ds), AnalyzerSetting::LinearDeg(i + di)));
            }
        }
        out
    }

    /// Sign vector maximizing `S` for `target` among the four CHSH forms.
    pub fn signs_for(&self, target: &DensityMatrix) -> [f64; 4] {
        let e = self.pairs().map(|(s, i)| correlator_from_state(target, s, i));
        let forms = [[-1.0, 1.0, 1.0, 1.0], [1.0, -1.0, 1.0, 1.0], [1.0, 1.0, -1.0, 1.0], [1.0, 1.0, 1.0, -1.0]];
        let s = |f: &[f64; 4]| f.iter().zip(&e).map(|(a, b)| a * b).sum::<f64>();
        *forms.iter().max_by(|x, y| s(x).total_cmp(&s(y))).expect("four forms")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChshResult {
    pub e: [f64; 4],
    pub e_err: [f64; 4],
    pub s: f64,
    pub s_err: f64,
    pub signs: [f64; 4],
    /// `(S - 2) / sigma_S`.
    pub violation_sigma: f64,
}

fn same_angle(a: f64, b: f64) -> bool {
    ((a - b).rem_euclid(180.0)).min((b - a).rem_euclid(180.0)) < 1e-9
}

/// Exact correlator of a state at polarizer angles (degrees).
pub fn correlator_from_state(rho: &DensityMatrix, s: f64, i: f64) -> f64 {
    let p = |ds: f64, di: f64| {
        born_probability(rho, &Projector::product(&QubitState::linear_deg(s + ds), &QubitState::linear_deg(i + di)))
    };
    let (pp, pm, mp, mm) = (p(0.0, 0.0), p(0.0, 90.0), p(90.0, 0.0), p(90.0, 90.0));
    (pp + mm - pm - mp) / (pp + mm + pm + mp)
}

/// Analytic S of a state with the given sign assignment.
pub fn chsh_from_state(rho: &DensityMatrix, angles: &ChshAngles, signs: [f64; 4]) -> f64 {
    angles.pairs().iter().zip(signs).map(|(&(s, i), sg)| sg * correlator_from_state(rho, s, i)).sum()
}

fn find(rows: &[CountsRow], s: f64, i: f64) -> Result<f64> {
    rows.iter()
        .find(|r| match (r.signal, r.idler) {
            (AnalyzerSetting::LinearDeg(rs), AnalyzerSetting::LinearDeg(ri)) => same_angle(rs, s) && same_angle(ri, i),
            _ => false,
        })
        .map(|r| r.coincidences as f64)
        .ok_or_else(|| Error::MissingSetting(format!("polarizers {s} / {i} degrees")))
}

/// CHSH from counts; `signs` come from [`ChshAngles::signs_for`] on the
/// ideal state. Raw coincidences, no background subtraction.
pub fn chsh(record: &CountsRecord16, angles: &ChshAngles, signs: [f64; 4]) -> Result<ChshResult> {
    let mut e = [0.0; 4];
    let mut e_err = [0.0; 4];
    for (k, (s, i)) in angles.pairs().into_iter().enumerate() {
        let pp = find(&record.rows, s, i)?;
        let pm = find(&record.rows, s, i + 90.0)?;
        let mp = find(&record.rows, s + 90.0, i)?;
        let mm = find(&record.rows, s + 90.0, i + 90.0)?;
        let total = pp + pm + mp + mm;
        if total == 0.0 {
            return Err(Error::MissingSetting(format!("no counts for polarizers {s} / {i} degrees")));
        }
        e[k] = (pp + mm - pm - mp) / total;
        e_err[k] = ((1.0 - e[k] * e[k]) / total).sqrt();
    }
    let s: f64 = e.iter().zip(signs).map(|(a, b)| a * b).sum();
    let s_err = e_err.iter().map(|x| x * x).sum::<f64>().sqrt();
    Ok(ChshResult { e, e_err, s, s_err, signs, violation_sigma: (s - 2.0) / s_err })
}
