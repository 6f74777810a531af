use serde::{Deserialize, Serialize};

use crate::engine::{CoincidenceCounts, SettingCounts};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CarEstimate {
    pub value: f64,
    pub error: f64,
    /// No accidentals observed: `value` assumes one accidental and is a
    /// lower bound.
    pub lower_bound: bool,
}

/// `CAR = N_window / mean accidental count`, Poisson errors on both.
pub fn estimate_car(window_total: u64, accidental_total: u64, accidental_windows: u32) -> CarEstimate {
    let n = accidental_windows.max(1) as f64;
    let w = window_total as f64;
    if accidental_total == 0 {
        let value = w * n;
        return CarEstimate { value, error: value * (1.0 / w.max(1.0)).sqrt(), lower_bound: true };
    }
    let a = accidental_total as f64;
    let value = w / (a / n);
    let rel = (1.0 / w.max(1.0) + 1.0 / a).sqrt();
    CarEstimate { value, error: value * rel, lower_bound: false }
}

pub fn car_from_counts(c: &CoincidenceCounts) -> CarEstimate {
    estimate_car(c.coincidences, c.accidentals.iter().sum(), c.accidentals.len() as u32)
}

pub fn car_from_setting(c: &SettingCounts) -> CarEstimate {
    estimate_car(c.coincidences, c.accidentals, c.accidental_windows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_and_error() {
        let c = estimate_car(800, 10, 1);
        assert_eq!(c.value, 80.0);
        assert!((c.error - 80.0 * (1.0 / 800.0 + 0.1f64).sqrt()).abs() < 1e-12);
        assert!(!c.lower_bound);
        assert_eq!(estimate_car(800, 40, 4).value, 80.0);
    }

    #[test]
    fn zero_accidentals_is_flagged() {
        let c = estimate_car(50, 0, 5);
        assert!(c.lower_bound);
        assert_eq!(c.value, 250.0);
    }
}
