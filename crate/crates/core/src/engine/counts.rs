//! Per-setting counts, either from simulated time tags or sampled directly
//! from the expected rates (counts mode, much faster for long runs).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::engine::coincidence::{count_coincidences, WindowSpec};
use crate::engine::rates::expected_rates;
use crate::engine::scenario::Scenario;
use crate::engine::simulate::simulate;
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    TimeTag,
    Counts,
}

/// Counts collected at one measurement setting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SettingCounts {
    pub coincidences: u64,
    /// Summed over `accidental_windows` windows.
    pub accidentals: u64,
    pub accidental_windows: u32,
    pub singles: [u64; 2],
    pub duration_s: f64,
}

impl SettingCounts {
    pub fn accidental_mean(&self) -> f64 {
        if self.accidental_windows == 0 {
            0.0
        } else {
            self.accidentals as f64 / self.accidental_windows as f64
        }
    }

    /// Coincidences with the mean accidental level removed.
    pub fn net(&self) -> f64 {
        self.coincidences as f64 - self.accidental_mean()
    }

    pub fn car(&self) -> Option<f64> {
        let acc = self.accidental_mean();
        (acc > 0.0).then(|| self.coincidences as f64 / acc)
    }
}

fn poisson(rng: &mut ChaCha8Rng, mean: f64) -> u64 {
    if mean <= 0.0 {
        0
    } else {
        Poisson::new(mean).expect("positive finite mean").sample(rng) as u64
    }
}

/// Poisson-samples counts from the expected rates of the scenario.
pub fn sample_counts(sc: &Scenario, window: &WindowSpec) -> Result<SettingCounts> {
    window.validate()?;
    let r = expected_rates(sc, window.width_s())?;
    let mut rng = ChaCha8Rng::seed_from_u64(sc.seed);
    rng.set_stream(u64::MAX);
    let d = sc.duration_s;
    let n_acc = window.accidental_offsets_ps.len() as u32;
    Ok(SettingCounts {
        coincidences: poisson(&mut rng, (r.true_rate + r.accidental_rate) * d),
        accidentals: poisson(&mut rng, r.accidental_rate * d * n_acc as f64),
        accidental_windows: n_acc,
        singles: [poisson(&mut rng, r.observed[0] * d), poisson(&mut rng, r.observed[1] * d)],
        duration_s: d,
    })
}

/// Simulates time tags and counts coincidences in the given windows.
pub fn timetag_counts(sc: &Scenario, window: &WindowSpec) -> Result<SettingCounts> {
    let out = simulate(sc)?;
    let c = count_coincidences(out.signal(), out.idler(), window)?;
    Ok(SettingCounts {
        coincidences: c.coincidences,
        accidentals: c.accidentals.iter().sum(),
        accidental_windows: c.accidentals.len() as u32,
        singles: [out.signal().len() as u64, out.idler().len() as u64],
        duration_s: sc.duration_s,
    })
}

pub fn measure(sc: &Scenario, window: &WindowSpec, mode: Mode) -> Result<SettingCounts> {
    match mode {
        Mode::TimeTag => timetag_counts(sc, window),
        Mode::Counts => sample_counts(sc, window),
    }
}
