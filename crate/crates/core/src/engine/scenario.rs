use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::channels::PAIR_COUNT;
use crate::photonics::{ArmLossBudget, DetectorParams, Pump, SagnacParams, SourceParams, UmiParams};
use crate::qstate::QubitState;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    EnergyTime,
    TimeBin,
    Polarization,
}

/// Passive losses between the chip and the detector of one arm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArmLoss {
    pub output_coupling_db: f64,
    pub filter_db: f64,
    #[serde(default)]
    pub extra_db: f64,
}

impl ArmLoss {
    pub fn budget(&self, detector: &DetectorParams) -> ArmLossBudget {
        ArmLossBudget {
            output_coupling_db: self.output_coupling_db,
            filter_db: self.filter_db,
            extra_db: self.extra_db,
            detector_efficiency: detector.efficiency,
        }
    }
}

/// Polarization analyzer setting of one arm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnalyzerSetting {
    LinearDeg(f64),
    H,
    V,
    D,
    A,
    R,
    L,
}

impl AnalyzerSetting {
    pub fn state(&self) -> QubitState {
        match *self {
            AnalyzerSetting::LinearDeg(t) => QubitState::linear_deg(t),
            AnalyzerSetting::H => QubitState::h(),
            AnalyzerSetting::V => QubitState::v(),
            AnalyzerSetting::D => QubitState::d(),
            AnalyzerSetting::A => QubitState::a(),
            AnalyzerSetting::R => QubitState::r(),
            AnalyzerSetting::L => QubitState::l(),
        }
    }

    pub fn label(&self) -> String {
        match *self {
            AnalyzerSetting::LinearDeg(t) => format!("{t}"),
            AnalyzerSetting::H => "H".into(),
            AnalyzerSetting::V => "V".into(),
            AnalyzerSetting::D => "D".into(),
            AnalyzerSetting::A => "A".into(),
            AnalyzerSetting::R => "R".into(),
            AnalyzerSetting::L => "L".into(),
        }
    }
}

/// Interferometer phases (rad) and polarizer settings for one measurement.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct Settings {
    pub phase_pump: f64,
    pub phase_signal: f64,
    pub phase_idler: f64,
    /// Redraw interferometer phases uniformly every simulation chunk.
    pub phase_randomized: bool,
    pub polarizer_signal: Option<AnalyzerSetting>,
    pub polarizer_idler: Option<AnalyzerSetting>,
}

/// How `state_visibility` degrades the ideal two-photon state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateNoise {
    /// Scale the `|00><11|` coherences only.
    #[default]
    Dephasing,
    /// Mix with the maximally mixed state (Werner form).
    White,
}

fn one() -> f64 {
    1.0
}

/// A complete experimental configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub scheme: Scheme,
    pub source: SourceParams,
    pub signal_detector: DetectorParams,
    pub idler_detector: DetectorParams,
    pub signal_arm: ArmLoss,
    pub idler_arm: ArmLoss,
    pub pump: Pump,
    pub channel_pair: u8,
    /// None, one (energy-time) or three (time-bin: pump, signal, idler).
    #[serde(default)]
    pub umis: Vec<UmiParams>,
    #[serde(default)]
    pub sagnac: Option<SagnacParams>,
    /// Coherence of the two-photon state (1 = pure).
    #[serde(default = "one")]
    pub state_visibility: f64,
    #[serde(default)]
    pub state_noise: StateNoise,
    #[serde(default)]
    pub settings: Settings,
    /// RMS timing jitter per detector, ps.
    #[serde(default)]
    pub jitter_ps: f64,
    pub duration_s: f64,
    pub seed: u64,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InconsistentScenario(m));
        self.source.validate()?;
        self.signal_detector.validate()?;
        self.idler_detector.validate()?;
        self.pump.validate()?;
        self.budget(0).validate()?;
        self.budget(1).validate()?;
        for u in &self.umis {
            u.validate()?;
        }
        if !(1..=PAIR_COUNT).contains(&self.channel_pair) {
            return Err(Error::ChannelOutOfRange(self.channel_pair));
        }
        if !(self.duration_s.is_finite() && self.duration_s > 0.0) {
            return bad(format!("duration must be > 0, got {}", self.duration_s));
        }
        if !(0.0..=1.0).contains(&self.state_visibility) {
            return bad(format!("state visibility {} outside [0, 1]", self.state_visibility));
        }
        if !(self.jitter_ps.is_finite() && self.jitter_ps >= 0.0) {
            return bad("jitter must be >= 0".into());
        }
        let pulsed = self.pump.rep_rate().is_some();
        let has_polarizers = self.settings.polarizer_signal.is_some() || self.settings.polarizer_idler.is_some();
        match self.scheme {
            Scheme::EnergyTime => {
                if pulsed {
                    return bad("energy-time scheme needs a CW pump".into());
                }
                if self.umis.len() > 1 {
                    return bad(format!("energy-time scheme takes at most one interferometer, got {}", self.umis.len()));
                }
            }
            Scheme::TimeBin => {
                if !pulsed {
                    return bad("time-bin scheme needs a pulsed pump".into());
                }
                if !(self.umis.is_empty() || self.umis.len() == 3) {
                    return bad(format!("time-bin scheme takes zero or three interferometers, got {}", self.umis.len()));
                }
            }
            Scheme::Polarization => {
                if self.sagnac.is_none() {
                    return bad("polarization scheme needs a sagnac block".into());
                }
                if !self.umis.is_empty() {
                    return bad("polarization scheme takes no interferometers".into());
                }
                if self.settings.polarizer_signal.is_some() != self.settings.polarizer_idler.is_some() {
                    return bad("set both polarizers or neither".into());
                }
            }
        }
        if self.scheme != Scheme::Polarization && (self.sagnac.is_some() || has_polarizers) {
            return bad("sagnac/polarizer settings only apply to the polarization scheme".into());
        }
        if !pulsed && (self.signal_detector.gated() || self.idler_detector.gated()) {
            return bad("gated detectors need a pulsed pump".into());
        }
        if let (Some(f), true) = (self.pump.rep_rate(), self.umis.len() == 3) {
            let span = 2.0 * self.umis[0].delay_s.max(self.umis[1].delay_s);
            if span >= 1.0 / f {
                return bad("interferometer delays exceed the pulse period".into());
            }
        }
        Ok(())
    }

    /// Loss budget of arm 0 (signal) or 1 (idler).
    pub fn budget(&self, arm: usize) -> ArmLossBudget {
        match arm {
            0 => self.signal_arm.budget(&self.signal_detector),
            _ => self.idler_arm.budget(&self.idler_detector),
        }
    }

    pub fn transmissions(&self) -> [f64; 2] {
        [self.budget(0).transmission(), self.budget(1).transmission()]
    }

    pub fn detector(&self, arm: usize) -> &DetectorParams {
        match arm {
            0 => &self.signal_detector,
            _ => &self.idler_detector,
        }
    }

    /// Interferometer delay in ps (zero without interferometers).
    pub fn slot_ps(&self) -> u64 {
        self.umis.first().map_or(0, |u| u.delay_ps())
    }

    pub fn pulse_period_ps(&self) -> Option<u64> {
        self.pump.rep_rate().map(|f| (1e12 / f).round() as u64)
    }

    /// Gate center relative to the pulse: the middle time slot when
    /// time-bin interferometers are in place.
    pub fn gate_center_ps(&self) -> u64 {
        if self.scheme == Scheme::TimeBin && self.umis.len() == 3 {
            self.slot_ps()
        } else {
            0
        }
    }

    /// SHA-256 over the canonical JSON form; covers every field.
    pub fn hash(&self) -> [u8; 32] {
        let bytes = serde_json::to_vec(self).expect("scenario serialises");
        Sha256::digest(&bytes).into()
    }

    pub fn hash_hex(&self) -> String {
        hex_string(&self.hash())
    }

    pub fn with_settings(&self, settings: Settings) -> Self {
        Self { settings, ..self.clone() }
    }
}

pub fn hex_string(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
