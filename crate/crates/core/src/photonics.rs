//! Analytic source, detector and interferometer models.
//!
//! Rates are in counts per second, pump powers in mW, times in seconds unless
//! a name says otherwise. The Monte Carlo engine samples from these models
//! and the fitters in [`crate::analysis`] fit them back.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::channels::SPEED_OF_LIGHT;
use crate::qstate::{general_pair_state, DensityMatrix};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Arm {
    Signal,
    Idler,
}

impl Arm {
    pub fn index(self) -> usize {
        match self {
            Arm::Signal => 0,
            Arm::Idler => 1,
        }
    }
}

/// Multiplier applied to the Raman coefficients of channel pair `k`.
///
/// Linear in detuning around a reference pair, floored at zero; explicit
/// per-pair overrides win over the linear profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseProfile {
    pub reference_pair: u8,
    pub slope_per_pair: f64,
    pub overrides: BTreeMap<u8, f64>,
}

impl Default for NoiseProfile {
    fn default() -> Self {
        Self { reference_pair: 8, slope_per_pair: 0.0, overrides: BTreeMap::new() }
    }
}

impl NoiseProfile {
    pub fn multiplier(&self, k: u8) -> f64 {
        if let Some(&m) = self.overrides.get(&k) {
            return m;
        }
        (1.0 + self.slope_per_pair * (self.reference_pair as f64 - k as f64)).max(0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceParams {
    /// Pair generation coefficient, pairs / s / mW^2 of average pump power.
    pub xi: f64,
    /// Linear noise coefficients per arm, counts / s / mW, before losses.
    pub raman_s: f64,
    pub raman_i: f64,
    #[serde(default)]
    pub noise_profile: NoiseProfile,
}

impl SourceParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("xi", self.xi), ("raman_s", self.raman_s), ("raman_i", self.raman_i)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        if self.noise_profile.overrides.values().any(|&m| !(m.is_finite() && m >= 0.0)) {
            return Err(Error::InvalidParameter("noise profile multipliers must be >= 0".into()));
        }
        Ok(())
    }

    /// Generated pairs per second in one channel pair.
    pub fn pair_rate(&self, pump_mw: f64) -> f64 {
        self.xi * pump_mw * pump_mw
    }

    /// Noise photons per second in one arm of pair `k`, before losses.
    pub fn noise_rate(&self, arm: Arm, k: u8, pump_mw: f64) -> f64 {
        let base = match arm {
            Arm::Signal => self.raman_s,
            Arm::Idler => self.raman_i,
        };
        base * self.noise_profile.multiplier(k) * pump_mw
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateParams {
    pub rate_hz: f64,
    pub width_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectorParams {
    pub efficiency: f64,
    pub dark_rate: f64,
    pub dead_time: f64,
    #[serde(default)]
    pub gate: Option<GateParams>,
}

impl DetectorParams {
    pub fn free_running(efficiency: f64, dark_rate: f64, dead_time: f64) -> Self {
        Self { efficiency, dark_rate, dead_time, gate: None }
    }

    pub fn gated(&self) -> bool {
        self.gate.is_some()
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.efficiency) {
            return Err(Error::InvalidParameter(format!("detector efficiency {} outside [0, 1]", self.efficiency)));
        }
        if !(self.dark_rate.is_finite() && self.dark_rate >= 0.0) {
            return Err(Error::InvalidParameter(format!("dark rate {} must be >= 0", self.dark_rate)));
        }
        if !(self.dead_time.is_finite() && self.dead_time >= 0.0) {
            return Err(Error::InvalidParameter(format!("dead time {} must be >= 0", self.dead_time)));
        }
        if let Some(g) = self.gate {
            if !(g.rate_hz > 0.0 && g.width_s > 0.0 && g.width_s * g.rate_hz <= 1.0) {
                return Err(Error::InvalidParameter(format!("invalid gate {g:?}")));
            }
        }
        Ok(())
    }

    /// Fraction of time the detector is armed (1 for free-running).
    pub fn duty_cycle(&self) -> f64 {
        self.gate.map_or(1.0, |g| g.rate_hz * g.width_s)
    }

    /// Observed rate of a non-paralyzable detector given its incident rate.
    pub fn observed_rate(&self, incident: f64) -> f64 {
        incident / (1.0 + incident * self.dead_time)
    }

    /// Probability that the detector is live at a random time.
    pub fn live_fraction(&self, incident: f64) -> f64 {
        1.0 / (1.0 + incident * self.dead_time)
    }
}

/// Inverts the non-paralyzable dead-time law.
pub fn dead_time_correct(observed: f64, dead_time: f64) -> Result<f64> {
    let busy = observed * dead_time;
    if busy >= 1.0 {
        return Err(Error::InvalidParameter(format!("observed rate {observed} saturates dead time {dead_time}")));
    }
    Ok(observed / (1.0 - busy))
}

/// Optical losses and detection efficiency of one arm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArmLossBudget {
    pub output_coupling_db: f64,
    pub filter_db: f64,
    #[serde(default)]
    pub extra_db: f64,
    pub detector_efficiency: f64,
}

impl ArmLossBudget {
    pub fn new(output_coupling_db: f64, filter_db: f64, detector_efficiency: f64) -> Self {
        Self { output_coupling_db, filter_db, extra_db: 0.0, detector_efficiency }
    }

    pub fn lossless() -> Self {
        Self::new(0.0, 0.0, 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        if [self.output_coupling_db, self.filter_db, self.extra_db].iter().any(|&db| !(db.is_finite() && db >= 0.0)) {
            return Err(Error::InvalidParameter("loss figures must be >= 0 dB".into()));
        }
        if !(0.0..=1.0).contains(&self.detector_efficiency) {
            return Err(Error::InvalidParameter("detector efficiency outside [0, 1]".into()));
        }
        Ok(())
    }

    pub fn transmission(&self) -> f64 {
        10f64.powf(-(self.output_coupling_db + self.filter_db + self.extra_db) / 10.0) * self.detector_efficiency
    }
}

/// Incident and observed singles of one arm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinglesRate {
    pub incident: f64,
    pub observed: f64,
}

/// Singles of one free-running arm:
/// `T (xi P^2 + raman P) + dark`, then dead time.
pub fn singles_rate(
    source: &SourceParams,
    detector: &DetectorParams,
    arm: Arm,
    channel_pair: u8,
    arm_transmission: f64,
    pump_mw: f64,
) -> Result<SinglesRate> {
    if !(pump_mw.is_finite() && pump_mw >= 0.0) {
        return Err(Error::InvalidParameter(format!("pump power {pump_mw} must be >= 0")));
    }
    let incident = arm_transmission
        * (source.pair_rate(pump_mw) + source.noise_rate(arm, channel_pair, pump_mw))
        + detector.dark_rate;
    Ok(SinglesRate { incident, observed: detector.observed_rate(incident) })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Pump {
    Cw { power_mw: f64 },
    Pulsed { avg_power_mw: f64, rep_rate_hz: f64, pulse_width_s: f64 },
}

impl Pump {
    pub fn power_mw(&self) -> f64 {
        match *self {
            Pump::Cw { power_mw } => power_mw,
            Pump::Pulsed { avg_power_mw, .. } => avg_power_mw,
        }
    }

    pub fn with_power(&self, p: f64) -> Self {
        match *self {
            Pump::Cw { .. } => Pump::Cw { power_mw: p },
            Pump::Pulsed { rep_rate_hz, pulse_width_s, .. } => Pump::Pulsed { avg_power_mw: p, rep_rate_hz, pulse_width_s },
        }
    }

    pub fn rep_rate(&self) -> Option<f64> {
        match *self {
            Pump::Cw { .. } => None,
            Pump::Pulsed { rep_rate_hz, .. } => Some(rep_rate_hz),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let p = self.power_mw();
        if !(p.is_finite() && p >= 0.0) {
            return Err(Error::InvalidParameter(format!("pump power {p} must be >= 0")));
        }
        if let Pump::Pulsed { rep_rate_hz, pulse_width_s, .. } = *self {
            if !(rep_rate_hz > 0.0 && pulse_width_s > 0.0 && pulse_width_s * rep_rate_hz < 1.0) {
                return Err(Error::InvalidParameter("invalid pulse train".into()));
            }
        }
        Ok(())
    }
}

/// Coincidence-rate decomposition behind a CAR value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoincidenceRates {
    pub singles: [SinglesRate; 2],
    /// Correlated coincidences per second (dead-time live fractions applied).
    pub true_rate: f64,
    /// Uncorrelated coincidences per second in a window of the given width.
    pub accidental_rate: f64,
}

impl CoincidenceRates {
    pub fn car(&self) -> f64 {
        1.0 + self.true_rate / self.accidental_rate
    }
}

/// Everything needed to predict CAR for one channel pair without
/// interferometers in the path.
#[derive(Debug, Clone, PartialEq)]
pub struct CarModel {
    pub source: SourceParams,
    pub detectors: [DetectorParams; 2],
    pub transmissions: [f64; 2],
    pub channel_pair: u8,
    pub pump: Pump,
}

impl CarModel {
    /// Singles and coincidence rates at the model pump for window `tau`.
    ///
    /// CW: every process is uniform in time and `C_acc = S_s S_i tau`.
    /// Pulsed: photons arrive at the pulse times, so photon-photon
    /// accidentals come from neighbouring pulses (`r_s r_i / f`) and the
    /// uniform dark counts contribute the cross terms. Gated detectors only
    /// see darks while armed.
    pub fn rates(&self, tau: f64) -> Result<CoincidenceRates> {
        if !(tau > 0.0) {
            return Err(Error::InvalidParameter(format!("coincidence window must be > 0, got {tau}")));
        }
        self.source.validate()?;
        self.pump.validate()?;
        let p = self.pump.power_mw();
        let pairs = self.source.pair_rate(p);
        let arms = [Arm::Signal, Arm::Idler];
        let photons = arms.map(|a| {
            self.transmissions[a.index()] * (pairs + self.source.noise_rate(a, self.channel_pair, p))
        });
        let darks = self.detectors.clone().map(|d| d.dark_rate);
        let incident = [0, 1].map(|i| photons[i] + darks[i] * self.detectors[i].duty_cycle());
        let live = [0, 1].map(|i| self.detectors[i].live_fraction(incident[i]));
        let singles = [0, 1].map(|i| SinglesRate { incident: incident[i], observed: incident[i] * live[i] });

        let true_rate = pairs * self.transmissions[0] * self.transmissions[1] * live[0] * live[1];
        let raw_acc = match self.pump.rep_rate() {
            None => incident[0] * incident[1] * tau,
            Some(f) => {
                // Aligned gates: both-gated darks only meet inside the shared gate.
                let dark_s_dark_i = darks[0]
                    * darks[1]
                    * tau
                    * self.detectors[0].duty_cycle().min(self.detectors[1].duty_cycle());
                photons[0] * photons[1] / f + photons[0] * darks[1] * tau + darks[0] * photons[1] * tau + dark_s_dark_i
            }
        };
        Ok(CoincidenceRates { singles, true_rate, accidental_rate: raw_acc * live[0] * live[1] })
    }

    pub fn car(&self, tau: f64) -> Result<f64> {
        Ok(self.rates(tau)?.car())
    }

    pub fn with_power(&self, p: f64) -> Self {
        Self { pump: self.pump.with_power(p), ..self.clone() }
    }

    /// CAR as a function of the coincidence window at fixed pump.
    pub fn car_vs_window(&self, tau: f64) -> Result<f64> {
        self.car(tau)
    }
}

/// `CAR = 1 + C_true / C_acc` for a CW-pumped channel pair.
pub fn predicted_car(
    source: &SourceParams,
    det_s: &DetectorParams,
    det_i: &DetectorParams,
    channel_pair: u8,
    transmissions: [f64; 2],
    pump_mw: f64,
    tau: f64,
) -> Result<f64> {
    CarModel {
        source: source.clone(),
        detectors: [det_s.clone(), det_i.clone()],
        transmissions,
        channel_pair,
        pump: Pump::Cw { power_mw: pump_mw },
    }
    .car(tau)
}

/// Raw fringe visibility of the post-selected energy-time central peak for a
/// perfect state: `R / (R + 2)` with `R = C_true / C_acc` measured without
/// the interferometer.
pub fn energy_time_raw_visibility(true_to_accidental: f64) -> f64 {
    true_to_accidental / (true_to_accidental + 2.0)
}

/// Unbalanced Michelson interferometer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UmiParams {
    /// Arm delay difference, s.
    pub delay_s: f64,
    /// Fiber length difference, m; derived from the delay when absent.
    #[serde(default)]
    pub length_difference_m: Option<f64>,
    pub group_index: f64,
    /// Thermo-optic coefficient, 1/K.
    pub dn_dt: f64,
    pub wavelength_m: f64,
    /// Faraday-mirror Michelson: light crosses the length difference twice.
    #[serde(default = "yes")]
    pub double_pass: bool,
}

fn yes() -> bool {
    true
}

impl UmiParams {
    pub fn standard() -> Self {
        Self {
            delay_s: 1.6e-9,
            length_difference_m: Some(163.48e-3),
            group_index: 1.468,
            dn_dt: 0.811e-5,
            wavelength_m: 1550e-9,
            double_pass: true,
        }
    }

    /// `L_d = c dt / (2 n)`.
    pub fn length_from_delay(&self) -> f64 {
        SPEED_OF_LIGHT * self.delay_s / (2.0 * self.group_index)
    }

    pub fn length_difference(&self) -> f64 {
        self.length_difference_m.unwrap_or_else(|| self.length_from_delay())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delay_s > 0.0 && self.group_index > 0.0 && self.wavelength_m > 0.0 && self.dn_dt.is_finite()) {
            return Err(Error::InvalidParameter("UMI delay, index and wavelength must be > 0".into()));
        }
        if let Some(l) = self.length_difference_m {
            let derived = self.length_from_delay();
            if ((l - derived) / derived).abs() > 1e-3 {
                return Err(Error::InvalidParameter(format!(
                    "UMI length difference {l} m inconsistent with delay (expects {derived} m within 0.1%)"
                )));
            }
        }
        Ok(())
    }

    pub fn delay_ps(&self) -> u64 {
        (self.delay_s * 1e12).round() as u64
    }

    /// Temperature change giving one full fringe period, K.
    pub fn temperature_period(&self) -> Result<f64> {
        let l = self.length_difference();
        if l == 0.0 || self.dn_dt == 0.0 {
            return Err(Error::InvalidParameter("zero length difference or thermo-optic coefficient".into()));
        }
        let passes = if self.double_pass { 2.0 } else { 1.0 };
        Ok((self.wavelength_m / (passes * l * self.dn_dt)).abs())
    }
}

/// Interferometer phase for a temperature offset `delta_t` (K).
pub fn umi_phase(umi: &UmiParams, delta_t: f64) -> Result<f64> {
    Ok(TAU * delta_t / umi.temperature_period()?)
}

fn check_visibility(v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("visibility {v} outside [0, 1]")))
    }
}

/// Central-peak coincidence weight `(1/4)(1 + V cos(phi_s + phi_i))`.
pub fn energy_time_fringe(total_phase: f64, visibility: f64) -> Result<f64> {
    check_visibility(visibility)?;
    Ok(0.25 * (1.0 + visibility * total_phase.cos()))
}

/// Central-slot coincidence weight `(1/4)(1 - V cos(2 phi_p - phi_s - phi_i))`.
pub fn time_bin_fringe(phi_p: f64, phi_s: f64, phi_i: f64, visibility: f64) -> Result<f64> {
    check_visibility(visibility)?;
    Ok(0.25 * (1.0 - visibility * (2.0 * phi_p - phi_s - phi_i).cos()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SagnacParams {
    pub pump_phase: f64,
    /// Pump birefringence `k_H - k_V`, rad/m.
    pub birefringence: f64,
    pub loop_length_m: f64,
    pub power_ratio: f64,
}

impl SagnacParams {
    pub fn delta(&self) -> f64 {
        2.0 * (self.pump_phase + self.birefringence * self.loop_length_m)
    }
}

/// `|HH> + eta e^{i delta}|VV>` with `delta = 2(phi_p + dk_p L)`.
pub fn sagnac_output_state(s: &SagnacParams) -> Result<DensityMatrix> {
    if !(s.power_ratio.is_finite() && s.power_ratio >= 0.0) {
        return Err(Error::InvalidParameter(format!("power ratio {} must be >= 0", s.power_ratio)));
    }
    general_pair_state(s.power_ratio, s.delta())
}

/// Emission spectral brightness `C / (T_s T_i dlambda P)`, per s nm mW.
pub fn spectral_brightness(coincidence_rate: f64, arms: [&ArmLossBudget; 2], pump_mw: f64, bandwidth_nm: f64) -> Result<f64> {
    if !(coincidence_rate > 0.0 && pump_mw > 0.0 && bandwidth_nm > 0.0) {
        return Err(Error::InvalidParameter("coincidence rate, pump and bandwidth must be > 0".into()));
    }
    let t = arms[0].transmission() * arms[1].transmission();
    if t <= 0.0 {
        return Err(Error::InvalidParameter("zero arm transmission".into()));
    }
    Ok(coincidence_rate / (t * bandwidth_nm * pump_mw))
}

/// Brightness estimate next to a reference headline, with the ratio flagged
/// when they differ by more than `tolerance_factor`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BrightnessReport {
    pub value: f64,
    pub reference: f64,
    pub ratio: f64,
    pub discrepancy: bool,
    pub note: String,
}

pub fn brightness_report(value: f64, reference: f64, tolerance_factor: f64) -> BrightnessReport {
    let ratio = reference / value;
    let discrepancy = !(1.0 / tolerance_factor..=tolerance_factor).contains(&ratio);
    let note = if discrepancy {
        format!(
            "reference brightness {reference:.2e} is {ratio:.1}x the value implied by the stated losses; \
             the window or bandwidth convention behind the reference is not reproduced"
        )
    } else {
        "consistent with reference".to_string()
    };
    BrightnessReport { value, reference, ratio, discrepancy, note }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn src() -> SourceParams {
        SourceParams { xi: 5.4e4, raman_s: 9.2e5, raman_i: 6.1e5, noise_profile: NoiseProfile::default() }
    }

    #[test]
    fn singles_zero_pump_is_dark() {
        let d = DetectorParams::free_running(0.2, 3000.0, 0.0);
        let s = singles_rate(&src(), &d, Arm::Signal, 8, 0.02, 0.0).unwrap();
        assert_eq!(s.incident, 3000.0);
    }

    #[test]
    fn window_must_be_positive() {
        let d = DetectorParams::free_running(0.2, 3000.0, 5e-6);
        assert!(predicted_car(&src(), &d, &d, 8, [0.02, 0.02], 1.0, 0.0).is_err());
    }

    #[test]
    fn fringe_rejects_bad_visibility() {
        assert!(energy_time_fringe(0.0, 1.2).is_err());
        assert!(time_bin_fringe(0.0, 0.0, 0.0, -0.1).is_err());
        assert!((energy_time_fringe(PI, 1.0).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn umi_length_consistency_checked() {
        let mut u = UmiParams::standard();
        assert!(u.validate().is_ok());
        u.length_difference_m = Some(0.17);
        assert!(u.validate().is_err());
        u.length_difference_m = Some(0.0);
        u.delay_s = 1.6e-9;
        assert!(umi_phase(&u, 1.0).is_err());
    }

    #[test]
    fn noise_profile_override() {
        let mut p = NoiseProfile { slope_per_pair: 0.05, ..Default::default() };
        assert!((p.multiplier(1) - 1.35).abs() < 1e-12);
        p.overrides.insert(3, 2.0);
        assert_eq!(p.multiplier(3), 2.0);
    }

    #[test]
    fn dead_time_inversion() {
        let d = DetectorParams::free_running(0.2, 0.0, 5e-6);
        let obs = d.observed_rate(30_000.0);
        assert!((dead_time_correct(obs, 5e-6).unwrap() - 30_000.0).abs() < 1e-6);
        assert!(dead_time_correct(2e5, 5e-6).is_err());
    }
}
