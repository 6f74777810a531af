//! Closed-form expected rates for a scenario, including interferometer and
//! polarizer branching, gating and dead time. Used by counts mode and as
//! the analytic reference for the time-tag simulator.

use crate::engine::branch::{BranchTable, MAX_SLOTS};
use crate::engine::scenario::Scenario;
use crate::photonics::{Arm, DetectorParams};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpectedRates {
    /// Detection attempts per second reaching each armed detector.
    pub incident: [f64; 2],
    pub live: [f64; 2],
    pub observed: [f64; 2],
    /// Correlated coincidences per second in a zero-offset window.
    pub true_rate: f64,
    /// Uncorrelated coincidences per second in a window of the given width.
    pub accidental_rate: f64,
}

impl ExpectedRates {
    pub fn car(&self) -> f64 {
        1.0 + self.true_rate / self.accidental_rate
    }
}

/// Armed interval of a gated detector relative to the pulse, seconds.
fn armed_interval(det: &DetectorParams, center_s: f64) -> Option<(f64, f64)> {
    det.gate.map(|g| (center_s - g.width_s / 2.0, center_s + g.width_s / 2.0))
}

fn overlap(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.1.min(b.1) - a.0.max(b.0)).max(0.0)
}

fn armed_at(interval: Option<(f64, f64)>, t: f64) -> bool {
    interval.is_none_or(|(lo, hi)| t >= lo - 1e-15 && t <= hi + 1e-15)
}

/// Length of a window of half-width `h` centered at `t` that falls inside
/// the armed interval.
fn window_overlap(interval: Option<(f64, f64)>, t: f64, h: f64) -> f64 {
    interval.map_or(2.0 * h, |iv| overlap(iv, (t - h, t + h)))
}

/// `int_A |[t-h, t+h] /\ B| dt` per pulse period for armed intervals A, B.
fn dark_dark_overlap(a: Option<(f64, f64)>, b: Option<(f64, f64)>, h: f64) -> Result<f64> {
    match (a, b) {
        (None, None) => Err(Error::InvalidParameter("no armed intervals".into())),
        (None, Some(iv)) | (Some(iv), None) => Ok(2.0 * h * (iv.1 - iv.0)),
        (Some(ia), Some(ib)) => {
            let n = 2000;
            let dt = (ia.1 - ia.0) / n as f64;
            Ok((0..n).map(|k| overlap(ib, (ia.0 + (k as f64 + 0.5) * dt - h, ia.0 + (k as f64 + 0.5) * dt + h))).sum::<f64>() * dt)
        }
    }
}

/// Branch table averaged over phases when the scenario randomizes them.
pub fn mean_branch_table(sc: &Scenario) -> Result<BranchTable> {
    let s = sc.settings;
    if s.phase_randomized {
        // Averaging the fringe over a uniform phase removes the coherent term.
        let mut flat = sc.clone();
        flat.state_visibility = 0.0;
        BranchTable::for_scenario(&flat, (s.phase_pump, s.phase_signal, s.phase_idler))
    } else {
        BranchTable::for_scenario(sc, (s.phase_pump, s.phase_signal, s.phase_idler))
    }
}

/// Expected singles and coincidence rates for window width `tau` (s).
pub fn expected_rates(sc: &Scenario, tau: f64) -> Result<ExpectedRates> {
    if !(tau > 0.0) {
        return Err(Error::InvalidParameter(format!("coincidence window must be > 0, got {tau}")));
    }
    sc.validate()?;
    let table = mean_branch_table(sc)?;
    let p = sc.pump.power_mw();
    let pairs = sc.source.pair_rate(p);
    let t = sc.transmissions();
    let noise = [Arm::Signal, Arm::Idler].map(|a| sc.source.noise_rate(a, sc.channel_pair, p));
    let dets = [sc.detector(0), sc.detector(1)];
    let darks = dets.map(|d| d.dark_rate);
    let slot_s = sc.slot_ps() as f64 * 1e-12;
    let center = sc.gate_center_ps() as f64 * 1e-12;
    let armed = dets.map(|d| armed_interval(d, center));

    // Photon rate per arm and time slot.
    let mut r = [[0.0; MAX_SLOTS]; 2];
    for (arm, row) in r.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            let armed_here = armed_at(armed[arm], j as f64 * slot_s);
            if armed_here {
                *v = t[arm] * (pairs * table.pair_photon_slot(arm, j as u8) + noise[arm] * table.noise_slot(j as u8));
            }
        }
    }
    let photons = r.map(|row| row.iter().sum::<f64>());
    let incident = [0, 1].map(|i| photons[i] + darks[i] * dets[i].duty_cycle());
    let live = [0, 1].map(|i| dets[i].live_fraction(incident[i]));
    let observed = [0, 1].map(|i| incident[i] * live[i]);

    let coherent: f64 = (0..MAX_SLOTS as u8)
        .filter(|&j| armed_at(armed[0], j as f64 * slot_s) && armed_at(armed[1], j as f64 * slot_s))
        .map(|j| table.joint(j, j))
        .sum();
    let true_rate = pairs * t[0] * t[1] * coherent * live[0] * live[1];

    let h = tau / 2.0;
    let raw_acc = match sc.pump.rep_rate() {
        None => incident[0] * incident[1] * tau,
        Some(f) => {
            let mut acc = 0.0;
            for j in 0..MAX_SLOTS {
                let tj = j as f64 * slot_s;
                acc += r[0][j] * r[1][j] / f;
                acc += r[0][j] * darks[1] * window_overlap(armed[1], tj, h);
                acc += r[1][j] * darks[0] * window_overlap(armed[0], tj, h);
            }
            let dd = match (armed[0], armed[1]) {
                (None, None) => tau,
                _ => f * dark_dark_overlap(armed[0], armed[1], h)?,
            };
            acc + darks[0] * darks[1] * dd
        }
    };
    Ok(ExpectedRates { incident, live, observed, true_rate, accidental_rate: raw_acc * live[0] * live[1] })
}
