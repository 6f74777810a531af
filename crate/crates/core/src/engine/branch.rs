//! Branch probabilities for photons passing the analysis optics.
//!
//! A photon either leaves through the monitored port in time slot `j`
//! (delayed by `j` interferometer delays) or is lost. Pairs use a joint
//! table; unpaired photons use per-arm marginals. Coherent terms come from
//! Born probabilities of the post-selected two-qubit state.

use crate::engine::scenario::{Scenario, Scheme, StateNoise};
use crate::photonics::sagnac_output_state;
use crate::qstate::{bell_state, born_probability, BellKind, DensityMatrix, Projector, QubitState};
use crate::{Error, Result};

pub const MAX_SLOTS: usize = 3;

/// Outcome of one photon: monitored-port time slot, or lost.
pub type Slot = Option<u8>;

#[derive(Debug, Clone, PartialEq)]
pub struct BranchTable {
    /// Joint outcomes `(signal, idler, probability)` for a pair with both
    /// photons present; sums to one.
    pub pair: Vec<(Slot, Slot, f64)>,
    /// Outcome of a pair photon whose partner was lost; sums to one.
    pub signal_marginal: Vec<(Slot, f64)>,
    pub idler_marginal: Vec<(Slot, f64)>,
    /// Outcome of an unpolarized noise photon; sums to one.
    pub noise: Vec<(Slot, f64)>,
}

/// Cumulative sampler over a small discrete distribution.
#[derive(Debug, Clone)]
pub struct Sampler<T: Copy> {
    cdf: Vec<(f64, T)>,
}

impl<T: Copy> Sampler<T> {
    pub fn new(items: impl IntoIterator<Item = (T, f64)>) -> Self {
        let mut acc = 0.0;
        let cdf = items
            .into_iter()
            .filter(|(_, p)| *p > 0.0)
            .map(|(t, p)| {
                acc += p;
                (acc, t)
            })
            .collect();
        Self { cdf }
    }

    pub fn sample(&self, u: f64) -> T {
        let total = self.cdf.last().map_or(0.0, |c| c.0);
        let x = u * total;
        self.cdf.iter().find(|(c, _)| x < *c).unwrap_or_else(|| self.cdf.last().expect("non-empty")).1
    }
}

impl BranchTable {
    /// Both photons always reach their detectors undelayed.
    pub fn direct() -> Self {
        Self {
            pair: vec![(Some(0), Some(0), 1.0)],
            signal_marginal: vec![(Some(0), 1.0)],
            idler_marginal: vec![(Some(0), 1.0)],
            noise: vec![(Some(0), 1.0)],
        }
    }

    /// Completes a table from the both-detected joint distribution and the
    /// per-photon slot marginals (which must dominate the joint sums).
    fn complete(joint: Vec<((u8, u8), f64)>, marg_s: [f64; MAX_SLOTS], marg_i: [f64; MAX_SLOTS]) -> Result<Self> {
        let mut pair: Vec<(Slot, Slot, f64)> = joint.iter().map(|&((s, i), p)| (Some(s), Some(i), p)).collect();
        let mut rest_s = marg_s;
        let mut rest_i = marg_i;
        for &((s, i), p) in &joint {
            rest_s[s as usize] -= p;
            rest_i[i as usize] -= p;
        }
        for (j, (&rs, &ri)) in rest_s.iter().zip(&rest_i).enumerate() {
            if rs < -1e-12 || ri < -1e-12 {
                return Err(Error::InvalidParameter(format!("branch table inconsistent in slot {j}")));
            }
            pair.push((Some(j as u8), None, rs.max(0.0)));
            pair.push((None, Some(j as u8), ri.max(0.0)));
        }
        let used: f64 = pair.iter().map(|e| e.2).sum();
        pair.push((None, None, (1.0 - used).max(0.0)));
        pair.retain(|e| e.2 > 0.0);

        let marginal = |m: [f64; MAX_SLOTS]| {
            let kept: f64 = m.iter().sum();
            let mut v: Vec<(Slot, f64)> = m.iter().enumerate().map(|(j, &p)| (Some(j as u8), p)).collect();
            v.push((None, (1.0 - kept).max(0.0)));
            v.retain(|e| e.1 > 0.0);
            v
        };
        Ok(Self { signal_marginal: marginal(marg_s), idler_marginal: marginal(marg_i), noise: marginal(marg_s), pair })
    }

    /// Common unbalanced interferometer with phases `phi_s`, `phi_i`.
    pub fn energy_time(phi_s: f64, phi_i: f64, visibility: f64) -> Result<Self> {
        Self::energy_time_state(&bell_state(BellKind::PhiPlus, 0.0).density().dephase_00_11(visibility)?, phi_s, phi_i)
    }

    fn energy_time_state(state: &DensityMatrix, phi_s: f64, phi_i: f64) -> Result<Self> {
        let w = born_probability(state, &Projector::product(&QubitState::equator(phi_s), &QubitState::equator(phi_i)));
        // Each photon leaves the monitored port with probability 1/2, evenly
        // over short and long paths; the coherent SS + LL term replaces the
        // incoherent 1/8 central share.
        let central = 0.5 * w;
        let joint = vec![
            ((0, 1), 1.0 / 16.0),
            ((1, 0), 1.0 / 16.0),
            ((0, 0), central / 2.0),
            ((1, 1), central / 2.0),
        ];
        Self::complete(joint, [0.25, 0.25, 0.0], [0.25, 0.25, 0.0])
    }

    /// Pump, signal and idler interferometers; slot = pump bin + photon path.
    pub fn time_bin(phi_p: f64, phi_s: f64, phi_i: f64, visibility: f64) -> Result<Self> {
        Self::time_bin_state(&bell_state(BellKind::PhiMinus, 2.0 * phi_p).density().dephase_00_11(visibility)?, phi_s, phi_i)
    }

    fn time_bin_state(state: &DensityMatrix, phi_s: f64, phi_i: f64) -> Result<Self> {
        let w = born_probability(state, &Projector::product(&QubitState::equator(phi_s), &QubitState::equator(phi_i)));
        let c = 1.0 / 32.0;
        let joint = vec![
            ((0, 0), c),
            ((0, 1), c),
            ((1, 0), c),
            ((1, 2), c),
            ((2, 1), c),
            ((2, 2), c),
            ((1, 1), 0.25 * w),
        ];
        Self::complete(joint, [0.125, 0.25, 0.125], [0.125, 0.25, 0.125])
    }

    /// Polarizers `a` (signal) and `b` (idler) after the source state `rho`.
    pub fn polarization(rho: &DensityMatrix, a: &QubitState, b: &QubitState) -> Result<Self> {
        let pp = born_probability(rho, &Projector::product(a, b));
        let ps = born_probability(rho, &Projector::product(a, b)) + born_probability(rho, &Projector::product(a, &b.orthogonal()));
        let pi = pp + born_probability(rho, &Projector::product(&a.orthogonal(), b));
        let mut t = Self::complete(vec![((0, 0), pp)], [ps, 0.0, 0.0], [pi, 0.0, 0.0])?;
        t.noise = vec![(Some(0), 0.5), (None, 0.5)];
        Ok(t)
    }

    /// Source state of a polarization scenario.
    pub fn polarization_state(sc: &Scenario) -> Result<DensityMatrix> {
        let sagnac = sc.sagnac.as_ref().ok_or_else(|| Error::InconsistentScenario("missing sagnac block".into()))?;
        degrade(&sagnac_output_state(sagnac)?, sc)
    }

    /// Table for a scenario at explicit interferometer phases.
    pub fn for_scenario(sc: &Scenario, phases: (f64, f64, f64)) -> Result<Self> {
        let (phi_p, phi_s, phi_i) = phases;
        match sc.scheme {
            Scheme::EnergyTime if sc.umis.len() == 1 => {
                Self::energy_time_state(&degrade(&bell_state(BellKind::PhiPlus, 0.0).density(), sc)?, phi_s, phi_i)
            }
            Scheme::TimeBin if sc.umis.len() == 3 => {
                Self::time_bin_state(&degrade(&bell_state(BellKind::PhiMinus, 2.0 * phi_p).density(), sc)?, phi_s, phi_i)
            }
            Scheme::Polarization => match (sc.settings.polarizer_signal, sc.settings.polarizer_idler) {
                (Some(a), Some(b)) => Self::polarization(&Self::polarization_state(sc)?, &a.state(), &b.state()),
                _ => Ok(Self::direct()),
            },
            _ => Ok(Self::direct()),
        }
    }

    /// Probability that a pair yields both photons in the same slot `j`.
    pub fn joint(&self, s: u8, i: u8) -> f64 {
        self.pair.iter().filter(|e| e.0 == Some(s) && e.1 == Some(i)).map(|e| e.2).sum()
    }

    /// Marginal probability that a pair photon of arm 0/1 exits in slot `j`.
    pub fn pair_photon_slot(&self, arm: usize, j: u8) -> f64 {
        self.pair
            .iter()
            .filter(|e| if arm == 0 { e.0 == Some(j) } else { e.1 == Some(j) })
            .map(|e| e.2)
            .sum()
    }

    pub fn noise_slot(&self, j: u8) -> f64 {
        self.noise.iter().filter(|e| e.0 == Some(j)).map(|e| e.1).sum()
    }
}

fn degrade(ideal: &DensityMatrix, sc: &Scenario) -> Result<DensityMatrix> {
    match sc.state_noise {
        StateNoise::Dephasing => ideal.dephase_00_11(sc.state_visibility),
        StateNoise::White => ideal.mix(&DensityMatrix::maximally_mixed(), sc.state_visibility),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn total(t: &BranchTable) -> f64 {
        t.pair.iter().map(|e| e.2).sum()
    }

    #[test]
    fn tables_are_normalised() {
        for phi in [0.0, 0.7, PI] {
            let et = BranchTable::energy_time(phi, 0.3, 0.97).unwrap();
            assert!((total(&et) - 1.0).abs() < 1e-12);
            let tb = BranchTable::time_bin(0.4, phi, 0.1, 0.9).unwrap();
            assert!((total(&tb) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn pair_marginals_do_not_depend_on_phase() {
        for phi in [0.0, 1.0, PI] {
            let et = BranchTable::energy_time(phi, 0.0, 1.0).unwrap();
            assert!((et.pair_photon_slot(0, 0) - 0.25).abs() < 1e-12);
            assert!((et.pair_photon_slot(1, 1) - 0.25).abs() < 1e-12);
            let tb = BranchTable::time_bin(phi, 0.0, 0.0, 1.0).unwrap();
            assert!((tb.pair_photon_slot(0, 1) - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn destructive_energy_time_central_peak_is_empty() {
        let et = BranchTable::energy_time(PI, 0.0, 1.0).unwrap();
        assert!(et.joint(0, 0) < 1e-15 && et.joint(1, 1) < 1e-15);
        assert!((et.joint(0, 1) - 1.0 / 16.0).abs() < 1e-15);
    }

    #[test]
    fn sampler_picks_by_weight() {
        let s = Sampler::new([(1u8, 0.25), (2u8, 0.0), (3u8, 0.75)]);
        assert_eq!(s.sample(0.1), 1);
        assert_eq!(s.sample(0.3), 3);
        assert_eq!(s.sample(0.999_999), 3);
    }
}
