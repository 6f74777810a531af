//! Fast invariant checks shipped with the binary (`muxent selftest`).

use std::f64::consts::SQRT_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::analysis::tomography::{objective, poisson_counts, projectors, standard_settings, Params};
use crate::analysis::{chsh_from_state, mle_tomography, ChshAngles, CountsRecord16};
use crate::channels::ChannelGrid;
use crate::config::load_preset;
use crate::engine::{simulate, TimeTagFile};
use crate::photonics::UmiParams;
use crate::qstate::{bell_state, BellKind, DensityMatrix, QubitState, C64};
use crate::reproduce::{REFERENCE_PUMP_NM, REFERENCE_WAVELENGTHS_NM};
use crate::Result;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SelftestReport {
    pub checks: Vec<Check>,
}

impl SelftestReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn check(name: &'static str, r: Result<(bool, String)>) -> Check {
    match r {
        Ok((passed, detail)) => Check { name, passed, detail },
        Err(e) => Check { name, passed: false, detail: format!("error: {e}") },
    }
}

fn grid() -> Result<(bool, String)> {
    let g = ChannelGrid::default();
    let mut dev: f64 = (g.pump.wavelength_nm() - REFERENCE_PUMP_NM).abs();
    let mut mismatch = 0;
    for &(k, s, i) in &REFERENCE_WAVELENGTHS_NM {
        let p = g.pair(k)?;
        mismatch += p.energy_mismatch(g.pump).abs();
        dev = dev.max((p.signal_wavelength_nm() - s).abs()).max((p.idler_wavelength_nm() - i).abs());
    }
    Ok((mismatch == 0 && dev <= 0.01, format!("energy mismatch {mismatch}, max deviation {dev:.4} nm")))
}

fn thermal() -> Result<(bool, String)> {
    let dt = UmiParams::standard().temperature_period()?;
    Ok(((dt - 0.585).abs() < 1e-3, format!("period {dt:.5} K")))
}

/// Uniformly random pure qubit state.
pub fn random_qubit(rng: &mut impl Rng) -> QubitState {
    let theta = (1.0 - 2.0 * rng.random::<f64>()).acos();
    let phi = std::f64::consts::TAU * rng.random::<f64>();
    QubitState::new(C64::new((theta / 2.0).cos(), 0.0), C64::from_polar((theta / 2.0).sin(), phi)).expect("normalised")
}

fn chsh_bounds() -> Result<(bool, String)> {
    let angles = ChshAngles::standard();
    let bell = bell_state(BellKind::PhiPlus, 0.0).density();
    let signs = angles.signs_for(&bell);
    let s = chsh_from_state(&bell, &angles, signs);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let worst = (0..20)
        .map(|_| chsh_from_state(&DensityMatrix::product(&random_qubit(&mut rng), &random_qubit(&mut rng)), &angles, signs).abs())
        .fold(0.0, f64::max);
    Ok(((s - 2.0 * SQRT_2).abs() < 1e-9 && worst <= 2.0 + 1e-9, format!("S(bell) {s:.12}, max |S| separable {worst:.6}")))
}

fn mle_gradient() -> Result<(bool, String)> {
    let rec = CountsRecord16::from_settings(&standard_settings(), 1.0)?;
    let proj = projectors(&rec);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let p: Vec<f64> = (0..16).map(|_| rng.random::<f64>()).collect();
    let total: f64 = p.iter().sum();
    let p: Vec<f64> = p.iter().map(|v| v / total).collect();
    let x = Params::from_fn(|_, _| rng.random_range(0.2..1.0));
    let (_, g) = objective(&x, &proj, &p);
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    for k in 0..16 {
        let (mut a, mut b) = (x, x);
        a[k] += h;
        b[k] -= h;
        let fd = (objective(&a, &proj, &p).0 - objective(&b, &proj, &p).0) / (2.0 * h);
        worst = worst.max((fd - g[k]).abs() / g.norm());
    }
    Ok((worst < 1e-5, format!("max relative deviation {worst:.2e}")))
}

fn mle_physical() -> Result<(bool, String)> {
    let rec = CountsRecord16::from_settings(&standard_settings(), 1.0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut bad = 0;
    for _ in 0..20 {
        let means: Vec<f64> = (0..16).map(|_| rng.random_range(0.0..500.0)).collect();
        let r = mle_tomography(&rec.with_counts(&poisson_counts(&means, &mut rng)))?;
        if !r.rho.to_raw().check().is_physical() {
            bad += 1;
        }
    }
    Ok((bad == 0, format!("{bad} of 20 random inputs non-physical")))
}

fn engine() -> Result<(bool, String)> {
    let mut sc = load_preset("cw_energy_time")?.scenario;
    sc.duration_s = 0.2;
    let a = simulate(&sc)?;
    let b = simulate(&sc)?;
    let (mut fa, mut fb) = (Vec::new(), Vec::new());
    TimeTagFile::from_output(&a).write_to(&mut fa)?;
    TimeTagFile::from_output(&b).write_to(&mut fb)?;
    let back = TimeTagFile::read_from(fa.as_slice())?;
    let spacing_ok = a.timestamps.iter().enumerate().all(|(arm, ts)| {
        let dead = (sc.detector(arm).dead_time * 1e12).round() as u64;
        ts.windows(2).all(|w| w[1] - w[0] >= dead)
    });
    Ok((
        fa == fb && back == TimeTagFile::from_output(&a) && spacing_ok,
        format!("{} bytes, identical {}, dead time respected {spacing_ok}", fa.len(), fa == fb),
    ))
}

pub fn run() -> SelftestReport {
    SelftestReport {
        checks: vec![
            check("grid_exactness", grid()),
            check("thermal_period", thermal()),
            check("chsh_bounds", chsh_bounds()),
            check("mle_gradient", mle_gradient()),
            check("mle_physical", mle_physical()),
            check("engine_determinism", engine()),
        ],
    }
}

#[cfg(test)]
mod tests {
    #[test]
    fn all_checks_pass() {
        let r = super::run();
        for c in &r.checks {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }
}
