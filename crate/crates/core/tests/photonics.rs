use approx::assert_relative_eq;
use muxent::config::load_preset;
use muxent::photonics::{
    dead_time_correct, energy_time_fringe, spectral_brightness, time_bin_fringe, umi_phase, ArmLossBudget, CarModel,
    DetectorParams, UmiParams,
};
use proptest::prelude::*;

fn cw_model() -> CarModel {
    let sc = load_preset("cw_energy_time").unwrap().scenario;
    CarModel {
        source: sc.source.clone(),
        detectors: [sc.signal_detector.clone(), sc.idler_detector.clone()],
        transmissions: sc.transmissions(),
        channel_pair: sc.channel_pair,
        pump: sc.pump,
    }
}

#[test]
fn thermal_period_by_hand() {
    // lambda / (2 L dn/dT) = 1550e-9 / (2 * 0.16348 * 0.811e-5)
    assert_relative_eq!(UmiParams::standard().temperature_period().unwrap(), 0.584_54, max_relative = 1e-4);
    let single = UmiParams { double_pass: false, ..UmiParams::standard() };
    assert_relative_eq!(single.temperature_period().unwrap(), 2.0 * 0.584_54, max_relative = 1e-4);
    let u = UmiParams::standard();
    assert_relative_eq!(umi_phase(&u, u.temperature_period().unwrap()).unwrap(), std::f64::consts::TAU, max_relative = 1e-12);
}

#[test]
fn inconsistent_umi_is_rejected() {
    let u = UmiParams { length_difference_m: Some(0.2), ..UmiParams::standard() };
    assert!(u.validate().is_err());
}

#[test]
fn cw_car_matches_hand_formula() {
    let m = cw_model();
    let tau = 0.8e-9;
    let p = m.pump.power_mw();
    let pairs = m.source.xi * p * p;
    let mult = m.source.noise_profile.multiplier(m.channel_pair);
    let inc_s = m.transmissions[0] * (pairs + m.source.raman_s * mult * p) + m.detectors[0].dark_rate;
    let inc_i = m.transmissions[1] * (pairs + m.source.raman_i * mult * p) + m.detectors[1].dark_rate;
    let expected = 1.0 + pairs * m.transmissions[0] * m.transmissions[1] / (inc_s * inc_i * tau);
    assert_relative_eq!(m.car(tau).unwrap(), expected, max_relative = 1e-12);
}

#[test]
fn car_minus_one_scales_inverse_with_window() {
    let m = cw_model();
    for tau in [0.2e-9, 0.8e-9, 1.6e-9] {
        let r = (m.car(tau).unwrap() - 1.0) / (m.car(2.0 * tau).unwrap() - 1.0);
        assert_relative_eq!(r, 2.0, max_relative = 1e-12);
    }
}

#[test]
fn car_has_one_interior_peak() {
    let m = cw_model();
    let cars: Vec<f64> = (1..=80).map(|k| m.with_power(0.1 * k as f64).car(0.8e-9).unwrap()).collect();
    let peak = cars.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
    assert!(peak > 0 && peak < cars.len() - 1);
    assert!(cars[..=peak].windows(2).all(|w| w[1] >= w[0]));
    assert!(cars[peak..].windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn brightness_from_stated_inputs() {
    // 51 / s through two arms of 5.5 + 4 dB and 20% detection, 0.8 nm, 1.37 mW.
    let arm = ArmLossBudget::new(5.5, 4.0, 0.2);
    let t = 10f64.powf(-0.95) * 0.2;
    let b = spectral_brightness(51.0, [&arm, &arm], 1.37, 0.8).unwrap();
    assert_relative_eq!(b, 51.0 / (t * t * 0.8 * 1.37), max_relative = 1e-12);
    assert!((9e4..=5e5).contains(&b));
}

#[test]
fn fringe_laws() {
    assert_relative_eq!(energy_time_fringe(0.0, 1.0).unwrap(), 0.5);
    assert!(energy_time_fringe(std::f64::consts::PI, 1.0).unwrap().abs() < 1e-15);
    // Period pi in the pump phase, 2 pi in the signal phase.
    for x in [0.1, 0.7, 2.0] {
        let a = time_bin_fringe(x, 0.3, 0.2, 0.9).unwrap();
        assert_relative_eq!(a, time_bin_fringe(x + std::f64::consts::PI, 0.3, 0.2, 0.9).unwrap(), max_relative = 1e-12);
        assert_relative_eq!(time_bin_fringe(0.4, x, 0.2, 0.9).unwrap(), time_bin_fringe(0.4, x + std::f64::consts::TAU, 0.2, 0.9).unwrap(), max_relative = 1e-12);
    }
    assert!(energy_time_fringe(0.0, 1.5).is_err());
}

proptest! {
    #[test]
    fn dead_time_correction_inverts_observation(r in 1.0..1e6f64, dead in 0.0..5e-6f64) {
        let d = DetectorParams::free_running(0.2, 0.0, dead);
        let back = dead_time_correct(d.observed_rate(r), dead).unwrap();
        prop_assert!(((back - r) / r).abs() < 1e-9);
        prop_assert!(d.observed_rate(r) <= r);
    }

    #[test]
    fn transmission_is_product_of_losses(c in 0.0..20.0f64, f in 0.0..20.0f64, eta in 0.0..1.0f64) {
        let t = ArmLossBudget::new(c, f, eta).transmission();
        prop_assert!((t - 10f64.powf(-(c + f) / 10.0) * eta).abs() < 1e-12);
    }
}
