use std::f64::consts::{SQRT_2, TAU};

use approx::assert_relative_eq;
use muxent::analysis::tomography::{expected_counts, objective, poisson_counts, projectors, standard_settings, Params};
use muxent::analysis::{
    car_model, chsh, estimate_car, fidelity_with_error, fit_car_curve, fit_fringe, fit_fringe_free, fit_singles_curve,
    log_log_slope, mle_tomography, Background, CarFitInputs, ChshAngles, CountsRecord16,
};
use muxent::qstate::{bell_state, fidelity, BellKind, DensityMatrix};
use muxent::Error;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn fringe(n: usize, peak_true: f64, v: f64, bg: f64, phase: f64) -> Vec<(f64, f64)> {
    (0..n).map(|k| TAU * k as f64 / n as f64).map(|p| (p, 0.5 * peak_true * (1.0 + v * (p - phase).cos()) + bg)).collect()
}

#[test]
fn raw_visibility_follows_background_law() {
    // Noiseless fringe of true peak C on a flat background B.
    for (c, b, v) in [(300.0, 5.0, 0.99), (80.0, 20.0, 0.9), (1000.0, 0.0, 1.0)] {
        let f = fit_fringe(&fringe(24, c, v, b, 0.4), Background { level: b, error: 0.0 }).unwrap();
        assert_relative_eq!(f.visibility_raw, v * c / (c + 2.0 * b), max_relative = 1e-9);
        assert_relative_eq!(f.visibility_net, v, max_relative = 1e-9);
        assert_relative_eq!(f.phase_offset, 0.4, max_relative = 1e-9);
    }
}

#[test]
fn free_frequency_fit_finds_period() {
    let pts: Vec<(f64, f64)> = (0..40).map(|k| 2.0 * TAU * k as f64 / 40.0).map(|p| (p, 50.0 * (1.0 + 0.9 * (2.0 * p).cos()) + 2.0)).collect();
    let f = fit_fringe_free(&pts, 0.6, 2.6, Background::default()).unwrap();
    assert_relative_eq!(f.frequency, 2.0, max_relative = 1e-4);
}

#[test]
fn fringe_fit_rejects_degenerate_input() {
    assert!(matches!(fit_fringe(&[(0.0, 1.0), (0.1, 2.0)], Background::default()), Err(Error::Fit(_))));
    let narrow: Vec<(f64, f64)> = (0..8).map(|k| (0.1 * k as f64, 10.0)).collect();
    assert!(fit_fringe(&narrow, Background::default()).is_err());
}

proptest! {
    #[test]
    fn fringe_fit_is_scale_invariant(k in 0.1..100.0f64, v in 0.1..1.0f64, phase in -3.0..3.0f64) {
        let pts = fringe(16, 200.0, v, 10.0, phase);
        let scaled: Vec<(f64, f64)> = pts.iter().map(|&(p, y)| (p, k * y)).collect();
        let a = fit_fringe(&pts, Background::default()).unwrap();
        let b = fit_fringe(&scaled, Background::default()).unwrap();
        prop_assert!((a.visibility_raw - b.visibility_raw).abs() < 1e-9);
        prop_assert!((a.phase_offset - b.phase_offset).abs() < 1e-9);
        prop_assert!((b.amplitude / a.amplitude - k).abs() < 1e-9 * k);
    }
}

#[test]
fn car_estimate_and_errors() {
    let e = estimate_car(100, 10, 5);
    assert_relative_eq!(e.value, 50.0);
    assert_relative_eq!(e.error, 50.0 * (0.01f64 + 0.1).sqrt());
    assert!(!e.lower_bound);
    let lb = estimate_car(40, 0, 4);
    assert!(lb.lower_bound);
    assert_relative_eq!(lb.value, 160.0);
}

#[test]
fn power_law_slope() {
    let pts: Vec<(f64, f64)> = [0.1, 0.2, 0.5, 1.0].iter().map(|&x: &f64| (x, 3.0 * x.powf(-1.5))).collect();
    let (s, e) = log_log_slope(&pts).unwrap();
    assert_relative_eq!(s, -1.5, max_relative = 1e-12);
    assert!(e < 1e-9);
}

#[test]
fn singles_fit_recovers_coefficients() {
    let pts: Vec<(f64, f64)> = (1..=8).map(|k| 0.5 * k as f64).map(|p| (p, 1200.0 * p * p + 20_000.0 * p + 3_000.0)).collect();
    let f = fit_singles_curve(&pts).unwrap();
    assert_relative_eq!(f.a, 1200.0, max_relative = 1e-6);
    assert_relative_eq!(f.b, 20_000.0, max_relative = 1e-6);
    assert_relative_eq!(f.d, 3_000.0, max_relative = 1e-6);
}

#[test]
fn car_fit_recovers_model() {
    let inputs = CarFitInputs { transmissions: [0.0224, 0.0224], window_s: 0.8e-9 };
    let (xi, raman, dark) = (54_000.0, 800_000.0, 3_000.0);
    let pts: Vec<(f64, f64)> = [0.2, 0.4, 0.7, 1.0, 1.4, 2.0, 3.0, 4.5, 6.0].iter().map(|&p| (p, car_model(xi, raman, dark, &inputs, p))).collect();
    let f = fit_car_curve(&pts, &inputs).unwrap();
    assert!(f.converged && !f.degenerate);
    assert_relative_eq!(f.xi, xi, max_relative = 1e-3);
    assert_relative_eq!(f.raman, raman, max_relative = 1e-3);
    assert_relative_eq!(f.dark_product, dark * dark, max_relative = 1e-2);
    let best = pts.iter().max_by(|a, b| a.1.total_cmp(&b.1)).unwrap().0;
    assert!((f.peak_power_mw - best).abs() < 1.0);
}

#[test]
fn chsh_on_expected_counts() {
    let angles = ChshAngles::standard();
    let phi = bell_state(BellKind::PhiPlus, 0.0);
    for p in [1.0, 0.94, 0.6] {
        let rho = DensityMatrix::werner(p, &phi).unwrap();
        let rec = CountsRecord16::from_settings(&angles.settings(), 1.0).unwrap();
        let counts: Vec<u64> = expected_counts(&rec, &rho, 1e8).iter().map(|c| c.round() as u64).collect();
        let r = chsh(&rec.with_counts(&counts), &angles, angles.signs_for(&phi.density())).unwrap();
        assert_relative_eq!(r.s, 2.0 * SQRT_2 * p, max_relative = 1e-5);
        assert!(r.s_err > 0.0);
    }
}

#[test]
fn chsh_needs_its_settings() {
    let rec = CountsRecord16::from_settings(&standard_settings(), 1.0).unwrap();
    assert!(chsh(&rec, &ChshAngles::standard(), [1.0; 4]).is_err());
}

#[test]
fn mle_gradient_matches_finite_differences() {
    let rec = CountsRecord16::from_settings(&standard_settings(), 1.0).unwrap();
    let proj = projectors(&rec);
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..5 {
        let p: Vec<f64> = (0..16).map(|_| rng.random_range(0.01..1.0)).collect();
        let total: f64 = p.iter().sum();
        let p: Vec<f64> = p.iter().map(|v| v / total).collect();
        let x = Params::from_fn(|_, _| rng.random_range(-1.0..1.0));
        let (_, g) = objective(&x, &proj, &p);
        for k in 0..16 {
            let h = 1e-6;
            let (mut a, mut b) = (x, x);
            a[k] += h;
            b[k] -= h;
            let fd = (objective(&a, &proj, &p).0 - objective(&b, &proj, &p).0) / (2.0 * h);
            assert!((fd - g[k]).abs() <= 1e-5 * g.norm(), "component {k}: {fd} vs {}", g[k]);
        }
    }
}

#[test]
fn mle_recovers_state_at_high_counts() {
    let truth = DensityMatrix::werner(0.912, &bell_state(BellKind::PhiPlus, 0.0)).unwrap();
    let rec = CountsRecord16::from_settings(&standard_settings(), 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let r = mle_tomography(&rec.with_counts(&poisson_counts(&expected_counts(&rec, &truth, 1e5), &mut rng))).unwrap();
    assert!(r.converged);
    assert!(fidelity(&r.rho, &truth).unwrap() > 0.999);
}

#[test]
fn mle_output_is_always_physical() {
    let rec = CountsRecord16::from_settings(&standard_settings(), 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..40 {
        // Arbitrary counts, including zeros, need not come from any state.
        let means: Vec<f64> = (0..16).map(|_| if rng.random::<f64>() < 0.2 { 0.0 } else { rng.random_range(0.0..300.0) }).collect();
        let counts = poisson_counts(&means, &mut rng);
        if counts.iter().sum::<u64>() == 0 {
            continue;
        }
        let r = mle_tomography(&rec.with_counts(&counts)).unwrap();
        assert!(r.rho.to_raw().check().is_physical());
    }
}

#[test]
fn bootstrap_error_scales_with_counts() {
    let phi = bell_state(BellKind::PhiPlus, 0.0);
    let truth = DensityMatrix::werner(0.9, &phi).unwrap();
    let rec = CountsRecord16::from_settings(&standard_settings(), 1.0).unwrap();
    let sigma = |n: f64| {
        let means = expected_counts(&rec, &truth, n);
        let counts: Vec<u64> = means.iter().map(|m| m.round() as u64).collect();
        fidelity_with_error(&rec.with_counts(&counts), &phi.density(), 200, 5).unwrap().std
    };
    let ratio = sigma(2_000.0) / sigma(32_000.0);
    assert!((ratio - 4.0).abs() < 1.0, "sigma ratio {ratio}");
}

#[test]
fn counts_record_json_round_trip() {
    let rec = CountsRecord16::from_settings(&standard_settings(), 2.5).unwrap().with_counts(&[7; 16]);
    let back: CountsRecord16 = serde_json::from_str(&serde_json::to_string(&rec).unwrap()).unwrap();
    assert_eq!(back, rec);
    assert!(CountsRecord16::new(rec.rows[..15].to_vec(), 1.0).is_err());
}
