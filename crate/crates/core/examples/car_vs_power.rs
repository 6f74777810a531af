//! Coincidence-to-accidental ratio versus pump power: analytic model next
//! to counts-mode Monte Carlo, then a fit of the model to the simulated
//! points.
//!
//!     cargo run --release --example car_vs_power

use muxent::analysis::{car_from_setting, fit_car_curve, CarFitInputs};
use muxent::config::load_preset;
use muxent::engine::{measure, Mode, Scenario};
use muxent::photonics::CarModel;

fn main() -> muxent::Result<()> {
    let preset = load_preset("cw_energy_time")?;
    let mut sc = preset.scenario.clone();
    sc.umis.clear();
    sc.duration_s = 60.0;
    let window = preset.window();
    let model = CarModel {
        source: sc.source.clone(),
        detectors: [sc.signal_detector.clone(), sc.idler_detector.clone()],
        transmissions: sc.transmissions(),
        channel_pair: sc.channel_pair,
        pump: sc.pump,
    };

    let mut points = Vec::new();
    println!("{:>8} {:>10} {:>16}", "P (mW)", "model", "simulated");
    for (k, p) in [0.2, 0.4, 0.7, 1.0, 1.37, 2.0, 3.0, 4.0, 6.0].into_iter().enumerate() {
        let s = Scenario { pump: sc.pump.with_power(p), seed: sc.seed + k as u64, ..sc.clone() };
        let e = car_from_setting(&measure(&s, &window, Mode::Counts)?);
        println!("{p:>8.2} {:>10.1} {:>8.1} +/- {:<5.1}", model.with_power(p).car(window.width_s())?, e.value, e.error);
        points.push((p, e.value));
    }

    let fit = fit_car_curve(&points, &CarFitInputs { transmissions: sc.transmissions(), window_s: window.width_s() })?;
    println!("\nfit: xi {:.3e} /s/mW^2, raman {:.3e} /s/mW, peak at {:.2} mW", fit.xi, fit.raman, fit.peak_power_mw);
    Ok(())
}
