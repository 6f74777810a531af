//! Pulsed versus CW pumping at the same average power: analytic CAR and
//! its log-log slope over power.
//!
//!     cargo run --example pulsed_vs_cw

use muxent::analysis::log_log_slope;
use muxent::config::load_preset;
use muxent::photonics::CarModel;

fn model(name: &str) -> muxent::Result<(CarModel, f64)> {
    let p = load_preset(name)?;
    let sc = p.scenario;
    let window = p.analysis.window_ps as f64 * 1e-12;
    let m = CarModel {
        source: sc.source.clone(),
        detectors: [sc.signal_detector.clone(), sc.idler_detector.clone()],
        transmissions: sc.transmissions(),
        channel_pair: sc.channel_pair,
        pump: sc.pump,
    };
    Ok((m, window))
}

fn main() -> muxent::Result<()> {
    let (pulsed, tau) = model("pulsed_time_bin")?;
    let (cw, _) = model("cw_energy_time")?;
    let powers = [0.02, 0.04, 0.06, 0.08, 0.12, 0.16, 0.3, 0.6];
    let (mut hp, mut hc) = (Vec::new(), Vec::new());
    println!("{:>8} {:>12} {:>12}", "P (mW)", "CAR pulsed", "CAR CW");
    for p in powers {
        let (a, b) = (pulsed.with_power(p).car(tau)?, cw.with_power(p).car(tau)?);
        println!("{p:>8.2} {a:>12.1} {b:>12.1}");
        hp.push((p, a));
        hc.push((p, b));
    }
    let (sp, _) = log_log_slope(&hp[1..6])?;
    let (sc, _) = log_log_slope(&hc[1..6])?;
    println!("d ln CAR / d ln P over 0.04-0.16 mW: pulsed {sp:.2}, CW {sc:.2}");
    Ok(())
}
