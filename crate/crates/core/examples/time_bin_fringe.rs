//! Time-bin fringe with a pulsed pump: scanning the pump interferometer
//! gives twice the fringe frequency of scanning the signal one. The
//! frequency is left free in the fit.
//!
//!     cargo run --release --example time_bin_fringe

use std::f64::consts::TAU;

use muxent::analysis::fit_fringe_free;
use muxent::config::load_preset;
use muxent::engine::{measure, Settings};
use muxent::reproduce::{sub_seed, sweep_background};

fn main() -> muxent::Result<()> {
    let preset = load_preset("pulsed_time_bin")?;
    let window = preset.window();
    let phases: Vec<f64> = (0..24).map(|k| 2.0 * TAU * k as f64 / 24.0).collect();
    for (label, pump) in [("signal", false), ("pump", true)] {
        let counts = phases
            .iter()
            .enumerate()
            .map(|(k, &p)| {
                let s = if pump { Settings { phase_pump: p, ..Default::default() } } else { Settings { phase_signal: p, ..Default::default() } };
                let mut sc = preset.scenario.with_settings(s);
                sc.seed = sub_seed(sc.seed, k as u64 + if pump { 100 } else { 0 });
                measure(&sc, &window, preset.analysis.mode)
            })
            .collect::<muxent::Result<Vec<_>>>()?;
        let points: Vec<(f64, f64)> = phases.iter().zip(&counts).map(|(&p, c)| (p, c.coincidences as f64)).collect();
        let fit = fit_fringe_free(&points, 0.6, 2.6, sweep_background(&counts))?;
        println!(
            "{label:>6} sweep: frequency {:.3}, period {:.3} rad, raw visibility {:.3}, net {:.3}",
            fit.frequency,
            TAU / fit.frequency,
            fit.visibility_raw,
            fit.visibility_net
        );
    }
    Ok(())
}
