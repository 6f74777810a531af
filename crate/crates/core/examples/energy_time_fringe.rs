//! Energy-time two-photon fringe: scan the signal interferometer phase,
//! count the central peak and fit raw and accidental-subtracted visibility.
//!
//!     cargo run --release --example energy_time_fringe

use std::f64::consts::TAU;

use muxent::analysis::fit_fringe_at;
use muxent::config::load_preset;
use muxent::engine::{measure, Settings};
use muxent::reproduce::{sub_seed, sweep_background};

fn main() -> muxent::Result<()> {
    let preset = load_preset("cw_energy_time")?;
    let base = &preset.scenario;
    let window = preset.window();
    let phases: Vec<f64> = (0..16).map(|k| TAU * k as f64 / 16.0).collect();
    let counts = phases
        .iter()
        .enumerate()
        .map(|(k, &p)| {
            let mut sc = base.with_settings(Settings { phase_signal: p, ..Default::default() });
            sc.seed = sub_seed(base.seed, k as u64);
            measure(&sc, &window, preset.analysis.mode)
        })
        .collect::<muxent::Result<Vec<_>>>()?;
    for (p, c) in phases.iter().zip(&counts) {
        println!("{p:>6.3} {:>6} {:>8.2}", c.coincidences, c.accidental_mean());
    }
    let points: Vec<(f64, f64)> = phases.iter().zip(&counts).map(|(&p, c)| (p, c.coincidences as f64)).collect();
    let fit = fit_fringe_at(&points, 1.0, sweep_background(&counts))?;
    println!("raw visibility {:.4} +/- {:.4}", fit.visibility_raw, fit.visibility_raw_err);
    println!("net visibility {:.4} +/- {:.4}", fit.visibility_net, fit.visibility_net_err);
    Ok(())
}
