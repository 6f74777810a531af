//! Time-tag simulation of an energy-time setup and the start-stop delay
//! histogram: three peaks at -dt, 0, +dt; the central one interferes.
//!
//!     cargo run --release --example coincidence_histogram

use std::f64::consts::PI;

use muxent::config::load_preset;
use muxent::engine::{delay_histogram, simulate, HistogramSpec, Settings};

fn main() -> muxent::Result<()> {
    let preset = load_preset("cw_energy_time")?;
    let window = preset.window();
    let spec = HistogramSpec { bin_width_ps: 100, half_range_ps: 3_000 };
    for (label, phase) in [("constructive", 0.0), ("destructive", PI)] {
        let mut sc = preset.scenario.with_settings(Settings { phase_signal: phase, ..Default::default() });
        sc.duration_s = 20.0;
        let out = simulate(&sc)?;
        let h = delay_histogram(out.signal(), out.idler(), &spec, &window)?;
        println!("{label} (phase {phase:.2}), singles {:.0}/s {:.0}/s", out.singles_rate(0), out.singles_rate(1));
        let peak = *h.counts.iter().max().unwrap_or(&1) as f64;
        for (x, c) in h.bin_centers_ps().iter().zip(&h.counts) {
            if *c > 0 {
                println!("{x:>8.0} ps {c:>6} {}", "#".repeat((60.0 * *c as f64 / peak).round() as usize));
            }
        }
        println!();
    }
    Ok(())
}
