//! Interferometer phase versus fiber temperature, and the energy-time
//! fringe it produces.
//!
//!     cargo run --example thermal_phase_tuning

use muxent::photonics::{energy_time_fringe, umi_phase, UmiParams};

fn main() -> muxent::Result<()> {
    let umi = UmiParams::standard();
    umi.validate()?;
    let period = umi.temperature_period()?;
    println!("delay {} ps, length difference {:.3} mm", umi.delay_ps(), umi.length_difference() * 1e3);
    println!("length from delay {:.3} mm", umi.length_from_delay() * 1e3);
    println!("temperature period {period:.4} K\n");

    println!("{:>8} {:>10} {:>10}", "dT (K)", "phase", "weight");
    for k in 0..=12 {
        let dt = period * k as f64 / 12.0;
        let phi = umi_phase(&umi, dt)?;
        // Only the signal interferometer is scanned.
        println!("{dt:>8.4} {phi:>10.4} {:>10.4}", energy_time_fringe(phi, 0.97)?);
    }
    Ok(())
}
