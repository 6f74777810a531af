//! Spectral brightness from a coincidence rate and the arm loss budgets.
//!
//!     cargo run --example brightness

use muxent::config::load_preset;
use muxent::photonics::{brightness_report, spectral_brightness};
use muxent::reproduce::{REFERENCE_BRIGHTNESS, STATED_COINCIDENCE_RATE};

fn main() -> muxent::Result<()> {
    let sc = load_preset("cw_energy_time")?.scenario;
    let arms = [sc.budget(0), sc.budget(1)];
    println!("arm transmissions {:.4} {:.4}", arms[0].transmission(), arms[1].transmission());
    let b = spectral_brightness(STATED_COINCIDENCE_RATE, [&arms[0], &arms[1]], sc.pump.power_mw(), 0.8)?;
    let r = brightness_report(b, REFERENCE_BRIGHTNESS, 2.0);
    println!("brightness {:.3e} /(s nm mW), reference {:.2e}, ratio {:.2}", r.value, r.reference, r.ratio);
    println!("{}", r.note);
    Ok(())
}
