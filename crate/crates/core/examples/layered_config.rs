//! Preset resolution: built-in preset, a TOML layer on top, then
//! command-line style overrides. The hash covers the resolved result.
//!
//!     cargo run --example layered_config

use muxent::config::{builtin_names, resolve, Overrides};

fn main() -> muxent::Result<()> {
    println!("built-in presets: {}", builtin_names().collect::<Vec<_>>().join(", "));
    let layer = r#"
[scenario]
channel_pair = 12

[analysis]
window_ps = 400
"#;
    let base = resolve("cw_energy_time", &[], &Overrides::default())?;
    let layered = resolve("cw_energy_time", &[layer.to_string()], &Overrides { power_mw: Some(2.0), ..Default::default() })?;
    println!("base:    pair {} window {} ps power {} mW hash {}", base.scenario.channel_pair, base.analysis.window_ps, base.scenario.pump.power_mw(), &base.config_hash()[..16]);
    println!("layered: pair {} window {} ps power {} mW hash {}", layered.scenario.channel_pair, layered.analysis.window_ps, layered.scenario.pump.power_mw(), &layered.config_hash()[..16]);
    println!("\n{}", layered.to_toml()?);
    Ok(())
}
