//! Layered scenario presets.
//!
//! A preset is a TOML document with `[provenance]` notes, `[analysis]`
//! defaults and a `[scenario]` table. Layers are deep-merged in order (later
//! wins), then flag overrides are applied, and the result is validated.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::engine::scenario::hex_string;
use crate::engine::{Mode, Scenario, WindowSpec};
use crate::{Error, Result};

/// Directory searched for preset files named on the command line.
pub const PRESET_DIR_ENV: &str = "MUXENT_PRESET_DIR";

const BUILTIN: [(&str, &str); 4] = [
    ("cw_energy_time", include_str!("../presets/cw_energy_time.toml")),
    ("pulsed_time_bin", include_str!("../presets/pulsed_time_bin.toml")),
    ("polarization_cw", include_str!("../presets/polarization_cw.toml")),
    ("polarization_pulsed", include_str!("../presets/polarization_pulsed.toml")),
];

pub fn builtin_names() -> impl Iterator<Item = &'static str> {
    BUILTIN.iter().map(|(n, _)| *n)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisSettings {
    pub window_ps: u64,
    /// Accidental windows on each side of the coincidence peak.
    pub accidental_windows: u32,
    #[serde(default)]
    pub mode: Mode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Preset {
    #[serde(default)]
    pub provenance: BTreeMap<String, String>,
    pub analysis: AnalysisSettings,
    pub scenario: Scenario,
}

impl Preset {
    pub fn window(&self) -> WindowSpec {
        WindowSpec::for_scenario(&self.scenario, self.analysis.window_ps, self.analysis.accidental_windows)
    }

    /// SHA-256 over the resolved preset (scenario and analysis settings).
    pub fn config_hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(serde_json::to_vec(&self.scenario).expect("scenario serialises"));
        h.update(serde_json::to_vec(&self.analysis).expect("analysis serialises"));
        hex_string(&h.finalize())
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }
}

/// Command-line overrides applied after all layers.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub duration_s: Option<f64>,
    pub power_mw: Option<f64>,
    pub window_ps: Option<u64>,
    pub channel_pair: Option<u8>,
}

impl Overrides {
    pub fn apply(&self, preset: &mut Preset) {
        let sc = &mut preset.scenario;
        if let Some(s) = self.seed {
            sc.seed = s;
        }
        if let Some(d) = self.duration_s {
            sc.duration_s = d;
        }
        if let Some(p) = self.power_mw {
            sc.pump = sc.pump.with_power(p);
        }
        if let Some(k) = self.channel_pair {
            sc.channel_pair = k;
        }
        if let Some(w) = self.window_ps {
            preset.analysis.window_ps = w;
        }
    }
}

fn parse(text: &str, origin: &str) -> Result<toml::Table> {
    text.parse::<toml::Table>().map_err(|e| Error::Config(format!("{origin}: {e}")))
}

fn merge(base: &mut toml::Table, layer: toml::Table) {
    for (k, v) in layer {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(l)) => merge(b, l),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

/// Text of a preset given a built-in name, a file path, or a name found in
/// the preset directory.
pub fn preset_source(name: &str) -> Result<(String, String)> {
    if let Some((_, text)) = BUILTIN.iter().find(|(n, _)| *n == name) {
        return Ok((format!("builtin:{name}"), text.to_string()));
    }
    let mut candidates = vec![PathBuf::from(name)];
    if let Ok(dir) = std::env::var(PRESET_DIR_ENV) {
        candidates.push(Path::new(&dir).join(name));
        candidates.push(Path::new(&dir).join(format!("{name}.toml")));
    }
    for c in candidates {
        if c.is_file() {
            let text = std::fs::read_to_string(&c)?;
            return Ok((c.display().to_string(), text));
        }
    }
    Err(Error::Config(format!("unknown preset {name:?}")))
}

/// Resolves a preset plus override layers (TOML text) and flag overrides.
pub fn resolve(name: &str, layers: &[String], overrides: &Overrides) -> Result<Preset> {
    let (origin, text) = preset_source(name)?;
    let mut table = parse(&text, &origin)?;
    for (k, layer) in layers.iter().enumerate() {
        merge(&mut table, parse(layer, &format!("layer {k}"))?);
    }
    let mut preset: Preset = toml::Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| Error::Config(format!("{origin}: {e}")))?;
    overrides.apply(&mut preset);
    preset.scenario.validate().map_err(|e| Error::Config(e.to_string()))?;
    Ok(preset)
}

pub fn load_preset(name: &str) -> Result<Preset> {
    resolve(name, &[], &Overrides::default())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_parse_and_validate() {
        for name in builtin_names() {
            let p = load_preset(name).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert!(!p.provenance.is_empty(), "{name} lacks provenance");
        }
    }

    #[test]
    fn layers_and_flags_override() {
        let layer = "[scenario]\nseed = 9\n[scenario.pump]\npower_mw = 2.0\n".to_string();
        let p = resolve("cw_energy_time", &[layer], &Overrides { channel_pair: Some(3), ..Default::default() }).unwrap();
        assert_eq!(p.scenario.seed, 9);
        assert_eq!(p.scenario.pump.power_mw(), 2.0);
        assert_eq!(p.scenario.channel_pair, 3);
        assert_eq!(p.scenario.signal_detector.efficiency, 0.2);
    }

    #[test]
    fn hash_tracks_physics_fields() {
        let a = load_preset("cw_energy_time").unwrap();
        let mut b = a.clone();
        b.scenario.signal_detector.dark_rate += 1.0;
        assert_ne!(a.config_hash(), b.config_hash());
        assert_eq!(a.config_hash(), load_preset("cw_energy_time").unwrap().config_hash());
    }

    #[test]
    fn bad_inputs_are_config_errors() {
        assert!(matches!(load_preset("no_such_preset"), Err(Error::Config(_))));
        let bad = resolve("cw_energy_time", &["[scenario]\nduration_s = -1.0\n".into()], &Overrides::default());
        assert!(matches!(bad, Err(Error::Config(_))));
    }
}
