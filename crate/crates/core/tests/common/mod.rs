//! Engine property checks shared by the engine and acceptance tests.
#![allow(dead_code)]

use muxent::config::{builtin_names, load_preset};
use muxent::engine::{count_in_window, delay_histogram, simulate, HistogramSpec, Scenario, Settings, TimeTagFile, WindowSpec};

pub fn short(name: &str, secs: f64) -> Scenario {
    let mut sc = load_preset(name).unwrap().scenario;
    sc.duration_s = secs;
    sc
}

pub fn bytes(sc: &Scenario) -> Vec<u8> {
    let mut v = Vec::new();
    TimeTagFile::from_output(&simulate(sc).unwrap()).write_to(&mut v).unwrap();
    v
}

/// Same seed gives the same file, a different seed a different one.
pub fn determinism(secs: f64) -> Result<(), String> {
    for name in builtin_names() {
        let sc = short(name, secs);
        if bytes(&sc) != bytes(&sc) {
            return Err(format!("{name}: identical seeds differ"));
        }
        if bytes(&sc) == bytes(&Scenario { seed: sc.seed + 1, ..sc.clone() }) {
            return Err(format!("{name}: seed has no effect"));
        }
    }
    Ok(())
}

pub fn dead_time(secs: f64) -> Result<(), String> {
    for name in builtin_names() {
        let sc = short(name, secs);
        let out = simulate(&sc).map_err(|e| e.to_string())?;
        for arm in 0..2 {
            let dead = (sc.detector(arm).dead_time * 1e12).round() as u64;
            let ts = &out.timestamps[arm];
            if ts.is_empty() || !ts.windows(2).all(|w| w[1] - w[0] >= dead) {
                return Err(format!("{name} arm {arm}"));
            }
        }
    }
    Ok(())
}

/// Pair-free scenario: coincidences over 21 windows of 5 ns against
/// `r_a r_b tau T`. Returns (observed, expected).
pub fn product_accidentals(secs: f64) -> (f64, f64) {
    let mut sc = short("cw_energy_time", secs);
    sc.source.xi = 0.0;
    sc.umis.clear();
    let out = simulate(&sc).unwrap();
    let (ra, rb) = (out.singles_rate(0), out.singles_rate(1));
    let width = 5_000u64;
    let offsets: Vec<i64> = (-10..=10).map(|k| k * 20_000).collect();
    let w = WindowSpec::new(width);
    let observed: u64 = offsets
        .iter()
        .map(|&o| {
            let (lo, hi) = w.bounds(o);
            count_in_window(out.signal(), out.idler(), lo, hi)
        })
        .sum();
    (observed as f64, ra * rb * (width as f64 * 1e-12) * secs * offsets.len() as f64)
}

pub struct Peaks {
    pub left: f64,
    pub centre: f64,
    pub right: f64,
    pub accidental: f64,
    /// centre / (left + right) and its 1-sigma error.
    pub ratio: f64,
    pub ratio_sigma: f64,
}

/// Energy-time histogram with the interferometer phase redrawn every
/// simulated second; accidental-subtracted peak areas.
pub fn three_peaks(secs: f64) -> Peaks {
    let preset = load_preset("cw_energy_time").unwrap();
    let mut sc = preset.scenario.clone();
    sc.duration_s = secs;
    sc.settings = Settings { phase_randomized: true, ..Default::default() };
    let window = preset.window();
    let out = simulate(&sc).unwrap();
    let delay = sc.umis[0].delay_ps() as i64;
    let h = delay_histogram(out.signal(), out.idler(), &HistogramSpec { bin_width_ps: 100, half_range_ps: 6_000 }, &window).unwrap();
    let half = window.width_ps as i64 / 2;
    let area = |c: i64| h.sum_range(c - half, c + half).unwrap() as f64;
    let acc = [-4_800i64, -800, 800, 4_800].iter().map(|&c| area(c)).sum::<f64>() / 4.0;
    let (l, c, r) = (area(-delay) - acc, area(0) - acc, area(delay) - acc);
    // Per-second phase redraws add Var = c^2 <cos^2> / chunks to the centre.
    let var_c = c + acc + c * c * 0.5 / secs;
    let ratio = c / (l + r);
    let ratio_sigma = ratio * (var_c / (c * c) + (l + r + 2.0 * acc) / ((l + r) * (l + r))).sqrt();
    Peaks { left: l, centre: c, right: r, accidental: acc, ratio, ratio_sigma }
}
