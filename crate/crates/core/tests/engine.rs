mod common;

use common::{bytes, short};
use muxent::config::{builtin_names, load_preset};
use muxent::engine::{count_coincidences, count_in_window, measure, simulate, Mode, Scenario, TimeTagFile, WindowSpec};
use muxent::Error;

#[test]
fn identical_seeds_give_identical_bytes() {
    for name in builtin_names() {
        let sc = short(name, 0.5);
        assert_eq!(bytes(&sc), bytes(&sc), "{name}");
        let other = Scenario { seed: sc.seed + 1, ..sc.clone() };
        assert_ne!(bytes(&sc), bytes(&other), "{name}");
    }
}

#[test]
fn dead_time_holds_on_every_stream() {
    for name in builtin_names() {
        let sc = short(name, 2.0);
        let out = simulate(&sc).unwrap();
        for arm in 0..2 {
            let dead = (sc.detector(arm).dead_time * 1e12).round() as u64;
            let ts = &out.timestamps[arm];
            assert!(!ts.is_empty());
            assert!(ts.windows(2).all(|w| w[1] - w[0] >= dead), "{name} arm {arm}");
            assert!(*ts.last().unwrap() < out.duration_ps);
        }
    }
}

#[test]
fn independent_streams_give_product_accidentals() {
    let (observed, expected) = common::product_accidentals(60.0);
    let sigma = expected.sqrt();
    assert!((observed - expected).abs() < 3.0 * sigma, "observed {observed}, expected {expected:.1} +/- {sigma:.1}");
}

#[test]
fn three_peaks_are_one_two_one_with_random_phase() {
    let p = common::three_peaks(600.0);
    assert!((p.ratio - 1.0).abs() < 3.0 * p.ratio_sigma, "centre/sides {:.3} +/- {:.3}", p.ratio, p.ratio_sigma);
    let side_sigma = (p.left + p.right + 2.0 * p.accidental).sqrt();
    assert!((p.left - p.right).abs() < 3.0 * side_sigma, "sides {} {}", p.left, p.right);
}

#[test]
fn counts_mode_agrees_with_time_tags() {
    for name in ["cw_energy_time", "pulsed_time_bin"] {
        let preset = load_preset(name).unwrap();
        let mut sc = preset.scenario.clone();
        sc.umis.clear();
        sc.duration_s = 60.0;
        let w = preset.window();
        let a = measure(&sc, &w, Mode::TimeTag).unwrap();
        let b = measure(&sc, &w, Mode::Counts).unwrap();
        let close = |x: u64, y: u64, what: &str| {
            let s = ((x + y) as f64).sqrt().max(1.0);
            assert!((x as f64 - y as f64).abs() < 4.0 * s, "{name} {what}: time tags {x}, counts {y}");
        };
        close(a.coincidences, b.coincidences, "coincidences");
        close(a.accidentals, b.accidentals, "accidentals");
        close(a.singles[0], b.singles[0], "signal singles");
        close(a.singles[1], b.singles[1], "idler singles");
    }
}

#[test]
fn windows_are_half_open() {
    let w = WindowSpec::new(800);
    let (lo, hi) = w.bounds(0);
    assert_eq!((lo, hi), (-400, 400));
    assert_eq!(count_in_window(&[1_000], &[600], lo, hi), 1);
    assert_eq!(count_in_window(&[1_000], &[1_400], lo, hi), 0);
    // Adjacent windows partition the delays.
    let a = [10_000u64];
    let b: Vec<u64> = (8_500..11_500).step_by(50).collect();
    let total: u64 = [-800i64, 0, 800].iter().map(|&o| { let (l, h) = w.bounds(o); count_in_window(&a, &b, l, h) }).sum();
    assert_eq!(total, 2_400 / 50);
    assert!(matches!(count_coincidences(&[5, 3], &[1], &w), Err(Error::Unsorted(1))));
}

#[test]
fn time_tag_file_round_trip_and_corruption() {
    let sc = short("pulsed_time_bin", 0.3);
    let out = simulate(&sc).unwrap();
    let f = TimeTagFile::from_output(&out);
    let mut buf = Vec::new();
    f.write_to(&mut buf).unwrap();
    let back = TimeTagFile::read_from(buf.as_slice()).unwrap();
    assert_eq!(back, f);
    assert_eq!(back.stream(0), out.timestamps[0]);
    assert_eq!(back.stream(1), out.timestamps[1]);
    assert_eq!(back.scenario_hash, sc.hash());

    let mut bad = buf.clone();
    bad[0] = b'X';
    assert!(TimeTagFile::read_from(bad.as_slice()).is_err());
    assert!(TimeTagFile::read_from(&buf[..buf.len() - 3]).is_err());

    let mut csv = Vec::new();
    f.write_csv(&mut csv).unwrap();
    assert_eq!(String::from_utf8(csv).unwrap().lines().count(), f.records.len() + 1);
}

#[test]
fn inconsistent_scenarios_are_rejected() {
    let mut sc = short("cw_energy_time", 1.0);
    sc.pump = load_preset("pulsed_time_bin").unwrap().scenario.pump;
    assert!(matches!(simulate(&sc), Err(Error::InconsistentScenario(_))));
    let mut sc = short("cw_energy_time", 1.0);
    sc.channel_pair = 15;
    assert!(matches!(simulate(&sc), Err(Error::ChannelOutOfRange(15))));
    let mut sc = short("polarization_cw", 1.0);
    sc.settings.polarizer_signal = Some(muxent::engine::AnalyzerSetting::H);
    assert!(matches!(simulate(&sc), Err(Error::InconsistentScenario(_))));
}
