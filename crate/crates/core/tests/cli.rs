use std::path::Path;
use std::process::{Command, Output};

use muxent::analysis::tomography::{expected_counts, standard_settings};
use muxent::analysis::CountsRecord16;
use muxent::qstate::{bell_state, BellKind, DensityMatrix};

fn muxent(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_muxent")).current_dir(dir).args(args).output().expect("binary runs")
}

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    v.sort();
    v
}

#[test]
fn reproduce_is_byte_identical_for_a_seed() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        let out = muxent(d.path(), &["reproduce", "fig2b", "--seed", "7", "--out", "out"]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let (fa, fb) = (files(&a.path().join("out")), files(&b.path().join("out")));
    assert!(fa.iter().any(|(n, _)| n == "fig2b.json") && fa.iter().any(|(n, _)| n.ends_with(".csv")));
    assert_eq!(fa, fb);

    let c = tempfile::tempdir().unwrap();
    muxent(c.path(), &["reproduce", "fig2b", "--seed", "8", "--out", "out"]);
    assert_ne!(files(&c.path().join("out")), fa);
}

#[test]
fn simulate_then_analyze() {
    let d = tempfile::tempdir().unwrap();
    let out = muxent(d.path(), &["simulate", "--duration", "2", "--csv", "--out", "sim"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["timetags.bin", "timetags.csv", "simulate.json", "simulate.txt", "simulate_histogram.csv"] {
        assert!(d.path().join("sim").join(f).is_file(), "{f}");
    }
    let out = muxent(d.path(), &["analyze", "sim/timetags.bin", "--out", "ana"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(d.path().join("ana/analyze.json")).unwrap()).unwrap();
    assert_eq!(report["manifest"]["seed"], 1);
    assert!(report["metrics"].as_array().unwrap().iter().any(|m| m["name"] == "car"));
}

#[test]
fn analyze_counts_record() {
    let d = tempfile::tempdir().unwrap();
    let truth = DensityMatrix::werner(0.9, &bell_state(BellKind::PhiPlus, 0.0)).unwrap();
    let rec = CountsRecord16::from_settings(&standard_settings(), 10.0).unwrap();
    let counts: Vec<u64> = expected_counts(&rec, &truth, 2_000.0).iter().map(|c| c.round() as u64).collect();
    std::fs::write(d.path().join("tomo.json"), serde_json::to_vec(&rec.with_counts(&counts)).unwrap()).unwrap();
    let out = muxent(d.path(), &["analyze", "tomo.json", "--out", "."]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("fidelity_phi_plus"), "{text}");
    assert!(d.path().join("analyze_density_matrix.csv").is_file());
}

#[test]
fn failures_have_distinct_exit_codes() {
    let d = tempfile::tempdir().unwrap();
    let code = |args: &[&str]| muxent(d.path(), args).status.code().unwrap();
    assert_eq!(code(&["reproduce", "fig9z"]), 2);
    assert_eq!(code(&["frobnicate"]), 2);
    std::fs::write(d.path().join("bad.toml"), "[scenario\nx = ").unwrap();
    assert_eq!(code(&["simulate", "--config", "bad.toml"]), 3);
    assert_eq!(code(&["simulate", "--duration", "1", "--channel-pair", "20"]), 3);
    assert_eq!(code(&["simulate", "--preset", "no_such_preset"]), 3);
    assert_eq!(code(&["analyze", "missing.bin"]), 4);
    assert_eq!(code(&["simulate", "--config", "missing.toml"]), 4);
}

#[test]
fn selftest_passes() {
    let d = tempfile::tempdir().unwrap();
    let out = muxent(d.path(), &["selftest"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 6, "{text}");
}

#[test]
fn preset_dir_lookup() {
    let d = tempfile::tempdir().unwrap();
    let src = muxent::config::preset_source("cw_energy_time").unwrap().1.replace("duration_s = 30.0", "duration_s = 0.5");
    std::fs::write(d.path().join("mine.toml"), src).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_muxent"))
        .current_dir(d.path())
        .env("MUXENT_PRESET_DIR", d.path())
        .args(["simulate", "--preset", "mine", "--out", "o"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("duration 0.5 s"));
}
