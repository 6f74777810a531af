//! Run plumbing behind the `muxent` binary: `simulate` and `analyze`
//! produce the same [`Report`] artifacts as `reproduce`.

use std::path::Path;

use crate::analysis::tomography::linear_tomography;
use crate::analysis::{car_from_counts, car_from_setting, chsh, fidelity_with_error, mle_tomography, ChshAngles, CountsRecord16};
use crate::config::{resolve, Overrides, Preset};
use crate::engine::{count_coincidences, delay_histogram, measure, simulate, HistogramSpec, Mode, TimeTagFile};
use crate::qstate::{bell_state, BellKind};
use crate::report::{combine_hashes, num, Metric, Report, RunManifest, Table, TOOL_VERSION};
use crate::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;
pub const EXIT_MISSING_INPUT: i32 = 4;
pub const EXIT_NOT_CONVERGED: i32 = 5;

/// Process exit status for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::UnknownTarget(_) => EXIT_USAGE,
        Error::Config(_) | Error::InconsistentScenario(_) | Error::InvalidParameter(_) | Error::ChannelOutOfRange(_) => {
            EXIT_CONFIG
        }
        Error::Io(io) if io.kind() == std::io::ErrorKind::NotFound => EXIT_MISSING_INPUT,
        Error::Fit(_) => EXIT_NOT_CONVERGED,
        _ => EXIT_FAILURE,
    }
}

/// Where a configuration comes from: preset plus TOML layer files.
#[derive(Debug, Clone, Default)]
pub struct RunConfig {
    pub preset: String,
    pub layer_files: Vec<String>,
    pub overrides: Overrides,
    pub output_dir: String,
}

impl RunConfig {
    pub fn layers(&self) -> Result<Vec<String>> {
        self.layer_files
            .iter()
            .map(|f| {
                std::fs::read_to_string(f).map_err(|e| match e.kind() {
                    std::io::ErrorKind::NotFound => Error::Io(e),
                    _ => Error::Config(format!("{f}: {e}")),
                })
            })
            .collect()
    }

    pub fn resolve(&self) -> Result<Preset> {
        resolve(&self.preset, &self.layers()?, &self.overrides)
    }

    fn manifest(&self, preset: &Preset, analyses: &[&str], extra_hash: Option<&str>) -> RunManifest {
        let mut sources = vec![self.preset.clone()];
        sources.extend(self.layer_files.iter().cloned());
        let h = preset.config_hash();
        RunManifest {
            scenario_sources: sources,
            seed: preset.scenario.seed,
            duration_s: preset.scenario.duration_s,
            output_dir: self.output_dir.clone(),
            analyses: analyses.iter().map(|s| s.to_string()).collect(),
            tool_version: TOOL_VERSION.into(),
            config_hash: match extra_hash {
                Some(x) => combine_hashes([h.as_str(), x]),
                None => h,
            },
        }
    }
}

fn histogram_table(h: &crate::engine::DelayHistogram) -> Table {
    let mut t = Table::new("histogram", &["delay_ps", "counts"]);
    for (x, c) in h.bin_centers_ps().iter().zip(&h.counts) {
        t.push_nums(&[*x, *c as f64]);
    }
    t
}

fn histogram_spec(preset: &Preset) -> HistogramSpec {
    let half = preset.scenario.pulse_period_ps().map_or(10_000, |p| p as i64 / 2).max(4 * preset.analysis.window_ps as i64);
    HistogramSpec { bin_width_ps: 50, half_range_ps: half }
}

/// Runs the configured scenario. In time-tag mode the tags are written to
/// `timetags.bin` (and `timetags.csv` when `csv` is set).
pub fn simulate_run(cfg: &RunConfig, csv: bool) -> Result<Report> {
    let preset = cfg.resolve()?;
    let sc = &preset.scenario;
    let window = preset.window();
    let mut metrics = Vec::new();
    let mut tables = Vec::new();
    let mut notes = Vec::new();
    match preset.analysis.mode {
        Mode::TimeTag => {
            let out = simulate(sc)?;
            let dir = Path::new(&cfg.output_dir);
            std::fs::create_dir_all(dir)?;
            let file = TimeTagFile::from_output(&out);
            file.write_to(std::io::BufWriter::new(std::fs::File::create(dir.join("timetags.bin"))?))?;
            if csv {
                file.write_csv(std::io::BufWriter::new(std::fs::File::create(dir.join("timetags.csv"))?))?;
            }
            let c = count_coincidences(out.signal(), out.idler(), &window)?;
            let e = car_from_counts(&c);
            metrics.push(Metric::new("singles_signal_per_s", out.singles_rate(0)));
            metrics.push(Metric::new("singles_idler_per_s", out.singles_rate(1)));
            metrics.push(Metric::new("coincidences", c.coincidences as f64).err((c.coincidences as f64).sqrt()));
            metrics.push(Metric::new("car", e.value).err(e.error));
            if e.lower_bound {
                notes.push("no accidentals observed; CAR is a lower bound".into());
            }
            tables.push(histogram_table(&delay_histogram(out.signal(), out.idler(), &histogram_spec(&preset), &window)?));
            notes.push(format!("{} time tags written to timetags.bin", file.records.len()));
        }
        Mode::Counts => {
            let c = measure(sc, &window, Mode::Counts)?;
            let e = car_from_setting(&c);
            metrics.push(Metric::new("singles_signal", c.singles[0] as f64));
            metrics.push(Metric::new("singles_idler", c.singles[1] as f64));
            metrics.push(Metric::new("coincidences", c.coincidences as f64).err((c.coincidences as f64).sqrt()));
            metrics.push(Metric::new("accidental_mean", c.accidental_mean()));
            metrics.push(Metric::new("car", e.value).err(e.error));
        }
    }
    Ok(Report {
        name: "simulate".into(),
        manifest: cfg.manifest(&preset, &["simulate", "coincidences"], None),
        metrics,
        converged: true,
        notes,
        resolved_config: preset.to_toml()?,
        tables,
    })
}

/// Analyzes a time-tag file (`.bin`) or a 16-setting counts record
/// (`.json`).
pub fn analyze_file(cfg: &RunConfig, input: &Path) -> Result<Report> {
    let preset = cfg.resolve()?;
    let bytes = std::fs::read(input)?;
    let ext = input.extension().and_then(|e| e.to_str()).unwrap_or("");
    if ext == "json" {
        let rec: CountsRecord16 =
            serde_json::from_slice(&bytes).map_err(|e| Error::Config(format!("{}: {e}", input.display())))?;
        return analyze_record(cfg, &preset, &rec);
    }
    let file = TimeTagFile::read_from(bytes.as_slice())?;
    let (a, b) = (file.stream(0), file.stream(1));
    let window = preset.window();
    let c = count_coincidences(&a, &b, &window)?;
    let e = car_from_counts(&c);
    let span_s = file.records.last().map_or(0.0, |r| r.timestamp_ps as f64 * 1e-12);
    let mut metrics = vec![
        Metric::new("singles_signal", a.len() as f64),
        Metric::new("singles_idler", b.len() as f64),
        Metric::new("coincidences", c.coincidences as f64).err((c.coincidences as f64).sqrt()),
        Metric::new("accidental_mean", c.accidental_mean().unwrap_or(0.0)),
        Metric::new("car", e.value).err(e.error),
    ];
    if span_s > 0.0 {
        metrics.push(Metric::new("record_span_s", span_s));
    }
    let mut notes = vec![format!("window {} ps, {} accidental windows", window.width_ps, window.accidental_offsets_ps.len())];
    if e.lower_bound {
        notes.push("no accidentals observed; CAR is a lower bound".into());
    }
    let file_hash = crate::engine::scenario::hex_string(&file.scenario_hash);
    Ok(Report {
        name: "analyze".into(),
        manifest: RunManifest {
            seed: file.seed,
            ..cfg.manifest(&preset, &["coincidences", "car", "histogram"], Some(&file_hash))
        },
        metrics,
        converged: true,
        notes,
        resolved_config: preset.to_toml()?,
        tables: vec![histogram_table(&delay_histogram(&a, &b, &histogram_spec(&preset), &window)?)],
    })
}

fn analyze_record(cfg: &RunConfig, preset: &Preset, rec: &CountsRecord16) -> Result<Report> {
    let mut metrics = Vec::new();
    let mut notes = Vec::new();
    let mut converged = true;
    let mut tables = Vec::new();
    let angles = ChshAngles::standard();
    let target = bell_state(BellKind::PhiPlus, 0.0).density();
    if let Ok(r) = chsh(rec, &angles, angles.signs_for(&target)) {
        metrics.push(Metric::new("S", r.s).err(r.s_err));
        metrics.push(Metric::new("violation_sigma", r.violation_sigma));
    }
    match linear_tomography(rec) {
        Ok(raw) => {
            let lin_min = raw.eigenvalues().into_iter().fold(f64::INFINITY, f64::min);
            let fit = mle_tomography(rec)?;
            let f = fidelity_with_error(rec, &target, crate::reproduce::FIDELITY_RESAMPLES, preset.scenario.seed)?;
            converged &= fit.converged && f.all_converged;
            metrics.push(Metric::new("linear_min_eigenvalue", lin_min));
            metrics.push(Metric::new("fidelity_phi_plus", f.point).err(f.std));
            metrics.push(Metric::new("purity", fit.rho.purity()));
            let mut t = Table::new("density_matrix", &["row", "col", "re", "im"]);
            let m = fit.rho.matrix();
            for i in 0..4 {
                for j in 0..4 {
                    t.push(vec![i.to_string(), j.to_string(), num(m[(i, j)].re), num(m[(i, j)].im)]);
                }
            }
            tables.push(t);
        }
        Err(e) => notes.push(format!("tomography skipped: {e}")),
    }
    if metrics.is_empty() {
        return Err(Error::MissingSetting("record matches neither the CHSH nor the tomography settings".into()));
    }
    Ok(Report {
        name: "analyze".into(),
        manifest: cfg.manifest(preset, &["chsh", "mle_tomography"], None),
        metrics,
        converged,
        notes,
        resolved_config: preset.to_toml()?,
        tables,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_are_distinct() {
        let codes = [
            exit_code(&Error::UnknownTarget("x".into())),
            exit_code(&Error::Config("x".into())),
            exit_code(&Error::Io(std::io::Error::from(std::io::ErrorKind::NotFound))),
            exit_code(&Error::Fit("x".into())),
        ];
        assert_eq!(codes, [EXIT_USAGE, EXIT_CONFIG, EXIT_MISSING_INPUT, EXIT_NOT_CONVERGED]);
    }
}
