//! Simulated time tags written to the binary format, read back and
//! exported as CSV.
//!
//!     cargo run --example time_tag_io [out_dir]

use std::path::PathBuf;

use muxent::analysis::car_from_counts;
use muxent::config::load_preset;
use muxent::engine::{count_coincidences, simulate, TimeTagFile};

fn main() -> muxent::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "muxent-out".into()));
    std::fs::create_dir_all(&dir)?;
    let preset = load_preset("cw_energy_time")?;
    let mut sc = preset.scenario.clone();
    sc.duration_s = 2.0;
    let out = simulate(&sc)?;

    let path = dir.join("timetags.bin");
    TimeTagFile::from_output(&out).write_to(std::io::BufWriter::new(std::fs::File::create(&path)?))?;
    let back = TimeTagFile::read_from(std::io::BufReader::new(std::fs::File::open(&path)?))?;
    back.write_csv(std::io::BufWriter::new(std::fs::File::create(dir.join("timetags.csv"))?))?;
    println!("{} tags, {} bytes, seed {}", back.records.len(), std::fs::metadata(&path)?.len(), back.seed);

    let c = count_coincidences(&back.stream(0), &back.stream(1), &preset.window())?;
    let e = car_from_counts(&c);
    println!("coincidences {}, accidentals per window {:.2}, CAR {:.1} +/- {:.1}", c.coincidences, c.accidental_mean().unwrap_or(0.0), e.value, e.error);
    Ok(())
}
