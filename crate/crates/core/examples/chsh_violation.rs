//! CHSH test on the polarization-entangled source: 16 polarizer settings
//! measured in counts mode, correlators and S with Poisson errors.
//!
//!     cargo run --example chsh_violation [seed]

use muxent::analysis::{chsh, chsh_from_state, ChshAngles, CountsRecord16};
use muxent::config::load_preset;
use muxent::engine::{measure, Settings};
use muxent::photonics::sagnac_output_state;
use muxent::reproduce::sub_seed;

fn main() -> muxent::Result<()> {
    let mut preset = load_preset("polarization_cw")?;
    if let Some(seed) = std::env::args().nth(1).and_then(|s| s.parse().ok()) {
        preset.scenario.seed = seed;
    }
    let sc = &preset.scenario;
    let window = preset.window();
    let angles = ChshAngles::standard();
    let ideal = sagnac_output_state(sc.sagnac.as_ref().expect("polarization preset"))?;
    let signs = angles.signs_for(&ideal);
    println!("ideal-state S {:.4}", chsh_from_state(&ideal, &angles, signs));

    let settings = angles.settings();
    let mut rec = CountsRecord16::from_settings(&settings, sc.duration_s)?;
    for (k, (row, &(a, b))) in rec.rows.iter_mut().zip(&settings).enumerate() {
        let mut s = sc.with_settings(Settings { polarizer_signal: Some(a), polarizer_idler: Some(b), ..Default::default() });
        s.seed = sub_seed(sc.seed, k as u64);
        let c = measure(&s, &window, preset.analysis.mode)?;
        row.coincidences = c.coincidences;
        row.accidentals = c.accidental_mean();
    }
    print!("{}", rec.to_csv());
    let r = chsh(&rec, &angles, signs)?;
    for (k, (a, b)) in angles.pairs().iter().enumerate() {
        println!("E({a:>6.1}, {b:>6.1}) = {:+.4} +/- {:.4}", r.e[k], r.e_err[k]);
    }
    println!("S = {:.3} +/- {:.3}, {:.1} sigma above 2", r.s, r.s_err, r.violation_sigma);
    Ok(())
}
