//! Prints the 14 multiplexed channel pairs around the C34 pump.
//!
//!     cargo run --example itu_grid

use muxent::channels::ChannelGrid;

fn main() -> muxent::Result<()> {
    let grid = ChannelGrid::default();
    println!("pump {} at {:.3} nm", grid.pump, grid.pump.wavelength_nm());
    println!("{:>4} {:>6} {:>10} {:>6} {:>10} {:>10}", "pair", "signal", "nm", "idler", "nm", "detune GHz");
    for p in grid.pairs() {
        println!(
            "{:>4} {:>6} {:>10.3} {:>6} {:>10.3} {:>10.0}",
            p.index,
            p.signal.to_string(),
            p.signal_wavelength_nm(),
            p.idler.to_string(),
            p.idler_wavelength_nm(),
            grid.detuning_hz(p.index)? * 1e-9
        );
        assert_eq!(p.energy_mismatch(grid.pump), 0);
    }
    print!("\n{}", grid.to_delimited(','));
    Ok(())
}
