use muxent::channels::{channel_pair, ChannelGrid, ItuChannel, FIRST_CHANNEL, LAST_CHANNEL};
use muxent::reproduce::{REFERENCE_PUMP_NM, REFERENCE_WAVELENGTHS_NM};
use muxent::Error;
use proptest::prelude::*;

// ITU-T G.694.1: channel n of the 100 GHz C-band grid sits at 190.0 THz + n x 100 GHz.
fn itu_nm(n: u8) -> f64 {
    299_792_458.0 / ((1900.0 + n as f64) * 1e11) * 1e9
}

#[test]
fn wavelengths_match_grid_formula() {
    for n in FIRST_CHANNEL..=LAST_CHANNEL {
        let c = ItuChannel::new(n).unwrap();
        assert!((c.wavelength_nm() - itu_nm(n)).abs() < 1e-9, "C{n}");
    }
}

#[test]
fn pairs_match_reference_table() {
    let g = ChannelGrid::default();
    assert!((g.pump.wavelength_nm() - REFERENCE_PUMP_NM).abs() < 0.01);
    assert_eq!(REFERENCE_WAVELENGTHS_NM.len(), 14);
    for &(k, s, i) in &REFERENCE_WAVELENGTHS_NM {
        let p = channel_pair(k).unwrap();
        assert!((p.signal_wavelength_nm() - s).abs() < 0.01, "pair {k}");
        assert!((p.idler_wavelength_nm() - i).abs() < 0.01, "pair {k}");
        assert_eq!(p.signal.number() + p.idler.number(), 68);
    }
}

#[test]
fn out_of_range() {
    assert!(matches!(channel_pair(0), Err(Error::ChannelOutOfRange(0))));
    assert!(matches!(channel_pair(15), Err(Error::ChannelOutOfRange(15))));
    assert!(ItuChannel::new(LAST_CHANNEL + 1).is_err());
}

proptest! {
    #[test]
    fn energy_is_conserved_exactly(k in 1u8..=14) {
        let g = ChannelGrid::default();
        let p = g.pair(k).unwrap();
        prop_assert_eq!(p.energy_mismatch(g.pump), 0);
        prop_assert_eq!(p.signal.grid_units() + p.idler.grid_units(), 2 * g.pump.grid_units());
        prop_assert!((g.detuning_hz(k).unwrap() - (k as f64 + 1.0) * 100e9).abs() < 1.0);
    }
}
