//! 100-GHz ITU DWDM grid and the correlated signal/idler channel pairs.
//!
//! Channels are stored as integer ITU numbers, so every frequency identity is
//! an integer identity in units of the grid spacing. Channel `Cn` sits at
//! `190.0 THz + n * 100 GHz`; the grid anchor 193.1 THz is C31.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
pub const GRID_SPACING_HZ: f64 = 100e9;
pub const ANCHOR_HZ: f64 = 193.1e12;
const ANCHOR_CHANNEL: i64 = 31;

pub const FIRST_CHANNEL: u8 = 19;
pub const LAST_CHANNEL: u8 = 49;
pub const PUMP_CHANNEL: u8 = 34;
pub const PAIR_COUNT: u8 = 14;

/// Default DWDM passband used for brightness normalisation.
pub const DEFAULT_PASSBAND_NM: f64 = 0.8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ItuChannel(u8);

impl ItuChannel {
    pub fn new(number: u8) -> Result<Self> {
        if (FIRST_CHANNEL..=LAST_CHANNEL).contains(&number) {
            Ok(Self(number))
        } else {
            Err(Error::InvalidParameter(format!("ITU channel C{number} outside C{FIRST_CHANNEL}-C{LAST_CHANNEL}")))
        }
    }

    pub fn number(self) -> u8 {
        self.0
    }

    /// Signed offset from the 193.1 THz anchor in grid slots.
    pub fn grid_offset(self) -> i64 {
        self.0 as i64 - ANCHOR_CHANNEL
    }

    /// Center frequency in units of the grid spacing (100 GHz).
    pub fn grid_units(self) -> i64 {
        (ANCHOR_HZ / GRID_SPACING_HZ).round() as i64 + self.grid_offset()
    }

    pub fn frequency_hz(self) -> f64 {
        self.grid_units() as f64 * GRID_SPACING_HZ
    }

    pub fn wavelength_nm(self) -> f64 {
        SPEED_OF_LIGHT / self.frequency_hz() * 1e9
    }
}

impl fmt::Display for ItuChannel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "C{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelPair {
    pub index: u8,
    pub signal: ItuChannel,
    pub idler: ItuChannel,
}

impl ChannelPair {
    pub fn signal_wavelength_nm(&self) -> f64 {
        self.signal.wavelength_nm()
    }

    pub fn idler_wavelength_nm(&self) -> f64 {
        self.idler.wavelength_nm()
    }

    /// `nu_s + nu_i - 2 nu_p` in grid units; zero for every valid pair.
    pub fn energy_mismatch(&self, pump: ItuChannel) -> i64 {
        self.signal.grid_units() + self.idler.grid_units() - 2 * pump.grid_units()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelGrid {
    pub pump: ItuChannel,
    pub passband_nm: f64,
}

impl Default for ChannelGrid {
    fn default() -> Self {
        Self { pump: ItuChannel(PUMP_CHANNEL), passband_nm: DEFAULT_PASSBAND_NM }
    }
}

impl ChannelGrid {
    /// Pair `k`: signal `k + 1` slots below the pump, idler `k + 1` above.
    pub fn pair(&self, k: u8) -> Result<ChannelPair> {
        if !(1..=PAIR_COUNT).contains(&k) {
            return Err(Error::ChannelOutOfRange(k));
        }
        let p = self.pump.number();
        Ok(ChannelPair {
            index: k,
            signal: ItuChannel::new(p - k - 1)?,
            idler: ItuChannel::new(p + k + 1)?,
        })
    }

    pub fn pairs(&self) -> impl Iterator<Item = ChannelPair> + '_ {
        (1..=PAIR_COUNT).map(|k| self.pair(k).expect("pair index in range"))
    }

    /// Detuning of pair `k` from the pump, in grid slots.
    pub fn detuning_slots(&self, k: u8) -> Result<i64> {
        let pair = self.pair(k)?;
        Ok(self.pump.grid_units() - pair.signal.grid_units())
    }

    pub fn detuning_hz(&self, k: u8) -> Result<f64> {
        Ok(self.detuning_slots(k)? as f64 * GRID_SPACING_HZ)
    }

    /// Pair table in the column order pair, signal channel, idler channel,
    /// signal wavelength, idler wavelength; highest pair first, pump last.
    pub fn to_delimited(&self, sep: char) -> String {
        let mut out = format!("pair{sep}signal_channel{sep}idler_channel{sep}signal_nm{sep}idler_nm\n");
        for pair in self.pairs().collect::<Vec<_>>().iter().rev() {
            out.push_str(&format!(
                "{}{sep}{}{sep}{}{sep}{:.2}{sep}{:.2}\n",
                pair.index,
                pair.signal,
                pair.idler,
                pair.signal_wavelength_nm(),
                pair.idler_wavelength_nm()
            ));
        }
        out.push_str(&format!("pump{sep}{}{sep}{sep}{:.2}{sep}\n", self.pump, self.pump.wavelength_nm()));
        out
    }
}

/// Pair `k` on the default grid.
pub fn channel_pair(k: u8) -> Result<ChannelPair> {
    ChannelGrid::default().pair(k)
}

/// Frequency offset of pair `k` from the pump on the default grid, in Hz.
pub fn detuning(k: u8) -> Result<f64> {
    ChannelGrid::default().detuning_hz(k)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_channels() {
        let p = channel_pair(8).unwrap();
        assert_eq!((p.signal.number(), p.idler.number()), (25, 43));
        assert_eq!(channel_pair(1).unwrap().signal.to_string(), "C32");
        assert!(matches!(channel_pair(0), Err(Error::ChannelOutOfRange(0))));
        assert!(channel_pair(15).is_err());
    }

    #[test]
    fn anchor_is_c31() {
        assert_eq!(ItuChannel::new(31).unwrap().grid_offset(), 0);
        assert_eq!(ItuChannel::new(31).unwrap().frequency_hz(), ANCHOR_HZ);
        assert!(ItuChannel::new(50).is_err());
    }

    #[test]
    fn table_has_pump_row() {
        let t = ChannelGrid::default().to_delimited(',');
        assert_eq!(t.lines().count(), 16);
        assert!(t.lines().nth(1).unwrap().starts_with("14,C19,C49,1562.23,1538.19"));
        assert!(t.trim_end().ends_with("pump,C34,,1550.12,"));
    }
}
