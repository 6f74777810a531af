//! Coincidence counting on sorted timestamp streams.
//!
//! Delays are `t_idler - t_signal`. A window with offset `o` and width `w`
//! accepts delays in the half-open interval `[o - w/2, o + w/2)`, so adjacent
//! windows never double-count.

use serde::{Deserialize, Serialize};

use crate::engine::scenario::Scenario;
use crate::{Error, Result};

/// Default spacing of accidental-estimation windows for CW runs, ps.
pub const CW_ACCIDENTAL_SPACING_PS: i64 = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowSpec {
    pub width_ps: u64,
    pub offset_ps: i64,
    /// Offsets of the windows used to estimate accidentals.
    pub accidental_offsets_ps: Vec<i64>,
}

impl WindowSpec {
    pub fn new(width_ps: u64) -> Self {
        Self { width_ps, offset_ps: 0, accidental_offsets_ps: Vec::new() }
    }

    /// Window of width `width_ps` with `2 n` accidental windows at multiples
    /// of the pulse period (pulsed) or of 10 ns (CW), on both sides.
    pub fn for_scenario(sc: &Scenario, width_ps: u64, n: u32) -> Self {
        let spacing = sc.pulse_period_ps().map_or(CW_ACCIDENTAL_SPACING_PS, |p| p as i64);
        let offsets = (1..=n as i64).flat_map(|k| [-k * spacing, k * spacing]).collect();
        Self { width_ps, offset_ps: 0, accidental_offsets_ps: offsets }
    }

    pub fn width_s(&self) -> f64 {
        self.width_ps as f64 * 1e-12
    }

    /// Half-open delay interval `[lo, hi)` for a window centered at `offset`.
    pub fn bounds(&self, offset: i64) -> (i64, i64) {
        let lo = offset - (self.width_ps / 2) as i64;
        (lo, lo + self.width_ps as i64)
    }

    pub fn validate(&self) -> Result<()> {
        if self.width_ps == 0 {
            return Err(Error::InvalidParameter("coincidence window width must be > 0".into()));
        }
        Ok(())
    }
}

/// Fails unless timestamps are strictly increasing.
pub fn check_sorted(ts: &[u64]) -> Result<()> {
    match ts.windows(2).position(|w| w[0] >= w[1]) {
        Some(i) => Err(Error::Unsorted(i as u32 + 1)),
        None => Ok(()),
    }
}

/// Number of pairs with `t_b - t_a` in `[lo, hi)`. Two-pointer scan,
/// linear in the stream lengths.
pub fn count_in_window(a: &[u64], b: &[u64], lo: i64, hi: i64) -> u64 {
    let (mut i_lo, mut i_hi) = (0usize, 0usize);
    let mut n = 0u64;
    for &ta in a {
        let ta = ta as i64;
        while i_lo < b.len() && (b[i_lo] as i64) < ta + lo {
            i_lo += 1;
        }
        if i_hi < i_lo {
            i_hi = i_lo;
        }
        while i_hi < b.len() && (b[i_hi] as i64) < ta + hi {
            i_hi += 1;
        }
        n += (i_hi - i_lo) as u64;
    }
    n
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoincidenceCounts {
    pub window: WindowSpec,
    pub coincidences: u64,
    /// One count per accidental window.
    pub accidentals: Vec<u64>,
}

impl CoincidenceCounts {
    /// Mean accidental count per window, if any accidental window was set.
    pub fn accidental_mean(&self) -> Option<f64> {
        if self.accidentals.is_empty() {
            None
        } else {
            Some(self.accidentals.iter().sum::<u64>() as f64 / self.accidentals.len() as f64)
        }
    }
}

pub fn count_coincidences(a: &[u64], b: &[u64], window: &WindowSpec) -> Result<CoincidenceCounts> {
    window.validate()?;
    check_sorted(a)?;
    check_sorted(b)?;
    let count = |o: i64| {
        let (lo, hi) = window.bounds(o);
        count_in_window(a, b, lo, hi)
    };
    Ok(CoincidenceCounts {
        window: window.clone(),
        coincidences: count(window.offset_ps),
        accidentals: window.accidental_offsets_ps.iter().map(|&o| count(o)).collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramSpec {
    pub bin_width_ps: u64,
    /// Histogram covers at least `[-half_range, half_range)`.
    pub half_range_ps: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DelayHistogram {
    pub start_ps: i64,
    pub bin_width_ps: u64,
    pub counts: Vec<u64>,
}

impl DelayHistogram {
    pub fn bin_centers_ps(&self) -> Vec<f64> {
        (0..self.counts.len()).map(|k| self.start_ps as f64 + (k as f64 + 0.5) * self.bin_width_ps as f64).collect()
    }

    /// Sum over the bins covering `[lo, hi)`; both ends must sit on bin edges.
    pub fn sum_range(&self, lo: i64, hi: i64) -> Result<u64> {
        let w = self.bin_width_ps as i64;
        if (lo - self.start_ps).rem_euclid(w) != 0 || (hi - self.start_ps).rem_euclid(w) != 0 {
            return Err(Error::InvalidParameter("range not aligned to histogram bins".into()));
        }
        let a = ((lo - self.start_ps) / w).max(0) as usize;
        let b = (((hi - self.start_ps) / w).max(0) as usize).min(self.counts.len());
        Ok(self.counts[a.min(b)..b].iter().sum())
    }
}

/// Histogram of `t_b - t_a`. Bin edges are aligned to the edges of the
/// central coincidence window so window totals equal sums of whole bins.
pub fn delay_histogram(a: &[u64], b: &[u64], spec: &HistogramSpec, window: &WindowSpec) -> Result<DelayHistogram> {
    window.validate()?;
    check_sorted(a)?;
    check_sorted(b)?;
    let bw = spec.bin_width_ps as i64;
    if bw <= 0 || window.width_ps as i64 % bw != 0 {
        return Err(Error::InvalidParameter("window width must be a whole number of histogram bins".into()));
    }
    let (lo, _) = window.bounds(window.offset_ps);
    let before = (lo + spec.half_range_ps).div_euclid(bw) + 1;
    let start = lo - before * bw;
    let nbins = ((spec.half_range_ps - start) as u64).div_ceil(bw as u64) as usize;
    let end = start + nbins as i64 * bw;
    let mut counts = vec![0u64; nbins];
    let mut first = 0usize;
    for &ta in a {
        let ta = ta as i64;
        while first < b.len() && (b[first] as i64) < ta + start {
            first += 1;
        }
        for &tb in &b[first..] {
            let d = tb as i64 - ta;
            if d >= end {
                break;
            }
            counts[((d - start) / bw) as usize] += 1;
        }
    }
    Ok(DelayHistogram { start_ps: start, bin_width_ps: bw as u64, counts })
}
