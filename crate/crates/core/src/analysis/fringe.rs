//! Sinusoidal fringe fits `A (1 + V cos(w phi - phi0))`.
//!
//! Linear in `(c0, c1, c2)` for `c0 + c1 cos(w phi) + c2 sin(w phi)` at
//! known `w`; Poisson weights `1 / max(y, 1)`. The free-frequency variant
//! scans `w` and refines by golden section.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FringeFit {
    pub amplitude: f64,
    pub amplitude_err: f64,
    pub visibility_raw: f64,
    pub visibility_raw_err: f64,
    pub visibility_net: f64,
    pub visibility_net_err: f64,
    pub phase_offset: f64,
    pub phase_offset_err: f64,
    /// Angular frequency in the phase variable (1 for a `2 pi` period).
    pub frequency: f64,
    pub chi2: f64,
    pub dof: usize,
}

/// Accidental level per point with its 1-sigma error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct Background {
    pub level: f64,
    pub error: f64,
}

struct Linear {
    c: Vector3<f64>,
    cov: Matrix3<f64>,
    chi2: f64,
}

fn weight(y: f64) -> f64 {
    1.0 / y.max(1.0)
}

fn linear_fit(points: &[(f64, f64)], w: f64) -> Result<Linear> {
    let mut ata = Matrix3::zeros();
    let mut aty = Vector3::zeros();
    for &(phi, y) in points {
        let row = Vector3::new(1.0, (w * phi).cos(), (w * phi).sin());
        let wt = weight(y);
        ata += row * row.transpose() * wt;
        aty += row * (y * wt);
    }
    let cov = ata.try_inverse().ok_or_else(|| Error::Fit("fringe design matrix is singular".into()))?;
    let c = cov * aty;
    let chi2 = points
        .iter()
        .map(|&(phi, y)| {
            let m = c[0] + c[1] * (w * phi).cos() + c[2] * (w * phi).sin();
            (y - m).powi(2) * weight(y)
        })
        .sum();
    Ok(Linear { c, cov, chi2 })
}

fn check_points(points: &[(f64, f64)], w: f64) -> Result<()> {
    if points.len() < 5 {
        return Err(Error::Fit(format!("need at least 5 points, got {}", points.len())));
    }
    if points.iter().any(|p| !(p.0.is_finite() && p.1.is_finite() && p.1 >= 0.0)) {
        return Err(Error::Fit("phases must be finite and counts non-negative".into()));
    }
    let lo = points.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let hi = points.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    if (hi - lo) * w.abs() <= std::f64::consts::PI {
        return Err(Error::Fit("points span no more than half a period".into()));
    }
    Ok(())
}

fn summarize(lin: &Linear, w: f64, n: usize, bg: Background) -> Result<FringeFit> {
    let (c0, c1, c2) = (lin.c[0], lin.c[1], lin.c[2]);
    let m = (c1 * c1 + c2 * c2).sqrt();
    if c0 <= 0.0 {
        return Err(Error::Fit(format!("non-positive fringe mean {c0}; residual chi2 {}", lin.chi2)));
    }
    let var = |g: Vector3<f64>| (g.transpose() * lin.cov * g)[0].max(0.0);
    let dm = if m > 0.0 { Vector3::new(0.0, c1 / m, c2 / m) } else { Vector3::zeros() };
    let v_raw = m / c0;
    let g_raw = dm / c0 - Vector3::new(m / (c0 * c0), 0.0, 0.0);
    let net_mean = c0 - bg.level;
    if net_mean <= 0.0 {
        return Err(Error::Fit(format!("background {} exceeds fringe mean {c0}", bg.level)));
    }
    let v_net = m / net_mean;
    let g_net = dm / net_mean - Vector3::new(m / (net_mean * net_mean), 0.0, 0.0);
    let v_net_err = (var(g_net) + (m / (net_mean * net_mean) * bg.error).powi(2)).sqrt();
    let phase_err = if m > 0.0 { var(Vector3::new(0.0, -c2 / (m * m), c1 / (m * m))).sqrt() } else { f64::INFINITY };
    Ok(FringeFit {
        amplitude: c0,
        amplitude_err: lin.cov[(0, 0)].sqrt(),
        visibility_raw: v_raw,
        visibility_raw_err: var(g_raw).sqrt(),
        visibility_net: v_net,
        visibility_net_err: v_net_err,
        phase_offset: c2.atan2(c1),
        phase_offset_err: phase_err,
        frequency: w,
        chi2: lin.chi2,
        dof: n.saturating_sub(3),
    })
}

/// Fit at a known angular frequency `w` (1 for a `2 pi` period in `phi`).
pub fn fit_fringe_at(points: &[(f64, f64)], w: f64, background: Background) -> Result<FringeFit> {
    check_points(points, w)?;
    let lin = linear_fit(points, w)?;
    summarize(&lin, w, points.len(), background)
}

/// Fit with period `2 pi` in `phi`.
pub fn fit_fringe(points: &[(f64, f64)], background: Background) -> Result<FringeFit> {
    fit_fringe_at(points, 1.0, background)
}

/// Fit with the frequency free, searched in `[w_lo, w_hi]`.
pub fn fit_fringe_free(points: &[(f64, f64)], w_lo: f64, w_hi: f64, background: Background) -> Result<FringeFit> {
    if !(w_lo > 0.0 && w_hi > w_lo) {
        return Err(Error::Fit("invalid frequency search range".into()));
    }
    check_points(points, w_lo)?;
    let chi2 = |w: f64| linear_fit(points, w).map_or(f64::INFINITY, |l| l.chi2);
    let steps = 400;
    let dw = (w_hi - w_lo) / steps as f64;
    let best = (0..=steps)
        .map(|k| w_lo + k as f64 * dw)
        .min_by(|a, b| chi2(*a).total_cmp(&chi2(*b)))
        .expect("non-empty grid");
    let (mut a, mut b) = ((best - dw).max(w_lo), (best + dw).min(w_hi));
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..100 {
        let x1 = b - g * (b - a);
        let x2 = a + g * (b - a);
        if chi2(x1) < chi2(x2) {
            b = x2;
        } else {
            a = x1;
        }
    }
    let w = 0.5 * (a + b);
    let lin = linear_fit(points, w)?;
    summarize(&lin, w, points.len(), background)
}
