//! Power-dependence fits: singles `a P^2 + b P + d` and the CAR model.

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SinglesFit {
    pub a: f64,
    pub b: f64,
    pub d: f64,
    /// Coefficients pinned at zero by the non-negativity constraint.
    pub constrained: Vec<String>,
    pub chi2: f64,
}

/// Non-negative weighted least squares on `a P^2 + b P + d`.
///
/// Exact: every subset of free coefficients is solved unconstrained and the
/// best feasible one is kept.
pub fn fit_singles_curve(points: &[(f64, f64)]) -> Result<SinglesFit> {
    if points.len() < 4 {
        return Err(Error::Fit(format!("need at least 4 points, got {}", points.len())));
    }
    let names = ["a", "b", "d"];
    let basis = |p: f64| [p * p, p, 1.0];
    let mut best: Option<(f64, [f64; 3], u8)> = None;
    for mask in 1u8..8 {
        let free: Vec<usize> = (0..3).filter(|k| mask & (1 << k) != 0).collect();
        let n = free.len();
        let mut ata = DMatrix::<f64>::zeros(n, n);
        let mut aty = DVector::<f64>::zeros(n);
        for &(p, y) in points {
            let w = 1.0 / y.abs().max(1.0);
            let row = basis(p);
            for (i, &fi) in free.iter().enumerate() {
                aty[i] += w * row[fi] * y;
                for (j, &fj) in free.iter().enumerate() {
                    ata[(i, j)] += w * row[fi] * row[fj];
                }
            }
        }
        let Some(sol) = ata.lu().solve(&aty) else { continue };
        let mut c = [0.0; 3];
        for (i, &fi) in free.iter().enumerate() {
            c[fi] = sol[i];
        }
        if c.iter().any(|v| *v < 0.0) {
            continue;
        }
        let chi2: f64 = points
            .iter()
            .map(|&(p, y)| {
                let r = basis(p);
                (y - (c[0] * r[0] + c[1] * r[1] + c[2] * r[2])).powi(2) / y.abs().max(1.0)
            })
            .sum();
        if best.as_ref().is_none_or(|b| chi2 < b.0 - 1e-12 * b.0.max(1.0)) {
            best = Some((chi2, c, mask));
        }
    }
    let (chi2, c, mask) = best.ok_or_else(|| Error::Fit("no feasible non-negative fit".into()))?;
    Ok(SinglesFit {
        a: c[0],
        b: c[1],
        d: c[2],
        constrained: (0..3).filter(|k| mask & (1 << k) == 0).map(|k| names[k].to_string()).collect(),
        chi2,
    })
}

/// Known inputs of the CAR-vs-power model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CarFitInputs {
    pub transmissions: [f64; 2],
    pub window_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CarFit {
    pub xi: f64,
    /// Raman coefficient shared by both arms.
    pub raman: f64,
    /// Product of the two dark rates, `d_s d_i`.
    pub dark_product: f64,
    pub peak_power_mw: f64,
    /// Data show no interior maximum.
    pub degenerate: bool,
    pub rms_log_residual: f64,
    pub converged: bool,
}

/// `CAR = 1 + xi P^2 T_s T_i / (S_s S_i tau)` with
/// `S_x = T_x (xi P^2 + raman P) + d`, `d^2` the dark product.
pub fn car_model(xi: f64, raman: f64, dark: f64, inputs: &CarFitInputs, p: f64) -> f64 {
    let [ts, ti] = inputs.transmissions;
    let pairs = xi * p * p;
    let ss = ts * (pairs + raman * p) + dark;
    let si = ti * (pairs + raman * p) + dark;
    1.0 + pairs * ts * ti / (ss * si * inputs.window_s)
}

fn log_residuals(q: &Vector3<f64>, points: &[(f64, f64)], inputs: &CarFitInputs) -> DVector<f64> {
    let (xi, raman, dark) = (q[0].exp(), q[1].exp(), q[2].exp());
    DVector::from_iterator(
        points.len(),
        points.iter().map(|&(p, car)| (car_model(xi, raman, dark, inputs, p) - 1.0).ln() - (car - 1.0).ln()),
    )
}

/// Levenberg-Marquardt on `ln(CAR - 1)` over log-parameters, started from
/// the best point of a coarse log grid.
pub fn fit_car_curve(points: &[(f64, f64)], inputs: &CarFitInputs) -> Result<CarFit> {
    if points.len() < 5 {
        return Err(Error::Fit(format!("need at least 5 points, got {}", points.len())));
    }
    if points.iter().any(|&(p, c)| !(p > 0.0 && c > 1.0)) {
        return Err(Error::Fit("powers must be > 0 and CAR > 1".into()));
    }
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let imax = (0..sorted.len()).max_by(|&a, &b| sorted[a].1.total_cmp(&sorted[b].1)).expect("non-empty");
    let degenerate = imax == 0 || imax == sorted.len() - 1;

    let cost = |q: &Vector3<f64>| log_residuals(q, &sorted, inputs).norm_squared();
    let grid = |lo: f64, hi: f64| (0..13).map(move |k| lo + (hi - lo) * k as f64 / 12.0);
    let mut q = Vector3::new(10f64.ln(), 10f64.ln(), 10f64.ln());
    let mut best = f64::INFINITY;
    for a in grid(0.0, 12.0) {
        for b in grid(0.0, 9.0) {
            for d in grid(0.0, 6.0) {
                let cand = Vector3::new(a, b, d) * std::f64::consts::LN_10;
                let c = cost(&cand);
                if c < best {
                    best = c;
                    q = cand;
                }
            }
        }
    }

    let mut lambda = 1e-3;
    let mut converged = false;
    for _ in 0..500 {
        let r = log_residuals(&q, &sorted, inputs);
        let mut jac = DMatrix::<f64>::zeros(sorted.len(), 3);
        for k in 0..3 {
            let mut qp = q;
            qp[k] += 1e-6;
            let rp = log_residuals(&qp, &sorted, inputs);
            jac.set_column(k, &((rp - &r) / 1e-6));
        }
        let jtj: Matrix3<f64> = (jac.transpose() * &jac).fixed_view::<3, 3>(0, 0).into();
        let jtr: Vector3<f64> = (jac.transpose() * &r).fixed_view::<3, 1>(0, 0).into();
        if jtr.norm() < 1e-12 {
            converged = true;
            break;
        }
        let mut improved = false;
        for _ in 0..30 {
            let a = jtj + Matrix3::from_diagonal(&jtj.diagonal()) * lambda + Matrix3::identity() * 1e-15;
            let Some(step) = a.lu().solve(&(-jtr)) else { break };
            let qn = q + step;
            if cost(&qn) < r.norm_squared() {
                let rel = step.norm();
                q = qn;
                lambda = (lambda * 0.3).max(1e-12);
                improved = true;
                if rel < 1e-10 {
                    converged = true;
                }
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            converged = jtr.norm() < 1e-6;
            break;
        }
        if converged {
            break;
        }
    }
    let (xi, raman, dark) = (q[0].exp(), q[1].exp(), q[2].exp());
    // Peak of the fitted curve on a fine log grid over the data range.
    let (lo, hi) = (sorted[0].0, sorted[sorted.len() - 1].0);
    let peak = (0..=2000)
        .map(|k| lo * (hi / lo).powf(k as f64 / 2000.0))
        .max_by(|a, b| car_model(xi, raman, dark, inputs, *a).total_cmp(&car_model(xi, raman, dark, inputs, *b)))
        .expect("non-empty");
    Ok(CarFit {
        xi,
        raman,
        dark_product: dark * dark,
        peak_power_mw: peak,
        degenerate,
        rms_log_residual: (cost(&q) / sorted.len() as f64).sqrt(),
        converged,
    })
}

/// Least-squares slope of `ln y` against `ln x` with its standard error.
pub fn log_log_slope(points: &[(f64, f64)]) -> Result<(f64, f64)> {
    if points.len() < 3 || points.iter().any(|&(x, y)| !(x > 0.0 && y > 0.0)) {
        return Err(Error::Fit("need at least 3 positive points".into()));
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let resid: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - my - slope * (x - mx)).powi(2)).sum();
    Ok((slope, (resid / (n - 2.0) / sxx).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pure_quadratic_pins_linear_terms() {
        let pts: Vec<_> = (1..=6).map(|k| (k as f64, 3.0 * (k * k) as f64)).collect();
        let f = fit_singles_curve(&pts).unwrap();
        assert!((f.a - 3.0).abs() < 1e-9);
        assert!(f.b.abs() < 1e-9 && f.d.abs() < 1e-9);
    }

    #[test]
    fn car_round_trip() {
        let inputs = CarFitInputs { transmissions: [0.0224, 0.0224], window_s: 0.8e-9 };
        let (xi, raman, dark) = (5.4e4, 7.5e5, 3000.0);
        let pts: Vec<_> = [0.2, 0.5, 1.0, 1.5, 2.5, 4.0, 6.0].iter().map(|&p| (p, car_model(xi, raman, dark, &inputs, p))).collect();
        let f = fit_car_curve(&pts, &inputs).unwrap();
        assert!(!f.degenerate);
        assert!((f.xi / xi - 1.0).abs() < 0.02, "{f:?}");
        assert!((f.raman / raman - 1.0).abs() < 0.02, "{f:?}");
        assert!((f.dark_product / (dark * dark) - 1.0).abs() < 0.02, "{f:?}");
    }

    #[test]
    fn slope_of_power_law() {
        let pts: Vec<_> = (1..6).map(|k| (k as f64, 2.0 * (k as f64).powf(-1.5))).collect();
        let (s, e) = log_log_slope(&pts).unwrap();
        assert!((s + 1.5).abs() < 1e-12 && e < 1e-9);
    }
}
