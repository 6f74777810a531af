//! Two-qubit state tomography from 16 product-projector settings.
//!
//! Linear inversion expands the state in the Pauli basis and solves the
//! 16 x 16 design system. Maximum likelihood parameterizes
//! `rho = T^dag T / Tr` with `T` lower triangular (real diagonal, 16 real
//! parameters) and minimizes the Poisson negative log-likelihood with BFGS
//! and an analytic gradient.

use nalgebra::{DMatrix, DVector, SMatrix, SVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::record::CountsRecord16;
use crate::engine::AnalyzerSetting;
use crate::qstate::{fidelity, hermitian_eigen, kron, paulis, DensityMatrix, Mat4, RawMatrix, C64};
use crate::{Error, Result};

/// Standard 16 settings built from H, V, D, R analyzers (signal, idler).
pub fn standard_settings() -> Vec<(AnalyzerSetting, AnalyzerSetting)> {
    use AnalyzerSetting::{D, H, R, V};
    vec![
        (H, H), (H, V), (V, V), (V, H),
        (R, H), (R, V), (D, V), (D, H),
        (D, R), (D, D), (R, D), (H, D),
        (V, D), (V, AnalyzerSetting::L), (H, AnalyzerSetting::L), (R, AnalyzerSetting::L),
    ]
}

/// Condition-number ceiling for the linear design matrix.
const MAX_CONDITION: f64 = 1e10;

/// Product projectors of the record's settings, in row order.
pub fn projectors(c: &CountsRecord16) -> Vec<Mat4> {
    c.rows.iter().map(|r| *r.projector().matrix()).collect()
}

fn pauli_basis() -> Vec<Mat4> {
    let p = paulis();
    (0..16).map(|k| kron(&p[k / 4], &p[k % 4])).collect()
}

/// Linear inversion of raw counts; the result may be non-physical.
pub fn linear_tomography(c: &CountsRecord16) -> Result<RawMatrix> {
    let values: Vec<f64> = c.rows.iter().map(|r| r.coincidences as f64).collect();
    linear_inversion(&projectors(c), &values)
}

/// Linear inversion on arbitrary non-negative weights per projector.
pub fn linear_inversion(projectors: &[Mat4], values: &[f64]) -> Result<RawMatrix> {
    if projectors.len() != 16 || values.len() != 16 {
        return Err(Error::MissingSetting(format!("need 16 settings, got {}", projectors.len())));
    }
    let basis = pauli_basis();
    let b = DMatrix::from_fn(16, 16, |nu, mu| (projectors[nu] * basis[mu]).trace().re);
    let sv = b.clone().svd(false, false).singular_values;
    let (smax, smin) = (sv.max(), sv.min());
    if smin <= smax / MAX_CONDITION {
        return Err(Error::SingularDesign(if smin > 0.0 { smax / smin } else { f64::INFINITY }));
    }
    let x = b.lu().solve(&DVector::from_column_slice(values)).ok_or(Error::SingularDesign(f64::INFINITY))?;
    if x[0] <= 0.0 {
        return Err(Error::Fit("counts carry no normalisation (zero total)".into()));
    }
    let mut m = Mat4::zeros();
    for (mu, g) in basis.iter().enumerate() {
        m += g * C64::new(x[mu] / (4.0 * x[0]), 0.0);
    }
    Ok(RawMatrix::new(m))
}

const OFF_DIAGONAL: [(usize, usize); 6] = [(1, 0), (2, 0), (2, 1), (3, 0), (3, 1), (3, 2)];

pub type Params = SVector<f64, 16>;

/// Lower-triangular `T` from its 16 real parameters.
pub fn t_matrix(x: &Params) -> Mat4 {
    let mut t = Mat4::zeros();
    for k in 0..4 {
        t[(k, k)] = C64::new(x[k], 0.0);
    }
    for (m, &(r, c)) in OFF_DIAGONAL.iter().enumerate() {
        t[(r, c)] = C64::new(x[4 + 2 * m], x[5 + 2 * m]);
    }
    t
}

fn params_from_t(t: &Mat4) -> Params {
    let mut x = Params::zeros();
    for k in 0..4 {
        x[k] = t[(k, k)].re;
    }
    for (m, &(r, c)) in OFF_DIAGONAL.iter().enumerate() {
        x[4 + 2 * m] = t[(r, c)].re;
        x[5 + 2 * m] = t[(r, c)].im;
    }
    x
}

/// Poisson negative log-likelihood per total count and its gradient.
///
/// `f = sum(lambda - p ln lambda)` with `lambda = Tr(T^dag T P)` and
/// `p = n / sum(n)`. The gradient is `2 Re` / `-2 Im` of
/// `(M T^dag)_{c r}` with `M = sum (1 - p / lambda) P`.
pub fn objective(x: &Params, projectors: &[Mat4], p: &[f64]) -> (f64, Params) {
    let t = t_matrix(x);
    let g = t.adjoint() * t;
    let mut f = 0.0;
    let mut m = Mat4::zeros();
    for (proj, &pk) in projectors.iter().zip(p) {
        let lambda = (g * proj).trace().re;
        if lambda <= 0.0 {
            if pk > 0.0 {
                return (f64::INFINITY, Params::zeros());
            }
            continue;
        }
        f += lambda - if pk > 0.0 { pk * lambda.ln() } else { 0.0 };
        m += proj * C64::new(1.0 - pk / lambda, 0.0);
    }
    let k = m * t.adjoint();
    let mut grad = Params::zeros();
    for d in 0..4 {
        grad[d] = 2.0 * k[(d, d)].re;
    }
    for (j, &(r, c)) in OFF_DIAGONAL.iter().enumerate() {
        grad[4 + 2 * j] = 2.0 * k[(c, r)].re;
        grad[5 + 2 * j] = -2.0 * k[(c, r)].im;
    }
    (f, grad)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MleOptions {
    pub gradient_tolerance: f64,
    pub max_iterations: usize,
}

impl Default for MleOptions {
    fn default() -> Self {
        Self { gradient_tolerance: 1e-8, max_iterations: 10_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MleResult {
    pub rho: DensityMatrix,
    /// Gradient norm below tolerance, or the objective stationary to
    /// machine precision over 100 iterations with a small gradient.
    pub converged: bool,
    pub iterations: usize,
    pub gradient_norm: f64,
    pub objective: f64,
    /// Fitted expected counts per setting.
    pub expected_counts: Vec<f64>,
}

/// Starting point: linear estimate with negative eigenvalues clamped,
/// mixed with a little white noise, factored as `T^dag T` via Cholesky of
/// the index-reversed matrix.
fn seed_params(c: &CountsRecord16, projectors: &[Mat4], p: &[f64]) -> Params {
    let clamped = match linear_tomography(c) {
        Ok(raw) => {
            let (vals, vecs) = hermitian_eigen(raw.matrix());
            let d = Mat4::from_diagonal(&nalgebra::Vector4::from_iterator(vals.iter().map(|&v| C64::new(v.max(0.0), 0.0))));
            let m = vecs * d * vecs.adjoint();
            let tr = m.trace().re;
            if tr > 0.0 {
                m / C64::new(tr, 0.0)
            } else {
                Mat4::identity() * C64::new(0.25, 0.0)
            }
        }
        Err(_) => Mat4::identity() * C64::new(0.25, 0.0),
    };
    let eps = 1e-3;
    let rho0 = clamped * C64::new(1.0 - eps, 0.0) + Mat4::identity() * C64::new(eps / 4.0, 0.0);
    let scale: f64 = projectors.iter().map(|pr| (rho0 * pr).trace().re).sum::<f64>();
    let target: f64 = p.iter().sum();
    let g0 = rho0 * C64::new(target / scale, 0.0);
    let j = Mat4::from_fn(|r, c| if r + c == 3 { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) });
    match (j * g0 * j).cholesky() {
        Some(ch) => params_from_t(&(j * ch.l().adjoint() * j)),
        None => {
            let mut x = Params::zeros();
            for k in 0..4 {
                x[k] = (target / scale / 4.0).sqrt();
            }
            x
        }
    }
}

const STALL_WINDOW: usize = 100;
const STALL_RELATIVE: f64 = 1e-14;
const STALL_GRADIENT: f64 = 1e-6;

fn bfgs(x0: Params, projectors: &[Mat4], p: &[f64], opts: &MleOptions) -> (Params, f64, Params, usize, bool) {
    let mut x = x0;
    let (mut f, mut g) = objective(&x, projectors, p);
    let mut h = SMatrix::<f64, 16, 16>::identity();
    let mut resets = 0;
    let mut f_checkpoint = f;
    for it in 0..opts.max_iterations {
        if g.norm() < opts.gradient_tolerance {
            return (x, f, g, it, true);
        }
        // Rank-deficient optima are approached sublinearly in T; accept a
        // point whose objective has stopped moving at machine precision.
        if it > 0 && it % STALL_WINDOW == 0 {
            if f_checkpoint - f <= STALL_RELATIVE * f.abs().max(1.0) && g.norm() < STALL_GRADIENT {
                return (x, f, g, it, true);
            }
            f_checkpoint = f;
        }
        let mut dir = -(h * g);
        if dir.dot(&g) >= 0.0 {
            h = SMatrix::identity();
            dir = -g;
        }
        let slope = dir.dot(&g);
        let mut alpha = 1.0;
        let mut accepted = None;
        while alpha > 1e-20 {
            let xn = x + dir * alpha;
            let (fn_, gn) = objective(&xn, projectors, p);
            if fn_.is_finite() && fn_ <= f + 1e-4 * alpha * slope {
                accepted = Some((xn, fn_, gn));
                break;
            }
            alpha *= 0.5;
        }
        let Some((xn, fn_, gn)) = accepted else {
            if resets < 3 {
                resets += 1;
                h = SMatrix::identity();
                continue;
            }
            return (x, f, g, it, false);
        };
        let s = xn - x;
        let y = gn - g;
        let sy = s.dot(&y);
        if sy > 1e-16 {
            let rho = 1.0 / sy;
            let i = SMatrix::<f64, 16, 16>::identity();
            h = (i - s * y.transpose() * rho) * h * (i - y * s.transpose() * rho) + s * s.transpose() * rho;
        }
        x = xn;
        f = fn_;
        g = gn;
    }
    let ok = g.norm() < opts.gradient_tolerance;
    (x, f, g, opts.max_iterations, ok)
}

pub fn mle_tomography(c: &CountsRecord16) -> Result<MleResult> {
    mle_tomography_with(c, &MleOptions::default())
}

pub fn mle_tomography_with(c: &CountsRecord16, opts: &MleOptions) -> Result<MleResult> {
    if c.rows.len() != 16 {
        return Err(Error::MissingSetting(format!("need 16 settings, got {}", c.rows.len())));
    }
    let total = c.total() as f64;
    if total == 0.0 {
        return Err(Error::Fit("no counts".into()));
    }
    let projectors = projectors(c);
    let p: Vec<f64> = c.rows.iter().map(|r| r.coincidences as f64 / total).collect();
    let x0 = seed_params(c, &projectors, &p);
    let (x, f, g, iterations, converged) = bfgs(x0, &projectors, &p, opts);
    let t = t_matrix(&x);
    let gm = t.adjoint() * t;
    let tr = gm.trace().re;
    let rho = DensityMatrix::new(gm / C64::new(tr, 0.0))?;
    let expected_counts = projectors.iter().map(|pr| total * (gm * pr).trace().re).collect();
    Ok(MleResult { rho, converged, iterations, gradient_norm: g.norm(), objective: f, expected_counts })
}

/// Counts record for `rho` with Poisson means scaled so the average
/// setting expects `mean_per_setting` counts.
pub fn expected_counts(record: &CountsRecord16, rho: &DensityMatrix, mean_per_setting: f64) -> Vec<f64> {
    let probs = record.probabilities(rho);
    let avg = probs.iter().sum::<f64>() / probs.len() as f64;
    probs.iter().map(|p| mean_per_setting * p / avg).collect()
}

pub fn poisson_counts(means: &[f64], rng: &mut ChaCha8Rng) -> Vec<u64> {
    means
        .iter()
        .map(|&m| if m > 0.0 { Poisson::new(m).expect("finite mean").sample(rng) as u64 } else { 0 })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FidelityEstimate {
    /// Fidelity of the MLE state fitted to the measured counts.
    pub point: f64,
    pub mean: f64,
    pub std: f64,
    pub resamples: usize,
    pub all_converged: bool,
}

/// Parametric bootstrap: Poisson-resample the MLE-fitted counts, refit,
/// and report mean and spread of the fidelity with `target`.
pub fn fidelity_with_error(c: &CountsRecord16, target: &DensityMatrix, resamples: usize, seed: u64) -> Result<FidelityEstimate> {
    if resamples < 100 {
        return Err(Error::InvalidParameter(format!("need at least 100 resamples, got {resamples}")));
    }
    let fit = mle_tomography(c)?;
    let point = fidelity(&fit.rho, target)?;
    let runs: Vec<(f64, bool)> = (0..resamples as u64)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k);
            let counts = poisson_counts(&fit.expected_counts, &mut rng);
            let r = mle_tomography(&c.with_counts(&counts))?;
            Ok((fidelity(&r.rho, target)?, r.converged))
        })
        .collect::<Result<_>>()?;
    let n = runs.len() as f64;
    let mean = runs.iter().map(|r| r.0).sum::<f64>() / n;
    let var = runs.iter().map(|r| (r.0 - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(FidelityEstimate { point, mean, std: var.sqrt(), resamples, all_converged: fit.converged && runs.iter().all(|r| r.1) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::{bell_state, fidelity_pure, BellKind};

    fn record() -> CountsRecord16 {
        CountsRecord16::from_settings(&standard_settings(), 1.0).unwrap()
    }

    #[test]
    fn settings_are_informationally_complete() {
        let rec = record();
        let probs = rec.probabilities(&DensityMatrix::maximally_mixed());
        let raw = linear_inversion(&projectors(&rec), &probs).unwrap();
        assert!((raw.matrix() - DensityMatrix::maximally_mixed().matrix()).norm() < 1e-9);
    }

    #[test]
    fn t_round_trip() {
        let x = Params::from_fn(|k, _| 0.1 * k as f64 - 0.4);
        assert_eq!(params_from_t(&t_matrix(&x)), x);
    }

    #[test]
    fn mle_on_exact_bell_counts() {
        let rec = record();
        let phi = bell_state(BellKind::PhiPlus, 0.0);
        let counts: Vec<u64> = expected_counts(&rec, &phi.density(), 1e6).iter().map(|m| m.round() as u64).collect();
        let r = mle_tomography(&rec.with_counts(&counts)).unwrap();
        assert!(fidelity_pure(&r.rho, &phi) > 0.9999, "{}", fidelity_pure(&r.rho, &phi));
    }
}
