//! Two-qubit state algebra.
//!
//! Basis order is fixed as `(00, 01, 10, 11)`. For polarization `H -> 0`,
//! `V -> 1`; for time bins `S -> 0` (short), `L -> 1` (long). Every matrix in
//! this module uses that ordering.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use nalgebra::{Matrix2, Matrix4, Vector4};
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::{Error, Result};

pub type C64 = Complex64;
pub type Mat4 = Matrix4<C64>;

/// Numerical tolerances shared by every state check.
pub mod tol {
    /// Eigenvalue floor for physical states.
    pub const PHYSICAL: f64 = 1e-9;
    /// Hermiticity, trace and idempotence identities.
    pub const ALGEBRAIC: f64 = 1e-10;
    /// Ket normalisation.
    pub const NORM: f64 = 1e-12;
}

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// A pure single-qubit state, used as the analyzer setting of one arm
/// (a polarizer orientation, a wave-plate projection, or an interferometer
/// phase).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitState {
    amp: [C64; 2],
}

impl QubitState {
    pub fn new(a0: C64, a1: C64) -> Result<Self> {
        let n = (a0.norm_sqr() + a1.norm_sqr()).sqrt();
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::InvalidParameter("qubit state has zero norm".into()));
        }
        Ok(Self { amp: [a0 / n, a1 / n] })
    }

    /// Linear polarizer transmitting `cos(theta)|H> + sin(theta)|V>`.
    pub fn linear(theta: f64) -> Self {
        Self { amp: [ONE * theta.cos(), ONE * theta.sin()] }
    }

    /// Linear polarizer at an angle given in degrees.
    pub fn linear_deg(theta_deg: f64) -> Self {
        Self::linear(theta_deg.to_radians())
    }

    /// `(|0> + e^{i phi}|1>)/sqrt 2`, the port projection of an unbalanced
    /// interferometer with relative phase `phi`.
    pub fn equator(phi: f64) -> Self {
        Self { amp: [ONE * FRAC_1_SQRT_2, C64::from_polar(FRAC_1_SQRT_2, phi)] }
    }

    pub fn h() -> Self {
        Self { amp: [ONE, ZERO] }
    }
    pub fn v() -> Self {
        Self { amp: [ZERO, ONE] }
    }
    pub fn d() -> Self {
        Self::equator(0.0)
    }
    pub fn a() -> Self {
        Self::equator(std::f64::consts::PI)
    }
    pub fn r() -> Self {
        Self::equator(std::f64::consts::FRAC_PI_2)
    }
    pub fn l() -> Self {
        Self::equator(-std::f64::consts::FRAC_PI_2)
    }

    pub fn amplitudes(&self) -> [C64; 2] {
        self.amp
    }

    /// Orthogonal state (the other output port of a polarizing splitter).
    pub fn orthogonal(&self) -> Self {
        Self { amp: [-self.amp[1].conj(), self.amp[0].conj()] }
    }

    pub fn projector(&self) -> Matrix2<C64> {
        let v = nalgebra::Vector2::new(self.amp[0], self.amp[1]);
        v * v.adjoint()
    }
}

/// Normalised two-qubit ket.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ket2Q {
    amp: [C64; 4],
}

impl Ket2Q {
    /// Normalises the given amplitudes.
    pub fn new(amplitudes: [C64; 4]) -> Result<Self> {
        let n = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::InvalidParameter("ket has zero norm".into()));
        }
        Ok(Self { amp: amplitudes.map(|a| a / n) })
    }

    pub fn product(a: &QubitState, b: &QubitState) -> Self {
        let [a0, a1] = a.amp;
        let [b0, b1] = b.amp;
        Self { amp: [a0 * b0, a0 * b1, a1 * b0, a1 * b1] }
    }

    pub fn amplitudes(&self) -> [C64; 4] {
        self.amp
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amp.iter().map(|a| a.norm_sqr()).sum()
    }

    fn vector(&self) -> Vector4<C64> {
        Vector4::from_column_slice(&self.amp)
    }

    pub fn outer(&self) -> Mat4 {
        let v = self.vector();
        v * v.adjoint()
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix { m: self.outer() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BellKind {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

/// `(|00> ± e^{i phase}|11>)/sqrt 2` or `(|01> ± e^{i phase}|10>)/sqrt 2`.
pub fn bell_state(kind: BellKind, extra_phase: f64) -> Ket2Q {
    let s = ONE * FRAC_1_SQRT_2;
    let p = C64::from_polar(FRAC_1_SQRT_2, extra_phase);
    let amp = match kind {
        BellKind::PhiPlus => [s, ZERO, ZERO, p],
        BellKind::PhiMinus => [s, ZERO, ZERO, -p],
        BellKind::PsiPlus => [ZERO, s, p, ZERO],
        BellKind::PsiMinus => [ZERO, s, -p, ZERO],
    };
    Ket2Q { amp }
}

/// Pure state `(|00> + eta e^{i delta}|11>)/sqrt(1 + eta^2)`.
pub fn general_pair_state(eta: f64, delta: f64) -> Result<DensityMatrix> {
    if !eta.is_finite() || eta < 0.0 {
        return Err(Error::InvalidParameter(format!("amplitude ratio must be finite and >= 0, got {eta}")));
    }
    let ket = Ket2Q::new([ONE, ZERO, ZERO, C64::from_polar(eta, delta)])?;
    Ok(ket.density())
}

/// Which physicality check a matrix failed.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NotHermitian { max_deviation: f64 },
    Trace { trace: C64 },
    NegativeEigenvalue { min: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NotHermitian { max_deviation } => write!(f, "not Hermitian (max |m - m^dag| = {max_deviation:.3e})"),
            Violation::Trace { trace } => write!(f, "trace {trace} != 1"),
            Violation::NegativeEigenvalue { min } => write!(f, "negative eigenvalue {min:.3e}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalityReport {
    pub min_eigenvalue: f64,
    pub trace: C64,
    pub violations: Vec<Violation>,
}

impl PhysicalityReport {
    pub fn is_physical(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Unconstrained 4x4 complex matrix, e.g. the output of linear inversion.
#[derive(Debug, Clone, PartialEq)]
pub struct RawMatrix {
    m: Mat4,
}

impl RawMatrix {
    pub fn new(m: Mat4) -> Self {
        Self { m }
    }

    pub fn from_real_diagonal(d: [f64; 4]) -> Self {
        Self { m: Mat4::from_diagonal(&Vector4::from_iterator(d.iter().map(|&x| ONE * x))) }
    }

    pub fn matrix(&self) -> &Mat4 {
        &self.m
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { m: self.m * C64::new(s, 0.0) }
    }

    pub fn eigenvalues(&self) -> [f64; 4] {
        hermitian_eigen(&self.m).0
    }

    pub fn check(&self) -> PhysicalityReport {
        is_physical(self)
    }
}

/// Checks Hermiticity (1e-10), unit trace (1e-10) and eigenvalues >= -1e-9.
pub fn is_physical(m: &RawMatrix) -> PhysicalityReport {
    let mut violations = Vec::new();
    let herm_dev = (m.m - m.m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if herm_dev > tol::ALGEBRAIC {
        violations.push(Violation::NotHermitian { max_deviation: herm_dev });
    }
    let trace = m.m.trace();
    if (trace - ONE).norm() > tol::ALGEBRAIC {
        violations.push(Violation::Trace { trace });
    }
    let min = m.eigenvalues()[0];
    if min < -tol::PHYSICAL {
        violations.push(Violation::NegativeEigenvalue { min });
    }
    PhysicalityReport { min_eigenvalue: min, trace, violations }
}

/// A physical two-qubit density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    m: Mat4,
}

impl TryFrom<RawMatrix> for DensityMatrix {
    type Error = Error;

    fn try_from(raw: RawMatrix) -> Result<Self> {
        let report = is_physical(&raw);
        if !report.is_physical() {
            let msg = report.violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ");
            return Err(Error::NotPhysical(msg));
        }
        // Remove the sub-tolerance anti-Hermitian part.
        Ok(Self { m: (raw.m + raw.m.adjoint()) * (ONE * 0.5) })
    }
}

impl DensityMatrix {
    pub fn new(m: Mat4) -> Result<Self> {
        RawMatrix::new(m).try_into()
    }

    pub fn maximally_mixed() -> Self {
        Self { m: Mat4::identity() * (ONE * 0.25) }
    }

    /// `p |psi><psi| + (1 - p) I/4`.
    pub fn werner(p: f64, ket: &Ket2Q) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter(format!("Werner weight {p} outside [0, 1]")));
        }
        Ok(Self { m: ket.outer() * (ONE * p) + Mat4::identity() * (ONE * ((1.0 - p) / 4.0)) })
    }

    pub fn product(a: &QubitState, b: &QubitState) -> Self {
        Ket2Q::product(a, b).density()
    }

    /// Convex combination `w * self + (1 - w) * other`.
    pub fn mix(&self, other: &DensityMatrix, w: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&w) {
            return Err(Error::InvalidParameter(format!("mixing weight {w} outside [0, 1]")));
        }
        Ok(Self { m: self.m * (ONE * w) + other.m * (ONE * (1.0 - w)) })
    }

    /// Scales the coherences between the `|00>` and `|11>` populations by
    /// `visibility`, leaving populations untouched. Stays physical for
    /// states supported on `span{|00>, |11>}`.
    pub fn dephase_00_11(&self, visibility: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&visibility) {
            return Err(Error::InvalidParameter(format!("visibility {visibility} outside [0, 1]")));
        }
        let mut m = self.m;
        m[(0, 3)] *= visibility;
        m[(3, 0)] *= visibility;
        Ok(Self { m })
    }

    pub fn matrix(&self) -> &Mat4 {
        &self.m
    }

    pub fn to_raw(&self) -> RawMatrix {
        RawMatrix { m: self.m }
    }

    pub fn purity(&self) -> f64 {
        (self.m * self.m).trace().re
    }

    pub fn eigenvalues(&self) -> [f64; 4] {
        hermitian_eigen(&self.m).0
    }

    /// Reduced state of the first (signal) or second (idler) qubit.
    pub fn reduced(&self, first: bool) -> Matrix2<C64> {
        let mut r = Matrix2::zeros();
        for a in 0..2 {
            for b in 0..2 {
                for k in 0..2 {
                    r[(a, b)] += if first { self.m[(2 * a + k, 2 * b + k)] } else { self.m[(2 * k + a, 2 * k + b)] };
                }
            }
        }
        r
    }

    /// Serialises as 16 `(re, im)` pairs, row-major.
    pub fn to_pairs(&self) -> Vec<[f64; 2]> {
        matrix_pairs(&self.m)
    }
}

fn matrix_pairs(m: &Mat4) -> Vec<[f64; 2]> {
    (0..4).flat_map(|r| (0..4).map(move |c| (r, c))).map(|(r, c)| [m[(r, c)].re, m[(r, c)].im]).collect()
}

fn matrix_from_pairs(pairs: &[[f64; 2]]) -> Option<Mat4> {
    if pairs.len() != 16 {
        return None;
    }
    Some(Mat4::from_fn(|r, c| {
        let [re, im] = pairs[4 * r + c];
        C64::new(re, im)
    }))
}

impl Serialize for DensityMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_pairs().serialize(s)
    }
}

impl<'de> Deserialize<'de> for DensityMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let pairs = Vec::<[f64; 2]>::deserialize(d)?;
        let m = matrix_from_pairs(&pairs).ok_or_else(|| serde::de::Error::custom("expected 16 (re, im) pairs"))?;
        DensityMatrix::new(m).map_err(serde::de::Error::custom)
    }
}

impl Serialize for RawMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        matrix_pairs(&self.m).serialize(s)
    }
}

impl<'de> Deserialize<'de> for RawMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let pairs = Vec::<[f64; 2]>::deserialize(d)?;
        matrix_from_pairs(&pairs)
            .map(RawMatrix::new)
            .ok_or_else(|| serde::de::Error::custom("expected 16 (re, im) pairs"))
    }
}

/// Hermitian idempotent measurement operator.
#[derive(Debug, Clone, PartialEq)]
pub struct Projector {
    m: Mat4,
}

impl Projector {
    pub fn new(m: Mat4) -> Result<Self> {
        let herm = (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        let idem = (m * m - m).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if herm > tol::ALGEBRAIC || idem > tol::ALGEBRAIC {
            return Err(Error::InvalidParameter(format!(
                "not a projector (hermiticity {herm:.2e}, idempotence {idem:.2e})"
            )));
        }
        Ok(Self { m })
    }

    pub fn from_ket(ket: &Ket2Q) -> Self {
        Self { m: ket.outer() }
    }

    /// Joint projector for analyzer `a` on the signal and `b` on the idler.
    pub fn product(a: &QubitState, b: &QubitState) -> Self {
        Self::from_ket(&Ket2Q::product(a, b))
    }

    pub fn matrix(&self) -> &Mat4 {
        &self.m
    }
}

/// `Tr(rho P)`, clamped to `[0, 1]`.
pub fn born_probability(rho: &DensityMatrix, proj: &Projector) -> f64 {
    (rho.m * proj.m).trace().re.clamp(0.0, 1.0)
}

/// Eigenvalues (ascending) and eigenvectors of a Hermitian matrix.
pub(crate) fn hermitian_eigen(m: &Mat4) -> ([f64; 4], Mat4) {
    let h = (m + m.adjoint()) * (ONE * 0.5);
    let eig = h.symmetric_eigen();
    let mut idx = [0usize, 1, 2, 3];
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = idx.map(|i| eig.eigenvalues[i]);
    let vecs = Mat4::from_fn(|r, c| eig.eigenvectors[(r, idx[c])]);
    (vals, vecs)
}

/// Square root of a Hermitian positive semi-definite matrix, with
/// eigenvalues in `[-1e-9, 0)` clamped to zero.
pub fn psd_sqrt(m: &Mat4) -> Result<Mat4> {
    let (vals, vecs) = hermitian_eigen(m);
    if vals.iter().any(|v| !v.is_finite()) {
        return Err(Error::MatrixSqrt("eigendecomposition produced non-finite values".into()));
    }
    if vals[0] < -tol::PHYSICAL {
        return Err(Error::MatrixSqrt(format!("matrix is not PSD (eigenvalue {:.3e})", vals[0])));
    }
    let d = Mat4::from_diagonal(&Vector4::from_iterator(vals.iter().map(|&v| ONE * v.max(0.0).sqrt())));
    Ok(vecs * d * vecs.adjoint())
}

/// Uhlmann fidelity `[Tr sqrt(sqrt(sigma) rho sqrt(sigma))]^2`.
pub fn fidelity(rho_exp: &DensityMatrix, rho_th: &DensityMatrix) -> Result<f64> {
    let s = psd_sqrt(&rho_th.m)?;
    let inner = s * rho_exp.m * s;
    let (vals, _) = hermitian_eigen(&inner);
    if vals[0] < -tol::PHYSICAL {
        return Err(Error::MatrixSqrt(format!("inner product matrix not PSD (eigenvalue {:.3e})", vals[0])));
    }
    let tr: f64 = vals.iter().map(|v| v.max(0.0).sqrt()).sum();
    Ok((tr * tr).clamp(0.0, 1.0))
}

/// Fidelity with a pure target, `<psi|rho|psi>`.
pub fn fidelity_pure(rho: &DensityMatrix, target: &Ket2Q) -> f64 {
    let v = target.vector();
    (v.adjoint() * rho.m * v)[(0, 0)].re.clamp(0.0, 1.0)
}

/// The four Pauli matrices `I, X, Y, Z`.
pub fn paulis() -> [Matrix2<C64>; 4] {
    let i = C64::new(0.0, 1.0);
    [
        Matrix2::new(ONE, ZERO, ZERO, ONE),
        Matrix2::new(ZERO, ONE, ONE, ZERO),
        Matrix2::new(ZERO, -i, i, ZERO),
        Matrix2::new(ONE, ZERO, ZERO, -ONE),
    ]
}

/// Kronecker product of two 2x2 matrices in the global basis order.
pub fn kron(a: &Matrix2<C64>, b: &Matrix2<C64>) -> Mat4 {
    Mat4::from_fn(|r, c| a[(r / 2, c / 2)] * b[(r % 2, c % 2)])
}
