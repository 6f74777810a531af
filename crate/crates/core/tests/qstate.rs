use std::f64::consts::SQRT_2;

use approx::assert_abs_diff_eq;
use muxent::analysis::{chsh_from_state, ChshAngles};
use muxent::qstate::{bell_state, fidelity, fidelity_pure, BellKind, DensityMatrix, Ket2Q, QubitState, C64};
use proptest::prelude::*;

fn qubit(theta: f64, phi: f64) -> QubitState {
    QubitState::new(C64::new((theta / 2.0).cos(), 0.0), C64::from_polar((theta / 2.0).sin(), phi)).unwrap()
}

fn arb_qubit() -> impl Strategy<Value = QubitState> {
    (0.0..std::f64::consts::PI, 0.0..std::f64::consts::TAU).prop_map(|(t, p)| qubit(t, p))
}

#[test]
fn bell_states_are_orthonormal() {
    let kinds = [BellKind::PhiPlus, BellKind::PhiMinus, BellKind::PsiPlus, BellKind::PsiMinus];
    for a in kinds {
        for b in kinds {
            let f = fidelity_pure(&bell_state(a, 0.0).density(), &bell_state(b, 0.0));
            assert_abs_diff_eq!(f, if a == b { 1.0 } else { 0.0 }, epsilon = 1e-12);
        }
    }
}

#[test]
fn werner_fidelity_and_chsh() {
    let phi = bell_state(BellKind::PhiPlus, 0.0);
    let angles = ChshAngles::standard();
    for p in [0.0, 0.3, 0.7, 0.912, 1.0] {
        let w = DensityMatrix::werner(p, &phi).unwrap();
        assert_abs_diff_eq!(fidelity_pure(&w, &phi), (1.0 + 3.0 * p) / 4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(w.purity(), (1.0 + 3.0 * p * p) / 4.0, epsilon = 1e-12);
        let signs = angles.signs_for(&phi.density());
        assert_abs_diff_eq!(chsh_from_state(&w, &angles, signs), 2.0 * SQRT_2 * p, epsilon = 1e-9);
    }
}

#[test]
fn unnormalised_ket_is_rejected() {
    assert!(Ket2Q::new([C64::new(0.0, 0.0); 4]).is_err());
    assert!(DensityMatrix::werner(1.2, &bell_state(BellKind::PhiPlus, 0.0)).is_err());
}

proptest! {
    #[test]
    fn product_states_are_physical_and_local(a in arb_qubit(), b in arb_qubit()) {
        let rho = DensityMatrix::product(&a, &b);
        prop_assert!(rho.to_raw().check().is_physical());
        prop_assert!((rho.purity() - 1.0).abs() < 1e-9);
        let angles = ChshAngles::standard();
        let signs = angles.signs_for(&bell_state(BellKind::PhiPlus, 0.0).density());
        prop_assert!(chsh_from_state(&rho, &angles, signs).abs() <= 2.0 + 1e-9);
    }

    #[test]
    fn mixtures_stay_physical(a in arb_qubit(), b in arb_qubit(), w in 0.0..1.0f64, v in 0.0..1.0f64) {
        let bell = bell_state(BellKind::PhiPlus, 0.3).density();
        let rho = bell.dephase_00_11(v).unwrap().mix(&DensityMatrix::product(&a, &b), w).unwrap();
        prop_assert!(rho.to_raw().check().is_physical());
        let tr: C64 = (0..4).map(|i| rho.matrix()[(i, i)]).sum();
        prop_assert!((tr.re - 1.0).abs() < 1e-12 && tr.im.abs() < 1e-12);
    }

    #[test]
    fn fidelity_is_symmetric_and_bounded(a in arb_qubit(), b in arb_qubit(), p in 0.0..1.0f64) {
        let x = DensityMatrix::werner(p, &bell_state(BellKind::PhiPlus, 0.0)).unwrap();
        let y = DensityMatrix::product(&a, &b);
        let f = fidelity(&x, &y).unwrap();
        prop_assert!((-1e-9..=1.0 + 1e-9).contains(&f));
        prop_assert!((f - fidelity(&y, &x).unwrap()).abs() < 1e-6);
        prop_assert!((fidelity(&x, &x).unwrap() - 1.0).abs() < 1e-6);
    }
}
