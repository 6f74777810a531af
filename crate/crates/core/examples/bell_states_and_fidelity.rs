//! Bell states, Werner mixtures, the Sagnac output state and fidelities.
//!
//!     cargo run --example bell_states_and_fidelity

use muxent::photonics::{sagnac_output_state, SagnacParams};
use muxent::qstate::{bell_state, fidelity, fidelity_pure, BellKind, DensityMatrix};

fn main() -> muxent::Result<()> {
    let phi_plus = bell_state(BellKind::PhiPlus, 0.0);
    for kind in [BellKind::PhiPlus, BellKind::PhiMinus, BellKind::PsiPlus, BellKind::PsiMinus] {
        let rho = bell_state(kind, 0.0).density();
        println!("{kind:?}: purity {:.3}, F(phi+) {:.3}", rho.purity(), fidelity_pure(&rho, &phi_plus));
    }

    println!("\nWerner p -> fidelity (expected (1 + 3p)/4)");
    for p in [1.0, 0.95, 0.912, 0.8, 1.0 / 3.0] {
        let w = DensityMatrix::werner(p, &phi_plus)?;
        println!("  p {p:.3}: F {:.4}  expected {:.4}  purity {:.4}", fidelity_pure(&w, &phi_plus), (1.0 + 3.0 * p) / 4.0, w.purity());
    }

    // Unbalanced loop, small residual pump phase.
    let sagnac = SagnacParams { pump_phase: 0.05, birefringence: 0.0, loop_length_m: 0.0, power_ratio: 0.9 };
    let rho = sagnac_output_state(&sagnac)?;
    println!("\nSagnac eta 0.9, delta {:.2}: F(phi+) {:.4}", sagnac.delta(), fidelity(&rho, &phi_plus.density())?);
    println!("eigenvalues {:?}", rho.eigenvalues().map(|e| (e * 1e6).round() / 1e6));
    Ok(())
}
