//! Two-qubit tomography: linear inversion (may be unphysical) versus
//! maximum likelihood on Poisson counts from a Werner state, with a
//! bootstrap error on the fidelity.
//!
//!     cargo run --release --example state_tomography

use muxent::analysis::tomography::{expected_counts, poisson_counts, standard_settings};
use muxent::analysis::{fidelity_with_error, linear_tomography, mle_tomography, CountsRecord16};
use muxent::qstate::{bell_state, BellKind, DensityMatrix};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> muxent::Result<()> {
    let phi_plus = bell_state(BellKind::PhiPlus, 0.0);
    let truth = DensityMatrix::werner(0.912, &phi_plus)?;
    let template = CountsRecord16::from_settings(&standard_settings(), 1.0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(3);

    for per_setting in [100.0, 1_000.0, 100_000.0] {
        let counts = poisson_counts(&expected_counts(&template, &truth, per_setting), &mut rng);
        let rec = template.with_counts(&counts);
        let linear = linear_tomography(&rec)?;
        let min_eig = linear.eigenvalues().into_iter().fold(f64::INFINITY, f64::min);
        let fit = mle_tomography(&rec)?;
        let f = fidelity_with_error(&rec, &phi_plus.density(), 200, 7)?;
        println!(
            "{per_setting:>8} /setting: linear min eigenvalue {min_eig:+.4}, MLE {} iterations, F {:.4} +/- {:.4} (true {:.4})",
            fit.iterations,
            f.point,
            f.std,
            (1.0 + 3.0 * 0.912) / 4.0
        );
    }
    Ok(())
}
