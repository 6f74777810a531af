//! Estimators turning counts into CAR, visibilities, CHSH S, density
//! matrices and fitted source coefficients.

pub mod car;
pub mod chsh;
pub mod fits;
pub mod fringe;
pub mod record;
pub mod tomography;

pub use car::{car_from_counts, car_from_setting, estimate_car, CarEstimate};
pub use chsh::{chsh, chsh_from_state, correlator_from_state, ChshAngles, ChshResult};
pub use fits::{car_model, fit_car_curve, fit_singles_curve, log_log_slope, CarFit, CarFitInputs, SinglesFit};
pub use fringe::{fit_fringe, fit_fringe_at, fit_fringe_free, Background, FringeFit};
pub use record::{CountsRecord16, CountsRow};
pub use tomography::{fidelity_with_error, linear_tomography, mle_tomography, FidelityEstimate, MleResult};
