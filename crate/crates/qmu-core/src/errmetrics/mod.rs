//! Distributions, couplings, Wasserstein-2 deviations and noise-operator
//! errors.

pub mod distance;
pub mod distribution;
pub mod noise;
pub mod transport;
pub mod wasserstein;

pub use distance::{
    calibration_error, calibration_from_moments, default_schedule, extrapolate_to_zero, w2_observables_worst,
    w2_worst_search, Bound, Calibration, CalibrationPoint, StateSearchPolicy, WorstCase,
};
pub use distribution::{Coupling, Distribution};
pub use noise::{
    constant_bias, eps_no_from_moments, eps_no_from_scheme, error_report, eta_no_from_instrument,
    eta_no_from_scheme, noise_terms, three_state_eps, value_comparison_eps, ErrorReport,
    NoiseTerms, ValueComparison,
};
pub use transport::{w2_lp_oracle, OracleSolution};
pub use wasserstein::{moment_bounds, w2, w2_quantile, MomentBounds, W2};
