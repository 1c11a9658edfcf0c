//! Quantum root-mean-square error measures on finite measurement models.
//!
//! Two notions of measurement error are implemented side by side:
//!
//! - the noise-operator quantities `ε_NO` (error) and `η_NO` (disturbance),
//!   computed from a measurement scheme, from moment operators, by the
//!   three-state method and by value comparison;
//! - the Wasserstein-2 deviation between outcome distributions, its
//!   worst-case extension to observables and the calibration error.
//!
//! On top of these the [`relations`] module checks the associated
//! uncertainty inequalities, and [`scenarios`] bundles reproducible model
//! configurations with expected values.
//!
//! Module map:
//!
//! | module | contents |
//! |---|---|
//! | [`opalg`] | dense complex matrices, states, spectra, tensor products |
//! | [`observables`] | POVMs with real outcomes, moments, intrinsic noise, smearing |
//! | [`schemes`] | measurement schemes, instruments, grid models |
//! | [`errmetrics`] | distributions, couplings, W2, `ε_NO`/`η_NO` |
//! | [`relations`] | inequality checkers and qubit joint measurability |
//! | [`scenarios`] | scenario library, reports and sweeps |

#![forbid(unsafe_code)]

pub mod error;
pub mod errmetrics;
pub mod observables;
pub mod opalg;
pub mod relations;
pub mod rng;
pub mod scenarios;
pub mod schemes;
pub mod tol;

pub use error::{QmuError, Result};
