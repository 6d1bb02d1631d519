//! Pseudospectral solvers for nonlocal interface and water-wave models.
//!
//! * [`spectral`]: periodic grids, Fourier multipliers, dealiased products.
//! * [`graph_models`]: bidirectional and unidirectional h-models.
//! * [`curve_models`]: z-model, Kelvin–Helmholtz models and the
//!   Birkhoff–Rott reference quadrature.
//! * [`timestep`]: Dormand–Prince and RK4 integration.
//! * [`diagnostics`]: norms, analytic-strip monitor, curve geometry.
//! * [`model`]: model identifiers and flat-state right-hand sides.
//! * [`wavecli`]: configuration, presets and run orchestration.

// `!(x <= y)` is used deliberately so that NaN takes the failing branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod curve_models;
pub mod diagnostics;
pub mod error;
pub mod graph_models;
pub mod model;
pub mod spectral;
pub mod timestep;
pub mod wavecli;

pub use error::{Result, WaveError};
pub use graph_models::ModelParams;
pub use spectral::{PeriodicGrid, SpectralField};
