//! Gap analysis and gap completion for borehole well logs.
//!
//! The crate reads LAS 2.0 files into [`well::WellLog`] values, measures how
//! and where measurements are missing, blanks realistic artificial gaps with
//! retained ground truth, and fits regression models (least squares, gradient
//! boosted trees, a small multilayer perceptron) that predict one property
//! from the other three. The [`experiment`] module runs the per-well, global
//! and nearest-neighbour training strategies and scores them with MSE and
//! MAPE.

pub mod error;
pub mod experiment;
pub mod features;
pub mod gaps;
pub mod inject;
pub mod las;
pub mod metrics;
pub mod models;
pub mod plot;
pub mod rng;
pub mod stats;
pub mod synth;
pub mod well;

pub use error::{Error, Result};
pub use well::{Gap, PropertyKind, WellHeader, WellLog};
