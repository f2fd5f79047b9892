//! Tensor completion by truncated Tucker factorizations.
//!
//! The crate provides dense tensor algebra, observation masks, the
//! imputation-based HOOI and ALS-with-subspace solvers for incomplete data,
//! plain HOOI for complete data, recovery metrics, a synthetic problem
//! generator and an experiment harness.

// `!(x > 0.0)` is used on purpose so NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod harness;
pub mod io;
pub mod linalg;
pub mod matrix;
pub mod metrics;
pub mod observation;
pub mod rng;
pub mod solvers;
pub mod synthetic;
pub mod tensor;

pub use error::{Error, Result};
pub use matrix::Matrix;
pub use observation::{sample_uniform, ObservationMask};
pub use tensor::{DenseTensor, Shape};
