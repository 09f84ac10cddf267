//! Low-rank matrix recovery.
//!
//! Matrix completion (SOFT-IMPUTE, accelerated proximal gradient, inexact
//! ALM, alternating least squares, MMMF, SVP), robust PCA (PCP via inexact
//! ALM, stable PCP via block coordinate descent, GoDec), closed-form
//! probabilistic PCA, a deterministic synthetic benchmark harness, and two
//! image recipes (inpainting and background subtraction).

// `!(x > 0.0)` guards reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod error;
pub mod imaging;
pub mod linalg;
pub mod mc;
pub mod ppca;
pub mod rpca;
pub mod solver;

pub use error::{LowRankError, Result};
pub use linalg::{DenseMatrix, ObservationMask, SvdFactors};
pub use solver::{SolverConfig, SolverTrace, TraceRecord};
