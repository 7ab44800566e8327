//! Finite-sum strongly convex optimization under the incremental first-order
//! oracle: hard instances, adaptive adversaries that certify lower bounds
//! against deterministic algorithms, reference solvers and rate calculators.
//!
//! All numerical code is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix the scalar to `f64` or `f32`.

// `!(a > b)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod error;
pub mod numkernel;
pub mod oracle;
pub mod problems;
pub mod scalar;
pub mod solvers;

pub use error::{Error, Result};
pub use numkernel::{OrthonormalFamily, Point};
pub use oracle::{Certificate, CertificateStatus, Ifo, ResistingIfo, ResistingState, Transcript};
pub use problems::{FiniteSumProblem, NesterovFunction, RlsDataset};
pub use scalar::Scalar;
pub use solvers::{RunTrace, SolverConfig, SolverKind};

pub type Point64 = Point<f64>;
pub type Family64 = OrthonormalFamily<f64>;
pub type Problem64 = FiniteSumProblem<f64>;
pub type Nesterov64 = NesterovFunction<f64>;
pub type ResistingIfo64 = ResistingIfo<f64>;
pub type ResistingState64 = ResistingState<f64>;
pub type Certificate64 = Certificate<f64>;
pub type Dataset64 = RlsDataset<f64>;

pub type Point32 = Point<f32>;
pub type Family32 = OrthonormalFamily<f32>;
pub type Problem32 = FiniteSumProblem<f32>;
pub type Nesterov32 = NesterovFunction<f32>;
