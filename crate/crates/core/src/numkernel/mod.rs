//! Dense vector algebra and the small set of linear-algebra kernels the rest
//! of the crate is built on.

mod eigen;
mod family;
mod interleave;
mod linalg;
mod point;

pub use eigen::{extreme_eigs_sym, tridiag_eigenvalue, EigOptions};
pub use family::{gram_schmidt_extend, OrthonormalFamily};
pub use interleave::{q_embed, q_restrict};
pub(crate) use interleave::q_embed_add;
pub use linalg::{tridiag_mul, tridiag_spd_solve, SymMatrix};
pub use point::Point;
pub(crate) use point::{axpy, dot};
