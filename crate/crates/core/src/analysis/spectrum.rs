use serde::Serialize;

use crate::error::Result;
use crate::numkernel::{extreme_eigs_sym, EigOptions};
use crate::problems::RlsDataset;
use crate::scalar::Scalar;

/// Extreme curvatures of a least-squares objective.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Spectrum {
    pub mu_f: f64,
    pub l_f: f64,
    pub kappa_f: f64,
}

/// `mu_f`, `L_f`: extreme eigenvalues of `mu I + (2w/n) sum_i a_i a_i^T`,
/// which is `mu I + Sigma_hat` under the half-square loss convention.
pub fn empirical_spectrum<T: Scalar>(dataset: &RlsDataset<T>) -> Result<Spectrum> {
    let h = dataset.hessian();
    let (lo, hi) = extreme_eigs_sym(|x: &[T]| h.mul_vec(x), dataset.d(), EigOptions::default())?;
    let (mu_f, l_f) = (lo.to_f64_lossy(), hi.to_f64_lossy());
    Ok(Spectrum {
        mu_f,
        l_f,
        kappa_f: l_f / mu_f,
    })
}
