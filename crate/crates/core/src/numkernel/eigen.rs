//! Extreme eigenvalues of matrix-free symmetric operators.
//!
//! Lanczos with full reorthogonalization; eigenvalues of the projected
//! tridiagonal matrix come from Sturm-sequence bisection. For dimensions up to
//! [`EigOptions::direct_threshold`] the iteration runs until the Krylov space
//! fills the whole space, which makes the result exact up to rounding.

use crate::error::{Error, Result};
use crate::numkernel::point::{axpy, dot};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug)]
pub struct EigOptions {
    /// Relative tolerance on the extremes (iterative mode).
    pub tol: f64,
    /// Hard cap on Lanczos steps.
    pub max_iter: usize,
    /// Dimensions at or below this are solved to Krylov exhaustion.
    pub direct_threshold: usize,
}

impl Default for EigOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 5000,
            direct_threshold: 512,
        }
    }
}

/// Number of eigenvalues of the symmetric tridiagonal `(alpha, beta)` strictly below `x`.
fn sturm_count<T: Scalar>(alpha: &[T], beta: &[T], x: T) -> usize {
    let tiny = T::min_positive_value().sqrt();
    let mut count = 0;
    let mut d = T::one();
    for i in 0..alpha.len() {
        let coupling = if i == 0 {
            T::zero()
        } else {
            beta[i - 1] * beta[i - 1] / d
        };
        d = alpha[i] - x - coupling;
        if d.is_zero() {
            d = -tiny;
        }
        if d < T::zero() {
            count += 1;
        }
    }
    count
}

/// The `k`-th smallest (0-based) eigenvalue of a symmetric tridiagonal matrix.
pub fn tridiag_eigenvalue<T: Scalar>(alpha: &[T], beta: &[T], k: usize) -> T {
    let m = alpha.len();
    let (mut lo, mut hi) = (T::infinity(), T::neg_infinity());
    for i in 0..m {
        let mut radius = T::zero();
        if i > 0 {
            radius = radius + beta[i - 1].abs();
        }
        if i + 1 < m {
            radius = radius + beta[i].abs();
        }
        lo = lo.min(alpha[i] - radius);
        hi = hi.max(alpha[i] + radius);
    }
    let span = (hi - lo).max(hi.abs().max(lo.abs())).max(T::min_positive_value());
    lo = lo - span * T::epsilon();
    hi = hi + span * T::epsilon();
    for _ in 0..300 {
        let mid = (lo + hi) / T::lit(2.0);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(alpha, beta, mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    (lo + hi) / T::lit(2.0)
}

fn start_vector<T: Scalar>(dim: usize) -> Vec<T> {
    let v: Vec<T> = (0..dim)
        .map(|i| T::lit(1.0 + 0.5 * (1.3 * i as f64 + 0.7).sin()))
        .collect();
    let n = dot(&v, &v).sqrt();
    v.into_iter().map(|c| c / n).collect()
}

/// Smallest and largest eigenvalue of the symmetric operator `apply` on `R^dim`.
pub fn extreme_eigs_sym<T, F>(apply: F, dim: usize, opts: EigOptions) -> Result<(T, T)>
where
    T: Scalar,
    F: Fn(&[T]) -> Vec<T>,
{
    if dim == 0 {
        return Err(Error::InvalidParameter {
            name: "dim",
            reason: "operator dimension must be positive".into(),
        });
    }
    let direct = dim <= opts.direct_threshold;
    let cap = if direct { dim } else { opts.max_iter.min(dim) };
    let tol = T::lit(opts.tol);

    let mut basis: Vec<Vec<T>> = vec![start_vector(dim)];
    let mut alpha: Vec<T> = Vec::new();
    let mut beta: Vec<T> = Vec::new();
    let mut canonical_cursor = 0usize;
    let mut prev: Option<(T, T)> = None;
    let mut stable_steps = 0;

    loop {
        let j = alpha.len();
        let q = &basis[j];
        let mut w = apply(q);
        let a = dot(q, &w);
        alpha.push(a);
        // full reorthogonalization, two passes
        for _ in 0..2 {
            for b in &basis {
                let c = dot(b, &w);
                axpy(-c, b, &mut w);
            }
        }
        let m = alpha.len();
        let lo = tridiag_eigenvalue(&alpha, &beta, 0);
        let hi = tridiag_eigenvalue(&alpha, &beta, m - 1);
        if m >= cap {
            if m == dim || direct {
                return Ok((lo, hi));
            }
            return Err(Error::NoConvergence {
                iterations: m,
                lambda_min: lo.to_f64_lossy(),
                lambda_max: hi.to_f64_lossy(),
            });
        }
        if !direct {
            if let Some((plo, phi)) = prev {
                let hi_scale = hi.abs().max(lo.abs()).max(T::min_positive_value());
                let lo_scale = lo.abs().max(T::lit(1e-4) * hi_scale);
                if (lo - plo).abs() <= tol * lo_scale && (hi - phi).abs() <= tol * hi_scale {
                    stable_steps += 1;
                } else {
                    stable_steps = 0;
                }
                if stable_steps >= 3 && m >= 10 {
                    return Ok((lo, hi));
                }
            }
            prev = Some((lo, hi));
        }

        let b = dot(&w, &w).sqrt();
        let scale = alpha.iter().fold(T::zero(), |acc, x| acc.max(x.abs())).max(b);
        if b > T::epsilon() * T::lit(64.0) * scale.max(T::min_positive_value()) {
            beta.push(b);
            basis.push(w.into_iter().map(|c| c / b).collect());
            continue;
        }
        // invariant subspace found: restart with the next canonical direction
        let mut next = None;
        while canonical_cursor < dim {
            let mut e = vec![T::zero(); dim];
            e[canonical_cursor] = T::one();
            canonical_cursor += 1;
            for _ in 0..2 {
                for q in &basis {
                    let c = dot(q, &e);
                    axpy(-c, q, &mut e);
                }
            }
            let n = dot(&e, &e).sqrt();
            if n > T::lit(1e-8) {
                next = Some(e.into_iter().map(|c| c / n).collect::<Vec<_>>());
                break;
            }
        }
        match next {
            Some(v) => {
                beta.push(T::zero());
                basis.push(v);
            }
            None => return Ok((lo, hi)),
        }
    }
}
