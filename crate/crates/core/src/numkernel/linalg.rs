//! Direct solvers: symmetric tridiagonal and small dense SPD systems.

use crate::error::{check_dim, Error, Result};
use crate::numkernel::point::Point;
use crate::scalar::Scalar;

/// Solves `A x = rhs` for the symmetric tridiagonal `A` with diagonal `diag`
/// and off-diagonal `off` via an `L D L^T` factorization.
pub fn tridiag_spd_solve<T: Scalar>(diag: &[T], off: &[T], rhs: &Point<T>) -> Result<Point<T>> {
    let n = diag.len();
    check_dim(n, rhs.dim())?;
    check_dim(n.saturating_sub(1), off.len())?;
    if n == 0 {
        return Ok(Point::zeros(0));
    }
    // d[i] pivots, l[i] multipliers of the unit lower bidiagonal factor
    let mut d = Vec::with_capacity(n);
    let mut l = Vec::with_capacity(n.saturating_sub(1));
    let mut y = rhs.clone().into_vec();
    for i in 0..n {
        let pivot = if i == 0 {
            diag[0]
        } else {
            diag[i] - l[i - 1] * off[i - 1]
        };
        if !(pivot > T::zero()) || !pivot.is_finite() {
            return Err(Error::NotPositiveDefinite {
                row: i,
                pivot: pivot.to_f64_lossy(),
            });
        }
        d.push(pivot);
        if i + 1 < n {
            l.push(off[i] / pivot);
        }
        if i > 0 {
            y[i] = y[i] - l[i - 1] * y[i - 1];
        }
    }
    for i in 0..n {
        y[i] = y[i] / d[i];
    }
    for i in (0..n - 1).rev() {
        y[i] = y[i] - l[i] * y[i + 1];
    }
    Ok(Point::from(y))
}

/// `A x` for the symmetric tridiagonal matrix `(diag, off)`.
pub fn tridiag_mul<T: Scalar>(diag: &[T], off: &[T], x: &[T]) -> Vec<T> {
    let n = diag.len();
    (0..n)
        .map(|i| {
            let mut v = diag[i] * x[i];
            if i > 0 {
                v = v + off[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                v = v + off[i] * x[i + 1];
            }
            v
        })
        .collect()
}

/// Row-major dense symmetric matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SymMatrix<T> {
    dim: usize,
    data: Vec<T>,
}

impl<T: Scalar> SymMatrix<T> {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![T::zero(); dim * dim],
        }
    }

    pub fn identity_scaled(dim: usize, alpha: T) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = alpha;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.dim + j]
    }

    /// `self += alpha a a^T`
    pub fn rank_one_update(&mut self, alpha: T, a: &[T]) {
        for i in 0..self.dim {
            let ai = alpha * a[i];
            let row = &mut self.data[i * self.dim..(i + 1) * self.dim];
            for (r, &aj) in row.iter_mut().zip(a) {
                *r = *r + ai * aj;
            }
        }
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        (0..self.dim)
            .map(|i| {
                self.data[i * self.dim..(i + 1) * self.dim]
                    .iter()
                    .zip(x)
                    .fold(T::zero(), |acc, (&a, &b)| acc + a * b)
            })
            .collect()
    }

    /// Solves `self x = rhs` by Cholesky factorization.
    pub fn cholesky_solve(&self, rhs: &Point<T>) -> Result<Point<T>> {
        let n = self.dim;
        check_dim(n, rhs.dim())?;
        let mut l = vec![T::zero(); n * n];
        for j in 0..n {
            let mut s = self.get(j, j);
            for k in 0..j {
                s = s - l[j * n + k] * l[j * n + k];
            }
            if !(s > T::zero()) {
                return Err(Error::NotPositiveDefinite {
                    row: j,
                    pivot: s.to_f64_lossy(),
                });
            }
            let ljj = s.sqrt();
            l[j * n + j] = ljj;
            for i in j + 1..n {
                let mut s = self.get(i, j);
                for k in 0..j {
                    s = s - l[i * n + k] * l[j * n + k];
                }
                l[i * n + j] = s / ljj;
            }
        }
        let mut y = rhs.clone().into_vec();
        for i in 0..n {
            for k in 0..i {
                y[i] = y[i] - l[i * n + k] * y[k];
            }
            y[i] = y[i] / l[i * n + i];
        }
        for i in (0..n).rev() {
            for k in i + 1..n {
                y[i] = y[i] - l[k * n + i] * y[k];
            }
            y[i] = y[i] / l[i * n + i];
        }
        Ok(Point::from(y))
    }
}
