use crate::error::{check_dim, Error, Result};
use crate::numkernel::{tridiag_spd_solve, Point};
use crate::scalar::Scalar;

/// Tail-mass guard: a truncated chain quadratic must satisfy `q^dim <= TAIL_GUARD`.
pub const TAIL_GUARD: f64 = 1e-12;

/// Nesterov's chain quadratic, truncated to `dim` coordinates:
///
/// `N(x) = (L-mu)/8 (x_1^2 + sum_{i<dim} (x_{i+1}-x_i)^2 - 2 rho x_1) + mu/2 ||x||^2`.
///
/// Its Hessian is `(L-mu)/4 T + mu I` with `T` the tridiagonal matrix of the
/// quadratic form (diagonal `2, ..., 2, 1`, off-diagonal `-1`), whose spectrum
/// lies in `[0, 4)`. In infinite dimension the minimizer is `(rho q^i)_{i>=1}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NesterovFunction<T> {
    mu: T,
    l: T,
    rho: T,
    dim: usize,
}

/// `q = (sqrt(kappa) - 1) / (sqrt(kappa) + 1)`.
pub fn chain_rate<T: Scalar>(kappa: T) -> T {
    let s = kappa.sqrt();
    (s - T::one()) / (s + T::one())
}

/// Smallest dimension with `q^dim <= TAIL_GUARD`.
pub fn guarded_dim<T: Scalar>(q: T) -> usize {
    if q <= T::zero() {
        return 1;
    }
    let need = T::lit(TAIL_GUARD).ln() / q.ln();
    need.ceil().to_usize().unwrap_or(usize::MAX).max(1)
}

impl<T: Scalar> NesterovFunction<T> {
    /// Requires `0 < mu < L`, `rho >= 0` and a dimension passing the tail guard.
    pub fn new(mu: T, l: T, rho: T, dim: usize) -> Result<Self> {
        if !(mu > T::zero()) {
            return Err(Error::InvalidParameter {
                name: "mu",
                reason: format!("must be positive, got {mu}"),
            });
        }
        if !(l > mu) {
            return Err(Error::InvalidParameter {
                name: "L",
                reason: format!("must exceed mu = {mu}, got {l}"),
            });
        }
        if !(rho >= T::zero()) || !rho.is_finite() {
            return Err(Error::InvalidParameter {
                name: "rho",
                reason: format!("must be finite and non-negative, got {rho}"),
            });
        }
        let f = Self { mu, l, rho, dim };
        let required = guarded_dim(f.q());
        if dim < required {
            return Err(Error::DimensionTooSmall {
                dim,
                required,
                reason: format!("q^dim must be <= {TAIL_GUARD:e} for q = {}", f.q()),
            });
        }
        Ok(f)
    }

    pub fn mu(&self) -> T {
        self.mu
    }
    pub fn l(&self) -> T {
        self.l
    }
    pub fn rho(&self) -> T {
        self.rho
    }
    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn kappa(&self) -> T {
        self.l / self.mu
    }
    pub fn q(&self) -> T {
        chain_rate(self.kappa())
    }

    fn coupling(&self) -> T {
        (self.l - self.mu) / T::lit(4.0)
    }

    /// Value on a coordinate slice of length `dim`.
    pub(crate) fn value_slice(&self, x: &[T]) -> T {
        let mut form = x[0] * x[0];
        for w in x.windows(2) {
            let d = w[1] - w[0];
            form = form + d * d;
        }
        form = form - T::lit(2.0) * self.rho * x[0];
        let sq = x.iter().fold(T::zero(), |acc, &v| acc + v * v);
        (self.l - self.mu) / T::lit(8.0) * form + self.mu / T::lit(2.0) * sq
    }

    /// Gradient on a coordinate slice of length `dim`.
    pub(crate) fn grad_slice(&self, x: &[T]) -> Vec<T> {
        let d = x.len();
        let c = self.coupling();
        let two = T::lit(2.0);
        (0..d)
            .map(|i| {
                let second_diff = if d == 1 {
                    x[0]
                } else if i == 0 {
                    two * x[0] - x[1]
                } else if i + 1 == d {
                    x[i] - x[i - 1]
                } else {
                    two * x[i] - x[i + 1] - x[i - 1]
                };
                let linear = if i == 0 { self.rho } else { T::zero() };
                c * (second_diff - linear) + self.mu * x[i]
            })
            .collect()
    }

    pub fn value(&self, x: &Point<T>) -> Result<T> {
        check_dim(self.dim, x.dim())?;
        Ok(self.value_slice(x.as_slice()))
    }

    pub fn grad(&self, x: &Point<T>) -> Result<Point<T>> {
        check_dim(self.dim, x.dim())?;
        Ok(Point::from(self.grad_slice(x.as_slice())))
    }

    /// Infinite-dimensional minimizer `(rho q^i)` truncated to `dim`; differs
    /// from the truncated problem's exact minimizer by `O(rho q^dim)`.
    pub fn minimizer(&self) -> Point<T> {
        let q = self.q();
        let mut c = self.rho;
        Point::from_fn(self.dim, |_| {
            c = c * q;
            c
        })
    }

    /// Tridiagonal Hessian `(diag, off)`.
    pub fn hessian_tridiag(&self) -> (Vec<T>, Vec<T>) {
        let c = self.coupling();
        let d = self.dim;
        let diag = (0..d)
            .map(|i| {
                let t = if i + 1 == d { T::one() } else { T::lit(2.0) };
                c * t + self.mu
            })
            .collect();
        let off = vec![-c; d.saturating_sub(1)];
        (diag, off)
    }

    /// Exact minimizer of the truncated function by solving the stationarity
    /// system `A x = (L-mu) rho / 4 e_1`.
    pub fn exact_minimizer(&self) -> Result<Point<T>> {
        let (diag, off) = self.hessian_tridiag();
        let mut rhs = Point::zeros(self.dim);
        rhs[0] = self.coupling() * self.rho;
        tridiag_spd_solve(&diag, &off, &rhs)
    }

    /// Bound on the minimizer discrepancy introduced by truncation.
    pub fn truncation_slack(&self) -> T {
        self.rho * self.q().powi(self.dim as i32)
    }
}

/// `rho = gamma sqrt(1 - q^2) / q`, so that `||(rho q^i)_{i>=1}|| = gamma`.
pub fn rho_for_norm<T: Scalar>(gamma: T, q: T) -> Result<T> {
    if q.is_zero() {
        return Err(Error::Degenerate(
            "q = 0 means the instance is a scaled identity quadratic".into(),
        ));
    }
    if !(q > T::zero() && q < T::one()) {
        return Err(Error::InvalidParameter {
            name: "q",
            reason: format!("must lie in (0, 1), got {q}"),
        });
    }
    if !(gamma > T::zero()) {
        return Err(Error::InvalidParameter {
            name: "gamma",
            reason: format!("must be positive, got {gamma}"),
        });
    }
    Ok(gamma * (T::one() - q * q).sqrt() / q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn f(mu: f64, l: f64, rho: f64, dim: usize) -> NesterovFunction<f64> {
        NesterovFunction::new(mu, l, rho, dim).unwrap()
    }

    #[test]
    fn value_and_gradient_at_origin() {
        let n = f(1.0, 4.0, 1.0, 64);
        let zero = Point::zeros(64);
        assert_eq!(n.value(&zero).unwrap(), 0.0);
        let g = n.grad(&zero).unwrap();
        assert_eq!(g[0], -(4.0 - 1.0) * 1.0 / 4.0);
        assert_eq!(g.support_len(), 1);
    }

    #[test]
    fn analytic_minimizer_is_stationary() {
        let n = f(1.0, 4.0, 1.0, 64);
        let x = n.minimizer();
        assert_relative_eq!(x[0], 1.0 / 3.0, max_relative = 1e-15);
        assert_relative_eq!(x[1], 1.0 / 9.0, max_relative = 1e-15);
        assert_relative_eq!(x[2], 1.0 / 27.0, max_relative = 1e-15);
        let g = n.grad(&x).unwrap();
        // truncation leaves a boundary residual of order (L-mu)/4 rho q^dim
        assert!(g.norm() <= 1e-8 + n.truncation_slack());
    }

    #[test]
    fn minimizer_norm_matches_geometric_series() {
        let n = f(1.0, 4.0, 1.0, 64);
        let q = 1.0 / 3.0;
        let expect = q * q / (1.0 - q * q);
        assert_relative_eq!(n.minimizer().norm_sq(), expect, max_relative = 1e-14);
    }

    #[test]
    fn exact_minimizer_agrees_with_analytic() {
        for kappa in [2.0, 10.0, 100.0] {
            let n = f(1.0, kappa, 1.5, 400);
            let exact = n.exact_minimizer().unwrap();
            let analytic = n.minimizer();
            let gap = exact.distance(&analytic);
            assert!(gap <= 1e-8 + n.truncation_slack(), "kappa {kappa}: gap {gap}");
        }
    }

    #[test]
    fn gradient_matches_central_differences() {
        let n = f(0.5, 7.0, 2.0, 60);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let x = Point::from_fn(60, |_| rng.random_range(-1.0..1.0));
            let g = n.grad(&x).unwrap();
            let h = 1e-5;
            let fd = Point::from_fn(60, |i| {
                let mut p = x.clone();
                let mut m = x.clone();
                p[i] += h;
                m[i] -= h;
                (n.value(&p).unwrap() - n.value(&m).unwrap()) / (2.0 * h)
            });
            assert!(fd.distance(&g) <= 1e-6 * g.norm());
        }
    }

    #[test]
    fn gradient_support_grows_by_one() {
        let n = f(1.0, 10.0, 1.0, 50);
        for k in 0..49 {
            let x = Point::from_fn(50, |i| if i < k { 1.0 + i as f64 } else { 0.0 });
            assert!(n.grad(&x).unwrap().support_len() <= k + 1);
        }
    }

    #[test]
    fn constructor_guards() {
        assert!(NesterovFunction::new(1.0, 1.0, 1.0, 100).is_err());
        assert!(NesterovFunction::new(0.0, 2.0, 1.0, 100).is_err());
        assert!(NesterovFunction::new(1.0, 2.0, -1.0, 100).is_err());
        // kappa = 100, q = 9/11: q^dim <= 1e-12 needs dim >= 138
        assert!(matches!(
            NesterovFunction::new(1.0, 100.0, 1.0, 137),
            Err(Error::DimensionTooSmall { required: 138, .. })
        ));
        assert!(NesterovFunction::new(1.0, 100.0, 1.0, 138).is_ok());
    }

    #[test]
    fn rho_for_norm_examples() {
        let q: f64 = 0.3;
        assert_relative_eq!(
            rho_for_norm(q / (1.0 - q * q).sqrt(), q).unwrap(),
            1.0,
            max_relative = 1e-15
        );
        assert_relative_eq!(
            rho_for_norm(1.0, 1.0 / 3.0).unwrap(),
            2.0 * 2f64.sqrt(),
            max_relative = 1e-15
        );
        let a = rho_for_norm(1.3, 0.6).unwrap();
        let b = rho_for_norm(2.6, 0.6).unwrap();
        assert_relative_eq!(b, 2.0 * a, max_relative = 1e-15);
        assert!(matches!(rho_for_norm(1.0, 0.0), Err(Error::Degenerate(_))));
    }

    #[test]
    fn works_in_single_precision() {
        let n = NesterovFunction::<f32>::new(1.0, 4.0, 1.0, 32).unwrap();
        let g = n.grad(&n.minimizer()).unwrap();
        assert!(g.norm() < 1e-5);
    }
}
