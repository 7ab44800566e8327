use std::fmt;

use crate::error::{check_dim, Error, Result};
use crate::numkernel::Point;
use crate::scalar::Scalar;

/// One term `g_i` of a finite sum: a convex, smooth function of the full point.
pub trait Component<T: Scalar>: Send + Sync {
    fn dim(&self) -> usize;

    /// `(g_i(x), g_i'(x))`.
    fn value_grad(&self, x: &Point<T>) -> (T, Point<T>);
}

/// `f(x) = mu/2 ||x||^2 + (1/n) sum_i g_i(x)` with every `g_i` convex and
/// `(L - mu)`-smooth. Immutable once built.
pub struct FiniteSumProblem<T: Scalar> {
    mu: T,
    l: T,
    dim: usize,
    components: Vec<Box<dyn Component<T>>>,
    minimizer: Option<Point<T>>,
}

impl<T: Scalar> fmt::Debug for FiniteSumProblem<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FiniteSumProblem")
            .field("n", &self.components.len())
            .field("mu", &self.mu)
            .field("l", &self.l)
            .field("dim", &self.dim)
            .field("has_minimizer", &self.minimizer.is_some())
            .finish()
    }
}

impl<T: Scalar> FiniteSumProblem<T> {
    pub fn new(mu: T, l: T, components: Vec<Box<dyn Component<T>>>) -> Result<Self> {
        let dim = components.first().map(|c| c.dim()).ok_or(Error::InvalidParameter {
            name: "components",
            reason: "at least one component is required".into(),
        })?;
        for c in &components {
            check_dim(dim, c.dim())?;
        }
        if !(mu > T::zero()) || !(l >= mu) {
            return Err(Error::InvalidParameter {
                name: "mu/L",
                reason: format!("need 0 < mu <= L, got mu = {mu}, L = {l}"),
            });
        }
        Ok(Self {
            mu,
            l,
            dim,
            components,
            minimizer: None,
        })
    }

    pub fn with_minimizer(mut self, x_star: Point<T>) -> Result<Self> {
        check_dim(self.dim, x_star.dim())?;
        self.minimizer = Some(x_star);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.components.len()
    }
    pub fn mu(&self) -> T {
        self.mu
    }
    pub fn l(&self) -> T {
        self.l
    }
    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn kappa(&self) -> T {
        self.l / self.mu
    }
    pub fn minimizer(&self) -> Option<&Point<T>> {
        self.minimizer.as_ref()
    }
    /// `||x*||` when the minimizer is known.
    pub fn gamma(&self) -> Option<T> {
        self.minimizer.as_ref().map(Point::norm)
    }

    pub fn component(&self, i: usize, x: &Point<T>) -> Result<(T, Point<T>)> {
        let c = self.components.get(i).ok_or(Error::IndexOutOfRange {
            index: i,
            count: self.n(),
        })?;
        check_dim(self.dim, x.dim())?;
        Ok(c.value_grad(x))
    }

    /// Full objective value and gradient.
    pub fn value_grad(&self, x: &Point<T>) -> Result<(T, Point<T>)> {
        check_dim(self.dim, x.dim())?;
        let inv_n = T::from_usize_lossy(self.n()).recip();
        let mut value = T::zero();
        let mut grad = Point::zeros(self.dim);
        for c in &self.components {
            let (v, g) = c.value_grad(x);
            value = value + v;
            grad.axpy(T::one(), &g);
        }
        grad.scale(inv_n);
        grad.axpy(self.mu, x);
        Ok((value * inv_n + self.mu / T::lit(2.0) * x.norm_sq(), grad))
    }

    pub fn value(&self, x: &Point<T>) -> Result<T> {
        self.value_grad(x).map(|(v, _)| v)
    }
}
