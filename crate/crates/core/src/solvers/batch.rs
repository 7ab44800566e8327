use crate::error::{Error, Result};
use crate::numkernel::Point;
use crate::oracle::{ComponentOracle, Ifo};
use crate::scalar::Scalar;
use crate::solvers::trace::Recorder;
use crate::solvers::{full_gradient, param, Budget, RunTrace, SolverConfig};

/// Gradient descent `x <- x - eta f'(x)`, default `eta = 1/L`.
pub fn run_gd<T: Scalar, O: ComponentOracle<T>>(
    config: &SolverConfig,
    ifo: &mut Ifo<T, O>,
    x0: Point<T>,
) -> Result<RunTrace<T>> {
    let n = ifo.n();
    let budget = Budget::new(ifo, config.budget);
    let step = param(config.step, param(config.l_eff, ifo.smoothness()).recip());
    let mut rec = Recorder::new(config.sample_interval(n));
    let mut x = x0;
    rec.observe(0, &x);
    while budget.allows(ifo, n) {
        let g = full_gradient(ifo, &x)?;
        x.axpy(-step, &g);
        rec.observe(budget.used(ifo), &x);
    }
    Ok(rec.finish("gd", None, budget.used(ifo), x))
}

/// Constant-momentum accelerated gradient:
/// `y = x_k + beta (x_k - x_{k-1})`, `x_{k+1} = y - f'(y) / L_eff`,
/// `beta = (sqrt(kappa_eff) - 1)/(sqrt(kappa_eff) + 1)`.
pub fn run_agm<T: Scalar, O: ComponentOracle<T>>(
    config: &SolverConfig,
    ifo: &mut Ifo<T, O>,
    x0: Point<T>,
) -> Result<RunTrace<T>> {
    let n = ifo.n();
    let budget = Budget::new(ifo, config.budget);
    let mu = param(config.mu_eff, ifo.mu());
    let l = param(config.l_eff, ifo.smoothness());
    let step = param(config.step, l.recip());
    let s = (l / mu).sqrt();
    let beta = (s - T::one()) / (s + T::one());
    let mut rec = Recorder::new(config.sample_interval(n));
    let mut x = x0.clone();
    let mut x_prev = x0;
    rec.observe(0, &x);
    while budget.allows(ifo, n) {
        let mut y = x.clone();
        y.axpy(beta, &x.sub(&x_prev));
        let g = full_gradient(ifo, &y)?;
        y.axpy(-step, &g);
        x_prev = std::mem::replace(&mut x, y);
        rec.observe(budget.used(ifo), &x);
    }
    Ok(rec.finish("agm", None, budget.used(ifo), x))
}

/// Relative mismatch between predicted and observed gradients above which
/// the objective is declared non-quadratic.
const LINEARITY_TOL: f64 = 1e-6;

/// Conjugate gradient on a quadratic objective. Hessian-vector products come
/// from gradient differences `f'(x + s p) - f'(x)`, so each iteration costs
/// two full gradients: one at the probe point and one at the new iterate,
/// which also checks that the gradient is affine.
pub fn run_cg<T: Scalar, O: ComponentOracle<T>>(
    config: &SolverConfig,
    ifo: &mut Ifo<T, O>,
    x0: Point<T>,
) -> Result<RunTrace<T>> {
    let n = ifo.n();
    let budget = Budget::new(ifo, config.budget);
    let mut rec = Recorder::new(config.sample_interval(n));
    let mut x = x0;
    rec.observe(0, &x);
    if !budget.allows(ifo, n) {
        return Ok(rec.finish("cg", None, 0, x));
    }
    let mut g = full_gradient(ifo, &x)?;
    rec.observe(budget.used(ifo), &x);
    let mut p = g.scaled(-T::one());
    let mut gg = g.norm_sq();
    while budget.allows(ifo, 2 * n) && gg > T::zero() {
        let p_norm = p.norm();
        let s = x.norm().max(T::one()) / p_norm;
        let mut probe = x.clone();
        probe.axpy(s, &p);
        let g_probe = full_gradient(ifo, &probe)?;
        let mut ap = g_probe.sub(&g);
        ap.scale(s.recip());
        let curvature = p.dot(&ap);
        if !(curvature > T::zero()) {
            return Err(Error::NotQuadratic {
                mismatch: f64::INFINITY,
            });
        }
        let alpha = gg / curvature;
        x.axpy(alpha, &p);
        let g_new = full_gradient(ifo, &x)?;
        let mut predicted = g.clone();
        predicted.axpy(alpha, &ap);
        let scale = g_probe.norm() + g.norm() + g_new.norm();
        let mismatch = (g_new.distance(&predicted) / scale).to_f64_lossy();
        if mismatch > LINEARITY_TOL {
            return Err(Error::NotQuadratic { mismatch });
        }
        let gg_new = g_new.norm_sq();
        let beta = gg_new / gg;
        p.scale(beta);
        p.axpy(-T::one(), &g_new);
        g = g_new;
        gg = gg_new;
        rec.observe(budget.used(ifo), &x);
    }
    Ok(rec.finish("cg", None, budget.used(ifo), x))
}
