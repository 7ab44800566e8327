use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::numkernel::Point;
use crate::oracle::{ComponentOracle, Ifo};
use crate::scalar::Scalar;
use crate::solvers::trace::Recorder;
use crate::solvers::{param, Budget, RunTrace, SolverConfig};

fn rng_for(config: &SolverConfig) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(config.seed)
}

/// Stochastic gradient `x <- x - eta_k (g_i'(x) + mu x)` with `i` uniform and
/// `eta_k = min(1/L, 2/(mu (k + k0)))`, `k0 = 2 kappa`.
pub fn run_sgd<T: Scalar, O: ComponentOracle<T>>(
    config: &SolverConfig,
    ifo: &mut Ifo<T, O>,
    x0: Point<T>,
) -> Result<RunTrace<T>> {
    let n = ifo.n();
    let budget = Budget::new(ifo, config.budget);
    let mu = param(config.mu_eff, ifo.mu());
    let l = param(config.l_eff, ifo.smoothness());
    let cap = param(config.step, l.recip());
    let k0 = T::lit(2.0) * l / mu;
    let mut rng = rng_for(config);
    let mut rec = Recorder::new(config.sample_interval(n));
    let mut x = x0;
    rec.observe(0, &x);
    let mut k = 0usize;
    while budget.allows(ifo, 1) {
        let i = rng.random_range(0..n);
        let (_, mut g) = ifo.query(i, &x)?;
        g.axpy(ifo.mu(), &x);
        let eta = cap.min(T::lit(2.0) / (mu * (T::from_usize_lossy(k) + k0)));
        x.axpy(-eta, &g);
        k += 1;
        rec.observe(budget.used(ifo), &x);
    }
    Ok(rec.finish("sgd", Some(config.seed), budget.used(ifo), x))
}

/// Gradient table of the incremental methods: `table[i]` is `g_i'` at the
/// last point component `i` was queried at, `sum` is their running sum.
pub(crate) struct GradientTable<T> {
    table: Vec<Point<T>>,
    sum: Point<T>,
}

impl<T: Scalar> GradientTable<T> {
    pub(crate) fn zeros(n: usize, dim: usize) -> Self {
        Self {
            table: vec![Point::zeros(dim); n],
            sum: Point::zeros(dim),
        }
    }

    /// Replaces entry `i`, returning the old one.
    pub(crate) fn replace(&mut self, i: usize, g: Point<T>) -> Point<T> {
        let old = std::mem::replace(&mut self.table[i], g);
        self.sum.axpy(-T::one(), &old);
        self.sum.axpy(T::one(), &self.table[i]);
        old
    }

    pub(crate) fn sum(&self) -> &Point<T> {
        &self.sum
    }

    #[cfg(test)]
    pub(crate) fn entry(&self, i: usize) -> &Point<T> {
        &self.table[i]
    }
}

/// Stochastic average gradient: `x <- x - eta (mu x + (1/n) sum_j y_j)`
/// with the table entry of the sampled index refreshed first; default
/// `eta = 1/(16 L)`, table initialized at zero.
pub fn run_sag<T: Scalar, O: ComponentOracle<T>>(
    config: &SolverConfig,
    ifo: &mut Ifo<T, O>,
    x0: Point<T>,
) -> Result<RunTrace<T>> {
    let n = ifo.n();
    let budget = Budget::new(ifo, config.budget);
    let l = param(config.l_eff, ifo.smoothness());
    let step = param(config.step, (T::lit(16.0) * l).recip());
    let inv_n = T::from_usize_lossy(n).recip();
    let mu = ifo.mu();
    let mut rng = rng_for(config);
    let mut table = GradientTable::zeros(n, x0.dim());
    let mut rec = Recorder::new(config.sample_interval(n));
    let mut x = x0;
    rec.observe(0, &x);
    while budget.allows(ifo, 1) {
        let i = rng.random_range(0..n);
        let (_, g) = ifo.query(i, &x)?;
        table.replace(i, g);
        let mut d = table.sum().scaled(inv_n);
        d.axpy(mu, &x);
        x.axpy(-step, &d);
        rec.observe(budget.used(ifo), &x);
    }
    Ok(rec.finish("sag", Some(config.seed), budget.used(ifo), x))
}

/// SAGA: `x <- x - eta (g_i'(x) - y_i + (1/n) sum_j y_j + mu x)`, then
/// `y_i <- g_i'(x)`; default `eta = 1/(3L)`, table initialized at zero.
pub fn run_saga<T: Scalar, O: ComponentOracle<T>>(
    config: &SolverConfig,
    ifo: &mut Ifo<T, O>,
    x0: Point<T>,
) -> Result<RunTrace<T>> {
    let n = ifo.n();
    let budget = Budget::new(ifo, config.budget);
    let l = param(config.l_eff, ifo.smoothness());
    let step = param(config.step, (T::lit(3.0) * l).recip());
    let inv_n = T::from_usize_lossy(n).recip();
    let mu = ifo.mu();
    let mut rng = rng_for(config);
    let mut table = GradientTable::zeros(n, x0.dim());
    let mut rec = Recorder::new(config.sample_interval(n));
    let mut x = x0;
    rec.observe(0, &x);
    while budget.allows(ifo, 1) {
        let i = rng.random_range(0..n);
        let (_, g) = ifo.query(i, &x)?;
        let mut d = g.clone();
        d.axpy(inv_n, table.sum());
        let old = table.replace(i, g);
        d.axpy(-T::one(), &old);
        d.axpy(mu, &x);
        x.axpy(-step, &d);
        rec.observe(budget.used(ifo), &x);
    }
    Ok(rec.finish("saga", Some(config.seed), budget.used(ifo), x))
}

/// SVRG with stored anchor gradients: every epoch spends `n` calls at the
/// anchor, then `m` single-call steps
/// `x <- x - eta (g_i'(x) - g_i'(anchor) + mean_j g_j'(anchor) + mu x)`.
/// Defaults `eta = 1/(10L)`, `m = 2n + ceil(kappa)`.
pub fn run_svrg<T: Scalar, O: ComponentOracle<T>>(
    config: &SolverConfig,
    ifo: &mut Ifo<T, O>,
    x0: Point<T>,
) -> Result<RunTrace<T>> {
    let n = ifo.n();
    let budget = Budget::new(ifo, config.budget);
    let mu = ifo.mu();
    let l = param(config.l_eff, ifo.smoothness());
    let step = param(config.step, (T::lit(10.0) * l).recip());
    let kappa = (l / param(config.mu_eff, mu)).to_f64_lossy();
    let m = config.epoch_len.unwrap_or(2 * n + kappa.ceil() as usize);
    let inv_n = T::from_usize_lossy(n).recip();
    let mut rng = rng_for(config);
    let mut rec = Recorder::new(config.sample_interval(n));
    let mut x = x0;
    rec.observe(0, &x);
    'outer: while budget.allows(ifo, n + 1) {
        let anchor = x.clone();
        let mut anchor_grads = Vec::with_capacity(n);
        let mut mean = Point::zeros(x.dim());
        for i in 0..n {
            let (_, g) = ifo.query(i, &anchor)?;
            mean.axpy(T::one(), &g);
            anchor_grads.push(g);
        }
        mean.scale(inv_n);
        rec.observe(budget.used(ifo), &x);
        for _ in 0..m {
            if !budget.allows(ifo, 1) {
                break 'outer;
            }
            let i = rng.random_range(0..n);
            let (_, mut d) = ifo.query(i, &x)?;
            d.axpy(-T::one(), &anchor_grads[i]);
            d.axpy(T::one(), &mean);
            d.axpy(mu, &x);
            x.axpy(-step, &d);
            rec.observe(budget.used(ifo), &x);
        }
    }
    Ok(rec.finish("svrg", Some(config.seed), budget.used(ifo), x))
}
