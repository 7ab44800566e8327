use crate::analysis::{lower_bound_curve, rate_q, LogValue};
use crate::error::{check_dim, Error, Result};
use crate::numkernel::{dot, q_embed_add, OrthonormalFamily, Point};
use crate::oracle::certificate::{Certificate, ComponentCertificate};
use crate::oracle::ifo::ComponentOracle;
use crate::problems::{
    chain_eval, chain_rate, component_params, guarded_dim, rho_for_norm, ChainComponent, Component,
    FiniteSumProblem, NesterovFunction,
};
use crate::scalar::Scalar;

/// Coefficients below `FLUSH_FACTOR * span_tol * ||y||` are treated as
/// exact zeros when rotating into the family's coordinates.
const FLUSH_FACTOR: f64 = 4.0;

/// Adaptive first-order oracle for a single chain quadratic `N_{mu,L}`.
///
/// Every answer is that of `N(S^T x)` for the orthonormal family `S` built so
/// far; any completion of `S` gives a function consistent with all answers.
#[derive(Clone, Debug)]
pub struct ResistingState<T: Scalar> {
    chain: NesterovFunction<T>,
    family: OrthonormalFamily<T>,
    cursor: usize,
    span_sizes: Vec<usize>,
    span_tol: T,
    flush_tol: T,
}

impl<T: Scalar> ResistingState<T> {
    /// Adversary for `N_{mu,L}` with offset `rho` on `dim` coordinates.
    pub fn new(mu: T, l: T, rho: T, dim: usize) -> Result<Self> {
        let chain = NesterovFunction::new(mu, l, rho, dim)?;
        let span_tol = T::span_tol();
        Ok(Self {
            chain,
            family: OrthonormalFamily::empty(dim),
            cursor: 0,
            span_sizes: Vec::new(),
            span_tol,
            flush_tol: T::lit(FLUSH_FACTOR) * span_tol,
        })
    }

    /// Adversary whose eventual minimizer has norm `gamma`.
    pub fn with_gamma(mu: T, l: T, gamma: T, dim: usize) -> Result<Self> {
        let rho = rho_for_norm(gamma, chain_rate(l / mu))?;
        Self::new(mu, l, rho, dim)
    }

    pub fn chain(&self) -> &NesterovFunction<T> {
        &self.chain
    }
    pub fn dim(&self) -> usize {
        self.chain.dim()
    }
    pub fn family(&self) -> &OrthonormalFamily<T> {
        &self.family
    }
    /// Number of queries answered so far.
    pub fn queries(&self) -> usize {
        self.span_sizes.len()
    }
    /// `|S_k|` after each query.
    pub fn span_sizes(&self) -> &[usize] {
        &self.span_sizes
    }

    /// `(N(S^T x), S N'(S^T x))` after growing `S` by `x` and a fresh direction.
    pub fn query(&mut self, x: &Point<T>) -> Result<(T, Point<T>)> {
        check_dim(self.dim(), x.dim())?;
        let (v, g) = self.query_local(x.as_slice(), T::zero())?;
        Ok((v, Point::from(g)))
    }

    pub(crate) fn query_local(&mut self, y: &[T], shift: T) -> Result<(T, Vec<T>)> {
        let dim = self.dim();
        let required = self.family.len() + 2 + guarded_dim(self.chain.q());
        if required > dim {
            return Err(Error::Capacity {
                queries: self.queries() + 1,
                dim,
                required,
            });
        }
        self.family.extend(&Point::from(y.to_vec()), self.span_tol)?;
        if !self.family.extend_canonical(&mut self.cursor, self.span_tol) {
            return Err(Error::Capacity {
                queries: self.queries() + 1,
                dim,
                required: dim + 1,
            });
        }
        self.span_sizes.push(self.family.len());
        Ok(chain_eval(
            &self.chain,
            Some(self.family.members()),
            y,
            shift,
            self.flush_tol,
        ))
    }

    /// Freezes the adversary with offset `rho`. For a state that was never
    /// queried, `reference` picks the sign of the completed basis so that the
    /// minimizer has non-positive inner product with it.
    fn finalize_with(&self, rho: T, reference: Option<&[T]>) -> Result<FinalChain<T>> {
        let chain = if rho.bit_eq(self.chain.rho()) {
            self.chain
        } else {
            NesterovFunction::new(self.chain.mu(), self.chain.l(), rho, self.dim())?
        };
        let mut basis = self.family.complete()?;
        let coeffs = chain.minimizer().into_vec();
        if let (Some(y), true) = (reference, self.queries() == 0) {
            let proj: T = basis
                .members()
                .iter()
                .zip(&coeffs)
                .map(|(m, &c)| c * dot(m.as_slice(), y))
                .sum();
            if proj > T::zero() {
                basis = basis.negated();
            }
        }
        Ok(FinalChain {
            chain,
            basis,
            coeffs,
            span_len: self.family.len(),
            flush_tol: self.flush_tol,
        })
    }
}

struct FinalChain<T: Scalar> {
    chain: NesterovFunction<T>,
    basis: OrthonormalFamily<T>,
    coeffs: Vec<T>,
    span_len: usize,
    flush_tol: T,
}

impl<T: Scalar> FinalChain<T> {
    /// `||c* - S^T y||^2` accumulated in `f64`.
    fn error_sq(&self, y: &[T]) -> f64 {
        self.basis
            .members()
            .iter()
            .zip(&self.coeffs)
            .map(|(m, &c)| {
                let d = (c - dot(m.as_slice(), y)).to_f64_lossy();
                d * d
            })
            .sum()
    }

    fn norm_sq(&self) -> f64 {
        self.coeffs
            .iter()
            .map(|c| {
                let c = c.to_f64_lossy();
                c * c
            })
            .sum()
    }

    /// `ln dist(x*, Span(S))`: the tail `sum_{j > m} rho^2 q^{2j}` of the
    /// minimizer's coefficients, summed in closed form.
    fn log_span_distance(&self) -> f64 {
        let rho = self.chain.rho().to_f64_lossy();
        let q = self.chain.q().to_f64_lossy();
        let dim = self.chain.dim();
        let m = self.span_len;
        if rho == 0.0 || m >= dim {
            return f64::NEG_INFINITY;
        }
        if q == 0.0 {
            return f64::NEG_INFINITY;
        }
        let lq = q.ln();
        let tail = (-(2.0 * (dim - m) as f64 * lq).exp()).ln_1p();
        let norm = (-(q * q)).ln_1p();
        rho.ln() + (m + 1) as f64 * lq + 0.5 * (tail - norm)
    }

    /// `ln ||x*||` of the untruncated minimizer, `rho q / sqrt(1 - q^2)`.
    fn log_gamma(&self) -> f64 {
        let rho = self.chain.rho().to_f64_lossy();
        let q = self.chain.q().to_f64_lossy();
        if rho == 0.0 || q == 0.0 {
            return f64::NEG_INFINITY;
        }
        rho.ln() + q.ln() - 0.5 * (-(q * q)).ln_1p()
    }

    fn component_certificate(&self, index: usize, calls: usize, y: &[T]) -> ComponentCertificate {
        let q = self.chain.q().to_f64_lossy();
        let log_gamma = self.log_gamma();
        let distance = LogValue::from_log(self.log_span_distance());
        let distance_bound = LogValue::from_log(log_gamma + 2.0 * calls as f64 * q.ln());
        let distance_ok = log_gamma == f64::NEG_INFINITY
            || distance.log_value >= distance_bound.log_value + (-Certificate::<T>::REL_SLACK).ln_1p();
        ComponentCertificate {
            index,
            calls,
            span_size: self.span_len,
            gamma: log_gamma.exp(),
            q,
            distance,
            distance_bound,
            distance_ok,
            error: self.error_sq(y).sqrt(),
        }
    }
}

fn restrict<T: Scalar>(i: usize, n: usize, x: &[T]) -> Vec<T> {
    x.iter().skip(i).step_by(n).copied().collect()
}

/// One query to the single-function adversary.
pub fn resist_query<T: Scalar>(state: &mut ResistingState<T>, x: &Point<T>) -> Result<(T, Point<T>)> {
    state.query(x)
}

/// Freezes a single-function adversary into `f(x) = N(S̄^T x)` written as a
/// one-component problem with strong-convexity weight `mu`, and certifies
/// `||x* - x_K|| >= ||x*|| q^{2K}` for the output `x_K`.
pub fn resist_finalize<T: Scalar>(state: &ResistingState<T>, x_k: &Point<T>) -> Result<Certificate<T>> {
    check_dim(state.dim(), x_k.dim())?;
    let fc = state.finalize_with(state.chain.rho(), Some(x_k.as_slice()))?;
    let mu = state.chain.mu();
    let l = state.chain.l();
    let comp = ChainComponent::rotated(0, 1, fc.chain, mu, fc.basis.members().to_vec(), fc.flush_tol);
    let x_star = fc.basis.apply_slice(&fc.coeffs);
    let problem = FiniteSumProblem::new(mu, l, vec![Box::new(comp) as Box<dyn Component<T>>])?
        .with_minimizer(x_star.clone())?;
    let calls = state.queries();
    let comp_cert = fc.component_certificate(0, calls, x_k.as_slice());
    let observed = 0.5 * (fc.error_sq(x_k.as_slice()).ln() - fc.norm_sq().ln());
    let bound = lower_bound_curve(T::one(), l / mu, 1, calls)?.log_value;
    Ok(Certificate::assemble(
        problem,
        x_star,
        T::lit(fc.log_gamma().exp()),
        x_k.clone(),
        fc.chain.q().to_f64_lossy(),
        vec![calls],
        observed,
        bound,
        vec![comp_cert],
        None,
    ))
}

/// Incremental adversary over `n` interleaved blocks: component `i` acts on
/// `Q_i^T x` through its own [`ResistingState`] with parameters
/// `(n mu, L - mu + n mu)`, so that every `g_i` is revealed only through
/// queries to index `i`.
#[derive(Clone, Debug)]
pub struct ResistingIfo<T: Scalar> {
    n: usize,
    mu: T,
    l: T,
    gamma: T,
    q: T,
    planned_calls: usize,
    shift: T,
    states: Vec<ResistingState<T>>,
}

impl<T: Scalar> ResistingIfo<T> {
    /// `planned_calls` is the budget the algorithm will be given. With fewer
    /// planned calls than components the queried components carry no offset
    /// and the whole norm `gamma` is placed on an unqueried one at finalize.
    pub fn new(
        n: usize,
        mu: T,
        l: T,
        gamma: T,
        dim_per_component: usize,
        planned_calls: usize,
    ) -> Result<Self> {
        if !(l > mu) || !(mu > T::zero()) {
            return Err(Error::InvalidParameter {
                name: "mu/L",
                reason: format!("need 0 < mu < L, got mu = {mu}, L = {l}"),
            });
        }
        if !(gamma > T::zero()) {
            return Err(Error::InvalidParameter {
                name: "gamma",
                reason: format!("must be positive, got {gamma}"),
            });
        }
        let q = rate_q(l / mu, n)?;
        let required = guarded_dim(q);
        if dim_per_component < required {
            return Err(Error::DimensionTooSmall {
                dim: dim_per_component,
                required,
                reason: format!("per-component tail guard for q = {q}"),
            });
        }
        let (c_mu, c_l) = component_params(n, mu, l);
        let rho = if planned_calls < n {
            T::zero()
        } else {
            rho_for_norm(gamma / T::from_usize_lossy(n).sqrt(), q)?
        };
        let state = ResistingState::new(c_mu, c_l, rho, dim_per_component)?;
        Ok(Self {
            n,
            mu,
            l,
            gamma,
            q,
            planned_calls,
            shift: c_mu,
            states: vec![state; n],
        })
    }

    /// Single-function adversary (`n = 1`) behind the IFO interface.
    pub fn single(mu: T, l: T, gamma: T, dim: usize, planned_calls: usize) -> Result<Self> {
        Self::new(1, mu, l, gamma, dim, planned_calls)
    }

    pub fn gamma(&self) -> T {
        self.gamma
    }
    /// Per-component rate `q`.
    pub fn q(&self) -> T {
        self.q
    }
    pub fn planned_calls(&self) -> usize {
        self.planned_calls
    }
    pub fn dim_per_component(&self) -> usize {
        self.states[0].dim()
    }
    pub fn state(&self, i: usize) -> Option<&ResistingState<T>> {
        self.states.get(i)
    }
    pub fn states(&self) -> &[ResistingState<T>] {
        &self.states
    }

    /// `(h_i(Q_i^T x), Q_i h_i'(Q_i^T x))`.
    pub fn query(&mut self, i: usize, x: &Point<T>) -> Result<(T, Point<T>)> {
        if i >= self.n {
            return Err(Error::IndexOutOfRange { index: i, count: self.n });
        }
        check_dim(self.n * self.dim_per_component(), x.dim())?;
        let y = restrict(i, self.n, x.as_slice());
        let (v, g_local) = self.states[i].query_local(&y, self.shift)?;
        let mut g = Point::zeros(x.dim());
        q_embed_add(i, self.n, &g_local, g.as_mut_slice());
        Ok((v, g))
    }

    /// Freezes every component into a concrete hard instance and certifies
    /// the output `x_K` against `gamma q^{2K/n}` (`gamma` when `K < n`).
    pub fn finalize(&self, x_k: &Point<T>) -> Result<Certificate<T>> {
        let n = self.n;
        let local_dim = self.dim_per_component();
        check_dim(n * local_dim, x_k.dim())?;
        let per_calls: Vec<usize> = self.states.iter().map(ResistingState::queries).collect();
        let calls: usize = per_calls.iter().sum();

        let assigned = if self.planned_calls < n {
            let j = per_calls.iter().position(|&k| k == 0).ok_or_else(|| {
                Error::InvalidParameter {
                    name: "planned_calls",
                    reason: format!(
                        "planned {} < n = {n} calls, but every component was queried",
                        self.planned_calls
                    ),
                }
            })?;
            Some((j, rho_for_norm(self.gamma, self.q)?))
        } else {
            None
        };

        let mut x_star = Point::zeros(n * local_dim);
        let mut components: Vec<Box<dyn Component<T>>> = Vec::with_capacity(n);
        let mut comp_certs = Vec::with_capacity(n);
        let mut err_sq = 0.0;
        let mut norm_sq = 0.0;
        for (i, state) in self.states.iter().enumerate() {
            let y = restrict(i, n, x_k.as_slice());
            let rho = match assigned {
                Some((j, rho_j)) if j == i => rho_j,
                _ => state.chain.rho(),
            };
            let fc = state.finalize_with(rho, Some(&y))?;
            let local_star = fc.basis.apply_slice(&fc.coeffs);
            q_embed_add(i, n, local_star.as_slice(), x_star.as_mut_slice());
            err_sq += fc.error_sq(&y);
            norm_sq += fc.norm_sq();
            comp_certs.push(fc.component_certificate(i, per_calls[i], &y));
            components.push(Box::new(ChainComponent::rotated(
                i,
                n,
                fc.chain,
                self.shift,
                fc.basis.members().to_vec(),
                fc.flush_tol,
            )));
        }
        let problem = FiniteSumProblem::new(self.mu, self.l, components)?.with_minimizer(x_star.clone())?;
        let observed = 0.5 * (err_sq.ln() - norm_sq.ln());
        let bound = lower_bound_curve(T::one(), self.l / self.mu, n, calls)?.log_value;
        Ok(Certificate::assemble(
            problem,
            x_star,
            self.gamma,
            x_k.clone(),
            self.q.to_f64_lossy(),
            per_calls,
            observed,
            bound,
            comp_certs,
            assigned.map(|(j, _)| j),
        ))
    }
}

impl<T: Scalar> ComponentOracle<T> for ResistingIfo<T> {
    fn n(&self) -> usize {
        self.n
    }
    fn dim(&self) -> usize {
        self.n * self.dim_per_component()
    }
    fn mu(&self) -> T {
        self.mu
    }
    fn smoothness(&self) -> T {
        self.l
    }
    fn evaluate(&mut self, i: usize, x: &Point<T>) -> Result<(T, Point<T>)> {
        self.query(i, x)
    }
}

/// One query to the incremental adversary.
pub fn resisting_ifo_query<T: Scalar>(
    adversary: &mut ResistingIfo<T>,
    i: usize,
    x: &Point<T>,
) -> Result<(T, Point<T>)> {
    adversary.query(i, x)
}

/// Finalizes the incremental adversary; see [`ResistingIfo::finalize`].
pub fn resisting_ifo_finalize<T: Scalar>(
    adversary: &ResistingIfo<T>,
    x_k: &Point<T>,
) -> Result<Certificate<T>> {
    adversary.finalize(x_k)
}
