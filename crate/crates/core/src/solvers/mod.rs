//! Reference IFO algorithms. Every solver touches the objective only through
//! [`Ifo::query`] and the public constants `(n, mu, L)`; the `mu/2 ||x||^2`
//! term is applied in closed form.

mod batch;
pub(crate) mod incremental;
mod trace;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkernel::Point;
use crate::oracle::{ComponentOracle, Ifo};
use crate::scalar::Scalar;

pub use batch::{run_agm, run_cg, run_gd};
pub use incremental::{run_sag, run_saga, run_sgd, run_svrg};
pub use trace::{RunTrace, TraceSample};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    Gd,
    Agm,
    Cg,
    Sgd,
    Sag,
    Svrg,
    Saga,
}

impl SolverKind {
    pub const ALL: [SolverKind; 7] = [
        SolverKind::Gd,
        SolverKind::Agm,
        SolverKind::Cg,
        SolverKind::Sgd,
        SolverKind::Sag,
        SolverKind::Svrg,
        SolverKind::Saga,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Gd => "gd",
            SolverKind::Agm => "agm",
            SolverKind::Cg => "cg",
            SolverKind::Sgd => "sgd",
            SolverKind::Sag => "sag",
            SolverKind::Svrg => "svrg",
            SolverKind::Saga => "saga",
        }
    }

    /// Whether the query sequence is a function of the oracle answers alone.
    pub fn is_deterministic(self) -> bool {
        matches!(self, SolverKind::Gd | SolverKind::Agm | SolverKind::Cg)
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SolverKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidParameter {
                name: "solver",
                reason: format!("unknown solver {s:?}"),
            })
    }
}

/// Settings of one run. Unset fields take the per-method defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub kind: SolverKind,
    /// Maximum number of IFO calls; a run stops at the last update it can
    /// complete within the budget.
    pub budget: usize,
    pub step: Option<f64>,
    /// SVRG inner-loop length.
    pub epoch_len: Option<usize>,
    pub seed: u64,
    /// Strong-convexity estimate for momentum and step rules (default `mu`).
    pub mu_eff: Option<f64>,
    /// Smoothness estimate (default `L`).
    pub l_eff: Option<f64>,
    /// Calls between recorded samples (default `max(n, budget / 1000)`).
    pub sample_every: Option<usize>,
}

impl SolverConfig {
    pub fn new(kind: SolverKind, budget: usize) -> Self {
        Self {
            kind,
            budget,
            step: None,
            epoch_len: None,
            seed: 0,
            mu_eff: None,
            l_eff: None,
            sample_every: None,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_step(mut self, step: f64) -> Self {
        self.step = Some(step);
        self
    }

    pub fn with_sample_every(mut self, calls: usize) -> Self {
        self.sample_every = Some(calls);
        self
    }

    pub fn is_deterministic(&self) -> bool {
        self.kind.is_deterministic()
    }

    pub fn validate(&self) -> Result<()> {
        if self.budget == 0 {
            return Err(Error::InvalidParameter {
                name: "budget",
                reason: "must be positive".into(),
            });
        }
        for (name, v) in [("step", self.step), ("mu_eff", self.mu_eff), ("l_eff", self.l_eff)] {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(Error::InvalidParameter {
                        name,
                        reason: format!("must be positive and finite, got {v}"),
                    });
                }
            }
        }
        if self.epoch_len == Some(0) {
            return Err(Error::InvalidParameter {
                name: "epoch_len",
                reason: "must be positive".into(),
            });
        }
        Ok(())
    }

    pub(crate) fn sample_interval(&self, n: usize) -> usize {
        self.sample_every
            .unwrap_or_else(|| n.max(self.budget.div_ceil(1000)))
            .max(1)
    }
}

/// Runs the configured solver from the origin.
pub fn run<T: Scalar, O: ComponentOracle<T>>(config: &SolverConfig, ifo: &mut Ifo<T, O>) -> Result<RunTrace<T>> {
    let x0 = Point::zeros(ifo.dim());
    run_from(config, ifo, x0)
}

/// Runs the configured solver from `x0`.
pub fn run_from<T: Scalar, O: ComponentOracle<T>>(
    config: &SolverConfig,
    ifo: &mut Ifo<T, O>,
    x0: Point<T>,
) -> Result<RunTrace<T>> {
    config.validate()?;
    x0.check_dim(ifo.dim())?;
    match config.kind {
        SolverKind::Gd => run_gd(config, ifo, x0),
        SolverKind::Agm => run_agm(config, ifo, x0),
        SolverKind::Cg => run_cg(config, ifo, x0),
        SolverKind::Sgd => run_sgd(config, ifo, x0),
        SolverKind::Sag => run_sag(config, ifo, x0),
        SolverKind::Svrg => run_svrg(config, ifo, x0),
        SolverKind::Saga => run_saga(config, ifo, x0),
    }
}

/// Calls made by this run so far.
pub(crate) struct Budget {
    start: usize,
    limit: usize,
}

impl Budget {
    pub(crate) fn new<T: Scalar, O: ComponentOracle<T>>(ifo: &Ifo<T, O>, limit: usize) -> Self {
        Self {
            start: ifo.calls(),
            limit,
        }
    }

    pub(crate) fn used<T: Scalar, O: ComponentOracle<T>>(&self, ifo: &Ifo<T, O>) -> usize {
        ifo.calls() - self.start
    }

    pub(crate) fn allows<T: Scalar, O: ComponentOracle<T>>(&self, ifo: &Ifo<T, O>, calls: usize) -> bool {
        self.used(ifo) + calls <= self.limit
    }
}

/// `f'(x) = mu x + (1/n) sum_i g_i'(x)` from `n` IFO calls.
pub(crate) fn full_gradient<T: Scalar, O: ComponentOracle<T>>(
    ifo: &mut Ifo<T, O>,
    x: &Point<T>,
) -> Result<Point<T>> {
    let n = ifo.n();
    let mut g = Point::zeros(x.dim());
    for i in 0..n {
        let (_, gi) = ifo.query(i, x)?;
        g.axpy(T::one(), &gi);
    }
    g.scale(T::from_usize_lossy(n).recip());
    g.axpy(ifo.mu(), x);
    Ok(g)
}

pub(crate) fn param<T: Scalar>(v: Option<f64>, default: T) -> T {
    v.map(T::lit).unwrap_or(default)
}
