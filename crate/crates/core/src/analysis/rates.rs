use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Lower-bound rate for `n` components with surrogate condition number `kappa`:
/// `q = (sqrt(kappa_c) - 1)/(sqrt(kappa_c) + 1)` with `kappa_c = 1 + (kappa - 1)/n`.
pub fn rate_q<T: Scalar>(kappa: T, n: usize) -> Result<T> {
    if !(kappa >= T::one()) {
        return Err(Error::InvalidParameter {
            name: "kappa",
            reason: format!("must be >= 1, got {kappa}"),
        });
    }
    if n == 0 {
        return Err(Error::InvalidParameter {
            name: "n",
            reason: "must be >= 1".into(),
        });
    }
    let kc = component_kappa(kappa, n);
    let s = kc.sqrt();
    Ok((s - T::one()) / (s + T::one()))
}

/// `kappa_c = 1 + (kappa - 1)/n`.
pub fn component_kappa<T: Scalar>(kappa: T, n: usize) -> T {
    T::one() + (kappa - T::one()) / T::from_usize_lossy(n)
}

/// A bound value kept in log domain; `value` underflows to zero when tiny.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LogValue {
    pub log_value: f64,
    pub value: f64,
}

impl LogValue {
    pub fn from_log(log_value: f64) -> Self {
        Self {
            log_value,
            value: log_value.exp(),
        }
    }

    pub fn from_value(value: f64) -> Self {
        Self {
            log_value: value.ln(),
            value,
        }
    }

    /// Whether the underflow-free representation is needed.
    pub fn underflows(&self) -> bool {
        self.log_value < (1e-300f64).ln()
    }
}

/// `gamma q^{2t}` with `t = 0` for `K < n` and `t = K/n` otherwise.
pub fn lower_bound_curve<T: Scalar>(gamma: T, kappa: T, n: usize, calls: usize) -> Result<LogValue> {
    let log_gamma = gamma.to_f64_lossy().ln();
    if calls < n {
        return Ok(LogValue::from_log(log_gamma));
    }
    let q = rate_q(kappa, n)?.to_f64_lossy();
    if q == 0.0 {
        return Ok(LogValue {
            log_value: f64::NEG_INFINITY,
            value: 0.0,
        });
    }
    let t = calls as f64 / n as f64;
    Ok(LogValue::from_log(log_gamma + 2.0 * t * q.ln()))
}

/// Call counts needed for relative accuracy `eps`: the exact threshold where
/// `q^{2K/n} <= eps` and the closed form that follows from
/// [`magic_bound_margin`], `max(n, ceil(sqrt(n (kappa-1)) ln(1/eps) / 4))`.
/// The exact threshold is never below the closed form.
pub fn lower_bound_calls(n: usize, kappa: f64, eps: f64) -> Result<(usize, usize)> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter {
            name: "eps",
            reason: format!("must lie in (0, 1), got {eps}"),
        });
    }
    let q = rate_q(kappa, n)?;
    if q == 0.0 {
        return Ok((n, n));
    }
    let log_inv_eps = -eps.ln();
    let exact = (n as f64 * log_inv_eps / (2.0 * -q.ln())).ceil() as usize;
    let asym = ((n as f64 * (kappa - 1.0)).sqrt() / 4.0 * log_inv_eps).ceil() as usize;
    Ok((exact.max(n), asym.max(n)))
}

/// `log((sqrt(x)-1)/(sqrt(x)+1)) + 2/sqrt(x-1)`, positive for every `x > 1`.
pub fn magic_bound_margin(x: f64) -> Result<f64> {
    if !(x > 1.0) || !x.is_finite() {
        return Err(Error::InvalidParameter {
            name: "x",
            reason: format!("must be a finite value > 1, got {x}"),
        });
    }
    let s = x.sqrt();
    let xm1 = x - 1.0;
    // (s-1)/(s+1) = (x-1)/(s+1)^2, free of cancellation near x = 1
    let ratio = xm1 / ((s + 1.0) * (s + 1.0));
    let log_q = if ratio < 0.5 {
        ratio.ln()
    } else {
        (-2.0 / (s + 1.0)).ln_1p()
    };
    Ok(log_q + 2.0 / xm1.sqrt())
}

/// Summary of the rate quantities for one `(kappa, n, gamma)` setting.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateReport {
    pub kappa: f64,
    pub n: usize,
    pub kappa_c: f64,
    pub q: f64,
    pub gamma: f64,
    pub log_q: f64,
    pub eps: f64,
    pub k_min_exact: usize,
    pub k_min_asymptotic: usize,
}

impl RateReport {
    pub fn new(kappa: f64, n: usize, gamma: f64, eps: f64) -> Result<Self> {
        let q = rate_q(kappa, n)?;
        let (k_min_exact, k_min_asymptotic) = lower_bound_calls(n, kappa, eps)?;
        Ok(Self {
            kappa,
            n,
            kappa_c: component_kappa(kappa, n),
            q,
            gamma,
            log_q: q.ln(),
            eps,
            k_min_exact,
            k_min_asymptotic,
        })
    }
}
