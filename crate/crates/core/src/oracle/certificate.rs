use serde::Serialize;

use crate::analysis::LogValue;
use crate::error::Result;
use crate::numkernel::Point;
use crate::oracle::ifo::{Ifo, Transcript};
use crate::problems::FiniteSumProblem;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateStatus {
    /// Deterministic algorithm, observed error at or above the bound.
    Pass,
    /// Deterministic algorithm, observed error below the bound.
    Fail,
    /// Randomized algorithm: the bound is measured but not asserted, since
    /// the adversary only defeats algorithms whose queries are fixed by the
    /// answers they receive.
    NotAsserted,
}

/// Per-component part of a certificate.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComponentCertificate {
    pub index: usize,
    pub calls: usize,
    pub span_size: usize,
    /// `||x*_i||` of the untruncated component minimizer.
    pub gamma: f64,
    pub q: f64,
    /// `dist(x*_i, Span(S_i))`.
    pub distance: LogValue,
    /// `gamma_i q^{2 K_i}`.
    pub distance_bound: LogValue,
    pub distance_ok: bool,
    /// `||x*_i - Q_i^T x_K||`.
    pub error: f64,
}

/// Scalar, JSON-ready part of a certificate. Errors and bounds are relative
/// to `||x*||`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CertificateSummary {
    pub n: usize,
    pub dim: usize,
    pub mu: f64,
    pub l: f64,
    pub kappa: f64,
    pub q: f64,
    pub gamma: f64,
    pub calls: usize,
    pub per_component_calls: Vec<usize>,
    pub observed: LogValue,
    pub bound: LogValue,
    /// `sqrt(sum_i gamma_i^2 q^{4 K_i}) / gamma`, never below `bound` by convexity.
    pub aggregate_bound: LogValue,
    /// Raw comparison `observed >= bound (1 - slack)` in log domain.
    pub holds: bool,
    pub status: CertificateStatus,
    pub unqueried_assigned: Option<usize>,
    pub replay_verified: Option<bool>,
    pub replay_divergence: Option<usize>,
    pub components: Vec<ComponentCertificate>,
}

/// Finalized adversarial instance together with the measured error of one
/// algorithm output and the lower bound it must respect.
#[derive(Debug)]
pub struct Certificate<T: Scalar> {
    pub problem: FiniteSumProblem<T>,
    pub minimizer: Point<T>,
    pub gamma: T,
    pub output: Point<T>,
    pub summary: CertificateSummary,
}

impl<T: Scalar> Certificate<T> {
    /// Relative slack of the log-domain comparison.
    pub const REL_SLACK: f64 = 1e-6;

    #[allow(clippy::too_many_arguments)]
    pub(crate) fn assemble(
        problem: FiniteSumProblem<T>,
        minimizer: Point<T>,
        gamma: T,
        output: Point<T>,
        q: f64,
        per_component_calls: Vec<usize>,
        log_observed: f64,
        log_bound: f64,
        components: Vec<ComponentCertificate>,
        unqueried_assigned: Option<usize>,
    ) -> Self {
        let gamma_f = gamma.to_f64_lossy();
        let log_aggregate = log_sum_exp(components.iter().filter(|c| c.gamma > 0.0).map(|c| {
            2.0 * c.gamma.ln() + 4.0 * c.calls as f64 * q.ln()
        }));
        let holds = log_observed >= log_bound + (-Self::REL_SLACK).ln_1p();
        let summary = CertificateSummary {
            n: problem.n(),
            dim: problem.dim(),
            mu: problem.mu().to_f64_lossy(),
            l: problem.l().to_f64_lossy(),
            kappa: problem.kappa().to_f64_lossy(),
            q,
            gamma: gamma_f,
            calls: per_component_calls.iter().sum(),
            per_component_calls,
            observed: LogValue::from_log(log_observed),
            bound: LogValue::from_log(log_bound),
            aggregate_bound: LogValue::from_log(0.5 * log_aggregate - gamma_f.ln()),
            holds,
            status: if holds {
                CertificateStatus::Pass
            } else {
                CertificateStatus::Fail
            },
            unqueried_assigned,
            replay_verified: None,
            replay_divergence: None,
            components,
        };
        Self {
            problem,
            minimizer,
            gamma,
            output,
            summary,
        }
    }

    /// Sets the status for an algorithm: only deterministic algorithms get
    /// the bound asserted.
    pub fn assess(&mut self, deterministic: bool) -> CertificateStatus {
        self.summary.status = match (deterministic, self.summary.holds) {
            (false, _) => CertificateStatus::NotAsserted,
            (true, true) => CertificateStatus::Pass,
            (true, false) => CertificateStatus::Fail,
        };
        self.summary.status
    }

    pub fn status(&self) -> CertificateStatus {
        self.summary.status
    }

    pub fn record_replay(&mut self, outcome: &ReplayOutcome) {
        self.summary.replay_verified = Some(outcome.reproduced);
        self.summary.replay_divergence = outcome.first_divergence;
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.summary).expect("summary serializes")
    }
}

fn log_sum_exp(terms: impl Iterator<Item = f64>) -> f64 {
    let terms: Vec<f64> = terms.collect();
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
}

/// Result of re-running an algorithm against a finalized instance.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReplayOutcome {
    pub reproduced: bool,
    /// First call whose query or answer differs; the transcript length when
    /// one run stopped early.
    pub first_divergence: Option<usize>,
    pub output_matches: bool,
}

/// Re-runs `run` on the certificate's finalized problem behind a fresh IFO
/// and compares the transcript and the output with the adversarial run bit
/// for bit.
pub fn transcript_replay_check<T, F>(
    run: F,
    certificate: &Certificate<T>,
    transcript: &Transcript<T>,
) -> Result<ReplayOutcome>
where
    T: Scalar,
    F: FnOnce(&mut Ifo<T, &FiniteSumProblem<T>>) -> Result<Point<T>>,
{
    let mut ifo = Ifo::new(&certificate.problem);
    let output = run(&mut ifo)?;
    let first_divergence = transcript.first_divergence(ifo.transcript());
    let output_matches = output.bit_eq(&certificate.output);
    Ok(ReplayOutcome {
        reproduced: first_divergence.is_none() && output_matches,
        first_divergence,
        output_matches,
    })
}
