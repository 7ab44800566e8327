use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: format!("must be positive and finite, got {v}"),
        })
    }
}

/// Batch-complexity prefactor of accelerated dual coordinate ascent:
/// `1 + sqrt((kappa - 1)/n)`.
pub fn gamma_asdca(kappa: f64, n: usize) -> Result<f64> {
    if !(kappa >= 1.0) {
        return Err(Error::InvalidParameter {
            name: "kappa",
            reason: format!("must be >= 1, got {kappa}"),
        });
    }
    positive("n", n as f64)?;
    Ok(1.0 + ((kappa - 1.0) / n as f64).sqrt())
}

/// `1 + L/(mu_f n)`.
pub fn gamma_sag(l: f64, mu_f: f64, n: usize) -> Result<f64> {
    positive("L", l)?;
    positive("mu_f", mu_f)?;
    positive("n", n as f64)?;
    Ok(1.0 + l / (mu_f * n as f64))
}

/// `sqrt(L_f / mu_f)`.
pub fn gamma_agm(l_f: f64, mu_f: f64) -> Result<f64> {
    positive("L_f", l_f)?;
    positive("mu_f", mu_f)?;
    Ok((l_f / mu_f).sqrt())
}

/// Both sides of the sample-size sufficiency condition
/// `c^2 d/n + C^2 log(d/delta)/n <= 1/(8 kappa_f^2)`, plus the deviation
/// radius `z = c sqrt(d/n) + C sqrt(log(2/delta)/n)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConcentrationCheck {
    pub satisfied: bool,
    pub lhs: f64,
    pub rhs: f64,
    pub z: f64,
    /// `max(z, z^2)`: relative deviation bound on the empirical covariance.
    pub deviation_factor: f64,
    pub note: &'static str,
}

pub const LOG_TERM_NOTE: &str =
    "sufficiency condition uses log(d/delta) while the deviation radius z uses log(2/delta); both evaluated as written";

pub fn concentration_check(d: usize, n: usize, delta: f64, c: f64, big_c: f64, kappa_f: f64) -> ConcentrationCheck {
    let (d, n) = (d as f64, n as f64);
    let lhs = c * c * d / n + big_c * big_c * (d / delta).ln() / n;
    let rhs = 1.0 / (8.0 * kappa_f * kappa_f);
    let z = c * (d / n).sqrt() + big_c * ((2.0 / delta).ln() / n).sqrt();
    ConcentrationCheck {
        satisfied: lhs <= rhs,
        lhs,
        rhs,
        z,
        deviation_factor: z.max(z * z),
        note: LOG_TERM_NOTE,
    }
}

/// Constants describing a finite sum, as needed by [`regime_table`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ProblemStats {
    pub n: usize,
    pub mu: f64,
    pub l: f64,
    pub mu_f: f64,
    pub l_f: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Regime {
    /// `kappa <= 4n`
    #[serde(rename = "kappa=O(n)")]
    KappaOrderN,
    #[serde(rename = "kappa>>n")]
    KappaLarge,
}

impl Regime {
    pub fn of(kappa: f64, n: usize) -> Self {
        if kappa <= 4.0 * n as f64 {
            Self::KappaOrderN
        } else {
            Self::KappaLarge
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::KappaOrderN => "kappa=O(n)",
            Self::KappaLarge => "kappa>>n",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComplexityReport {
    pub n: usize,
    pub kappa: f64,
    pub mu_f: f64,
    pub l_f: f64,
    pub kappa_f: f64,
    pub gamma_asdca: f64,
    pub gamma_sag: f64,
    pub gamma_agm: f64,
    pub regime: Regime,
    /// Methods by increasing prefactor; empty when `n = 1`.
    pub ordering: Vec<String>,
    pub notes: Vec<String>,
}

pub const KAPPA_NOTATION_NOTE: &str =
    "the large-kappa discussion of the dual coordinate bound mentions kappa_i, read here as kappa";

/// All three prefactors, the regime label and the predicted ordering.
pub fn regime_table(stats: ProblemStats) -> Result<ComplexityReport> {
    positive("mu", stats.mu)?;
    let kappa = stats.l / stats.mu;
    let gamma_asdca = gamma_asdca(kappa, stats.n)?;
    let gamma_sag = gamma_sag(stats.l, stats.mu_f, stats.n)?;
    let gamma_agm = gamma_agm(stats.l_f, stats.mu_f)?;
    let mut ordering = Vec::new();
    if stats.n > 1 {
        let mut ranked = [("ASDCA", gamma_asdca), ("SAG", gamma_sag), ("AGM", gamma_agm)];
        ranked.sort_by(|a, b| a.1.total_cmp(&b.1));
        ordering = ranked.iter().map(|(name, _)| name.to_string()).collect();
    }
    Ok(ComplexityReport {
        n: stats.n,
        kappa,
        mu_f: stats.mu_f,
        l_f: stats.l_f,
        kappa_f: stats.l_f / stats.mu_f,
        gamma_asdca,
        gamma_sag,
        gamma_agm,
        regime: Regime::of(kappa, stats.n),
        ordering,
        notes: vec![KAPPA_NOTATION_NOTE.to_string()],
    })
}

impl ComplexityReport {
    /// Fixed-width table: one row per method, one column per regime, with the
    /// computed prefactor in the column of the active regime.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let rows = [
            ("ASDCA, SPDC", self.gamma_asdca, "O(log 1/eps)", "O(sqrt(kappa/n) log 1/eps)"),
            ("SAG", self.gamma_sag, "O(log 1/eps)", "O(log 1/eps)"),
            ("AGM", self.gamma_agm, "O(sqrt(kappa_f) log 1/eps)", "O(sqrt(kappa_f) log 1/eps)"),
        ];
        let _ = writeln!(out, "{:<14}{:<40}{:<40}", "Algorithm", "kappa=O(n)", "kappa>>n");
        let _ = writeln!(out, "{}", "-".repeat(94));
        for (name, gamma, small, large) in rows {
            let (a, b) = match self.regime {
                Regime::KappaOrderN => (format!("{small} [G={gamma:.4}]"), large.to_string()),
                Regime::KappaLarge => (small.to_string(), format!("{large} [G={gamma:.4}]")),
            };
            let _ = writeln!(out, "{name:<14}{a:<40}{b:<40}");
        }
        let _ = writeln!(
            out,
            "n={} kappa={:.4} kappa_f={:.4} mu_f={:.6e} L_f={:.6e} regime={}",
            self.n,
            self.kappa,
            self.kappa_f,
            self.mu_f,
            self.l_f,
            self.regime.label()
        );
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gamma_examples() {
        assert_relative_eq!(gamma_asdca(8.0, 7).unwrap(), 2.0);
        assert_eq!(gamma_asdca(1.0, 3).unwrap(), 1.0);
        assert_eq!(gamma_agm(2.5, 2.5).unwrap(), 1.0);
        assert_relative_eq!(gamma_sag(10.0, 0.5, 4).unwrap(), 6.0);
        assert!(gamma_sag(-1.0, 1.0, 1).is_err());
        assert!(gamma_agm(1.0, 0.0).is_err());
        assert!(gamma_asdca(0.5, 1).is_err());
    }

    #[test]
    fn asdca_shape_is_monotone() {
        let n = 13;
        let mut prev = 0.0;
        for k in 1..100 {
            let v = gamma_asdca(1.0 + k as f64 * 3.0, n).unwrap() * (n as f64).sqrt();
            assert!(v > prev);
            prev = v;
        }
    }

    #[test]
    fn concentration_hand_evaluation() {
        let c = concentration_check(50, 2000, 0.01, 1.0, 1.0, 1.5);
        assert_relative_eq!(c.lhs, 50.0 / 2000.0 + 5000f64.ln() / 2000.0, max_relative = 1e-15);
        assert_relative_eq!(c.lhs, 0.02926, max_relative = 1e-3);
        assert_relative_eq!(c.rhs, 1.0 / 18.0, max_relative = 1e-15);
        assert!(c.satisfied);
    }

    #[test]
    fn concentration_limits() {
        assert!(concentration_check(50, 100_000_000, 0.01, 1.0, 1.0, 3.0).satisfied);
        let mut prev = f64::INFINITY;
        for k in 1..20 {
            let r = concentration_check(10, 1000, 0.05, 1.0, 1.0, k as f64).rhs;
            assert!(r < prev);
            prev = r;
        }
    }

    #[test]
    fn regime_labels() {
        let small = regime_table(ProblemStats { n: 100, mu: 1.0, l: 50.0, mu_f: 2.0, l_f: 3.0 }).unwrap();
        assert_eq!(small.regime, Regime::KappaOrderN);
        assert_eq!(small.ordering.len(), 3);
        let large = regime_table(ProblemStats { n: 10, mu: 1e-6, l: 1.0, mu_f: 0.1, l_f: 0.3 }).unwrap();
        assert_eq!(large.regime, Regime::KappaLarge);
        assert!(large.gamma_asdca > 10.0 * large.gamma_sag);
        let single = regime_table(ProblemStats { n: 1, mu: 1.0, l: 5.0, mu_f: 2.0, l_f: 5.0 }).unwrap();
        assert!(single.ordering.is_empty());
        assert_relative_eq!(single.gamma_sag, 1.0 + 5.0 / 2.0);
        assert!(large.to_table().contains("kappa>>n"));
    }
}
