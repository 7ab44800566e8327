//! Closed-form rate and complexity calculators.

mod complexity;
mod rates;
mod spectrum;

pub use complexity::{
    concentration_check, gamma_agm, gamma_asdca, gamma_sag, regime_table, ComplexityReport,
    ConcentrationCheck, ProblemStats, Regime,
};
pub use rates::{
    component_kappa, lower_bound_calls, lower_bound_curve, magic_bound_margin, rate_q, LogValue,
    RateReport,
};
pub use spectrum::{empirical_spectrum, Spectrum};
