//! IFO call accounting, the resisting adversaries and their certificates.

mod certificate;
mod ifo;
mod resisting;

pub use certificate::{
    transcript_replay_check, Certificate, CertificateStatus, CertificateSummary,
    ComponentCertificate, ReplayOutcome,
};
pub use ifo::{ifo_query, ComponentOracle, Ifo, Transcript, TranscriptEntry};
pub use resisting::{
    resist_finalize, resist_query, resisting_ifo_finalize, resisting_ifo_query, ResistingIfo,
    ResistingState,
};

#[cfg(test)]
mod tests;
