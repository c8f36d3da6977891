//! Certificates for the inequalities satisfied by `Q_j^p`: Finner-type
//! bounds over uniform covers, comparison with the sphere, log-concavity of
//! the normalized profile, and the random-volume consequences.

mod certify;
mod cover;
mod randvol;

pub use certify::{
    certify_diagonal_monotone, certify_finner, certify_isoperimetric, certify_logconcavity, certify_sphere_ratio,
    sphere_ratio_chain, CertificateReport, LogConcavityReport, MethodTags, SphereRatioChain, EXACT_TOLERANCE,
};
pub use cover::{validate_cover, CoverFile, UniformCover};
pub use randvol::{
    corollary_check, randvol_exact, randvol_expectation, reverse_holder_report, sphere_expectation, vitale_table,
    Law, LawKind, ReverseHolderReport, VitaleRow,
};
