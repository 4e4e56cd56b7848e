//! nc-domains: descriptors, membership oracles, random members and the
//! direct-sum / unitary-conjugation closure check.

mod closure;
mod membership;
mod sampling;
mod spec;
mod spectral;

pub use closure::nc_closure_check;
pub use membership::{membership, Certificate, Membership, MembershipVerdict};
pub use sampling::{disguised_spectral_member, near_identity, Sampler};
pub use spec::{DomainKind, DomainSpec, LevelFilter};
pub use spectral::{certificate_values, verify_certificate, SpectralSearch};

/// Convenience wrapper for [`SpectralSearch::search`] with default settings.
pub fn spectral_disk_search(x: &crate::ComplexMatrix, r: f64) -> crate::Result<MembershipVerdict> {
    SpectralSearch::default().search(x, r)
}
