use serde::{Deserialize, Serialize};

use super::spec::{DomainKind, DomainSpec};
use super::spectral::SpectralSearch;
use crate::error::{Error, Result};
use crate::matcore::{BlockShape, ComplexMatrix, NcPoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Membership {
    Yes,
    No,
    Undetermined,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Certificate {
    /// Value of the defining norm functional.
    NormValue { value: f64 },
    /// Similarity `s` with `|s| |s^-1| = condition` and `|s^-1 x s| = contracted_norm`.
    Similarity {
        s: ComplexMatrix,
        condition: f64,
        contracted_norm: f64,
    },
    /// Spectral radius; rejects when at least 1.
    SpectralRadius { value: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MembershipVerdict {
    pub member: Membership,
    pub certificate: Option<Certificate>,
    /// Signed distance to the defining inequality, `1 - value`. Unset when
    /// the level is filtered out.
    pub margin: Option<f64>,
}

impl MembershipVerdict {
    pub(crate) fn from_norm(value: f64) -> Self {
        Self {
            member: if value < 1.0 {
                Membership::Yes
            } else {
                Membership::No
            },
            certificate: Some(Certificate::NormValue { value }),
            margin: Some(1.0 - value),
        }
    }

    pub fn is_member(&self) -> bool {
        self.member == Membership::Yes
    }
}

impl DomainSpec {
    pub fn membership(&self, x: &NcPoint) -> Result<MembershipVerdict> {
        membership(self, x)
    }

    pub fn is_member(&self, x: &NcPoint) -> Result<bool> {
        Ok(self.membership(x)?.is_member())
    }

    /// The norm functional whose strict sublevel set `< 1` is the domain.
    /// `None` for the spectral disk, whose membership is not a norm test.
    pub fn defining_value(&self, x: &NcPoint) -> Result<Option<f64>> {
        self.check_arity(x)?;
        Ok(match &self.kind {
            DomainKind::MatrixPolydisk { .. } => Some(x.max_norm()),
            DomainKind::RpqBall { p, q } => {
                Some(x.gamma_pack(BlockShape { p: *p, q: *q })?.operator_norm())
            }
            DomainKind::CommutatorDomain {} => {
                Some(ComplexMatrix::commutator(x.var(0), x.var(1)).operator_norm())
            }
            DomainKind::SpectralDisk { .. } => None,
        })
    }

    pub(crate) fn check_arity(&self, x: &NcPoint) -> Result<()> {
        if x.arity() != self.arity() {
            return Err(Error::DimensionMismatch(format!(
                "domain expects d = {}, point has d = {}",
                self.arity(),
                x.arity()
            )));
        }
        Ok(())
    }
}

pub fn membership(spec: &DomainSpec, x: &NcPoint) -> Result<MembershipVerdict> {
    spec.check_arity(x)?;
    if !spec.has_level(x.level()) {
        return Ok(MembershipVerdict {
            member: Membership::No,
            certificate: None,
            margin: None,
        });
    }
    match spec.defining_value(x)? {
        Some(value) => Ok(MembershipVerdict::from_norm(value)),
        None => {
            let r = spec.radius_at(x.level()).expect("spectral disk has radii");
            SpectralSearch::default().search(x.var(0), r)
        }
    }
}
