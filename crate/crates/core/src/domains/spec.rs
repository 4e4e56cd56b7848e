use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::matcore::BlockShape;

/// The nc-domains this crate knows how to query.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum DomainKind {
    /// `{ x : |x^j| < 1 for all j }`
    MatrixPolydisk { d: usize },
    /// `{ x : |gamma(x)| < 1 }` with `d = p q`.
    RpqBall { p: usize, q: usize },
    /// `{ x : exists s, |s| |s^-1| <= r_n and |s^-1 x s| < 1 }`, `d = 1`.
    ///
    /// `radii[n - 1]` is `r_n`; levels past the end reuse the last radius.
    SpectralDisk { radii: Vec<f64> },
    /// `{ (x, y, z) : |xy - yx| < 1 }`. Not nc-bounded.
    CommutatorDomain {},
}

/// Levels at which a domain is non-empty.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum LevelFilter {
    #[default]
    All,
    /// The additive sub-semigroup of the positive integers generated by
    /// these values.
    Generators(Vec<usize>),
}

/// Closed description of one nc-domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    #[serde(flatten)]
    pub kind: DomainKind,
    #[serde(default)]
    pub levels: LevelFilter,
}

impl LevelFilter {
    /// Whether `level` is a sum of generators. Unbounded coin-problem DP up to
    /// `level`.
    pub fn contains(&self, level: usize) -> bool {
        match self {
            LevelFilter::All => level >= 1,
            LevelFilter::Generators(gens) => {
                if level == 0 {
                    return false;
                }
                let mut reachable = vec![false; level + 1];
                reachable[0] = true;
                for m in 1..=level {
                    reachable[m] = gens.iter().any(|&g| g <= m && reachable[m - g]);
                }
                reachable[level]
            }
        }
    }

    fn validate(&self) -> Result<()> {
        if let LevelFilter::Generators(gens) = self {
            if gens.is_empty() || gens.contains(&0) {
                return Err(Error::InvalidParameter(
                    "level generators must be a non-empty list of positive integers".into(),
                ));
            }
        }
        Ok(())
    }
}

impl Serialize for LevelFilter {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Gens<'a> {
            generators: &'a [usize],
        }
        match self {
            LevelFilter::All => serializer.serialize_str("all"),
            LevelFilter::Generators(g) => Gens { generators: g }.serialize(serializer),
        }
    }
}

impl<'de> Deserialize<'de> for LevelFilter {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Name(String),
            Gens { generators: Vec<usize> },
        }
        match Raw::deserialize(deserializer)? {
            Raw::Name(s) if s == "all" => Ok(LevelFilter::All),
            Raw::Name(s) => Err(serde::de::Error::custom(format!(
                "unknown level filter {s:?}, expected \"all\" or {{\"generators\": [...]}}"
            ))),
            Raw::Gens { generators } => Ok(LevelFilter::Generators(generators)),
        }
    }
}

impl DomainKind {
    pub fn arity(&self) -> usize {
        match self {
            DomainKind::MatrixPolydisk { d } => *d,
            DomainKind::RpqBall { p, q } => p * q,
            DomainKind::SpectralDisk { .. } => 1,
            DomainKind::CommutatorDomain {} => 3,
        }
    }
}

impl DomainSpec {
    pub fn new(kind: DomainKind) -> Result<Self> {
        let spec = Self {
            kind,
            levels: LevelFilter::All,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn polydisk(d: usize) -> Result<Self> {
        Self::new(DomainKind::MatrixPolydisk { d })
    }

    pub fn rpq(p: usize, q: usize) -> Result<Self> {
        Self::new(DomainKind::RpqBall { p, q })
    }

    pub fn spectral_disk(radii: Vec<f64>) -> Result<Self> {
        Self::new(DomainKind::SpectralDisk { radii })
    }

    pub fn commutator() -> Self {
        Self {
            kind: DomainKind::CommutatorDomain {},
            levels: LevelFilter::All,
        }
    }

    /// Restrict to the levels of the semigroup generated by `generators`.
    pub fn restricted_to(mut self, generators: Vec<usize>) -> Result<Self> {
        self.levels = LevelFilter::Generators(generators);
        self.validate()?;
        Ok(self)
    }

    pub fn unrestricted(&self) -> Self {
        Self {
            kind: self.kind.clone(),
            levels: LevelFilter::All,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.levels.validate()?;
        match &self.kind {
            DomainKind::MatrixPolydisk { d } if *d == 0 => {
                Err(Error::InvalidParameter("polydisk needs d >= 1".into()))
            }
            DomainKind::RpqBall { p, q } => BlockShape::new(*p, *q).map(|_| ()),
            DomainKind::SpectralDisk { radii } => {
                if radii.first() != Some(&1.0) {
                    return Err(Error::InvalidParameter(
                        "spectral disk radii must start with r_1 = 1".into(),
                    ));
                }
                if radii.iter().any(|r| !r.is_finite()) || radii.windows(2).any(|w| w[1] < w[0]) {
                    return Err(Error::InvalidParameter(
                        "spectral disk radii must be finite and non-decreasing".into(),
                    ));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn arity(&self) -> usize {
        self.kind.arity()
    }

    pub fn block_shape(&self) -> Option<BlockShape> {
        match self.kind {
            DomainKind::RpqBall { p, q } => Some(BlockShape { p, q }),
            _ => None,
        }
    }

    pub fn has_level(&self, level: usize) -> bool {
        self.levels.contains(level)
    }

    /// `r_n` for the spectral disk.
    pub fn radius_at(&self, level: usize) -> Option<f64> {
        match &self.kind {
            DomainKind::SpectralDisk { radii } => {
                radii.get(level.max(1) - 1).or(radii.last()).copied()
            }
            _ => None,
        }
    }

    /// The constant `M_n` with `|x^j| < M_n` for every member at level `n`,
    /// or `None` when the domain is not nc-bounded.
    pub fn level_bound(&self, level: usize) -> Option<f64> {
        match &self.kind {
            DomainKind::MatrixPolydisk { .. } | DomainKind::RpqBall { .. } => Some(1.0),
            // |x| <= |s| |s^-1 x s| |s^-1| < r_n
            DomainKind::SpectralDisk { .. } => self.radius_at(level),
            DomainKind::CommutatorDomain {} => None,
        }
    }

    pub fn is_nc_bounded(&self) -> bool {
        !matches!(self.kind, DomainKind::CommutatorDomain {})
    }

    /// Invariant under `x -> e^{i t} x`.
    pub fn is_circular(&self) -> bool {
        matches!(
            self.kind,
            DomainKind::MatrixPolydisk { .. } | DomainKind::RpqBall { .. }
        )
    }

    pub fn contains_origin(&self, level: usize) -> bool {
        self.has_level(level)
    }
}
