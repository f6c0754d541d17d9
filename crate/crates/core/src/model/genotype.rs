use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The closed, bounded interval of admissible allelic traits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraitSpace {
    pub min: f64,
    pub max: f64,
}

impl TraitSpace {
    pub fn new(min: f64, max: f64) -> Result<Self> {
        let space = Self { min, max };
        space.validate()?;
        Ok(space)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.min.is_finite() && self.max.is_finite() && self.min < self.max) {
            return Err(Error::InvalidParameter(format!(
                "trait space requires finite min < max, got [{}, {}]",
                self.min, self.max
            )));
        }
        Ok(())
    }

    pub fn contains(&self, u: f64) -> bool {
        self.min <= u && u <= self.max
    }

    pub fn check(&self, u: f64) -> Result<()> {
        if self.contains(u) {
            Ok(())
        } else {
            Err(Error::OutOfSpace {
                value: u,
                min: self.min,
                max: self.max,
            })
        }
    }

    pub fn width(&self) -> f64 {
        self.max - self.min
    }

    pub fn clamp(&self, u: f64) -> f64 {
        u.clamp(self.min, self.max)
    }

    /// Distance on the allelic trait space.
    pub fn distance(a: f64, b: f64) -> f64 {
        (a - b).abs()
    }
}

/// Unordered pair of allelic traits, stored canonically with `u1 <= u2`.
///
/// Equality and hashing use the bit patterns of the canonical pair, so
/// `(a, b)` and `(b, a)` are the same key.
#[derive(Clone, Copy, Serialize, Deserialize)]
#[serde(into = "[f64; 2]", try_from = "[f64; 2]")]
pub struct Genotype {
    u1: f64,
    u2: f64,
}

impl Genotype {
    pub fn new(a: f64, b: f64) -> Self {
        // `+ 0.0` folds -0.0 into 0.0 so equal values share one bit pattern
        let (a, b) = (a + 0.0, b + 0.0);
        if a.total_cmp(&b) == Ordering::Greater {
            Self { u1: b, u2: a }
        } else {
            Self { u1: a, u2: b }
        }
    }

    pub fn homozygote(u: f64) -> Self {
        Self::new(u, u)
    }

    pub fn u1(&self) -> f64 {
        self.u1
    }

    pub fn u2(&self) -> f64 {
        self.u2
    }

    pub fn alleles(&self) -> [f64; 2] {
        [self.u1, self.u2]
    }

    pub fn is_homozygous(&self) -> bool {
        self.u1 == self.u2
    }

    pub fn carries(&self, u: f64) -> bool {
        self.u1 == u || self.u2 == u
    }

    /// Number of copies of allele `u` (0, 1 or 2).
    pub fn copies_of(&self, u: f64) -> u32 {
        (self.u1 == u) as u32 + (self.u2 == u) as u32
    }
}

impl PartialEq for Genotype {
    fn eq(&self, other: &Self) -> bool {
        self.u1.to_bits() == other.u1.to_bits() && self.u2.to_bits() == other.u2.to_bits()
    }
}

impl Eq for Genotype {}

impl Hash for Genotype {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.u1.to_bits().hash(state);
        self.u2.to_bits().hash(state);
    }
}

impl PartialOrd for Genotype {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Genotype {
    fn cmp(&self, other: &Self) -> Ordering {
        self.u1
            .total_cmp(&other.u1)
            .then(self.u2.total_cmp(&other.u2))
    }
}

impl fmt::Debug for Genotype {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.u1, self.u2)
    }
}

impl From<Genotype> for [f64; 2] {
    fn from(g: Genotype) -> Self {
        g.alleles()
    }
}

impl TryFrom<[f64; 2]> for Genotype {
    type Error = String;

    fn try_from(v: [f64; 2]) -> std::result::Result<Self, String> {
        if v.iter().all(|x| x.is_finite()) {
            Ok(Genotype::new(v[0], v[1]))
        } else {
            Err(format!("non-finite allelic trait in {v:?}"))
        }
    }
}
