//! Group arithmetic for the supported families, breadth-first balls, and
//! homomorphisms used for pushforward walks.
//!
//! Every family implements [`Group`] with its own compact element type, so
//! the convolution engine can be monomorphised per family. Runtime selection
//! goes through [`GroupSpec`] and the [`with_group!`](crate::with_group) macro.

mod abelian;
mod ball;
mod free;
mod heisenberg;
mod hom;
mod wreath;

use std::fmt;
use std::hash::Hash;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use abelian::{FreeAbelian, Lattice};
pub use ball::{compute_ball, BallTable, GrowthTable, Lengths, MemoryBudget, WordLength};
pub use free::{FreeGroup, Word};
pub use heisenberg::{Heisenberg, HeisenbergElem};
pub use hom::{HomDescriptor, Homomorphism, IdentityHom, ProjectionToZ};
pub use wreath::{LampElem, Wreath};

/// Arithmetic of a finitely generated group with a fixed symmetric generating set.
pub trait Group: Clone + Send + Sync + fmt::Debug + 'static {
    /// Canonical element encoding: equal values iff equal group elements.
    type Elem: Clone + Eq + Hash + Ord + fmt::Debug + Send + Sync;

    fn spec(&self) -> GroupSpec;

    fn identity(&self) -> Self::Elem;

    fn multiply(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;

    fn inverse(&self, a: &Self::Elem) -> Self::Elem;

    /// The standard symmetric generating set, deduplicated and sorted.
    fn generators(&self) -> Vec<Self::Elem>;

    /// Word length in closed form, when the family has one.
    fn word_length(&self, _g: &Self::Elem) -> Option<u32> {
        None
    }

    /// Appends the canonical byte encoding of `g`.
    fn encode(&self, g: &Self::Elem, out: &mut Vec<u8>);

    /// Inverse of [`Group::encode`]; rejects non-canonical input.
    fn decode(&self, bytes: &[u8]) -> Result<Self::Elem>;

    /// Image in the abelianization, one integer per abelian generator.
    fn abelianize(&self, g: &Self::Elem) -> Vec<i64>;

    /// Order of each abelianization coordinate (`None` for infinite order).
    fn abelian_orders(&self) -> Vec<Option<u32>>;

    /// Distance-chain description when the lazy walk is radial (free groups).
    fn radial_model(&self) -> Option<RadialModel> {
        None
    }

    fn encode_to_vec(&self, g: &Self::Elem) -> Vec<u8> {
        let mut out = Vec::new();
        self.encode(g, &mut out);
        out
    }

    /// Evaluates a word over the generator list returned by [`Group::generators`].
    fn evaluate_word(&self, letters: &[usize]) -> Self::Elem {
        let gens = self.generators();
        letters
            .iter()
            .fold(self.identity(), |acc, &i| self.multiply(&acc, &gens[i]))
    }
}

/// Simple-walk distance chain on a vertex-transitive tree-like Cayley graph.
///
/// From radius 0 the simple walk always moves out; from radius `r >= 1` it
/// moves out with probability `outward` and back otherwise.
#[derive(Clone, Debug, PartialEq)]
pub struct RadialModel {
    pub outward: f64,
    pub degree: u32,
}

impl RadialModel {
    /// Number of elements at word length `r`.
    pub fn sphere_size(&self, r: usize) -> f64 {
        if r == 0 {
            1.0
        } else {
            let d = self.degree as f64;
            d * (d - 1.0).powi(r as i32 - 1)
        }
    }
}

/// Runtime descriptor of a supported family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum GroupSpec {
    /// ℤ^d with generators ±e_i.
    FreeAbelian { dim: u32 },
    /// Integer Heisenberg group with generators ±x, ±y.
    Heisenberg,
    /// Free group on `rank` letters.
    Free { rank: u32 },
    /// ℤ_m ≀ ℤ with walk-or-switch generators.
    Lamplighter { lamp_order: u32 },
    /// ℤ ≀ ℤ (restricted) with walk-or-increment generators.
    WreathZZ,
}

impl GroupSpec {
    /// File-system friendly name, used in cache and output paths.
    pub fn slug(&self) -> String {
        match self {
            GroupSpec::FreeAbelian { dim } => format!("Z{dim}"),
            GroupSpec::Heisenberg => "heisenberg".into(),
            GroupSpec::Free { rank } => format!("free{rank}"),
            GroupSpec::Lamplighter { lamp_order } => format!("lamplighter{lamp_order}"),
            GroupSpec::WreathZZ => "wreathZZ".into(),
        }
    }
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupSpec::FreeAbelian { dim } => write!(f, "Z^{dim}"),
            GroupSpec::Heisenberg => f.write_str("heisenberg"),
            GroupSpec::Free { rank } => write!(f, "free:{rank}"),
            GroupSpec::Lamplighter { lamp_order } => write!(f, "lamplighter:{lamp_order}"),
            GroupSpec::WreathZZ => f.write_str("wreathZZ"),
        }
    }
}

impl FromStr for GroupSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let err = |reason: &str| Error::ParseSpec {
            input: s.to_string(),
            reason: reason.to_string(),
        };
        let positive = |v: &str, what: &str| -> Result<u32> {
            match v.trim().parse::<u32>() {
                Ok(n) if n >= 1 => Ok(n),
                _ => Err(err(&format!("{what} must be a positive integer"))),
            }
        };
        let t = s.trim();
        if t == "Z" {
            return Ok(GroupSpec::FreeAbelian { dim: 1 });
        }
        if let Some(d) = t.strip_prefix("Z^") {
            return Ok(GroupSpec::FreeAbelian { dim: positive(d, "dimension")? });
        }
        if t.eq_ignore_ascii_case("heisenberg") {
            return Ok(GroupSpec::Heisenberg);
        }
        if t.eq_ignore_ascii_case("wreathZZ") {
            return Ok(GroupSpec::WreathZZ);
        }
        if let Some(k) = t.strip_prefix("free:") {
            return Ok(GroupSpec::Free { rank: positive(k, "rank")? });
        }
        if let Some(m) = t.strip_prefix("lamplighter:") {
            let m = positive(m, "lamp order")?;
            if !(2..=i16::MAX as u32).contains(&m) {
                return Err(err("lamp order must lie in 2..=32767"));
            }
            return Ok(GroupSpec::Lamplighter { lamp_order: m });
        }
        Err(err("expected one of Z^d, heisenberg, free:k, lamplighter:m, wreathZZ"))
    }
}

impl From<GroupSpec> for String {
    fn from(spec: GroupSpec) -> String {
        spec.to_string()
    }
}

impl TryFrom<String> for GroupSpec {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// Binds a concrete [`Group`] for a runtime [`GroupSpec`] and evaluates `body`.
///
/// ```
/// use walklab::{with_group, group::{Group, GroupSpec}};
/// let spec: GroupSpec = "free:2".parse().unwrap();
/// let gens = with_group!(spec, g => g.generators().len());
/// assert_eq!(gens, 4);
/// ```
#[macro_export]
macro_rules! with_group {
    ($spec:expr, $g:ident => $body:expr) => {{
        match $spec {
            $crate::group::GroupSpec::FreeAbelian { dim } => {
                let $g = $crate::group::FreeAbelian::new(dim);
                $body
            }
            $crate::group::GroupSpec::Heisenberg => {
                let $g = $crate::group::Heisenberg;
                $body
            }
            $crate::group::GroupSpec::Free { rank } => {
                let $g = $crate::group::FreeGroup::new(rank);
                $body
            }
            $crate::group::GroupSpec::Lamplighter { lamp_order } => {
                let $g = $crate::group::Wreath::lamplighter(lamp_order);
                $body
            }
            $crate::group::GroupSpec::WreathZZ => {
                let $g = $crate::group::Wreath::integer_lamps();
                $body
            }
        }
    }};
}

pub(crate) fn encoding_error(group: &impl Group, reason: impl Into<String>) -> Error {
    Error::Encoding {
        group: group.spec().to_string(),
        reason: reason.into(),
    }
}

pub(crate) fn read_i64(bytes: &[u8], at: usize) -> Option<i64> {
    bytes
        .get(at..at + 8)
        .map(|b| i64::from_be_bytes(b.try_into().expect("slice of length 8")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_display_round_trip() {
        for s in ["Z^2", "Z^1", "heisenberg", "free:2", "lamplighter:2", "lamplighter:3", "wreathZZ"] {
            let spec: GroupSpec = s.parse().unwrap();
            assert_eq!(spec.to_string(), s);
        }
        assert_eq!("Z".parse::<GroupSpec>().unwrap(), GroupSpec::FreeAbelian { dim: 1 });
    }

    #[test]
    fn parse_rejects_garbage() {
        for s in ["bogus", "Z^0", "free:0", "lamplighter:1", "lamplighter:x", ""] {
            assert!(s.parse::<GroupSpec>().is_err(), "{s} should fail");
        }
    }

    #[test]
    fn radial_sphere_sizes() {
        let m = RadialModel { outward: 0.75, degree: 4 };
        assert_eq!(m.sphere_size(0), 1.0);
        assert_eq!(m.sphere_size(1), 4.0);
        assert_eq!(m.sphere_size(3), 36.0);
    }
}
