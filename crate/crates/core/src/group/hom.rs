use super::{FreeAbelian, Group, GroupSpec, Lattice};
use crate::error::{Error, Result};
use crate::walk::SparseMeasure;

/// Group homomorphism between two supported families.
pub trait Homomorphism: Send + Sync {
    type Source: Group;
    type Target: Group;

    fn source(&self) -> &Self::Source;
    fn target(&self) -> &Self::Target;
    fn apply(&self, g: &<Self::Source as Group>::Elem) -> <Self::Target as Group>::Elem;

    /// `P'(A) = P(ψ⁻¹A)`.
    fn push_forward(
        &self,
        mu: &SparseMeasure<<Self::Source as Group>::Elem>,
    ) -> SparseMeasure<<Self::Target as Group>::Elem> {
        SparseMeasure::accumulate(mu.sorted_atoms().into_iter().map(|(g, p)| (self.apply(g), p)))
    }

    /// Whether every generator maps to a generator or the identity, which
    /// makes `ψ` 1-Lipschitz for word lengths.
    fn is_lipschitz_on_generators(&self) -> bool {
        let target_gens = self.target().generators();
        let e = self.target().identity();
        self.source().generators().iter().all(|s| {
            let image = self.apply(s);
            image == e || target_gens.contains(&image)
        })
    }
}

/// `ψ = id`.
#[derive(Clone, Debug)]
pub struct IdentityHom<G>(pub G);

impl<G: Group> Homomorphism for IdentityHom<G> {
    type Source = G;
    type Target = G;

    fn source(&self) -> &G {
        &self.0
    }

    fn target(&self) -> &G {
        &self.0
    }

    fn apply(&self, g: &G::Elem) -> G::Elem {
        g.clone()
    }
}

/// How a homomorphism onto ℤ is specified.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HomDescriptor {
    /// Free group: generator `i` maps to 1, all others to 0.
    KeepGenerator(usize),
    /// Wreath products: the cursor position.
    CursorProjection,
    /// ℤ^d or Heisenberg: coordinate `i` of the abelianization.
    Coordinate(usize),
    /// Explicit image of each abelianization coordinate.
    Images(Vec<i64>),
}

/// Surjection `G → ℤ` factoring through the abelianization.
#[derive(Clone, Debug)]
pub struct ProjectionToZ<G> {
    source: G,
    target: FreeAbelian,
    images: Vec<i64>,
}

impl<G: Group> ProjectionToZ<G> {
    /// Validates the descriptor against the source's abelian relations.
    ///
    /// Torsion coordinates must map to 0 (ℤ is torsion-free) and the images
    /// must generate ℤ.
    pub fn new(source: G, descriptor: &HomDescriptor) -> Result<Self> {
        let orders = source.abelian_orders();
        let rank = orders.len();
        let images = match (descriptor, source.spec()) {
            (HomDescriptor::KeepGenerator(i), GroupSpec::Free { rank: k }) if *i < k as usize => {
                (0..rank).map(|j| i64::from(j == *i)).collect()
            }
            (HomDescriptor::KeepGenerator(_), _) => {
                return Err(Error::Homomorphism(format!(
                    "generator selection needs a free group with that generator, got {}",
                    source.spec()
                )))
            }
            (HomDescriptor::CursorProjection, GroupSpec::Lamplighter { .. } | GroupSpec::WreathZZ) => {
                vec![1, 0]
            }
            (HomDescriptor::CursorProjection, spec) => {
                return Err(Error::Homomorphism(format!("{spec} has no cursor")))
            }
            (HomDescriptor::Coordinate(i), _) if *i < rank => {
                (0..rank).map(|j| i64::from(j == *i)).collect()
            }
            (HomDescriptor::Coordinate(i), spec) => {
                return Err(Error::Homomorphism(format!("{spec} has no coordinate {i}")))
            }
            (HomDescriptor::Images(v), _) => v.clone(),
        };
        if images.len() != rank {
            return Err(Error::Homomorphism(format!(
                "expected {rank} images, got {}",
                images.len()
            )));
        }
        for (order, image) in orders.iter().zip(&images) {
            if order.is_some() && *image != 0 {
                return Err(Error::Homomorphism(
                    "a torsion generator must map to 0 in ℤ".to_string(),
                ));
            }
        }
        if images.iter().fold(0i64, |g, &x| gcd(g, x)) != 1 {
            return Err(Error::Homomorphism("images do not generate ℤ".to_string()));
        }
        Ok(Self {
            source,
            target: FreeAbelian::new(1),
            images,
        })
    }

    /// The integer image of `g`.
    pub fn value(&self, g: &G::Elem) -> i64 {
        self.source
            .abelianize(g)
            .iter()
            .zip(&self.images)
            .map(|(a, b)| a * b)
            .sum()
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl<G: Group> Homomorphism for ProjectionToZ<G> {
    type Source = G;
    type Target = FreeAbelian;

    fn source(&self) -> &G {
        &self.source
    }

    fn target(&self) -> &FreeAbelian {
        &self.target
    }

    fn apply(&self, g: &G::Elem) -> Lattice {
        smallvec::smallvec![self.value(g)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{FreeGroup, Heisenberg, LampElem, Wreath};

    #[test]
    fn free_group_kill_one_generator() {
        let f2 = FreeGroup::new(2);
        let psi = ProjectionToZ::new(f2, &HomDescriptor::KeepGenerator(0)).unwrap();
        assert_eq!(psi.value(&f2.word("abAb")), 0);
        assert_eq!(psi.value(&f2.word("aab")), 2);
        assert!(psi.is_lipschitz_on_generators());
    }

    #[test]
    fn cursor_projection() {
        let w = Wreath::integer_lamps();
        let psi = ProjectionToZ::new(w, &HomDescriptor::CursorProjection).unwrap();
        assert_eq!(psi.value(&LampElem::new(2, &[(0, 1)])), 2);
    }

    #[test]
    fn torsion_must_die() {
        let l2 = Wreath::lamplighter(2);
        assert!(ProjectionToZ::new(l2, &HomDescriptor::Images(vec![1, 1])).is_err());
        // ℤ ≀ ℤ has no torsion: total lamp sum is a valid target coordinate
        let w = Wreath::integer_lamps();
        assert!(ProjectionToZ::new(w, &HomDescriptor::Images(vec![0, 1])).is_ok());
    }

    #[test]
    fn rejects_non_surjective_and_misfit_descriptors() {
        let f2 = FreeGroup::new(2);
        assert!(ProjectionToZ::new(f2, &HomDescriptor::Images(vec![2, 0])).is_err());
        assert!(ProjectionToZ::new(f2, &HomDescriptor::CursorProjection).is_err());
        assert!(ProjectionToZ::new(Heisenberg, &HomDescriptor::KeepGenerator(0)).is_err());
        assert!(ProjectionToZ::new(Heisenberg, &HomDescriptor::Coordinate(1)).is_ok());
    }
}
