//! Exact rational walk, used as an oracle for the float pipeline.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::group::Group;

pub type RationalMeasure<E> = BTreeMap<E, BigRational>;

/// `P = ½δ_e + ½·uniform(S)` with exact masses.
pub fn rational_step_measure<G: Group>(group: &G) -> RationalMeasure<G::Elem> {
    let gens = group.generators();
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let each = BigRational::new(BigInt::one(), BigInt::from(2 * gens.len()));
    let mut out = BTreeMap::new();
    out.insert(group.identity(), half);
    for s in gens {
        out.insert(s, each.clone());
    }
    out
}

/// `(μ * P)(x) = Σ_y μ(y) P(y⁻¹x)` in exact arithmetic.
pub fn rational_convolve<G: Group>(
    group: &G,
    mu: &RationalMeasure<G::Elem>,
    step: &RationalMeasure<G::Elem>,
) -> RationalMeasure<G::Elem> {
    let mut out: RationalMeasure<G::Elem> = BTreeMap::new();
    for (y, p) in mu {
        for (s, q) in step {
            *out.entry(group.multiply(y, s)).or_insert_with(BigRational::zero) += p * q;
        }
    }
    out.retain(|_, p| !p.is_zero());
    out
}

/// `P^(0), …, P^(last_step)` exactly.
pub fn rational_walk<G: Group>(group: &G, last_step: usize) -> Vec<RationalMeasure<G::Elem>> {
    let step = rational_step_measure(group);
    let mut current = BTreeMap::from([(group.identity(), BigRational::one())]);
    let mut out = Vec::with_capacity(last_step + 1);
    for n in 0..=last_step {
        if n > 0 {
            current = rational_convolve(group, &current, &step);
        }
        out.push(current.clone());
    }
    out
}

/// Nearest float; exact for dyadic values within range.
pub fn to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::FreeAbelian;

    #[test]
    fn third_step_return_on_z() {
        let z = FreeAbelian::new(1);
        let walk = rational_walk(&z, 3);
        let zero: crate::group::Lattice = smallvec::smallvec![0];
        assert_eq!(walk[3][&zero], BigRational::new(5.into(), 16.into()));
        for mu in &walk {
            assert_eq!(mu.values().sum::<BigRational>(), BigRational::one());
        }
    }
}
