use std::hash::Hash;

use rayon::prelude::*;
use rustc_hash::FxHashMap;

use crate::error::{Error, Result};
use crate::group::{Group, MemoryBudget};
use crate::numeric::{stable_sum, CompensatedSum};

/// Finitely supported measure on group elements with strictly positive atoms.
#[derive(Clone, Debug, Default)]
pub struct SparseMeasure<E> {
    atoms: FxHashMap<E, f64>,
}

impl<E: Clone + Eq + Hash + Ord> SparseMeasure<E> {
    pub fn point_mass(g: E) -> Self {
        let mut atoms = FxHashMap::default();
        atoms.insert(g, 1.0);
        Self { atoms }
    }

    /// Sums duplicate atoms and drops non-positive ones.
    pub fn accumulate<I: IntoIterator<Item = (E, f64)>>(iter: I) -> Self {
        let mut sums: FxHashMap<E, CompensatedSum> = FxHashMap::default();
        for (g, p) in iter {
            sums.entry(g).or_default().add(p);
        }
        Self::from_sums(sums)
    }

    fn from_sums(sums: FxHashMap<E, CompensatedSum>) -> Self {
        let mut atoms = FxHashMap::with_capacity_and_hasher(sums.len(), Default::default());
        for (g, c) in sums {
            let p = c.value();
            if p > 0.0 {
                atoms.insert(g, p);
            }
        }
        Self { atoms }
    }

    /// Mass at `g`, zero off the support.
    pub fn get(&self, g: &E) -> f64 {
        self.atoms.get(g).copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Atoms in storage order, which is deterministic for a given construction history.
    pub fn iter(&self) -> impl Iterator<Item = (&E, f64)> {
        self.atoms.iter().map(|(g, &p)| (g, p))
    }

    pub fn sorted_atoms(&self) -> Vec<(&E, f64)> {
        let mut v: Vec<_> = self.iter().collect();
        v.sort_unstable_by(|a, b| a.0.cmp(b.0));
        v
    }

    pub fn total_mass(&self) -> f64 {
        stable_sum(self.sorted_atoms().into_iter().map(|(_, p)| p))
    }

    /// Multiplies every atom by `factor`; used to inject faults in tests.
    pub fn scale(&mut self, factor: f64) {
        for p in self.atoms.values_mut() {
            *p *= factor;
        }
    }
}

/// `P = λδ_e + (1 − λ)·uniform(S)`; the standard lazy walk has `λ = ½`.
pub fn lazy_step_measure<G: Group>(group: &G, laziness: f64) -> SparseMeasure<G::Elem> {
    let gens = group.generators();
    let each = (1.0 - laziness) / gens.len() as f64;
    SparseMeasure::accumulate(
        std::iter::once((group.identity(), laziness)).chain(gens.into_iter().map(|s| (s, each))),
    )
}

/// Atoms of the input handled by one worker; fixed so that results do not
/// depend on the thread count.
const CHUNK: usize = 1 << 14;

/// Right convolution `(μ * P)(x) = Σ_y μ(y) P(y⁻¹x)`.
///
/// The support of `mu` is cut into fixed chunks, each accumulated into a
/// private map with compensated sums, and the private maps are merged in
/// chunk order. Fails with [`Error::BudgetExceeded`] (with `reached = 0`;
/// callers fill in the step) as soon as the output outgrows `budget`.
pub fn convolve<G: Group>(
    group: &G,
    mu: &SparseMeasure<G::Elem>,
    step: &SparseMeasure<G::Elem>,
    budget: MemoryBudget,
) -> Result<SparseMeasure<G::Elem>> {
    let step_atoms: Vec<(G::Elem, f64)> = step
        .sorted_atoms()
        .into_iter()
        .map(|(s, q)| (s.clone(), q))
        .collect();
    let atoms: Vec<(&G::Elem, f64)> = mu.iter().collect();
    let wave = CHUNK * rayon::current_num_threads().max(1);
    let mut out: FxHashMap<G::Elem, CompensatedSum> = FxHashMap::default();
    for block in atoms.chunks(wave) {
        let locals: Vec<FxHashMap<G::Elem, CompensatedSum>> = block
            .par_chunks(CHUNK)
            .map(|chunk| {
                let mut local: FxHashMap<G::Elem, CompensatedSum> = FxHashMap::default();
                for &(y, p) in chunk {
                    for (s, q) in &step_atoms {
                        local.entry(group.multiply(y, s)).or_default().add(p * q);
                    }
                }
                local
            })
            .collect();
        for local in locals {
            for (x, c) in local {
                out.entry(x).or_default().merge(&c);
            }
        }
        if !budget.admits::<G::Elem>(out.len() as u64, 16) {
            return Err(Error::BudgetExceeded {
                budget_bytes: budget.bytes,
                reached: 0,
            });
        }
    }
    Ok(SparseMeasure::from_sums(out))
}

/// Removes atoms below `threshold` and returns the discarded mass.
pub fn prune<E: Clone + Eq + Hash + Ord>(mu: &mut SparseMeasure<E>, threshold: f64) -> f64 {
    let mut dropped = CompensatedSum::new();
    mu.atoms.retain(|_, p| {
        if *p < threshold {
            dropped.add(*p);
            false
        } else {
            true
        }
    });
    dropped.value()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{FreeAbelian, FreeGroup, Wreath};

    fn z(x: i64) -> crate::group::Lattice {
        smallvec::smallvec![x]
    }

    #[test]
    fn lazy_step_masses() {
        let p = lazy_step_measure(&FreeAbelian::new(1), 0.5);
        assert_eq!(p.get(&z(0)), 0.5);
        assert_eq!(p.get(&z(1)), 0.25);
        let f2 = lazy_step_measure(&FreeGroup::new(2), 0.5);
        assert_eq!(f2.len(), 5);
        assert_eq!(f2.get(&FreeGroup::new(2).word("B")), 0.125);
        let l2 = Wreath::lamplighter(2);
        let p = lazy_step_measure(&l2, 0.5);
        assert_eq!(p.len(), 4);
        assert!((p.get(&l2.generators()[0]) - 1.0 / 6.0).abs() < 1e-17);
    }

    #[test]
    fn two_steps_on_z() {
        let z1 = FreeAbelian::new(1);
        let p = lazy_step_measure(&z1, 0.5);
        let p2 = convolve(&z1, &p, &p, MemoryBudget::default()).unwrap();
        assert_eq!(p2.get(&z(0)), 0.375);
        assert_eq!(p2.get(&z(-1)), 0.25);
        assert_eq!(p2.get(&z(2)), 0.0625);
        assert_eq!(p2.total_mass(), 1.0);
    }

    #[test]
    fn point_masses_multiply() {
        let f2 = FreeGroup::new(2);
        let (g, h) = (f2.word("ab"), f2.word("Ba"));
        let out = convolve(
            &f2,
            &SparseMeasure::point_mass(g),
            &SparseMeasure::point_mass(h),
            MemoryBudget::default(),
        )
        .unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out.get(&f2.word("aa")), 1.0);
    }

    #[test]
    fn convolution_budget() {
        let z2 = FreeAbelian::new(2);
        let p = lazy_step_measure(&z2, 0.5);
        let err = convolve(&z2, &p, &p, MemoryBudget { bytes: 100 }).unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded { .. }));
    }

    #[test]
    fn pruning_reports_mass() {
        let z1 = FreeAbelian::new(1);
        let mut p = lazy_step_measure(&z1, 0.5);
        let dropped = prune(&mut p, 0.3);
        assert_eq!(dropped, 0.5);
        assert_eq!(p.len(), 1);
    }
}
