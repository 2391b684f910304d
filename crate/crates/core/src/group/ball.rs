use std::mem::size_of;

use indexmap::set::Slice;
use indexmap::IndexSet;
use rustc_hash::FxBuildHasher;
use serde::{Deserialize, Serialize};

use super::Group;
use crate::error::{Error, Result};

/// Upper bound on the estimated bytes a ball or measure may occupy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemoryBudget {
    pub bytes: u64,
}

impl Default for MemoryBudget {
    fn default() -> Self {
        Self { bytes: 4 << 30 }
    }
}

impl MemoryBudget {
    pub fn gib(gib: f64) -> Self {
        Self {
            bytes: (gib * (1u64 << 30) as f64) as u64,
        }
    }

    /// Estimated footprint of `count` hashed entries of element type `E` carrying `extra` bytes each.
    pub fn estimate<E>(count: u64, extra: usize) -> u64 {
        // hash tables run at most 7/8 full and double on growth
        count.saturating_mul((size_of::<E>() + extra + 9) as u64) * 2
    }

    pub fn admits<E>(&self, count: u64, extra: usize) -> bool {
        Self::estimate::<E>(count, extra) <= self.bytes
    }
}

/// Source of word lengths for group elements.
pub trait WordLength<E> {
    fn length(&self, g: &E) -> Option<u32>;
}

/// Ball of radius `radius_max` around the identity, computed by BFS.
///
/// Elements are stored in BFS order, so sphere `r` is a contiguous slice.
#[derive(Clone, Debug)]
pub struct BallTable<E> {
    radius_max: u32,
    elements: IndexSet<E, FxBuildHasher>,
    /// `layer_start[r]` is the index of the first element at length `r`;
    /// one trailing entry holds the total count.
    layer_start: Vec<usize>,
}

impl<E: Clone + Eq + std::hash::Hash> BallTable<E> {
    pub fn radius_max(&self) -> u32 {
        self.radius_max
    }

    /// `|B_0|, …, |B_radius_max|`.
    pub fn ball_sizes(&self) -> Vec<u64> {
        self.layer_start[1..].iter().map(|&c| c as u64).collect()
    }

    /// `ln |B_n|` for each radius.
    pub fn growth_log(&self) -> Vec<f64> {
        self.ball_sizes().iter().map(|&s| (s as f64).ln()).collect()
    }

    pub fn growth(&self) -> GrowthTable {
        GrowthTable::new(self.ball_sizes())
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Elements of word length exactly `r`.
    pub fn sphere(&self, r: u32) -> &Slice<E> {
        if r > self.radius_max {
            return Slice::new();
        }
        let r = r as usize;
        &self.elements.as_slice()[self.layer_start[r]..self.layer_start[r + 1]]
    }

    /// Every element in BFS order.
    pub fn elements(&self) -> impl Iterator<Item = &E> {
        self.elements.iter()
    }

    pub fn contains(&self, g: &E) -> bool {
        self.elements.contains(g)
    }
}

impl<E: Clone + Eq + std::hash::Hash> WordLength<E> for BallTable<E> {
    fn length(&self, g: &E) -> Option<u32> {
        let idx = self.elements.get_index_of(g)?;
        Some((self.layer_start.partition_point(|&s| s <= idx) - 1) as u32)
    }
}

/// Breadth-first ball over the group's generating set.
///
/// The frontier is expanded in insertion order, so the table is identical
/// across runs. Fails with [`Error::BudgetExceeded`] carrying the last
/// completed radius when the next layer would not fit.
pub fn compute_ball<G: Group>(
    group: &G,
    radius: u32,
    budget: MemoryBudget,
) -> Result<BallTable<G::Elem>> {
    let gens = group.generators();
    let mut elements: IndexSet<G::Elem, FxBuildHasher> = IndexSet::default();
    elements.insert(group.identity());
    let mut layer_start = vec![0usize, 1];
    for r in 1..=radius {
        let (lo, hi) = (layer_start[r as usize - 1], layer_start[r as usize]);
        // the next sphere is at most (|S| - 1) times the current one
        let projected = hi as u64 + (hi - lo) as u64 * (gens.len().max(2) as u64 - 1);
        if !budget.admits::<G::Elem>(projected, 8) {
            return Err(Error::BudgetExceeded {
                budget_bytes: budget.bytes,
                reached: r as usize - 1,
            });
        }
        for idx in lo..hi {
            let x = elements[idx].clone();
            for s in &gens {
                elements.insert(group.multiply(&x, s));
            }
        }
        layer_start.push(elements.len());
    }
    Ok(BallTable {
        radius_max: radius,
        elements,
        layer_start,
    })
}

/// Ball sizes `|B_0| ..= |B_R|` and `f_V(n) = ln |B_n|`, however obtained.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthTable {
    pub ball_sizes: Vec<u64>,
    pub growth_log: Vec<f64>,
}

impl GrowthTable {
    pub fn new(ball_sizes: Vec<u64>) -> Self {
        let growth_log = ball_sizes.iter().map(|&s| (s as f64).ln()).collect();
        Self {
            ball_sizes,
            growth_log,
        }
    }

    /// Cumulates sphere counts into ball sizes.
    pub fn from_sphere_counts(spheres: &[u64]) -> Self {
        let sizes = spheres
            .iter()
            .scan(0u64, |acc, &c| {
                *acc += c;
                Some(*acc)
            })
            .collect();
        Self::new(sizes)
    }

    pub fn radius_max(&self) -> usize {
        self.ball_sizes.len().saturating_sub(1)
    }

    /// Local polynomial degree: slope of `ln |B_n|` against `ln n` over the top half of the table.
    pub fn local_degree(&self) -> Option<f64> {
        let r = self.radius_max();
        if r < 4 {
            return None;
        }
        let xs: Vec<f64> = (r / 2..=r).map(|n| n as f64).collect();
        let ys: Vec<f64> = (r / 2..=r).map(|n| self.ball_sizes[n] as f64).collect();
        crate::numeric::log_log_fit(&xs, &ys).map(|f| f.slope)
    }

    /// Whether the table shows growth at least polynomial of the given degree.
    ///
    /// Uses the local degree with a 0.1 allowance for lower-order terms.
    pub fn at_least_degree(&self, degree: f64) -> bool {
        self.local_degree().is_some_and(|d| d >= degree - 0.1)
    }
}

/// Closed-form lengths when the family has them, otherwise a BFS table.
pub enum Lengths<'a, G: Group> {
    Closed(&'a G),
    Table(&'a BallTable<G::Elem>),
}

impl<G: Group> Lengths<'_, G> {
    pub fn radius_limit(&self) -> Option<u32> {
        match self {
            Lengths::Closed(_) => None,
            Lengths::Table(t) => Some(t.radius_max()),
        }
    }
}

impl<G: Group> WordLength<G::Elem> for Lengths<'_, G> {
    fn length(&self, g: &G::Elem) -> Option<u32> {
        match self {
            Lengths::Closed(group) => group.word_length(g),
            Lengths::Table(t) => t.length(g),
        }
    }
}

impl<G: Group> Clone for Lengths<'_, G> {
    fn clone(&self) -> Self {
        match self {
            Lengths::Closed(g) => Lengths::Closed(g),
            Lengths::Table(t) => Lengths::Table(t),
        }
    }
}
