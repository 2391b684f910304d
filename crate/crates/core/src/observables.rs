//! Scalar functionals of `P^(n)`: return probability, entropy, speed, sphere
//! profiles, and the two norm identities.
//!
//! Conventions: `ρ_g` is the right-regular action `(ρ_g f)(x) = f(xg)`, and
//! the gradient norm counts each edge of the Cayley graph once,
//! `‖∇f‖² = ½ Σ_x Σ_{s∈S} (f(xs) − f(x))²`. With these,
//!
//! - `‖P^(n) − ρ_g P^(n)‖² = 2 (P^(2n)(e) − P^(2n)(g))`;
//! - `‖∇P^(n)‖² = |S| / (1 − λ) · (P^(2n)(e) − P^(2n+1)(e))`, which is
//!   `2|S| (P^(2n)(e) − P^(2n+1)(e))` for the standard laziness `λ = ½`.
//!
//! The first identity carries a factor 2: expanding the square gives
//! `2‖P^(n)‖² − 2⟨P^(n), ρ_g P^(n)⟩`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{Group, WordLength};
use crate::numeric::CompensatedSum;
use crate::walk::{SparseMeasure, SpeedEstimate, StepView, WalkOptions, WalkTrace};

/// Statistics of `P^(n)` over one sphere `|g| = r`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SphereStat {
    /// Atoms on the sphere.
    pub count: u64,
    pub max: f64,
    pub mass: f64,
}

impl SphereStat {
    pub fn mean(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            self.mass / self.count as f64
        }
    }
}

/// Observables of one step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub n: usize,
    pub return_prob: f64,
    pub entropy: f64,
    /// `𝔼|P^(n)|`, when word lengths were available.
    pub speed: Option<f64>,
    pub mass: f64,
    pub support: u64,
    /// Indexed by radius; empty without word lengths.
    pub spheres: Vec<SphereStat>,
    /// `max |P^(n)(g) − P^(n)(g⁻¹)|` (zero for radial traces).
    pub symmetry_defect: f64,
    /// Mass discarded by pruning up to this step.
    pub pruned_mass: f64,
}

/// Per-step observables of one trace.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ObservableSeries {
    pub group: String,
    pub records: Vec<StepRecord>,
}

impl ObservableSeries {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last_step(&self) -> usize {
        self.records.len().saturating_sub(1)
    }

    pub fn returns(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.return_prob).collect()
    }

    pub fn entropies(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.entropy).collect()
    }

    /// Speeds for every step, or `None` if any step lacks one.
    pub fn speeds(&self) -> Option<Vec<f64>> {
        self.records.iter().map(|r| r.speed).collect()
    }

    /// Sphere counts of the last step; for a lazy walk these are the sphere sizes of `B_n`.
    pub fn sphere_counts(&self) -> Option<Vec<u64>> {
        let last = self.records.last()?;
        (!last.spheres.is_empty()).then(|| last.spheres.iter().map(|s| s.count).collect())
    }
}

/// `H(μ) = −Σ μ(g) ln μ(g)`.
pub fn entropy<E: Clone + Eq + std::hash::Hash + Ord>(mu: &SparseMeasure<E>) -> f64 {
    let mut acc = CompensatedSum::new();
    for (_, p) in mu.iter() {
        acc.add(-p * p.ln());
    }
    acc.value()
}

/// `𝔼|μ| = Σ μ(g)|g|`; fails if some atom has no known length.
pub fn speed<E, L>(mu: &SparseMeasure<E>, lengths: &L) -> Result<f64>
where
    E: Clone + Eq + std::hash::Hash + Ord + std::fmt::Debug,
    L: WordLength<E> + ?Sized,
{
    let mut acc = CompensatedSum::new();
    for (g, p) in mu.iter() {
        let r = lengths
            .length(g)
            .ok_or_else(|| Error::LengthUnavailable(format!("{g:?} escapes the length table")))?;
        acc.add(p * r as f64);
    }
    Ok(acc.value())
}

/// Max, mean and mass of `μ` on every sphere up to the largest occupied radius.
pub fn off_diagonal_profile<E, L>(mu: &SparseMeasure<E>, lengths: &L) -> Result<Vec<SphereStat>>
where
    E: Clone + Eq + std::hash::Hash + Ord + std::fmt::Debug,
    L: WordLength<E> + ?Sized,
{
    let mut spheres: Vec<SphereStat> = Vec::new();
    let mut masses: Vec<CompensatedSum> = Vec::new();
    for (g, p) in mu.iter() {
        let r = lengths
            .length(g)
            .ok_or_else(|| Error::LengthUnavailable(format!("{g:?} escapes the length table")))?
            as usize;
        if spheres.len() <= r {
            spheres.resize(r + 1, SphereStat::default());
            masses.resize(r + 1, CompensatedSum::new());
        }
        spheres[r].count += 1;
        spheres[r].max = spheres[r].max.max(p);
        masses[r].add(p);
    }
    for (s, m) in spheres.iter_mut().zip(&masses) {
        s.mass = m.value();
    }
    Ok(spheres)
}

/// Computes every observable of one step in a single pass.
pub fn record_step<G, L>(
    group: &G,
    n: usize,
    view: StepView<'_, G::Elem>,
    lengths: Option<&L>,
    pruned_mass: f64,
) -> Result<StepRecord>
where
    G: Group,
    L: WordLength<G::Elem> + ?Sized,
{
    match view {
        StepView::Explicit(mu) => {
            let e = group.identity();
            let mut h = CompensatedSum::new();
            let mut mass = CompensatedSum::new();
            let mut defect: f64 = 0.0;
            for (g, p) in mu.iter() {
                h.add(-p * p.ln());
                mass.add(p);
                defect = defect.max((p - mu.get(&group.inverse(g))).abs());
            }
            let (speed, spheres) = match lengths {
                Some(l) => {
                    let spheres = off_diagonal_profile(mu, l)?;
                    let s = spheres
                        .iter()
                        .enumerate()
                        .map(|(r, st)| r as f64 * st.mass)
                        .collect::<CompensatedSum>()
                        .value();
                    (Some(s), spheres)
                }
                None => (None, Vec::new()),
            };
            Ok(StepRecord {
                n,
                return_prob: mu.get(&e),
                entropy: h.value(),
                speed,
                mass: mass.value(),
                support: mu.len() as u64,
                spheres,
                symmetry_defect: defect,
                pruned_mass,
            })
        }
        StepView::Radial(view) => {
            let mut h = CompensatedSum::new();
            let mut mass = CompensatedSum::new();
            let mut speed = CompensatedSum::new();
            let mut support = 0u64;
            let mut spheres = Vec::with_capacity(view.mass.len());
            for (r, &m) in view.mass.iter().enumerate() {
                let size = view.model.sphere_size(r);
                if m > 0.0 {
                    h.add(-m * (m / size).ln());
                    support += size as u64;
                }
                mass.add(m);
                speed.add(r as f64 * m);
                spheres.push(SphereStat {
                    count: if m > 0.0 { size as u64 } else { 0 },
                    max: m / size,
                    mass: m,
                });
            }
            Ok(StepRecord {
                n,
                return_prob: view.mass[0],
                entropy: h.value(),
                speed: Some(speed.value()),
                mass: mass.value(),
                support,
                spheres,
                symmetry_defect: 0.0,
                pruned_mass,
            })
        }
    }
}

/// Runs a walk and records its observables along the way.
pub fn observe_walk<G, L>(
    group: G,
    options: &WalkOptions,
    watch: Vec<G::Elem>,
    lengths: Option<&L>,
) -> Result<(WalkTrace<G>, ObservableSeries)>
where
    G: Group,
    L: WordLength<G::Elem> + ?Sized,
{
    let mut records = Vec::with_capacity(options.last_step + 1);
    let g2 = group.clone();
    let trace = WalkTrace::run(group, options, watch, |n, view| {
        records.push(record_step(&g2, n, view, lengths, 0.0)?);
        Ok(())
    })?;
    for (n, r) in records.iter_mut().enumerate() {
        r.pruned_mass = trace.pruned_mass(n);
    }
    let series = ObservableSeries {
        group: g2.spec().to_string(),
        records,
    };
    Ok((trace, series))
}

/// `‖P^(n) − ρ_g P^(n)‖² = 2 (P^(2n)(e) − P^(2n)(g))`.
pub fn displacement_norm_sq<G: Group>(trace: &WalkTrace<G>, n: usize, g: &G::Elem) -> Result<f64> {
    Ok(2.0 * (trace.return_prob(2 * n)? - trace.value(2 * n, g)?))
}

/// `‖∇P^(n)‖² = |S| / (1 − λ) · (P^(2n)(e) − P^(2n+1)(e))`.
pub fn gradient_norm_sq<G: Group>(trace: &WalkTrace<G>, n: usize) -> Result<f64> {
    let s = trace.group().generators().len() as f64;
    Ok(s / (1.0 - trace.laziness()) * (trace.return_prob(2 * n)? - trace.return_prob(2 * n + 1)?))
}

/// Gradient norm from return probabilities alone (standard laziness).
pub fn gradient_from_returns(returns: &[f64], n: usize, generators: usize) -> Option<f64> {
    let (a, b) = (returns.get(2 * n)?, returns.get(2 * n + 1)?);
    Some(2.0 * generators as f64 * (a - b))
}

/// Writes `n, return_prob, entropy, speed, speed_stderr, grad_norm_sq, source`.
///
/// Speeds come from the exact series unless a Monte Carlo estimate is
/// supplied for that step, in which case the row is labelled `mc`. The
/// gradient column is empty where step `2n + 1` is beyond the series.
pub fn observables_csv(series: &ObservableSeries, generators: usize, mc: &[SpeedEstimate]) -> String {
    let returns = series.returns();
    let mut out = String::from("n,return_prob,entropy,speed,speed_stderr,grad_norm_sq,source\n");
    for r in &series.records {
        let sampled = mc.iter().find(|e| e.n == r.n);
        let (speed, stderr, source) = match (sampled, r.speed) {
            (Some(e), _) => (e.mean.to_string(), e.stderr.to_string(), "mc"),
            (None, Some(s)) => (s.to_string(), String::new(), "exact"),
            (None, None) => (String::new(), String::new(), "exact"),
        };
        let grad = gradient_from_returns(&returns, r.n, generators)
            .map(|g| g.to_string())
            .unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{speed},{stderr},{grad},{source}",
            r.n, r.return_prob, r.entropy
        );
    }
    out
}
