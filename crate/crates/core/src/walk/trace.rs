use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::measure::{convolve, lazy_step_measure, prune, SparseMeasure};
use crate::error::{Error, Result};
use crate::group::{Group, MemoryBudget, RadialModel};

/// How the n-step distributions are represented.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WalkMode {
    /// Element-by-element sparse convolution.
    Explicit,
    /// Mass per word-length sphere; exact when the walk is radial (free groups).
    Radial,
}

impl WalkMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            WalkMode::Explicit => "explicit",
            WalkMode::Radial => "radial",
        }
    }
}

/// Which explicit measures a trace keeps after computing them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Retention {
    None,
    /// Every step `0..=n`.
    UpTo(usize),
    All,
}

impl Retention {
    fn keeps(&self, n: usize) -> bool {
        match self {
            Retention::None => false,
            Retention::UpTo(m) => n <= *m,
            Retention::All => true,
        }
    }
}

#[derive(Clone, Debug)]
pub struct WalkOptions {
    /// Last step to compute.
    pub last_step: usize,
    pub laziness: f64,
    pub mode: WalkMode,
    pub retain: Retention,
    pub budget: MemoryBudget,
    /// Atoms below this mass are discarded and their mass tracked.
    pub prune_below: Option<f64>,
}

impl WalkOptions {
    /// Standard lazy walk up to `last_step`, radial for groups that support it.
    pub fn new<G: Group>(group: &G, last_step: usize) -> Self {
        Self {
            last_step,
            laziness: 0.5,
            mode: if group.radial_model().is_some() {
                WalkMode::Radial
            } else {
                WalkMode::Explicit
            },
            retain: Retention::None,
            budget: MemoryBudget::default(),
            prune_below: None,
        }
    }

    pub fn explicit(mut self) -> Self {
        self.mode = WalkMode::Explicit;
        self
    }

    pub fn retain(mut self, retain: Retention) -> Self {
        self.retain = retain;
        self
    }

    pub fn budget(mut self, budget: MemoryBudget) -> Self {
        self.budget = budget;
        self
    }
}

/// Mass of `P^(n)` on each sphere of a radial walk.
#[derive(Clone, Copy, Debug)]
pub struct RadialView<'a> {
    pub model: &'a RadialModel,
    pub mass: &'a [f64],
}

impl RadialView<'_> {
    /// Value of `P^(n)` at any single element of length `r`.
    pub fn point_value(&self, r: usize) -> f64 {
        self.mass.get(r).map_or(0.0, |m| m / self.model.sphere_size(r))
    }
}

/// The measure at one step, as handed to observers.
#[derive(Clone, Copy, Debug)]
pub enum StepView<'a, E> {
    Explicit(&'a SparseMeasure<E>),
    Radial(RadialView<'a>),
}

/// Steps `0..=reached` of a lazy walk started at the identity.
///
/// Always keeps `P^(n)(e)`; keeps whole measures according to
/// [`Retention`], and the values at a fixed list of watched elements.
#[derive(Clone, Debug)]
pub struct WalkTrace<G: Group> {
    pub(crate) group: G,
    pub(crate) laziness: f64,
    pub(crate) mode: WalkMode,
    pub(crate) requested: usize,
    pub(crate) reached: usize,
    pub(crate) returns: Vec<f64>,
    pub(crate) pruned: Vec<f64>,
    pub(crate) retained: BTreeMap<usize, SparseMeasure<G::Elem>>,
    pub(crate) watch: Vec<G::Elem>,
    pub(crate) watch_values: Vec<Vec<f64>>,
    pub(crate) radial: Vec<Vec<f64>>,
}

fn radial_step(model: &RadialModel, laziness: f64, mass: &[f64]) -> Vec<f64> {
    let move_p = 1.0 - laziness;
    let mut next = vec![0.0; mass.len() + 1];
    for (r, &m) in mass.iter().enumerate() {
        next[r] += laziness * m;
        if r == 0 {
            next[1] += move_p * m;
        } else {
            next[r + 1] += move_p * model.outward * m;
            next[r - 1] += move_p * (1.0 - model.outward) * m;
        }
    }
    while next.last() == Some(&0.0) {
        next.pop();
    }
    next
}

impl<G: Group> WalkTrace<G> {
    /// Runs the walk, calling `observer` on every step as it is produced.
    ///
    /// Exceeding the memory budget is not an error: the trace stops at the
    /// last completed step and [`WalkTrace::is_truncated`] reports it.
    pub fn run<F>(group: G, options: &WalkOptions, watch: Vec<G::Elem>, mut observer: F) -> Result<Self>
    where
        F: FnMut(usize, StepView<'_, G::Elem>) -> Result<()>,
    {
        if !(0.0..1.0).contains(&options.laziness) {
            return Err(Error::InvalidInput(format!(
                "laziness must lie in [0, 1), got {}",
                options.laziness
            )));
        }
        let mut trace = Self {
            laziness: options.laziness,
            mode: options.mode,
            requested: options.last_step,
            reached: 0,
            returns: Vec::with_capacity(options.last_step + 1),
            pruned: Vec::new(),
            retained: BTreeMap::new(),
            watch,
            watch_values: Vec::new(),
            radial: Vec::new(),
            group,
        };
        match options.mode {
            WalkMode::Radial => trace.run_radial(options, &mut observer)?,
            WalkMode::Explicit => trace.run_explicit(options, &mut observer)?,
        }
        Ok(trace)
    }

    fn run_radial<F>(&mut self, options: &WalkOptions, observer: &mut F) -> Result<()>
    where
        F: FnMut(usize, StepView<'_, G::Elem>) -> Result<()>,
    {
        let model = self.group.radial_model().ok_or_else(|| {
            Error::InvalidInput(format!("{} has no radial description", self.group.spec()))
        })?;
        let lengths: Vec<usize> = self
            .watch
            .iter()
            .map(|g| self.group.word_length(g).map(|l| l as usize))
            .collect::<Option<_>>()
            .ok_or_else(|| Error::LengthUnavailable("radial walks need closed-form lengths".into()))?;
        let mut mass = vec![1.0];
        for n in 0..=options.last_step {
            if n > 0 {
                mass = radial_step(&model, options.laziness, &mass);
            }
            let view = RadialView {
                model: &model,
                mass: &mass,
            };
            self.returns.push(mass[0]);
            self.pruned.push(0.0);
            self.watch_values
                .push(lengths.iter().map(|&r| view.point_value(r)).collect());
            observer(n, StepView::Radial(view))?;
            self.radial.push(mass.clone());
            self.reached = n;
        }
        Ok(())
    }

    fn run_explicit<F>(&mut self, options: &WalkOptions, observer: &mut F) -> Result<()>
    where
        F: FnMut(usize, StepView<'_, G::Elem>) -> Result<()>,
    {
        let step = lazy_step_measure(&self.group, options.laziness);
        let e = self.group.identity();
        let mut current = SparseMeasure::point_mass(e.clone());
        let mut pruned_total = 0.0;
        for n in 0..=options.last_step {
            if n > 0 {
                match convolve(&self.group, &current, &step, options.budget) {
                    Ok(next) => current = next,
                    Err(Error::BudgetExceeded { budget_bytes, .. }) => {
                        log::warn!(
                            "{}: budget of {budget_bytes} bytes exceeded at step {n}; trace stops at {}",
                            self.group.spec(),
                            n - 1
                        );
                        break;
                    }
                    Err(other) => return Err(other),
                }
                if let Some(threshold) = options.prune_below {
                    pruned_total += prune(&mut current, threshold);
                }
            }
            self.returns.push(current.get(&e));
            self.pruned.push(pruned_total);
            self.watch_values
                .push(self.watch.iter().map(|g| current.get(g)).collect());
            observer(n, StepView::Explicit(&current))?;
            if options.retain.keeps(n) {
                self.retained.insert(n, current.clone());
            }
            self.reached = n;
        }
        Ok(())
    }

    pub fn group(&self) -> &G {
        &self.group
    }

    pub fn laziness(&self) -> f64 {
        self.laziness
    }

    pub fn mode(&self) -> WalkMode {
        self.mode
    }

    /// Last step that was requested.
    pub fn requested(&self) -> usize {
        self.requested
    }

    /// Last step actually computed.
    pub fn reached(&self) -> usize {
        self.reached
    }

    pub fn is_truncated(&self) -> bool {
        self.reached < self.requested
    }

    fn check_step(&self, n: usize) -> Result<()> {
        if n > self.reached {
            return Err(Error::MissingStep {
                step: n,
                reached: self.reached,
            });
        }
        Ok(())
    }

    /// `P^(n)(e)`.
    pub fn return_prob(&self, n: usize) -> Result<f64> {
        self.check_step(n)?;
        Ok(self.returns[n])
    }

    /// `P^(n)(e)` for every computed step.
    pub fn returns(&self) -> &[f64] {
        &self.returns
    }

    /// Cumulative mass discarded by pruning up to step `n`.
    pub fn pruned_mass(&self, n: usize) -> f64 {
        self.pruned.get(n).copied().unwrap_or(0.0)
    }

    /// `P^(n)(g)` from whichever source holds it.
    pub fn value(&self, n: usize, g: &G::Elem) -> Result<f64> {
        self.check_step(n)?;
        if let Some(mu) = self.retained.get(&n) {
            return Ok(mu.get(g));
        }
        if let Some(i) = self.watch.iter().position(|w| w == g) {
            return Ok(self.watch_values[n][i]);
        }
        if *g == self.group.identity() {
            return Ok(self.returns[n]);
        }
        if let (Some(mass), Some(model)) = (self.radial.get(n), self.group.radial_model()) {
            if let Some(r) = self.group.word_length(g) {
                return Ok(RadialView { model: &model, mass }.point_value(r as usize));
            }
        }
        Err(Error::ValueUnavailable { step: n })
    }

    pub fn measure(&self, n: usize) -> Option<&SparseMeasure<G::Elem>> {
        self.retained.get(&n)
    }

    /// Mutable access to a retained measure; meant for fault injection.
    pub fn measure_mut(&mut self, n: usize) -> Option<&mut SparseMeasure<G::Elem>> {
        self.retained.get_mut(&n)
    }

    pub fn retained_steps(&self) -> impl Iterator<Item = usize> + '_ {
        self.retained.keys().copied()
    }

    pub fn watched(&self) -> &[G::Elem] {
        &self.watch
    }

    /// Sphere masses of a radial trace at step `n`.
    pub fn radial_mass(&self, n: usize) -> Option<&[f64]> {
        self.radial.get(n).map(Vec::as_slice)
    }
}

/// Explicit trace of steps `0..=2·n_max+1` keeping every measure.
///
/// The two extra steps per `n` are what the norm identities need.
pub fn walk_sequence<G: Group>(group: G, n_max: usize, budget: MemoryBudget) -> Result<WalkTrace<G>> {
    let options = WalkOptions::new(&group, 2 * n_max + 1)
        .explicit()
        .retain(Retention::All)
        .budget(budget);
    WalkTrace::run(group, &options, Vec::new(), |_, _| Ok(()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{FreeAbelian, FreeGroup, Heisenberg};

    #[test]
    fn z_sequence_values() {
        let trace = walk_sequence(FreeAbelian::new(1), 2, MemoryBudget::default()).unwrap();
        assert_eq!(trace.reached(), 5);
        assert_eq!(trace.return_prob(3).unwrap(), 0.3125);
        // P^(5)(0) = C(10,5)/4^5
        assert!((trace.return_prob(5).unwrap() - 252.0 / 1024.0).abs() < 1e-15);
        assert!(trace.return_prob(6).is_err());
    }

    #[test]
    fn zero_n_max_keeps_identity_and_one_step() {
        let trace = walk_sequence(FreeAbelian::new(2), 0, MemoryBudget::default()).unwrap();
        assert_eq!(trace.measure(0).unwrap().len(), 1);
        assert_eq!(trace.reached(), 1);
    }

    #[test]
    fn radial_matches_explicit_on_free_group() {
        let f2 = FreeGroup::new(2);
        let watch = vec![f2.word("a"), f2.word("abA"), f2.word("bb")];
        let radial = WalkTrace::run(f2, &WalkOptions::new(&f2, 8), watch.clone(), |_, _| Ok(())).unwrap();
        let explicit = walk_sequence(f2, 4, MemoryBudget::default()).unwrap();
        for n in 0..=8 {
            assert!((radial.return_prob(n).unwrap() - explicit.return_prob(n).unwrap()).abs() < 1e-15);
            for g in &watch {
                let (a, b) = (radial.value(n, g).unwrap(), explicit.value(n, g).unwrap());
                assert!((a - b).abs() <= 1e-15 * b.max(1e-300), "n={n}");
            }
        }
    }

    #[test]
    fn budget_truncates() {
        let options = WalkOptions::new(&Heisenberg, 40).budget(MemoryBudget { bytes: 200_000 });
        let trace = WalkTrace::run(Heisenberg, &options, Vec::new(), |_, _| Ok(())).unwrap();
        assert!(trace.is_truncated());
        assert!(trace.reached() > 2);
    }
}
