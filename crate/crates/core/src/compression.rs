//! The virtual-coboundary cocycle built from walk distributions, and the
//! compression function it certifies.
//!
//! With `w_n = P^(k_n)` and weights
//! `a_n² = n^{−1−ε} / max_{s∈S} ‖w_n − ρ_s w_n‖²`, the cocycle
//! `b(g) = (a_n (ρ_g w_n − w_n))_n` has
//! `‖b(g)‖² = Σ_n a_n² · 2 (P^(2k_n)(e) − P^(2k_n)(g))`. Nothing
//! infinite-dimensional is materialized: every norm comes from return
//! probabilities. The sum is truncated at `N_max`, which only lowers it.

use std::fmt::Write as _;

use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponents::{fit_exponents, CheckResult, ConcaveHull, FLOAT_TOL};
use crate::group::{BallTable, Group};
use crate::numeric::{least_squares, CompensatedSum};
use crate::observables::{displacement_norm_sq, gradient_norm_sq};
use crate::walk::WalkTrace;

/// How `k_n` is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KnMode {
    /// `k_n = n`.
    Identity,
    /// Minimize the spectral gap ratio over `k ∈ [n, 2n]`.
    Window,
}

impl std::str::FromStr for KnMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "identity" => Ok(KnMode::Identity),
            "window" => Ok(KnMode::Window),
            other => Err(Error::InvalidInput(format!(
                "unknown k_n mode {other:?} (expected identity or window)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CocycleConfig {
    pub epsilon: f64,
    /// Number of summands kept.
    pub n_max: usize,
    pub kn_mode: KnMode,
}

impl CocycleConfig {
    pub fn new(epsilon: f64, n_max: usize, kn_mode: KnMode) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon <= 1.0) {
            return Err(Error::InvalidInput(format!("epsilon must lie in (0, 1], got {epsilon}")));
        }
        if n_max == 0 {
            return Err(Error::InvalidInput("N_max must be at least 1".into()));
        }
        Ok(Self {
            epsilon,
            n_max,
            kn_mode,
        })
    }

    /// Default truncation `4·k_max²` with `ε = 0.1` and window selection.
    pub fn for_radius(k_max: usize) -> Self {
        Self {
            epsilon: 0.1,
            n_max: 4 * k_max * k_max,
            kn_mode: KnMode::Window,
        }
    }

    /// Last walk step the construction reads.
    pub fn required_last_step(&self) -> usize {
        match self.kn_mode {
            KnMode::Identity => 2 * self.n_max + 1,
            KnMode::Window => 4 * self.n_max + 1,
        }
    }
}

/// Selected `k` and its gap `1 − P^(2k+1)(e)/P^(2k)(e)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KnChoice {
    pub k: usize,
    pub gap: f64,
}

fn gap(returns: &[f64], k: usize) -> f64 {
    1.0 - returns[2 * k + 1] / returns[2 * k]
}

/// Argmin of the gap over `k ∈ [n, 2n]`, ties going to the smallest `k`.
pub fn select_kn(returns: &[f64], n: usize) -> Result<KnChoice> {
    if 4 * n + 1 >= returns.len() {
        return Err(Error::MissingStep {
            step: 4 * n + 1,
            reached: returns.len().saturating_sub(1),
        });
    }
    let mut best = KnChoice { k: n, gap: gap(returns, n) };
    for k in n + 1..=2 * n {
        let g = gap(returns, k);
        if g < best.gap {
            best = KnChoice { k, gap: g };
        }
    }
    Ok(best)
}

/// One summand of the cocycle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CocycleTerm {
    pub n: usize,
    pub k: usize,
    /// `1 − P^(2k+1)(e)/P^(2k)(e)`.
    pub gap: f64,
    /// `max_s ‖w_n − ρ_s w_n‖²`.
    pub max_displacement: f64,
    /// `‖∇w_n‖²`.
    pub gradient: f64,
    /// `a_n²`.
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CocycleProfile {
    pub config: CocycleConfig,
    pub terms: Vec<CocycleTerm>,
}

/// Computes `k_n` and `a_n²` for `n = 1..=N_max`.
///
/// The trace must watch every generator and reach
/// [`CocycleConfig::required_last_step`].
pub fn cocycle_weights<G: Group>(trace: &WalkTrace<G>, config: &CocycleConfig) -> Result<CocycleProfile> {
    let need = config.required_last_step();
    if trace.reached() < need {
        return Err(Error::MissingStep {
            step: need,
            reached: trace.reached(),
        });
    }
    let gens = trace.group().generators();
    let returns = trace.returns();
    let terms = (1..=config.n_max)
        .map(|n| {
            let k = match config.kn_mode {
                KnMode::Identity => n,
                KnMode::Window => select_kn(returns, n)?.k,
            };
            let max_displacement = gens
                .iter()
                .map(|s| displacement_norm_sq(trace, k, s))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .fold(0.0, f64::max);
            Ok(CocycleTerm {
                n,
                k,
                gap: gap(returns, k),
                max_displacement,
                gradient: gradient_norm_sq(trace, k)?,
                weight: (n as f64).powf(-1.0 - config.epsilon) / max_displacement,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CocycleProfile {
        config: *config,
        terms,
    })
}

/// Truncated `‖b(g)‖²` and the gradient-ratio lower bound
/// `Σ n^{−1−ε} ‖w_n − ρ_g w_n‖² / ‖∇w_n‖²`.
pub fn cocycle_norm_sq<G: Group>(
    profile: &CocycleProfile,
    trace: &WalkTrace<G>,
    g: &G::Elem,
) -> Result<(f64, f64)> {
    let mut exact = CompensatedSum::new();
    let mut lower = CompensatedSum::new();
    for t in &profile.terms {
        let d = displacement_norm_sq(trace, t.k, g)?;
        exact.add(t.weight * d);
        lower.add((t.n as f64).powf(-1.0 - profile.config.epsilon) * d / t.gradient);
    }
    Ok((exact.value(), lower.value()))
}

/// Elements of one sphere used to evaluate `ρ₋`.
#[derive(Clone, Debug)]
pub struct SpherePoints<E> {
    pub k: usize,
    pub points: Vec<E>,
    pub sampled: bool,
}

/// Minimum number of sampled points on a sphere too large to enumerate.
pub const MIN_SAMPLED_POINTS: usize = 200;

/// Spheres `0..=k_max` of `ball`, enumerated when at most `max_points`
/// elements, otherwise `MIN_SAMPLED_POINTS` drawn uniformly without replacement.
pub fn sphere_points<E: Clone + Eq + std::hash::Hash>(
    ball: &BallTable<E>,
    k_max: usize,
    max_points: usize,
    seed: u64,
) -> Result<Vec<SpherePoints<E>>> {
    if k_max > ball.radius_max() as usize {
        return Err(Error::InvalidInput(format!(
            "ball of radius {} does not cover k_max = {k_max}",
            ball.radius_max()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..=k_max)
        .map(|k| {
            let sphere: Vec<&E> = ball.sphere(k as u32).iter().collect();
            if sphere.len() <= max_points.max(MIN_SAMPLED_POINTS) {
                SpherePoints {
                    k,
                    points: sphere.into_iter().cloned().collect(),
                    sampled: false,
                }
            } else {
                SpherePoints {
                    k,
                    points: sphere
                        .choose_multiple(&mut rng, MIN_SAMPLED_POINTS)
                        .map(|g| (*g).clone())
                        .collect(),
                    sampled: true,
                }
            }
        })
        .collect())
}

/// `ρ₋(k)` on one sphere.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompressionRow {
    pub k: usize,
    pub rho_minus: f64,
    pub n_sphere_points: usize,
    pub sampled: bool,
    /// Smallest gradient-ratio lower bound on the sphere, square-rooted.
    pub rho_lower_bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompressionEstimate {
    pub rows: Vec<CompressionRow>,
    /// Slope of `ln ρ₋(k)` against `ln k` over the window.
    pub slope: Option<f64>,
    pub fit_window: (usize, usize),
    /// Largest excess of the lower bound over the exact value, over all points.
    pub lower_bound_excess: f64,
}

/// Evaluates `ρ₋(k) = min_{|g|=k} ‖b(g)‖` and fits its slope over `[k_max/4, k_max]`.
pub fn compression_profile<G: Group>(
    profile: &CocycleProfile,
    trace: &WalkTrace<G>,
    spheres: &[SpherePoints<G::Elem>],
) -> Result<CompressionEstimate> {
    let mut rows = Vec::with_capacity(spheres.len());
    let mut excess: f64 = f64::NEG_INFINITY;
    for sphere in spheres {
        let values = sphere
            .points
            .par_iter()
            .map(|g| cocycle_norm_sq(profile, trace, g))
            .collect::<Result<Vec<_>>>()?;
        let rho = values.iter().map(|v| v.0).fold(f64::INFINITY, f64::min);
        let low = values.iter().map(|v| v.1).fold(f64::INFINITY, f64::min);
        for (exact, lower) in &values {
            excess = excess.max(lower - exact);
        }
        rows.push(CompressionRow {
            k: sphere.k,
            rho_minus: if values.is_empty() { f64::NAN } else { rho.max(0.0).sqrt() },
            n_sphere_points: sphere.points.len(),
            sampled: sphere.sampled,
            rho_lower_bound: if values.is_empty() { f64::NAN } else { low.max(0.0).sqrt() },
        });
    }
    let k_max = spheres.last().map_or(0, |s| s.k);
    let window = ((k_max / 4).max(1), k_max);
    let (xs, ys): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .filter(|r| r.k >= window.0 && r.k <= window.1 && r.rho_minus > 0.0)
        .map(|r| ((r.k as f64).ln(), r.rho_minus.ln()))
        .unzip();
    Ok(CompressionEstimate {
        slope: least_squares(&xs, &ys).map(|f| f.slope),
        rows,
        fit_window: window,
        lower_bound_excess: excess,
    })
}

/// Which predicted compression bound to report.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundMode {
    /// Any group: `(1 − γ)/(1 + γ)`.
    General,
    /// Under the off-diagonal estimate: `1 − γ`.
    Od,
}

/// Predicted lower bound on the compression exponent from a return exponent.
pub fn compression_bound_predicted(gamma: f64, mode: BoundMode) -> f64 {
    match mode {
        BoundMode::General => (1.0 - gamma) / (1.0 + gamma),
        BoundMode::Od => 1.0 - gamma,
    }
}

/// Smallest `c` such that `P^(2n)(g)/P^(2n)(e) ≤ ½` for all `n ≤ c|g|²`,
/// over watched elements with `|g| ≥ 2`.
///
/// Radius-one elements are excluded: their ratio already exceeds ½ at the
/// first step on ℤ.
pub fn restriction_constant<G: Group>(trace: &WalkTrace<G>, points: &[(usize, G::Elem)]) -> Option<f64> {
    let mut c = f64::INFINITY;
    for (len, g) in points.iter().filter(|(l, _)| *l >= 2) {
        let mut last_ok = 0;
        for n in 1..=trace.reached() / 2 {
            let ratio = trace.value(2 * n, g).ok()? / trace.return_prob(2 * n).ok()?;
            if ratio <= 0.5 {
                last_ok = n;
            } else {
                break;
            }
        }
        c = c.min(last_ok as f64 / (len * len) as f64);
    }
    c.is_finite().then_some(c)
}

/// Checks that the window selection meets `gap(k_n) ≤ 8 f_P(n)/n`, with
/// `f_P` the concave hull of `m ↦ −ln P^(m)(e)`, for every `n` whose search
/// window is inside the trace.
pub fn check_kn_selection(group: &str, returns: &[f64]) -> CheckResult {
    let mut c = CheckResult::new(group, "kn-selection", "spectral gap of some k in [n, 2n]");
    let f: Vec<f64> = returns.iter().map(|p| -p.ln()).collect();
    let hull = ConcaveHull::of_values(&f);
    let mut observed: f64 = 0.0;
    let mut off_double = Vec::new();
    let mut n = 1;
    while 4 * n + 1 < returns.len() {
        let choice = select_kn(returns, n).expect("window inside trace");
        let fp = hull.eval(n as f64);
        c.push(n, format!("k={}", choice.k), 8.0 * fp / n as f64 - choice.gap);
        observed = observed.max(choice.gap * n as f64 / fp);
        if choice.k != 2 * n {
            off_double.push(n);
        }
        n += 1;
    }
    c.constant("observed_constant", observed);
    c.constant("stated_constant", 8.0);
    if !off_double.is_empty() {
        c.notes.push(format!(
            "warning: selected k differs from 2n at n = {off_double:?} (log-convexity predicts 2n)"
        ));
    }
    c.conclude(FLOAT_TOL)
}

/// `k, rho_minus, n_sphere_points, sampled`.
pub fn compression_csv(estimate: &CompressionEstimate) -> String {
    let mut out = String::from("k,rho_minus,n_sphere_points,sampled\n");
    for r in &estimate.rows {
        let _ = writeln!(out, "{},{},{},{}", r.k, r.rho_minus, r.n_sphere_points, r.sampled);
    }
    out
}

/// JSON summary of one compression run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompressionReport {
    pub schema_version: u32,
    pub group: String,
    pub epsilon: f64,
    pub n_max: usize,
    pub kn_mode: KnMode,
    pub k_max: usize,
    pub fitted_slope: Option<f64>,
    pub fit_window: (usize, usize),
    pub gamma_hat: Option<f64>,
    pub predicted_general: Option<f64>,
    pub predicted_od: Option<f64>,
    pub restriction_constant: Option<f64>,
    pub kn_twice_n: bool,
    pub lower_bound_excess: f64,
    pub sampled_spheres: usize,
}

/// Output of [`run_compression`].
#[derive(Clone, Debug)]
pub struct CompressionRun {
    pub profile: CocycleProfile,
    pub estimate: CompressionEstimate,
    pub report: CompressionReport,
}

/// Assembles profile, estimate and report from a trace that watches the
/// generators and every sphere point.
pub fn run_compression<G: Group>(
    trace: &WalkTrace<G>,
    config: &CocycleConfig,
    spheres: &[SpherePoints<G::Elem>],
) -> Result<CompressionRun> {
    let profile = cocycle_weights(trace, config)?;
    let estimate = compression_profile(&profile, trace, spheres)?;
    let f: Vec<f64> = trace.returns().iter().map(|p| -p.ln()).collect();
    let gamma_hat = fit_exponents(&f).ok().map(|fit| fit.central.clamp(0.0, 1.0));
    let points: Vec<(usize, G::Elem)> = spheres
        .iter()
        .flat_map(|s| s.points.iter().map(move |g| (s.k, g.clone())))
        .collect();
    let report = CompressionReport {
        schema_version: crate::exponents::REPORT_SCHEMA_VERSION,
        group: trace.group().spec().to_string(),
        epsilon: config.epsilon,
        n_max: config.n_max,
        kn_mode: config.kn_mode,
        k_max: spheres.last().map_or(0, |s| s.k),
        fitted_slope: estimate.slope,
        fit_window: estimate.fit_window,
        gamma_hat,
        predicted_general: gamma_hat.map(|g| compression_bound_predicted(g, BoundMode::General)),
        predicted_od: gamma_hat.map(|g| compression_bound_predicted(g, BoundMode::Od)),
        restriction_constant: restriction_constant(trace, &points),
        kn_twice_n: profile.terms.iter().all(|t| t.k == 2 * t.n),
        lower_bound_excess: estimate.lower_bound_excess,
        sampled_spheres: spheres.iter().filter(|s| s.sampled).count(),
    };
    Ok(CompressionRun {
        profile,
        estimate,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{compute_ball, FreeAbelian, MemoryBudget};
    use crate::walk::{WalkOptions, WalkTrace};

    #[test]
    fn predicted_bounds() {
        assert_eq!(compression_bound_predicted(0.0, BoundMode::General), 1.0);
        assert_eq!(compression_bound_predicted(0.0, BoundMode::Od), 1.0);
        assert!((compression_bound_predicted(1.0 / 3.0, BoundMode::General) - 0.5).abs() < 1e-15);
        assert!((compression_bound_predicted(1.0 / 3.0, BoundMode::Od) - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(compression_bound_predicted(1.0, BoundMode::General), 0.0);
        assert_eq!(compression_bound_predicted(1.0, BoundMode::Od), 0.0);
    }

    #[test]
    fn config_validation() {
        assert!(CocycleConfig::new(0.1, 0, KnMode::Window).is_err());
        assert!(CocycleConfig::new(0.0, 4, KnMode::Window).is_err());
        assert!(CocycleConfig::new(1.5, 4, KnMode::Window).is_err());
        assert_eq!(CocycleConfig::for_radius(32).n_max, 4096);
    }

    #[test]
    fn small_run_on_z() {
        let z = FreeAbelian::new(1);
        let ball = compute_ball(&z, 6, MemoryBudget::default()).unwrap();
        let spheres = sphere_points(&ball, 6, 1000, 1).unwrap();
        let watch: Vec<_> = spheres.iter().flat_map(|s| s.points.clone()).collect();
        let config = CocycleConfig::new(0.1, 36, KnMode::Window).unwrap();
        let options = WalkOptions::new(&z, config.required_last_step());
        let trace = WalkTrace::run(z, &options, watch, |_, _| Ok(())).unwrap();
        let run = run_compression(&trace, &config, &spheres).unwrap();
        assert_eq!(run.estimate.rows[0].rho_minus, 0.0);
        assert!(run.profile.terms.iter().all(|t| t.weight > 0.0));
        for t in &run.profile.terms {
            assert!(t.weight * t.max_displacement <= (t.n as f64).powf(-1.1) * (1.0 + 1e-12));
        }
        assert!(run.report.kn_twice_n);
        assert!(run.estimate.lower_bound_excess <= 1e-10);
        let g: crate::group::Lattice = smallvec::smallvec![3];
        let h: crate::group::Lattice = smallvec::smallvec![-3];
        let (a, _) = cocycle_norm_sq(&run.profile, &trace, &g).unwrap();
        let (b, _) = cocycle_norm_sq(&run.profile, &trace, &h).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn kn_search_on_two_points() {
        let returns = [1.0, 0.5, 0.375, 0.3125, 0.2734375, 0.24609375];
        let c = select_kn(&returns, 1).unwrap();
        assert!(c.k == 1 || c.k == 2);
        assert!(select_kn(&returns, 2).is_err());
    }
}
