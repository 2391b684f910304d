//! Oracles shared by the integration tests: direct sparse-vector norms and
//! brute-force enumeration, written independently of the library's shortcuts.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use walklab::{Group, SparseMeasure};

pub const FAMILIES: [&str; 5] = ["Z^2", "heisenberg", "free:2", "lamplighter:2", "wreathZZ"];

/// `‖μ − ρ_g μ‖² = Σ_x (μ(x) − μ(xg))²`, summed over every `x` where either term is nonzero.
pub fn direct_displacement<G: Group>(group: &G, mu: &SparseMeasure<G::Elem>, g: &G::Elem) -> f64 {
    let g_inv = group.inverse(g);
    let mut xs: BTreeSet<G::Elem> = BTreeSet::new();
    for (x, _) in mu.iter() {
        xs.insert(x.clone());
        xs.insert(group.multiply(x, &g_inv));
    }
    let mut terms: Vec<f64> = xs
        .iter()
        .map(|x| {
            let d = mu.get(x) - mu.get(&group.multiply(x, g));
            d * d
        })
        .collect();
    terms.sort_by(f64::total_cmp);
    terms.iter().sum()
}

/// `½ Σ_x Σ_s (μ(xs) − μ(x))²`.
pub fn direct_gradient<G: Group>(group: &G, mu: &SparseMeasure<G::Elem>) -> f64 {
    group
        .generators()
        .iter()
        .map(|s| direct_displacement(group, mu, s))
        .sum::<f64>()
        / 2.0
}

/// Product of a uniformly random word of length at most `max_len`.
pub fn random_element<G: Group, R: Rng>(group: &G, rng: &mut R, max_len: usize) -> G::Elem {
    let k = group.generators().len();
    let len = rng.random_range(0..=max_len);
    let letters: Vec<usize> = (0..len).map(|_| rng.random_range(0..k)).collect();
    group.evaluate_word(&letters)
}

/// Word lengths of every element of `B_radius`, found by enumerating all words.
pub fn brute_force_lengths<G: Group>(group: &G, radius: usize) -> BTreeMap<G::Elem, usize> {
    let gens = group.generators();
    let mut lengths = BTreeMap::new();
    let mut words: Vec<G::Elem> = vec![group.identity()];
    lengths.insert(group.identity(), 0);
    for r in 1..=radius {
        let mut next = Vec::with_capacity(words.len() * gens.len());
        for w in &words {
            for s in &gens {
                let g = group.multiply(w, s);
                lengths.entry(g.clone()).or_insert(r);
                next.push(g);
            }
        }
        words = next;
    }
    lengths
}

/// Peak resident set size of this process in bytes, where the platform reports it.
pub fn peak_rss_bytes() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    let kb: u64 = line.split_whitespace().nth(1)?.parse().ok()?;
    Some(kb * 1024)
}
