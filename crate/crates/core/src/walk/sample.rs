use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{Group, WordLength};

/// Monte Carlo estimate of `𝔼|P^(n)|`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpeedEstimate {
    pub n: usize,
    pub trials: usize,
    pub mean: f64,
    pub stderr: f64,
}

/// Simulates `trials` independent lazy walks of `n` steps and averages the
/// final word length. Deterministic for a given seed.
pub fn sample_speed<G, L>(
    group: &G,
    lengths: &L,
    n: usize,
    trials: usize,
    seed: u64,
    laziness: f64,
) -> Result<SpeedEstimate>
where
    G: Group,
    L: WordLength<G::Elem>,
{
    if trials == 0 {
        return Err(Error::InvalidInput("speed sampling needs at least one trial".into()));
    }
    let gens = group.generators();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..trials {
        let mut x = group.identity();
        for _ in 0..n {
            if rng.random::<f64>() >= laziness {
                x = group.multiply(&x, &gens[rng.random_range(0..gens.len())]);
            }
        }
        let len = lengths.length(&x).ok_or_else(|| {
            Error::LengthUnavailable(format!(
                "{}: sampled element after {n} steps lies outside the length table",
                group.spec()
            ))
        })? as f64;
        sum += len;
        sum_sq += len * len;
    }
    let t = trials as f64;
    let mean = sum / t;
    let var = if trials > 1 {
        ((sum_sq - t * mean * mean) / (t - 1.0)).max(0.0)
    } else {
        0.0
    };
    Ok(SpeedEstimate {
        n,
        trials,
        mean,
        stderr: (var / t).sqrt(),
    })
}
