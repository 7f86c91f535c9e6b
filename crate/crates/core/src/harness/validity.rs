use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bandit::derive_seed;
use crate::error::{Error, Result};
use crate::lil::{radius, LilParams};
use crate::scalar::Real;

/// Fraction of simulated zero-mean Gaussian(σ) paths whose running mean
/// exceeds `U(t, delta)` at some `t ≤ horizon`.
///
/// Path `p` draws from `derive_seed(seed, [p])`, so results do not depend on
/// the thread count and a path set can be replayed under different `delta`.
pub fn lil_validity_check<T: Real>(params: &LilParams<T>, delta: T, horizon: u64, paths: u64, seed: u64) -> Result<f64> {
    if horizon == 0 || paths == 0 {
        return Err(Error::invalid("horizon/paths", "must be positive"));
    }
    let table = (1..=horizon).map(|t| radius(t, delta, params)).collect::<Result<Vec<T>>>()?;
    let sigma = params.sigma;
    let violations = (0..paths)
        .into_par_iter()
        .filter(|&p| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[p]));
            let mut sum = T::zero();
            table.iter().enumerate().any(|(i, &u)| {
                sum = sum + sigma * T::standard_normal(&mut rng);
                sum > u * T::of_count(i as u64 + 1)
            })
        })
        .count();
    Ok(violations as f64 / paths as f64)
}
