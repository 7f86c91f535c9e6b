use super::{empirical_means_into, initialize, AlgoConfig, Algorithm, RunResult};
use crate::bandit::{ArmSet, Instance, SamplingEnv};
use crate::error::{Error, Result};
use crate::lil::RadiusCache;
use crate::scalar::Real;

/// lil'UCB for the single best arm. Pulls the arm with the largest
/// `μ̂_i + (1 + β) U(T_i, δ/N)` and stops once some arm holds
/// `T_i ≥ 1 + λ Σ_{j≠i} T_j`.
#[derive(Debug, Clone)]
pub struct LilUcbRunner<T> {
    cache: RadiusCache<T>,
    beta: T,
    lambda: T,
    rounds: u64,
    means: Vec<T>,
}

impl<T: Real> LilUcbRunner<T> {
    pub fn new(config: &AlgoConfig<T>, instance: &Instance<T>) -> Result<Self> {
        if config.algorithm != Algorithm::LilUcb {
            return Err(Error::Config(format!("{} is not lil_ucb", config.algorithm)));
        }
        if instance.k() != 1 {
            return Err(Error::Config(format!("lil_ucb needs k = 1, got {}", instance.k())));
        }
        let n = instance.n();
        Ok(Self {
            cache: RadiusCache::new(config.delta / T::of_count(n as u64), config.lil)?,
            beta: config.lilucb_beta,
            lambda: config.lilucb_lambda,
            rounds: 0,
            means: Vec::with_capacity(n),
        })
    }

    pub fn rounds(&self) -> u64 {
        self.rounds
    }

    /// The arm satisfying the count-based stopping rule, if any.
    pub fn stopped_arm(&self, env: &SamplingEnv<T>) -> Option<usize> {
        let total = env.total_pulls();
        let counts = env.pull_counts();
        (0..counts.len()).find(|&i| {
            let others = T::of_count(total - counts[i]);
            T::of_count(counts[i]) >= T::one() + self.lambda * others
        })
    }

    /// Index of the largest inflated upper bound, ties to the lowest index.
    pub fn select(&mut self, env: &SamplingEnv<T>) -> Result<usize> {
        empirical_means_into(env, &mut self.means);
        let scale = T::one() + self.beta;
        let mut best = 0;
        let mut best_ucb = T::neg_infinity();
        for (i, &m) in self.means.iter().enumerate() {
            let ucb = m + scale * self.cache.get(env.pull_count(i))?;
            if ucb > best_ucb {
                best = i;
                best_ucb = ucb;
            }
        }
        Ok(best)
    }

    pub fn run(&mut self, env: &mut SamplingEnv<T>, pull_cap: u64) -> Result<RunResult> {
        initialize(env);
        loop {
            if let Some(arm) = self.stopped_arm(env) {
                return Ok(RunResult::from_env(env, ArmSet::new(vec![arm]), false, self.rounds));
            }
            if env.total_pulls() >= pull_cap {
                let counts = env.pull_counts();
                let most = (0..counts.len()).fold(0, |b, i| if counts[i] > counts[b] { i } else { b });
                return Ok(RunResult::from_env(env, ArmSet::new(vec![most]), true, self.rounds));
            }
            self.rounds += 1;
            let arm = self.select(env)?;
            env.pull(arm);
        }
    }
}
