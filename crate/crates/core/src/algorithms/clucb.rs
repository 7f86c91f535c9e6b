use super::{empirical_means_into, initialize, AlgoConfig, Algorithm, RunResult};
use crate::bandit::{top_k_mask_into, ArmSet, Instance, SamplingEnv};
use crate::error::{Error, Result};
use crate::lil::RadiusCache;
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClucbStep {
    pub stop: bool,
    pub sampled_arm: Option<usize>,
}

/// lil'CLUCB for Best-K: every arm uses `U(T_i, δ/N)`; the run stops when
/// the top-K sets under empirical and revised means coincide.
#[derive(Debug, Clone)]
pub struct ClucbRunner<T> {
    cache: RadiusCache<T>,
    k: usize,
    n: usize,
    rounds: u64,
    means: Vec<T>,
    radii: Vec<T>,
    revised: Vec<T>,
    empirical_top: Vec<bool>,
    revised_top: Vec<bool>,
    scratch: Vec<usize>,
}

impl<T: Real> ClucbRunner<T> {
    pub fn new(config: &AlgoConfig<T>, instance: &Instance<T>) -> Result<Self> {
        if config.algorithm != Algorithm::LilClucb {
            return Err(Error::Config(format!("{} is not lil_clucb", config.algorithm)));
        }
        let n = instance.n();
        Ok(Self {
            cache: RadiusCache::new(config.delta / T::of_count(n as u64), config.lil)?,
            k: instance.k(),
            n,
            rounds: 0,
            means: Vec::with_capacity(n),
            radii: vec![T::zero(); n],
            revised: vec![T::zero(); n],
            empirical_top: Vec::with_capacity(n),
            revised_top: Vec::with_capacity(n),
            scratch: Vec::with_capacity(n),
        })
    }

    pub fn rounds(&self) -> u64 {
        self.rounds
    }

    /// `M_t` of the last step.
    pub fn empirical_set(&self) -> ArmSet {
        ArmSet::from_mask(&self.empirical_top)
    }

    /// `M̃_t` of the last step.
    pub fn revised_set(&self) -> ArmSet {
        ArmSet::from_mask(&self.revised_top)
    }

    pub fn radii(&self) -> &[T] {
        &self.radii
    }

    pub fn revised_means(&self) -> &[T] {
        &self.revised
    }

    /// One round: build `M_t`, the revised means and `M̃_t`; stop if the sets
    /// agree, otherwise pull the widest arm of `M_t △ M̃_t`.
    pub fn step(&mut self, env: &mut SamplingEnv<T>) -> Result<ClucbStep> {
        if env.pull_counts().contains(&0) {
            return Err(Error::Config("every arm must be pulled before a round".into()));
        }
        self.rounds += 1;
        empirical_means_into(env, &mut self.means);
        top_k_mask_into(&self.means, self.k, &mut self.scratch, &mut self.empirical_top);
        for i in 0..self.n {
            let r = self.cache.get(env.pull_count(i))?;
            self.radii[i] = r;
            self.revised[i] = if self.empirical_top[i] { self.means[i] - r } else { self.means[i] + r };
        }
        top_k_mask_into(&self.revised, self.k, &mut self.scratch, &mut self.revised_top);

        let mut widest: Option<usize> = None;
        for i in 0..self.n {
            if self.empirical_top[i] != self.revised_top[i] && widest.is_none_or(|j| self.radii[i] > self.radii[j]) {
                widest = Some(i);
            }
        }
        match widest {
            None => Ok(ClucbStep { stop: true, sampled_arm: None }),
            Some(arm) => {
                env.pull(arm);
                Ok(ClucbStep { stop: false, sampled_arm: Some(arm) })
            }
        }
    }

    pub fn run(&mut self, env: &mut SamplingEnv<T>, pull_cap: u64) -> Result<RunResult> {
        initialize(env);
        loop {
            if env.total_pulls() >= pull_cap {
                empirical_means_into(env, &mut self.means);
                top_k_mask_into(&self.means, self.k, &mut self.scratch, &mut self.empirical_top);
                return Ok(RunResult::from_env(env, self.empirical_set(), true, self.rounds));
            }
            if self.step(env)?.stop {
                return Ok(RunResult::from_env(env, self.empirical_set(), false, self.rounds));
            }
        }
    }
}
