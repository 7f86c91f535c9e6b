use rand::Rng;

use super::{
    confidence_split, empirical_means_into, initialize, lucb_log_term, marginal_arms, rand_choice, stopping_met,
    AlgoConfig, Algorithm, Choice, RunResult,
};
use crate::bandit::{top_k_mask_into, ArmSet, Instance, SamplingEnv};
use crate::error::{Error, Result};
use crate::lil::RadiusCache;
use crate::scalar::Real;

/// Which marginal arm(s) a round pulls.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplingRule {
    /// `h` with probability `T_l/(T_h + T_l)`, otherwise `l`.
    Randomized,
    /// Both `h` and `l`.
    Both,
}

#[derive(Debug, Clone)]
enum RadiusRule<T> {
    /// LIL radius with separate confidence levels for High and Low.
    Split { high: RadiusCache<T>, low: RadiusCache<T> },
    /// LIL radius at one confidence level for every arm.
    Uniform(RadiusCache<T>),
    /// Hoeffding radius with the per-round union bound.
    Lucb { delta: T, sigma: T },
}

/// Summary of one evaluation of the High/Low boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LucbRound<T> {
    pub h: usize,
    pub l: usize,
    pub lcb_h: T,
    pub ucb_l: T,
    pub stop: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LucbStep<T> {
    Stopped(LucbRound<T>),
    Sampled { round: LucbRound<T>, pulled: Vec<usize> },
}

/// Stepwise LUCB-family state: lil'RandLUCB, LUCB++, lil'LUCB and LUCB.
///
/// Per-arm means, radii and High membership of the last evaluation stay
/// readable through the accessors.
#[derive(Debug, Clone)]
pub struct LucbRunner<T> {
    algorithm: Algorithm,
    rule: RadiusRule<T>,
    sampling: SamplingRule,
    k: usize,
    n: usize,
    rounds: u64,
    means: Vec<T>,
    radii: Vec<T>,
    lower: Vec<T>,
    upper: Vec<T>,
    high: Vec<bool>,
    scratch: Vec<usize>,
}

impl<T: Real> LucbRunner<T> {
    pub fn new(config: &AlgoConfig<T>, instance: &Instance<T>) -> Result<Self> {
        let (n, k) = (instance.n(), instance.k());
        let delta = config.delta;
        let lil = config.lil;
        let split = || -> Result<RadiusRule<T>> {
            Ok(RadiusRule::Split {
                high: RadiusCache::new(confidence_split(true, delta, n, k), lil)?,
                low: RadiusCache::new(confidence_split(false, delta, n, k), lil)?,
            })
        };
        let (rule, sampling) = match config.algorithm {
            Algorithm::LilRandLucb => (split()?, SamplingRule::Randomized),
            Algorithm::LucbPlusPlus => (split()?, SamplingRule::Both),
            Algorithm::LilLucb => {
                (RadiusRule::Uniform(RadiusCache::new(delta / T::of_count(n as u64), lil)?), SamplingRule::Both)
            }
            Algorithm::Lucb => (RadiusRule::Lucb { delta, sigma: lil.sigma }, SamplingRule::Both),
            other => return Err(Error::Config(format!("{other} is not an LUCB-family algorithm"))),
        };
        Ok(Self {
            algorithm: config.algorithm,
            rule,
            sampling,
            k,
            n,
            rounds: 0,
            means: Vec::with_capacity(n),
            radii: vec![T::zero(); n],
            lower: vec![T::zero(); n],
            upper: vec![T::zero(); n],
            high: Vec::with_capacity(n),
            scratch: Vec::with_capacity(n),
        })
    }

    pub fn algorithm(&self) -> Algorithm {
        self.algorithm
    }

    pub fn sampling_rule(&self) -> SamplingRule {
        self.sampling
    }

    pub fn rounds(&self) -> u64 {
        self.rounds
    }

    pub fn means(&self) -> &[T] {
        &self.means
    }

    pub fn radii(&self) -> &[T] {
        &self.radii
    }

    pub fn high_mask(&self) -> &[bool] {
        &self.high
    }

    pub fn high_set(&self) -> ArmSet {
        ArmSet::from_mask(&self.high)
    }

    /// Recomputes High/Low, radii and marginal arms from the environment's
    /// current counts. Every arm must have been pulled at least once.
    pub fn evaluate(&mut self, env: &SamplingEnv<T>) -> Result<LucbRound<T>> {
        if env.pull_counts().contains(&0) {
            return Err(Error::Config("every arm must be pulled before evaluation".into()));
        }
        empirical_means_into(env, &mut self.means);
        top_k_mask_into(&self.means, self.k, &mut self.scratch, &mut self.high);
        let round = self.rounds + 1;
        match &mut self.rule {
            RadiusRule::Split { high, low } => {
                for i in 0..self.n {
                    let cache = if self.high[i] { &mut *high } else { &mut *low };
                    self.radii[i] = cache.get(env.pull_count(i))?;
                }
            }
            RadiusRule::Uniform(cache) => {
                for i in 0..self.n {
                    self.radii[i] = cache.get(env.pull_count(i))?;
                }
            }
            RadiusRule::Lucb { delta, sigma } => {
                let scale = T::of(2.0) * *sigma * (lucb_log_term(round, *delta, self.n) / T::of(2.0)).sqrt();
                for i in 0..self.n {
                    self.radii[i] = scale / T::of_count(env.pull_count(i)).sqrt();
                }
            }
        }
        for i in 0..self.n {
            self.lower[i] = self.means[i] - self.radii[i];
            self.upper[i] = self.means[i] + self.radii[i];
        }
        let (h, l) = marginal_arms(&self.lower, &self.upper, &self.high);
        let (lcb_h, ucb_l) = (self.lower[h], self.upper[l]);
        Ok(LucbRound { h, l, lcb_h, ucb_l, stop: stopping_met(lcb_h, ucb_l) })
    }

    /// One adaptive iteration: evaluate, then stop or pull.
    pub fn step<R: Rng + ?Sized>(&mut self, env: &mut SamplingEnv<T>, decision: &mut R) -> Result<LucbStep<T>> {
        let round = self.evaluate(env)?;
        self.rounds += 1;
        if round.stop {
            return Ok(LucbStep::Stopped(round));
        }
        let pulled = match self.sampling {
            SamplingRule::Both => vec![round.h, round.l],
            SamplingRule::Randomized => {
                let u = T::unit(decision);
                match rand_choice(env.pull_count(round.h), env.pull_count(round.l), u) {
                    Choice::SampleH => vec![round.h],
                    Choice::SampleL => vec![round.l],
                }
            }
        };
        for &arm in &pulled {
            env.pull(arm);
        }
        Ok(LucbStep::Sampled { round, pulled })
    }

    pub fn run<R: Rng + ?Sized>(&mut self, env: &mut SamplingEnv<T>, decision: &mut R, pull_cap: u64) -> Result<RunResult> {
        initialize(env);
        loop {
            if env.total_pulls() >= pull_cap {
                self.evaluate(env)?;
                return Ok(RunResult::from_env(env, self.high_set(), true, self.rounds));
            }
            if let LucbStep::Stopped(_) = self.step(env, decision)? {
                return Ok(RunResult::from_env(env, self.high_set(), false, self.rounds));
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithms::{baseline_radius, Mode};
    use crate::bandit::{decision_stream, make_instance, optimal_set, Family};
    use crate::lil::LilParams;

    fn cfg(algorithm: Algorithm) -> AlgoConfig<f64> {
        AlgoConfig::new(algorithm, 0.01, LilParams::heuristic(0.5).unwrap(), Mode::Heuristic)
    }

    /// Pulls arms following `history` after initialization.
    fn forced_env(instance: &Instance<f64>, seed: u64, history: &[usize]) -> SamplingEnv<f64> {
        let mut env = SamplingEnv::new(instance.clone(), seed);
        initialize(&mut env);
        for &a in history {
            env.pull(a);
        }
        env
    }

    #[test]
    fn radii_match_baseline_radius() {
        let instance = make_instance::<f64>(Family::AlphaExponential, 7, 2, 0.3).unwrap();
        let env = forced_env(&instance, 3, &[0, 0, 1, 4, 4, 4, 6]);
        for algorithm in [Algorithm::LilRandLucb, Algorithm::LucbPlusPlus, Algorithm::LilLucb, Algorithm::Lucb] {
            let c = cfg(algorithm);
            let mut runner = LucbRunner::new(&c, &instance).unwrap();
            runner.evaluate(&env).unwrap();
            for i in 0..7 {
                let expected = baseline_radius(
                    algorithm,
                    env.pull_count(i),
                    1,
                    c.delta,
                    7,
                    2,
                    runner.high_mask()[i],
                    &c.lil,
                )
                .unwrap();
                let got = runner.radii()[i];
                assert!((got - expected).abs() <= 1e-14 * expected, "{algorithm} arm {i}: {got} vs {expected}");
            }
        }
    }

    #[test]
    fn randomized_and_both_rules_agree_on_equal_states() {
        let instance = make_instance::<f64>(Family::AlphaExponential, 9, 3, 0.3).unwrap();
        let mut history = Vec::new();
        for step in 0..40 {
            history.push((step * 7 + step / 3) % 9);
            let env = forced_env(&instance, 21, &history);
            let mut rand_lucb = LucbRunner::new(&cfg(Algorithm::LilRandLucb), &instance).unwrap();
            let mut lucb_pp = LucbRunner::new(&cfg(Algorithm::LucbPlusPlus), &instance).unwrap();
            let a = rand_lucb.evaluate(&env).unwrap();
            let b = lucb_pp.evaluate(&env).unwrap();
            assert_eq!(a, b);
            assert_eq!(rand_lucb.radii(), lucb_pp.radii());
        }
    }

    #[test]
    fn lucb_plus_plus_equals_lil_lucb_at_half() {
        let instance = make_instance::<f64>(Family::OneSparseK, 8, 4, 0.0).unwrap();
        let history = [0, 5, 5, 2, 7, 7, 7, 1, 3, 3];
        for len in 0..=history.len() {
            let env = forced_env(&instance, 8, &history[..len]);
            let mut pp = LucbRunner::new(&cfg(Algorithm::LucbPlusPlus), &instance).unwrap();
            let mut ll = LucbRunner::new(&cfg(Algorithm::LilLucb), &instance).unwrap();
            assert_eq!(pp.evaluate(&env).unwrap(), ll.evaluate(&env).unwrap());
            assert_eq!(pp.radii(), ll.radii());
        }
    }

    #[test]
    fn stopped_runs_separate_output_from_complement() {
        let instance = make_instance::<f64>(Family::AlphaExponential, 10, 3, 0.3).unwrap();
        for algorithm in [Algorithm::LilRandLucb, Algorithm::LucbPlusPlus, Algorithm::LilLucb, Algorithm::Lucb] {
            for seed in 0..5 {
                let mut env = SamplingEnv::new(instance.clone(), seed);
                let mut rng = decision_stream(seed);
                let mut runner = LucbRunner::new(&cfg(algorithm), &instance).unwrap();
                let res = runner.run(&mut env, &mut rng, u64::MAX).unwrap();
                assert!(!res.capped);
                // Re-evaluating at the final state must see the same stop.
                runner.rounds -= 1;
                let round = runner.evaluate(&env).unwrap();
                assert!(round.stop);
                let high = runner.high_mask().to_vec();
                let min_lcb = (0..10)
                    .filter(|&i| high[i])
                    .map(|i| runner.means()[i] - runner.radii()[i])
                    .fold(f64::INFINITY, f64::min);
                let max_ucb = (0..10)
                    .filter(|&i| !high[i])
                    .map(|i| runner.means()[i] + runner.radii()[i])
                    .fold(f64::NEG_INFINITY, f64::max);
                assert!(min_lcb >= max_ucb, "{algorithm} seed {seed}");
                assert_eq!(res.output, runner.high_set());
                assert!(res.per_arm_samples.iter().all(|&c| c >= 1));
                assert_eq!(res.per_arm_samples.iter().sum::<u64>(), res.total_samples);
            }
        }
    }

    #[test]
    fn randomized_rule_pulls_one_arm_per_round() {
        let instance = make_instance::<f64>(Family::OneSparseK, 6, 2, 0.0).unwrap();
        let mut env = SamplingEnv::new(instance.clone(), 2);
        let mut rng = decision_stream(2);
        let mut runner = LucbRunner::new(&cfg(Algorithm::LilRandLucb), &instance).unwrap();
        let res = runner.run(&mut env, &mut rng, u64::MAX).unwrap();
        assert_eq!(res.total_samples, 6 + res.rounds - 1);
        assert_eq!(res.output, optimal_set(&instance));
    }

    #[test]
    fn both_rule_pulls_two_arms_per_round() {
        let instance = make_instance::<f64>(Family::OneSparseK, 6, 2, 0.0).unwrap();
        let mut env = SamplingEnv::new(instance.clone(), 2);
        let mut runner = LucbRunner::new(&cfg(Algorithm::LucbPlusPlus), &instance).unwrap();
        let res = runner.run(&mut env, &mut decision_stream(2), u64::MAX).unwrap();
        assert_eq!(res.total_samples, 6 + 2 * (res.rounds - 1));
    }

    #[test]
    fn rejects_non_lucb_algorithms() {
        let instance = make_instance::<f64>(Family::OneSparseK, 6, 2, 0.0).unwrap();
        assert!(LucbRunner::new(&cfg(Algorithm::LilClucb), &instance).is_err());
    }

    #[test]
    fn evaluate_requires_initialization() {
        let instance = make_instance::<f64>(Family::OneSparseK, 6, 2, 0.0).unwrap();
        let env = SamplingEnv::new(instance.clone(), 2);
        let mut runner = LucbRunner::new(&cfg(Algorithm::LucbPlusPlus), &instance).unwrap();
        assert!(runner.evaluate(&env).is_err());
    }
}
