//! Best-K arm identification algorithms behind one run interface.
//!
//! | algorithm        | radius                                   | sampling            |
//! |------------------|------------------------------------------|---------------------|
//! | `LilRandLucb`    | LIL, δ/(2(N−K)) in High, δ/(2K) in Low   | one marginal arm, randomized |
//! | `LucbPlusPlus`   | LIL, same split                          | both marginal arms  |
//! | `LilLucb`        | LIL, δ/N everywhere                      | both marginal arms  |
//! | `Lucb`           | Hoeffding with a `round⁴` union bound    | both marginal arms  |
//! | `LilClucb`       | LIL, δ/N everywhere                      | widest arm of `M △ M̃` |
//! | `LilUcb`         | LIL, δ/N, inflated by `1 + β` (K = 1)    | largest UCB         |

mod clucb;
mod lilucb;
mod lucb;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use clucb::{ClucbRunner, ClucbStep};
pub use lilucb::LilUcbRunner;
pub use lucb::{LucbRound, LucbRunner, LucbStep, SamplingRule};

use crate::bandit::{gaps, optimal_set, top_k, ArmSet, Instance, SamplingEnv};
use crate::error::{Error, Result};
use crate::lil::{self, faithful_delta, threshold_time, DeltaForm, LilParams, RadiusVariant};
use crate::scalar::Real;

/// Default per-run sample cap.
pub const DEFAULT_PULL_CAP: u64 = 100_000_000;
pub const DEFAULT_LILUCB_BETA: f64 = 1.0;
pub const DEFAULT_LILUCB_LAMBDA: f64 = 9.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    LilRandLucb,
    LilClucb,
    Lucb,
    LucbPlusPlus,
    LilLucb,
    LilUcb,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::LilRandLucb,
        Algorithm::LilClucb,
        Algorithm::Lucb,
        Algorithm::LucbPlusPlus,
        Algorithm::LilLucb,
        Algorithm::LilUcb,
    ];

    /// The five algorithms that solve Best-K for any K.
    pub const BEST_K: [Algorithm; 5] = [
        Algorithm::LilRandLucb,
        Algorithm::LilClucb,
        Algorithm::Lucb,
        Algorithm::LucbPlusPlus,
        Algorithm::LilLucb,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::LilRandLucb => "lil_rand_lucb",
            Algorithm::LilClucb => "lil_clucb",
            Algorithm::Lucb => "lucb",
            Algorithm::LucbPlusPlus => "lucb_plus_plus",
            Algorithm::LilLucb => "lil_lucb",
            Algorithm::LilUcb => "lil_ucb",
        }
    }

    /// Error form used to pick δ in faithful mode.
    pub fn delta_form(self) -> DeltaForm {
        match self {
            Algorithm::LilClucb => DeltaForm::ClucbForm,
            _ => DeltaForm::LinearDelta,
        }
    }

    /// Whether the algorithm's radius is the LIL radius (everything but LUCB).
    pub fn uses_lil(self) -> bool {
        self != Algorithm::Lucb
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::invalid("algorithm", format!("unknown algorithm `{s}`")))
    }
}

/// Parameter regime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// δ and ε chosen so the proven failure bound is at most ν.
    Faithful,
    /// ε = 0 and δ = ν.
    Heuristic,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Faithful => "faithful",
            Mode::Heuristic => "heuristic",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "faithful" => Ok(Mode::Faithful),
            "heuristic" => Ok(Mode::Heuristic),
            other => Err(Error::invalid("mode", format!("unknown mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlgoConfig<T> {
    pub algorithm: Algorithm,
    pub delta: T,
    pub lil: LilParams<T>,
    pub mode: Mode,
    pub pull_cap: u64,
    pub lilucb_beta: T,
    pub lilucb_lambda: T,
}

impl<T: Real> AlgoConfig<T> {
    pub fn new(algorithm: Algorithm, delta: T, lil: LilParams<T>, mode: Mode) -> Self {
        Self {
            algorithm,
            delta,
            lil,
            mode,
            pull_cap: DEFAULT_PULL_CAP,
            lilucb_beta: T::of(DEFAULT_LILUCB_BETA),
            lilucb_lambda: T::of(DEFAULT_LILUCB_LAMBDA),
        }
    }

    /// Derives δ and the radius parameters for `mode` at target confidence `nu`.
    ///
    /// Heuristic: ε = 0, δ = ν. Faithful: ε = `epsilon_faithful` and δ from
    /// [`faithful_delta`] under the algorithm's error form. LUCB has no ε and
    /// uses δ = ν in both modes. The shifted radius is used throughout.
    pub fn for_mode(algorithm: Algorithm, mode: Mode, nu: T, epsilon_faithful: T, sigma: T, n: usize) -> Result<Self> {
        let (epsilon, delta) = match (mode, algorithm.uses_lil()) {
            (Mode::Heuristic, _) | (Mode::Faithful, false) => (T::zero(), nu),
            (Mode::Faithful, true) => {
                (epsilon_faithful, faithful_delta(nu, epsilon_faithful, algorithm.delta_form(), n)?)
            }
        };
        let lil = LilParams::new(epsilon, sigma, RadiusVariant::Shifted)?;
        Ok(Self::new(algorithm, delta, lil, mode))
    }

    pub fn with_pull_cap(mut self, pull_cap: u64) -> Self {
        self.pull_cap = pull_cap;
        self
    }

    /// Checks the configuration against an instance before any pull.
    pub fn validate(&self, instance: &Instance<T>) -> Result<()> {
        if !(self.delta > T::zero() && self.delta < T::one()) {
            return Err(Error::invalid("delta", format!("must lie in (0, 1), got {}", self.delta)));
        }
        if self.pull_cap < instance.n() as u64 {
            return Err(Error::invalid(
                "pull_cap",
                format!("cap {} is below the {} initialization pulls", self.pull_cap, instance.n()),
            ));
        }
        if self.algorithm == Algorithm::LilUcb && instance.k() != 1 {
            return Err(Error::Config(format!("lil_ucb solves Best-1 only, got K={}", instance.k())));
        }
        if !(self.lilucb_beta > T::zero()) || !(self.lilucb_lambda > T::zero()) {
            return Err(Error::invalid("lilucb", "beta and lambda must be > 0"));
        }
        Ok(())
    }
}

/// Outcome and accounting of one run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunResult {
    pub output: ArmSet,
    pub total_samples: u64,
    pub per_arm_samples: Vec<u64>,
    pub correct: bool,
    pub capped: bool,
    /// Adaptive iterations after initialization, including the stopping one.
    pub rounds: u64,
}

impl RunResult {
    pub(crate) fn from_env<T: Real>(env: &SamplingEnv<T>, output: ArmSet, capped: bool, rounds: u64) -> Self {
        let correct = output == optimal_set(env.instance());
        Self {
            output,
            total_samples: env.total_pulls(),
            per_arm_samples: env.pull_counts().to_vec(),
            correct,
            capped,
            rounds,
        }
    }
}

/// Runs `config.algorithm` on a fresh environment to its stopping rule or the pull cap.
///
/// `decision` feeds the randomized sampling rule and is untouched by the
/// deterministic algorithms.
pub fn run<T: Real, R: Rng + ?Sized>(config: &AlgoConfig<T>, env: &mut SamplingEnv<T>, decision: &mut R) -> Result<RunResult> {
    let instance = env.instance().clone();
    config.validate(&instance)?;
    if !env.is_fresh() {
        return Err(Error::Config("environment has already been sampled".into()));
    }
    match config.algorithm {
        Algorithm::LilClucb => ClucbRunner::new(config, &instance)?.run(env, config.pull_cap),
        Algorithm::LilUcb => LilUcbRunner::new(config, &instance)?.run(env, config.pull_cap),
        _ => LucbRunner::new(config, &instance)?.run(env, decision, config.pull_cap),
    }
}

/// Pulls every arm once.
pub(crate) fn initialize<T: Real>(env: &mut SamplingEnv<T>) {
    for arm in 0..env.instance().n() {
        env.pull(arm);
    }
}

/// Empirical means of all arms; every arm must have been pulled.
pub(crate) fn empirical_means_into<T: Real>(env: &SamplingEnv<T>, out: &mut Vec<T>) {
    out.clear();
    out.extend((0..env.instance().n()).map(|i| env.reward_sum(i) / T::of_count(env.pull_count(i))));
}

/// High = the K largest empirical means (ties toward lower index), Low = the rest.
pub fn partition_high_low<T: Real>(empirical_means: &[T], k: usize) -> (ArmSet, ArmSet) {
    let high = top_k(empirical_means, k);
    let low = (0..empirical_means.len()).filter(|&i| !high.contains(i)).collect();
    (high, low)
}

/// Confidence parameter of an arm: δ/(2(N−K)) in High, δ/(2K) in Low.
pub fn confidence_split<T: Real>(arm_in_high: bool, delta: T, n: usize, k: usize) -> T {
    let two = T::of(2.0);
    if arm_in_high {
        delta / (two * T::of_count((n - k) as u64))
    } else {
        delta / (two * T::of_count(k as u64))
    }
}

/// `(h, l)`: the lowest lower bound in High and the highest upper bound in Low,
/// ties toward lower index.
pub fn marginal_arms<T: Real>(lower: &[T], upper: &[T], high_mask: &[bool]) -> (usize, usize) {
    let mut h: Option<usize> = None;
    let mut l: Option<usize> = None;
    for (i, &in_high) in high_mask.iter().enumerate() {
        if in_high {
            if h.is_none_or(|j| lower[i] < lower[j]) {
                h = Some(i);
            }
        } else if l.is_none_or(|j| upper[i] > upper[j]) {
            l = Some(i);
        }
    }
    (h.expect("High is nonempty"), l.expect("Low is nonempty"))
}

/// Stopping test `LCB(h) ≥ UCB(l)`.
#[inline]
pub fn stopping_met<T: Real>(lcb_h: T, ucb_l: T) -> bool {
    lcb_h >= ucb_l
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Choice {
    SampleH,
    SampleL,
}

/// Samples `h` with probability `t_l/(t_h + t_l)` given a uniform draw `u`.
pub fn rand_choice<T: Real>(t_h: u64, t_l: u64, u: T) -> Choice {
    let threshold = T::of_count(t_l) / T::of_count(t_h + t_l);
    if u < threshold {
        Choice::SampleH
    } else {
        Choice::SampleL
    }
}

/// Radius of one arm under a baseline's own rule.
///
/// `round` is the 1-based adaptive iteration and only matters for LUCB,
/// whose radius is `2σ · sqrt(ln(5N·round⁴/(4δ)) / (2t))`.
#[allow(clippy::too_many_arguments)]
pub fn baseline_radius<T: Real>(
    algorithm: Algorithm,
    t: u64,
    round: u64,
    delta: T,
    n: usize,
    k: usize,
    in_high: bool,
    lil: &LilParams<T>,
) -> Result<T> {
    let nf = T::of_count(n as u64);
    match algorithm {
        Algorithm::LilRandLucb | Algorithm::LucbPlusPlus => lil::radius(t, confidence_split(in_high, delta, n, k), lil),
        Algorithm::LilLucb | Algorithm::LilClucb | Algorithm::LilUcb => lil::radius(t, delta / nf, lil),
        Algorithm::Lucb => lucb_radius(t, round, delta, n, lil.sigma),
    }
}

pub(crate) fn lucb_radius<T: Real>(t: u64, round: u64, delta: T, n: usize, sigma: T) -> Result<T> {
    if t == 0 || round == 0 {
        return Err(Error::Domain(format!("LUCB radius needs t, round >= 1, got t={t}, round={round}")));
    }
    let log_term = lucb_log_term(round, delta, n);
    Ok(T::of(2.0) * sigma * (log_term / (T::of(2.0) * T::of_count(t))).sqrt())
}

/// `ln(5N·round⁴/(4δ))`
#[inline]
pub(crate) fn lucb_log_term<T: Real>(round: u64, delta: T, n: usize) -> T {
    (T::of(5.0) * T::of_count(n as u64) / (T::of(4.0) * delta)).ln() + T::of(4.0) * T::of_count(round).ln()
}

/// `Σ_i 2·τ_i` where `τ_i` is the first `t` with `U(t, δ/(2N)) < Δ_i/8`.
pub fn predicted_budget<T: Real>(instance: &Instance<T>, delta: T, lil: &LilParams<T>) -> Result<T> {
    let profile = gaps(instance)?;
    let omega = delta / (T::of(2.0) * T::of_count(instance.n() as u64));
    profile.gaps.iter().try_fold(T::zero(), |acc, &gap| {
        let tau = threshold_time(gap / T::of(8.0), omega, lil)?;
        Ok(acc + T::of(2.0) * T::of_count(tau))
    })
}
