//! Problem instances, gap profiles and the metered sampling environment.
//!
//! Arms are 0-based throughout the library.

use std::cmp::Ordering;
use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{Real, Scalar};

/// Reward noise scale used by every instance generator (variance 1/4).
pub const DEFAULT_SIGMA: f64 = 0.5;

/// Sorted set of arm indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct ArmSet(Vec<usize>);

impl ArmSet {
    pub fn new(mut arms: Vec<usize>) -> Self {
        arms.sort_unstable();
        arms.dedup();
        Self(arms)
    }

    pub fn from_mask(mask: &[bool]) -> Self {
        Self(mask.iter().enumerate().filter_map(|(i, &m)| m.then_some(i)).collect())
    }

    pub fn contains(&self, arm: usize) -> bool {
        self.0.binary_search(&arm).is_ok()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn mask(&self, n: usize) -> Vec<bool> {
        let mut mask = vec![false; n];
        for &i in &self.0 {
            mask[i] = true;
        }
        mask
    }

    /// Members of exactly one of the two sets, ascending.
    pub fn symmetric_difference(&self, other: &ArmSet) -> Vec<usize> {
        let (a, b) = (&self.0, &other.0);
        let (mut i, mut j) = (0, 0);
        let mut out = Vec::new();
        while i < a.len() || j < b.len() {
            match (a.get(i), b.get(j)) {
                (Some(&x), Some(&y)) if x == y => {
                    i += 1;
                    j += 1;
                }
                (Some(&x), Some(&y)) if x < y => {
                    out.push(x);
                    i += 1;
                }
                (Some(_), Some(&y)) => {
                    out.push(y);
                    j += 1;
                }
                (Some(&x), None) => {
                    out.push(x);
                    i += 1;
                }
                (None, Some(&y)) => {
                    out.push(y);
                    j += 1;
                }
                (None, None) => unreachable!(),
            }
        }
        out
    }

    /// Total of `values` over the members.
    pub fn total<T: Scalar>(&self, values: &[T]) -> T {
        self.0.iter().fold(T::zero(), |acc, &i| acc + values[i])
    }
}

impl fmt::Display for ArmSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (pos, i) in self.0.iter().enumerate() {
            if pos > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "}}")
    }
}

impl FromIterator<usize> for ArmSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        Self::new(iter.into_iter().collect())
    }
}

/// Order "larger value first, then lower index first".
#[inline]
fn rank_order<T: PartialOrd>(values: &[T], a: usize, b: usize) -> Ordering {
    values[b].partial_cmp(&values[a]).unwrap_or(Ordering::Equal).then(a.cmp(&b))
}

/// Arm indices sorted by descending value, ties by ascending index.
pub fn ranking<T: Scalar>(values: &[T]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| rank_order(values, a, b));
    idx
}

/// Membership mask of the `k` largest values, ties broken toward lower indices.
///
/// `scratch` is reused between calls to avoid reallocating.
pub fn top_k_mask_into<T: Scalar>(values: &[T], k: usize, scratch: &mut Vec<usize>, mask: &mut Vec<bool>) {
    let n = values.len();
    mask.clear();
    mask.resize(n, false);
    if k == 0 {
        return;
    }
    if k >= n {
        mask.iter_mut().for_each(|m| *m = true);
        return;
    }
    scratch.clear();
    scratch.extend(0..n);
    scratch.select_nth_unstable_by(k - 1, |&a, &b| rank_order(values, a, b));
    for &i in &scratch[..k] {
        mask[i] = true;
    }
}

/// The `k` arms with the largest values, ties broken toward lower indices.
pub fn top_k<T: Scalar>(values: &[T], k: usize) -> ArmSet {
    let mut scratch = Vec::new();
    let mut mask = Vec::new();
    top_k_mask_into(values, k, &mut scratch, &mut mask);
    ArmSet::from_mask(&mask)
}

/// Best-K gaps from the two-case definition around the K-th/(K+1)-th boundary.
///
/// Fails when the K-th and (K+1)-th largest means coincide.
pub fn best_k_gaps<T: Scalar>(means: &[T], k: usize) -> Result<Vec<T>> {
    let n = means.len();
    if k == 0 || k >= n {
        return Err(Error::invalid("k", format!("need 1 <= k <= n-1, got k={k}, n={n}")));
    }
    let order = ranking(means);
    let kth = means[order[k - 1]];
    let next = means[order[k]];
    if !(kth > next) {
        return Err(Error::DegenerateOptimum(format!(
            "the {k}-th and {}-th largest means are equal",
            k + 1
        )));
    }
    Ok(means.iter().map(|&m| if m >= kth { m - next } else { kth - m }).collect())
}

/// Arm means, noise scale and target size of a Best-K problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance<T> {
    means: Vec<T>,
    sigma: T,
    k: usize,
}

impl<T: Real> Instance<T> {
    /// Validates `N >= 2`, `1 <= K <= N-1`, finite means and a unique top-K set.
    pub fn new(means: Vec<T>, sigma: T, k: usize) -> Result<Self> {
        let n = means.len();
        if n < 2 {
            return Err(Error::invalid("n", format!("need at least 2 arms, got {n}")));
        }
        if k == 0 || k >= n {
            return Err(Error::invalid("k", format!("need 1 <= k <= n-1, got k={k}, n={n}")));
        }
        if let Some(i) = means.iter().position(|m| !m.is_finite()) {
            return Err(Error::invalid("means", format!("mean of arm {i} is not finite")));
        }
        if !(sigma >= T::zero()) || !sigma.is_finite() {
            return Err(Error::invalid("sigma", format!("must be finite and >= 0, got {sigma}")));
        }
        best_k_gaps(&means, k)?;
        Ok(Self { means, sigma, k })
    }

    pub fn n(&self) -> usize {
        self.means.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn sigma(&self) -> T {
        self.sigma
    }

    pub fn means(&self) -> &[T] {
        &self.means
    }

    pub fn with_sigma(&self, sigma: T) -> Result<Self> {
        Self::new(self.means.clone(), sigma, self.k)
    }

    /// Relabels arms so that new arm `j` has the mean of old arm `perm[j]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let n = self.n();
        let mut seen = vec![false; n];
        if perm.len() != n || perm.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::invalid("perm", format!("not a permutation of 0..{n}")));
        }
        Self::new(perm.iter().map(|&p| self.means[p]).collect(), self.sigma, self.k)
    }
}

/// Instance families of the benchmark.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// K arms at 1/2, the rest at 0.
    OneSparseK,
    /// Power-law spacing on both sides of the (N-K)/N boundary.
    AlphaExponential,
    /// One arm at 1/2, the rest at 0; K = 1.
    OneSparseBest1,
    /// `1, 1 - (1/N)^α, 1 - (2/N)^α, ...`; K = 1.
    LilExponential,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::OneSparseK => "one_sparse_k",
            Family::AlphaExponential => "alpha_exponential",
            Family::OneSparseBest1 => "one_sparse_best1",
            Family::LilExponential => "lil_exponential",
        }
    }

    pub fn is_best1(self) -> bool {
        matches!(self, Family::OneSparseBest1 | Family::LilExponential)
    }

    pub fn uses_alpha(self) -> bool {
        matches!(self, Family::AlphaExponential | Family::LilExponential)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [Family::OneSparseK, Family::AlphaExponential, Family::OneSparseBest1, Family::LilExponential]
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::invalid("family", format!("unknown family `{s}`")))
    }
}

/// Builds a benchmark instance with means in descending order and σ = 1/2.
///
/// `k` is ignored (forced to 1) for the Best-1 families; `alpha` is ignored
/// by the sparse families.
pub fn make_instance<T: Real>(family: Family, n: usize, k: usize, alpha: T) -> Result<Instance<T>> {
    if n < 2 {
        return Err(Error::invalid("n", format!("need at least 2 arms, got {n}")));
    }
    let k = if family.is_best1() { 1 } else { k };
    if k == 0 || k >= n {
        return Err(Error::invalid("k", format!("need 1 <= k <= n-1, got k={k}, n={n}")));
    }
    if family.uses_alpha() && !(alpha > T::zero() && alpha.is_finite()) {
        return Err(Error::invalid("alpha", format!("must be > 0, got {alpha}")));
    }
    let nf = T::of_count(n as u64);
    let kf = T::of_count(k as u64);
    let half = T::of(0.5);
    let means: Vec<T> = match family {
        Family::OneSparseK | Family::OneSparseBest1 => {
            (0..n).map(|i| if i < k { half } else { T::zero() }).collect()
        }
        Family::AlphaExponential => {
            let base = (nf - kf) / nf;
            (1..=n)
                .map(|rank| {
                    let r = T::of_count(rank as u64);
                    if rank <= k {
                        base + kf / nf * ((kf - r) / kf).powf(alpha)
                    } else {
                        base - base * ((r - kf) / (nf - kf)).powf(alpha)
                    }
                })
                .collect()
        }
        Family::LilExponential => (0..n)
            .map(|i| if i == 0 { T::one() } else { T::one() - (T::of_count(i as u64) / nf).powf(alpha) })
            .collect(),
    };
    Instance::new(means, T::of(DEFAULT_SIGMA), k)
}

/// Per-arm gaps and the complexity `H = Σ Δ_i⁻²`.
#[derive(Debug, Clone, PartialEq)]
pub struct GapProfile<T> {
    pub gaps: Vec<T>,
    pub h_complexity: T,
}

pub fn gaps<T: Real>(instance: &Instance<T>) -> Result<GapProfile<T>> {
    let gaps = best_k_gaps(instance.means(), instance.k())?;
    let h_complexity = gaps.iter().map(|&g| (g * g).recip()).sum();
    Ok(GapProfile { gaps, h_complexity })
}

/// The K arms with the largest means.
pub fn optimal_set<T: Real>(instance: &Instance<T>) -> ArmSet {
    top_k(instance.means(), instance.k())
}

/// Deterministic seed derivation (SplitMix64 over the key parts).
pub fn derive_seed(master: u64, parts: &[u64]) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    parts.iter().fold(mix(master), |acc, &p| mix(acc ^ mix(p)))
}

const DECISION_STREAM: u64 = u64::MAX;

fn keyed_stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Random source for randomized sampling decisions of the trial `seed`.
///
/// Independent of every reward stream derived from the same seed.
pub fn decision_stream(seed: u64) -> ChaCha8Rng {
    keyed_stream(seed, DECISION_STREAM)
}

/// Single-owner sampling state of one run: reward streams and pull accounting.
///
/// Each arm draws from its own stream, so the j-th reward of arm i depends
/// only on `(seed, i, j)` and not on the order in which arms are pulled.
#[derive(Debug, Clone)]
pub struct SamplingEnv<T> {
    instance: Instance<T>,
    pull_counts: Vec<u64>,
    reward_sums: Vec<T>,
    streams: Vec<ChaCha8Rng>,
    total_pulls: u64,
}

impl<T: Real> SamplingEnv<T> {
    pub fn new(instance: Instance<T>, seed: u64) -> Self {
        let n = instance.n();
        Self {
            pull_counts: vec![0; n],
            reward_sums: vec![T::zero(); n],
            streams: (0..n as u64).map(|arm| keyed_stream(seed, arm)).collect(),
            total_pulls: 0,
            instance,
        }
    }

    pub fn instance(&self) -> &Instance<T> {
        &self.instance
    }

    /// Draws one reward `μ_arm + σ·Z` and records it.
    pub fn pull(&mut self, arm: usize) -> T {
        let mean = self.instance.means[arm];
        let sigma = self.instance.sigma;
        let reward = if sigma == T::zero() {
            mean
        } else {
            mean + sigma * T::standard_normal(&mut self.streams[arm])
        };
        self.pull_counts[arm] += 1;
        self.reward_sums[arm] = self.reward_sums[arm] + reward;
        self.total_pulls += 1;
        reward
    }

    pub fn pull_count(&self, arm: usize) -> u64 {
        self.pull_counts[arm]
    }

    pub fn pull_counts(&self) -> &[u64] {
        &self.pull_counts
    }

    pub fn reward_sum(&self, arm: usize) -> T {
        self.reward_sums[arm]
    }

    /// `None` until the arm has been pulled.
    pub fn empirical_mean(&self, arm: usize) -> Option<T> {
        let c = self.pull_counts[arm];
        (c > 0).then(|| self.reward_sums[arm] / T::of_count(c))
    }

    pub fn total_pulls(&self) -> u64 {
        self.total_pulls
    }

    pub fn is_fresh(&self) -> bool {
        self.total_pulls == 0
    }
}
