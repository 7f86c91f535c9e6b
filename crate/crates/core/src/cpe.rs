//! Combinatorial pure exploration: decision classes, maximization oracles,
//! gaps, width bounds and the generalized lil'CLUCB loop.

use std::fmt::Debug;
use std::sync::Arc;

use crate::algorithms::{empirical_means_into, initialize, AlgoConfig, RunResult};
use crate::bandit::{best_k_gaps, ranking, top_k_mask_into, ArmSet, SamplingEnv};
use crate::error::{Error, Result};
use crate::lil::RadiusCache;
use crate::scalar::{Real, Scalar};

/// Largest class size enumerated by the brute-force paths.
pub const ENUMERATION_LIMIT: usize = 1 << 20;

/// Independence system given through a rank query.
///
/// `rank(S)` must be the size of a largest independent subset of `S`, and
/// must satisfy the matroid axioms; the greedy oracle relies on them.
pub trait Matroid: Debug + Send + Sync {
    fn ground_size(&self) -> usize;

    fn rank(&self, set: &[usize]) -> usize;

    fn is_independent(&self, set: &[usize]) -> bool {
        self.rank(set) == set.len()
    }
}

/// Sets of size at most `r`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UniformMatroid {
    n: usize,
    r: usize,
}

impl UniformMatroid {
    pub fn new(n: usize, r: usize) -> Result<Self> {
        if r == 0 || r > n {
            return Err(Error::invalid("r", format!("need 1 <= r <= n, got r={r}, n={n}")));
        }
        Ok(Self { n, r })
    }
}

impl Matroid for UniformMatroid {
    fn ground_size(&self) -> usize {
        self.n
    }

    fn rank(&self, set: &[usize]) -> usize {
        set.len().min(self.r)
    }
}

/// At most `capacities[b]` elements from each block `b`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionMatroid {
    block_of: Vec<usize>,
    capacities: Vec<usize>,
}

impl PartitionMatroid {
    pub fn new(block_of: Vec<usize>, capacities: Vec<usize>) -> Result<Self> {
        if block_of.is_empty() {
            return Err(Error::invalid("block_of", "empty ground set"));
        }
        if let Some(&b) = block_of.iter().find(|&&b| b >= capacities.len()) {
            return Err(Error::invalid("block_of", format!("block {b} has no capacity")));
        }
        if capacities.iter().all(|&c| c == 0) {
            return Err(Error::invalid("capacities", "every block has capacity 0"));
        }
        Ok(Self { block_of, capacities })
    }
}

impl Matroid for PartitionMatroid {
    fn ground_size(&self) -> usize {
        self.block_of.len()
    }

    fn rank(&self, set: &[usize]) -> usize {
        let mut used = vec![0usize; self.capacities.len()];
        for &e in set {
            used[self.block_of[e]] += 1;
        }
        used.iter().zip(&self.capacities).map(|(&u, &c)| u.min(c)).sum()
    }
}

#[derive(Debug, Clone)]
pub enum ClassKind {
    /// Sorted, deduplicated list of feasible sets.
    Explicit(Vec<ArmSet>),
    /// All `k`-subsets.
    TopK { k: usize },
    /// Nonempty independent sets of the matroid.
    Matroid(Arc<dyn Matroid>),
}

/// Collection of feasible arm subsets over `n` arms.
#[derive(Debug, Clone)]
pub struct DecisionClass {
    n: usize,
    kind: ClassKind,
    width_hint: Option<usize>,
}

impl DecisionClass {
    pub fn explicit(n: usize, members: Vec<ArmSet>) -> Result<Self> {
        let mut members = members;
        if let Some(bad) = members.iter().find(|m| m.is_empty() || m.iter().any(|i| i >= n)) {
            return Err(Error::invalid("members", format!("{bad} is empty or not a subset of 0..{n}")));
        }
        members.sort();
        members.dedup();
        if members.len() < 2 {
            return Err(Error::invalid("members", "need at least two distinct feasible sets"));
        }
        Ok(Self { n, kind: ClassKind::Explicit(members), width_hint: None })
    }

    pub fn top_k(n: usize, k: usize) -> Result<Self> {
        if k == 0 || k >= n {
            return Err(Error::invalid("k", format!("need 1 <= k <= n-1, got k={k}, n={n}")));
        }
        Ok(Self { n, kind: ClassKind::TopK { k }, width_hint: None })
    }

    pub fn matroid(matroid: Arc<dyn Matroid>) -> Result<Self> {
        let n = matroid.ground_size();
        if n < 2 {
            return Err(Error::invalid("matroid", "ground set needs at least 2 elements"));
        }
        if (0..n).all(|e| matroid.rank(&[e]) == 0) {
            return Err(Error::invalid("matroid", "every element is a loop"));
        }
        Ok(Self { n, kind: ClassKind::Matroid(matroid), width_hint: None })
    }

    pub fn with_width_hint(mut self, width: usize) -> Result<Self> {
        if width == 0 {
            return Err(Error::invalid("width_hint", "must be positive"));
        }
        self.width_hint = Some(width);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> &ClassKind {
        &self.kind
    }

    pub fn width_hint(&self) -> Option<usize> {
        self.width_hint
    }

    /// Every feasible set, in lexicographic order. Fails past
    /// [`ENUMERATION_LIMIT`] sets.
    pub fn members(&self) -> Result<Vec<ArmSet>> {
        match &self.kind {
            ClassKind::Explicit(m) => Ok(m.clone()),
            ClassKind::TopK { k } => {
                if binomial(self.n, *k) > ENUMERATION_LIMIT as u128 {
                    return Err(Error::Domain(format!("C({}, {k}) sets is too many to enumerate", self.n)));
                }
                let mut out = Vec::new();
                let mut comb: Vec<usize> = (0..*k).collect();
                loop {
                    out.push(ArmSet::new(comb.clone()));
                    let Some(pos) = (0..*k).rev().find(|&p| comb[p] < self.n - k + p) else {
                        break;
                    };
                    comb[pos] += 1;
                    for q in pos + 1..*k {
                        comb[q] = comb[q - 1] + 1;
                    }
                }
                Ok(out)
            }
            ClassKind::Matroid(m) => {
                if self.n > 20 {
                    return Err(Error::Domain(format!("2^{} subsets is too many to enumerate", self.n)));
                }
                let mut out: Vec<ArmSet> = (1u32..1 << self.n)
                    .map(|bits| (0..self.n).filter(|&e| bits >> e & 1 == 1).collect::<ArmSet>())
                    .filter(|s| m.is_independent(s.as_slice()))
                    .collect();
                out.sort();
                Ok(out)
            }
        }
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.n {
            return Err(Error::invalid("weights", format!("expected {} entries, got {len}", self.n)));
        }
        Ok(())
    }
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k) as u128;
    (0..k).fold(1u128, |acc, i| acc * (n as u128 - i) / (i + 1))
}

/// A feasible set of largest total weight; among equal totals the
/// lexicographically smallest set.
pub fn oracle_max<T: Scalar>(dc: &DecisionClass, weights: &[T]) -> Result<ArmSet> {
    let mut oracle = Oracle::default();
    let mut mask = Vec::new();
    oracle.max_into(dc, weights, &mut mask)?;
    Ok(ArmSet::from_mask(&mask))
}

/// Reusable buffers for repeated oracle calls.
#[derive(Debug, Default)]
struct Oracle {
    scratch: Vec<usize>,
    chosen: Vec<usize>,
}

impl Oracle {
    fn max_into<T: Scalar>(&mut self, dc: &DecisionClass, weights: &[T], mask: &mut Vec<bool>) -> Result<()> {
        dc.check_len(weights.len())?;
        match &dc.kind {
            ClassKind::TopK { k } => top_k_mask_into(weights, *k, &mut self.scratch, mask),
            ClassKind::Explicit(members) => {
                let mut best = 0;
                let mut best_total = members[0].total(weights);
                for (j, m) in members.iter().enumerate().skip(1) {
                    let total = m.total(weights);
                    if total > best_total {
                        best = j;
                        best_total = total;
                    }
                }
                mask.clear();
                mask.resize(dc.n, false);
                for i in members[best].iter() {
                    mask[i] = true;
                }
            }
            ClassKind::Matroid(matroid) => {
                self.chosen.clear();
                let order = ranking(weights);
                for &e in &order {
                    if !(weights[e] > T::zero()) {
                        break;
                    }
                    self.chosen.push(e);
                    if !matroid.is_independent(&self.chosen) {
                        self.chosen.pop();
                    }
                }
                if self.chosen.is_empty() {
                    let e = order.iter().copied().find(|&e| matroid.rank(&[e]) == 1).expect("validated: a non-loop exists");
                    self.chosen.push(e);
                }
                mask.clear();
                mask.resize(dc.n, false);
                for &e in &self.chosen {
                    mask[e] = true;
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gap<T> {
    Finite(T),
    /// No feasible set satisfies the constraint, e.g. the arm is in every set.
    Infinite,
}

impl<T: Copy> Gap<T> {
    pub fn value(self) -> Option<T> {
        match self {
            Gap::Finite(v) => Some(v),
            Gap::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Gap::Infinite)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CpeGapProfile<T> {
    pub gaps: Vec<Gap<T>>,
    pub opt_set: ArmSet,
    pub opt_value: T,
}

/// `μ(a) − μ(b)` summed over the symmetric difference only, so values that
/// cancel never enter the arithmetic.
fn set_difference<T: Scalar>(a: &ArmSet, b: &ArmSet, means: &[T]) -> T {
    let (a, b) = (a.as_slice(), b.as_slice());
    let (mut i, mut j) = (0, 0);
    let mut plus = T::zero();
    let mut minus = T::zero();
    while i < a.len() || j < b.len() {
        if j == b.len() || (i < a.len() && a[i] < b[j]) {
            plus = plus + means[a[i]];
            i += 1;
        } else if i == a.len() || b[j] < a[i] {
            minus = minus + means[b[j]];
            j += 1;
        } else {
            i += 1;
            j += 1;
        }
    }
    plus - minus
}

/// Gaps by enumerating every feasible set.
pub fn cpe_gaps_enumerated<T: Scalar>(dc: &DecisionClass, means: &[T]) -> Result<CpeGapProfile<T>> {
    dc.check_len(means.len())?;
    let members = dc.members()?;
    let opt = members
        .iter()
        .skip(1)
        .fold(&members[0], |best, m| if set_difference(m, best, means) > T::zero() { m } else { best });
    let mut gaps: Vec<Option<T>> = vec![None; dc.n];
    for m in &members {
        if m == opt {
            continue;
        }
        let d = set_difference(opt, m, means);
        if !(d > T::zero()) {
            return Err(Error::DegenerateOptimum(format!("{opt} and {m} have equal total mean")));
        }
        for (i, gap) in gaps.iter_mut().enumerate() {
            if opt.contains(i) != m.contains(i) && gap.is_none_or(|g| d < g) {
                *gap = Some(d);
            }
        }
    }
    Ok(CpeGapProfile {
        gaps: gaps.into_iter().map(|g| g.map_or(Gap::Infinite, Gap::Finite)).collect(),
        opt_value: opt.total(means),
        opt_set: opt.clone(),
    })
}

/// CPE gaps: closed form for the top-K class, enumeration otherwise.
pub fn cpe_gaps<T: Scalar>(dc: &DecisionClass, means: &[T]) -> Result<CpeGapProfile<T>> {
    dc.check_len(means.len())?;
    match dc.kind {
        ClassKind::TopK { k } => {
            let gaps = best_k_gaps(means, k)?;
            let opt_set = oracle_max(dc, means)?;
            let profile = CpeGapProfile {
                gaps: gaps.into_iter().map(Gap::Finite).collect(),
                opt_value: opt_set.total(means),
                opt_set,
            };
            if cfg!(debug_assertions) && binomial(dc.n, k) <= 256 {
                let brute = cpe_gaps_enumerated(dc, means)?;
                debug_assert_eq!(brute.opt_set, profile.opt_set);
                debug_assert!(brute.gaps == profile.gaps, "closed-form and enumerated gaps disagree");
            }
            Ok(profile)
        }
        _ => cpe_gaps_enumerated(dc, means),
    }
}

/// The hint when given, else 2 for top-K and matroid classes and the
/// conservative `n` for explicit lists.
pub fn width_bound(dc: &DecisionClass) -> usize {
    dc.width_hint.unwrap_or(match dc.kind {
        ClassKind::TopK { .. } | ClassKind::Matroid(_) => 2,
        ClassKind::Explicit(_) => dc.n,
    })
}

/// `width² σ² Σ Δ_i⁻² (ln δ⁻¹ + ln N + ln ln Δ_i⁻¹)` over the finite gaps,
/// with the inner `ln ln` floored at zero.
pub fn cpe_complexity(dc: &DecisionClass, means: &[f64], sigma: f64, delta: f64) -> Result<f64> {
    let profile = cpe_gaps(dc, means)?;
    let w = width_bound(dc) as f64;
    let base = (1.0 / delta).ln() + (dc.n as f64).ln();
    Ok(profile
        .gaps
        .iter()
        .filter_map(|g| g.value())
        .map(|g| (base + (1.0 / g).ln().max(1.0).ln()) / (g * g))
        .sum::<f64>()
        * w
        * w
        * sigma
        * sigma)
}

/// lil'CLUCB over a decision class: oracle sets `M_t` on the empirical means
/// and `M̃_t` on the revised means; pull the widest arm of the symmetric
/// difference until the two agree.
///
/// `correct` is judged against the oracle's set on the true means.
pub fn run_general_clucb<T: Real>(dc: &DecisionClass, config: &AlgoConfig<T>, env: &mut SamplingEnv<T>) -> Result<RunResult> {
    let instance = env.instance().clone();
    config.validate(&instance)?;
    dc.check_len(instance.n())?;
    if !env.is_fresh() {
        return Err(Error::Config("environment has already been sampled".into()));
    }
    let n = instance.n();
    let target = oracle_max(dc, instance.means())?;
    let mut cache = RadiusCache::new(config.delta / T::of_count(n as u64), config.lil)?;
    let mut oracle = Oracle::default();
    let mut means = Vec::with_capacity(n);
    let mut radii = vec![T::zero(); n];
    let mut revised = vec![T::zero(); n];
    let mut m_t = Vec::with_capacity(n);
    let mut m_tilde = Vec::with_capacity(n);
    let mut rounds = 0u64;

    initialize(env);
    let capped = loop {
        empirical_means_into(env, &mut means);
        oracle.max_into(dc, &means, &mut m_t)?;
        if env.total_pulls() >= config.pull_cap {
            break true;
        }
        rounds += 1;
        for i in 0..n {
            radii[i] = cache.get(env.pull_count(i))?;
            revised[i] = if m_t[i] { means[i] - radii[i] } else { means[i] + radii[i] };
        }
        oracle.max_into(dc, &revised, &mut m_tilde)?;
        let mut widest: Option<usize> = None;
        for i in 0..n {
            if m_t[i] != m_tilde[i] && widest.is_none_or(|j| radii[i] > radii[j]) {
                widest = Some(i);
            }
        }
        match widest {
            None => break false,
            Some(arm) => {
                env.pull(arm);
            }
        }
    };
    let output = ArmSet::from_mask(&m_t);
    let mut result = RunResult::from_env(env, output, capped, rounds);
    result.correct = result.output == target;
    Ok(result)
}
