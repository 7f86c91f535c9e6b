//! Anytime confidence radius from the finite-time law of the iterated logarithm.
//!
//! For i.i.d. centred σ-sub-Gaussian samples the running mean after `t` draws
//! stays below
//!
//! ```text
//! U(t, ω) = (1 + √ε) · sqrt( 2σ²(1 + ε)/t · ln( ln((1 + ε)t) / ω ) )
//! ```
//!
//! simultaneously for every `t ≥ 1`, except with probability at most
//! `c_ε · ω^(1+ε)`. The [`RadiusVariant::Shifted`] form replaces the inner
//! `ln((1 + ε)t)` with `ln((1 + ε)t + 2)` so the radius is defined for every
//! `t ≥ 1` and every `ε ≥ 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Largest `t` [`threshold_time`] will search.
pub const DEFAULT_THRESHOLD_CEILING: u64 = 1 << 62;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadiusVariant {
    /// `ln((1 + ε)t)` inside the outer logarithm.
    Original,
    /// `ln((1 + ε)t + 2)` inside the outer logarithm.
    Shifted,
}

/// Slack `ε`, sub-Gaussian scale `σ` and inner-log variant of the radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LilParams<T> {
    pub epsilon: T,
    pub sigma: T,
    pub variant: RadiusVariant,
}

impl<T: Real> LilParams<T> {
    pub fn new(epsilon: T, sigma: T, variant: RadiusVariant) -> Result<Self> {
        if !(epsilon >= T::zero()) || !epsilon.is_finite() {
            return Err(Error::invalid("epsilon", format!("must be finite and >= 0, got {epsilon}")));
        }
        if !(sigma >= T::zero()) || !sigma.is_finite() {
            return Err(Error::invalid("sigma", format!("must be finite and >= 0, got {sigma}")));
        }
        Ok(Self { epsilon, sigma, variant })
    }

    /// `ε = 0` with the shifted radius, as used by the heuristic parameter mode.
    pub fn heuristic(sigma: T) -> Result<Self> {
        Self::new(T::zero(), sigma, RadiusVariant::Shifted)
    }

    pub fn with_sigma(self, sigma: T) -> Result<Self> {
        Self::new(self.epsilon, sigma, self.variant)
    }

    /// `(1 + √ε) · sqrt(2σ²(1 + ε))`, the factor in front of `sqrt(ln(..)/t)`.
    #[inline]
    fn prefactor(&self) -> T {
        let two = T::of(2.0);
        (T::one() + self.epsilon.sqrt()) * (two * self.sigma * self.sigma * (T::one() + self.epsilon)).sqrt()
    }

    /// Inner logarithm argument: `(1 + ε)t` or `(1 + ε)t + 2`.
    #[inline]
    fn inner_argument(&self, t: T) -> T {
        let scaled = (T::one() + self.epsilon) * t;
        match self.variant {
            RadiusVariant::Original => scaled,
            RadiusVariant::Shifted => scaled + T::of(2.0),
        }
    }
}

/// `U(t, ω)` under `params`.
pub fn radius<T: Real>(t: u64, omega: T, params: &LilParams<T>) -> Result<T> {
    if t == 0 {
        return Err(Error::RadiusDomain { t, omega: omega.as_f64(), reason: "t must be >= 1" });
    }
    if !(omega > T::zero() && omega <= T::one()) {
        return Err(Error::RadiusDomain { t, omega: omega.as_f64(), reason: "omega must lie in (0, 1]" });
    }
    let tt = T::of_count(t);
    let inner = params.inner_argument(tt);
    if !(inner > T::one()) {
        return Err(Error::RadiusDomain {
            t,
            omega: omega.as_f64(),
            reason: "inner logarithm argument is <= 1",
        });
    }
    let ratio = inner.ln() / omega;
    if !(ratio > T::one()) {
        return Err(Error::RadiusDomain {
            t,
            omega: omega.as_f64(),
            reason: "outer logarithm argument is <= 1",
        });
    }
    Ok(params.prefactor() * (ratio.ln() / tt).sqrt())
}

/// `c_ε = (2 + ε)/ε · (1 / ln(1 + ε))^(1 + ε)`.
pub fn error_constant<T: Real>(epsilon: T) -> Result<T> {
    if !(epsilon > T::zero()) || !epsilon.is_finite() {
        return Err(Error::Domain(format!("error constant needs epsilon > 0, got {epsilon}")));
    }
    let one = T::one();
    Ok((T::of(2.0) + epsilon) / epsilon * (one / epsilon.ln_1p()).powf(one + epsilon))
}

/// Largest confidence parameter the finite LIL bound admits: `ln(1 + ε)/e`.
pub fn admissible_delta_ceiling<T: Real>(epsilon: T) -> T {
    epsilon.ln_1p() / T::E()
}

/// Whether `(ε, δ)` lies inside the finite LIL bound's stated domain.
pub fn lemma_domain_admits<T: Real>(epsilon: T, delta: T) -> bool {
    epsilon > T::zero() && epsilon < T::one() && delta > T::zero() && delta < admissible_delta_ceiling(epsilon)
}

/// Smallest `t ≥ 1` with `radius(t, ω) < c`.
pub fn threshold_time<T: Real>(c: T, omega: T, params: &LilParams<T>) -> Result<u64> {
    threshold_time_with_ceiling(c, omega, params, DEFAULT_THRESHOLD_CEILING)
}

/// [`threshold_time`] with an explicit search ceiling.
///
/// Probes doubling times until the radius drops below `c`, then bisects the
/// last bracket. If the probed radii are not decreasing the search falls back
/// to a linear scan over the bracket.
pub fn threshold_time_with_ceiling<T: Real>(c: T, omega: T, params: &LilParams<T>, ceiling: u64) -> Result<u64> {
    if !(c > T::zero()) {
        return Err(Error::invalid("c", format!("threshold must be > 0, got {c}")));
    }
    let below = |t: u64| -> Result<bool> { Ok(radius(t, omega, params)? < c) };

    if below(1)? {
        return Ok(1);
    }
    let mut lo = 1u64;
    let mut lo_radius = radius(1, omega, params)?;
    let mut monotone = true;
    let hi = loop {
        let probe = lo.checked_mul(2).filter(|&p| p <= ceiling).ok_or(Error::ThresholdOverflow { ceiling })?;
        let r = radius(probe, omega, params)?;
        if r > lo_radius {
            monotone = false;
        }
        if r < c {
            break probe;
        }
        lo = probe;
        lo_radius = r;
    };

    if !monotone {
        return linear_scan(1, hi, c, omega, params);
    }

    // radius(lo) >= c > radius(hi)
    let (mut lo, mut hi) = (lo, hi);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if below(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    if hi > 1 && below(hi - 1)? {
        return linear_scan(1, hi, c, omega, params);
    }
    Ok(hi)
}

fn linear_scan<T: Real>(from: u64, to: u64, c: T, omega: T, params: &LilParams<T>) -> Result<u64> {
    for t in from..=to {
        if radius(t, omega, params)? < c {
            return Ok(t);
        }
    }
    Err(Error::Domain(format!("radius never dropped below {c} on [{from}, {to}]")))
}

/// Closed-form bound `(1/c) · ln(2 ln((1 + ε)/(cω)) / ω)` on any `t` with
/// `(1/t) · ln(ln((1 + ε)t)/ω) ≥ c`.
pub fn lemma2_time_bound<T: Real>(c: T, omega: T, epsilon: T) -> Result<T> {
    if !(c > T::zero()) {
        return Err(Error::Domain(format!("c must be > 0, got {c}")));
    }
    if !(omega > T::zero() && omega <= T::one()) {
        return Err(Error::Domain(format!("omega must lie in (0, 1], got {omega}")));
    }
    if !(epsilon > T::zero() && epsilon < T::one()) {
        return Err(Error::Domain(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    let inner = (T::one() + epsilon) / (c * omega);
    if !(inner > T::one()) {
        return Err(Error::Domain(format!("ln((1+eps)/(c*omega)) is not positive for c={c}, omega={omega}")));
    }
    let outer = T::of(2.0) * inner.ln() / omega;
    Ok(outer.ln() / c)
}

/// How the failure probability of a run scales with the confidence parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeltaForm {
    /// Error at most `c_ε δ` (LUCB-style algorithms).
    LinearDelta,
    /// Error at most `c_ε δ^(1+ε) / N^ε` (CLUCB-style algorithms).
    ClucbForm,
}

/// Failure-probability bound for confidence parameter `delta`.
pub fn theorem_error<T: Real>(delta: T, epsilon: T, form: DeltaForm, n: usize) -> Result<T> {
    let c = error_constant(epsilon)?;
    Ok(match form {
        DeltaForm::LinearDelta => c * delta,
        DeltaForm::ClucbForm => c * delta.powf(T::one() + epsilon) / T::of_count(n as u64).powf(epsilon),
    })
}

/// Confidence parameter whose failure bound under `form` is at most `nu`,
/// clamped to the admissible ceiling `ln(1 + ε)/e`.
pub fn faithful_delta<T: Real>(nu: T, epsilon: T, form: DeltaForm, n: usize) -> Result<T> {
    if !(nu > T::zero() && nu < T::one()) {
        return Err(Error::Domain(format!("nu must lie in (0, 1), got {nu}")));
    }
    if form == DeltaForm::ClucbForm && n < 2 {
        return Err(Error::Domain(format!("need n >= 2 arms, got {n}")));
    }
    let c = error_constant(epsilon)?;
    let mut delta = match form {
        DeltaForm::LinearDelta => nu / c,
        DeltaForm::ClucbForm => {
            (nu * T::of_count(n as u64).powf(epsilon) / c).powf(T::one() / (T::one() + epsilon))
        }
    };
    if !(delta > T::zero()) || !delta.is_finite() {
        return Err(Error::Domain(format!("derived delta {delta} is not a positive number")));
    }
    let ceiling = admissible_delta_ceiling(epsilon);
    if !(ceiling > T::zero() && ceiling < T::one()) {
        return Err(Error::Domain(format!("admissible ceiling {ceiling} is outside (0, 1)")));
    }
    if delta > ceiling {
        delta = ceiling;
    }
    // Rounding can leave the bound a hair above nu.
    while theorem_error(delta, epsilon, form, n)? > nu {
        delta = delta * (T::one() - T::epsilon() * T::of(4.0));
    }
    Ok(delta)
}

/// Memoised `U(t, ω)` for one fixed `ω`, indexed by `t`.
///
/// The sampling loops query the same handful of `(t, ω)` pairs millions of
/// times; every entry is validated once when first computed.
#[derive(Debug, Clone)]
pub struct RadiusCache<T> {
    omega: T,
    params: LilParams<T>,
    values: Vec<T>,
}

impl<T: Real> RadiusCache<T> {
    pub fn new(omega: T, params: LilParams<T>) -> Result<Self> {
        // Validate eagerly so later lookups cannot fail at t = 1.
        let first = radius(1, omega, &params)?;
        Ok(Self { omega, params, values: vec![T::nan(), first] })
    }

    pub fn omega(&self) -> T {
        self.omega
    }

    pub fn params(&self) -> &LilParams<T> {
        &self.params
    }

    pub fn get(&mut self, t: u64) -> Result<T> {
        let idx = t as usize;
        if idx >= self.values.len() {
            let start = self.values.len() as u64;
            let end = (idx + 1).max(self.values.len() * 2);
            self.values.reserve(end - self.values.len());
            for s in start..end as u64 {
                let r = radius(s, self.omega, &self.params)?;
                self.values.push(r);
            }
        }
        if t == 0 {
            return Err(Error::RadiusDomain { t, omega: self.omega.as_f64(), reason: "t must be >= 1" });
        }
        Ok(self.values[idx])
    }
}
