//! Fixed-confidence pure exploration for Best-K arm identification and
//! combinatorial decision classes, built on finite-time LIL confidence radii.
//!
//! The numeric core is generic over [`scalar::Real`] (`f32`, `f64`); gap and
//! oracle code is generic over [`scalar::Scalar`], which also admits exact
//! rationals. The aliases below fix the common choices.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algorithms;
pub mod bandit;
pub mod cpe;
pub mod error;
pub mod harness;
pub mod lil;
pub mod scalar;

pub use algorithms::{run, AlgoConfig, Algorithm, Mode, RunResult};
pub use bandit::{ArmSet, Family, Instance, SamplingEnv};
pub use cpe::{oracle_max, run_general_clucb, CpeGapProfile, DecisionClass, Gap};
pub use error::{Error, Result};
pub use lil::{LilParams, RadiusVariant};

/// Exact rational used for gap and oracle checks.
pub type Rational = num_rational::Rational64;

pub type Instance64 = Instance<f64>;
pub type Instance32 = Instance<f32>;
pub type Env64 = SamplingEnv<f64>;
pub type Env32 = SamplingEnv<f32>;
pub type AlgoConfig64 = AlgoConfig<f64>;
pub type AlgoConfig32 = AlgoConfig<f32>;
pub type LilParams64 = LilParams<f64>;
pub type LilParams32 = LilParams<f32>;
pub type ExactGapProfile = CpeGapProfile<Rational>;
