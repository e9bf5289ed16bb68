//! Benchmark harness for multi-armed bandits with log-concave reward
//! families: exact Thompson sampling, approximate Thompson sampling via
//! warm-started unadjusted Langevin (ULA) and stochastic-gradient Langevin
//! (SGLD) chains, a horizon-tuned UCB baseline, an adversarial
//! corrupted-posterior sampler, and diagnostics that check the concentration
//! and convergence bounds empirically.

// `!(x > 0.0)` guards are deliberate: they reject NaN, `x <= 0.0` would not.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod error;
pub mod family;
pub mod harness;
pub mod policies;
pub mod posterior;
pub mod rng;
pub mod samplers;

pub use error::{Error, Result};
pub use family::{FamilySpec, PriorSpec, TrueArm};
pub use policies::{ArmSpec, BanditInstance, RegretTrace};
pub use posterior::{ArmPosteriorState, GaussianPosterior};
pub use samplers::{SampleOutcome, SamplerConfig, SamplerKind, Schedule};
