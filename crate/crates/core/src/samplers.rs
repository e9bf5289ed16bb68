//! One parameter draw per arm per round.
//!
//! Four mechanisms are provided:
//!
//! * exact draws from the γ-scaled conjugate Gaussian posterior,
//! * warm-started unadjusted Langevin (ULA) chains on the unscaled
//!   posterior potential with a final Gaussian output smoothing,
//! * the stochastic-gradient variant (SGLD) with a fresh uniform minibatch
//!   at every step, and
//! * an adversarial sampler mixing exact posterior draws with a point mass.
//!
//! The Langevin chain always targets the unscaled posterior; the scale γ
//! enters only through the output smoothing variance `1/(n·L·γ)`. Chains are
//! initialized at the previous round's final chain state, or at the prior
//! mode when no chain has run yet.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::family::{FamilySpec, PriorSpec};
use crate::posterior::{
    grad_potential_into, stochastic_grad_potential_into, ArmPosteriorState, GaussianPosterior,
};

/// Which sampling mechanism produces the round's draw.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplerKind {
    Exact,
    Ula,
    Sgld,
    AdversarialMixture,
}

/// Hyperparameter schedule for the Langevin kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Schedule {
    /// Step size, step count, and batch size from the convergence analysis.
    Theoretical,
    /// Caller-supplied rules; see [`SamplerConfig::practical`] for the
    /// benchmark defaults.
    Practical,
}

pub type StepSizeRule = Arc<dyn Fn(usize) -> f64 + Send + Sync>;
pub type BatchRule = Arc<dyn Fn(usize) -> usize + Send + Sync>;

/// Configuration of one arm's sampler.
#[derive(Clone)]
pub struct SamplerConfig {
    pub kind: SamplerKind,
    /// Posterior scale γ > 0.
    pub gamma: f64,
    pub schedule: Schedule,
    /// Step count N (Practical schedule).
    pub n_steps_override: Option<usize>,
    /// `n → h⁽ⁿ⁾` (Practical schedule).
    pub step_size_rule: Option<StepSizeRule>,
    /// `n → k` minibatch size (Practical SGLD); clamped to `min(n, k)`.
    pub batch_rule: Option<BatchRule>,
    /// Mixing exponent α ∈ (0, 1] (AdversarialMixture).
    pub mixture_alpha: Option<f64>,
    /// Point-mass location (AdversarialMixture).
    pub mixture_atom: Option<Vec<f64>>,
}

impl fmt::Debug for SamplerConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SamplerConfig")
            .field("kind", &self.kind)
            .field("gamma", &self.gamma)
            .field("schedule", &self.schedule)
            .field("n_steps_override", &self.n_steps_override)
            .field("mixture_alpha", &self.mixture_alpha)
            .field("mixture_atom", &self.mixture_atom)
            .finish_non_exhaustive()
    }
}

impl SamplerConfig {
    pub fn exact(gamma: f64) -> Self {
        Self {
            kind: SamplerKind::Exact,
            gamma,
            schedule: Schedule::Theoretical,
            n_steps_override: None,
            step_size_rule: None,
            batch_rule: None,
            mixture_alpha: None,
            mixture_atom: None,
        }
    }

    pub fn theoretical(kind: SamplerKind, gamma: f64) -> Self {
        Self {
            kind,
            gamma,
            schedule: Schedule::Theoretical,
            n_steps_override: None,
            step_size_rule: None,
            batch_rule: None,
            mixture_alpha: None,
            mixture_atom: None,
        }
    }

    /// Practical schedule with the benchmark defaults: `N = 100` for ULA and
    /// `N = 200` for SGLD, step size `h⁽ⁿ⁾ = 1/(32n)`, minibatch
    /// `k = min(n, 32)`.
    pub fn practical(kind: SamplerKind, gamma: f64) -> Self {
        let n_steps = match kind {
            SamplerKind::Sgld => 200,
            _ => 100,
        };
        Self {
            kind,
            gamma,
            schedule: Schedule::Practical,
            n_steps_override: Some(n_steps),
            step_size_rule: Some(Arc::new(|n| 1.0 / (32.0 * n as f64))),
            batch_rule: Some(Arc::new(|n| n.min(32))),
            mixture_alpha: None,
            mixture_atom: None,
        }
    }

    pub fn adversarial_mixture(gamma: f64, alpha: f64, atom: Vec<f64>) -> Self {
        Self {
            kind: SamplerKind::AdversarialMixture,
            gamma,
            schedule: Schedule::Theoretical,
            n_steps_override: None,
            step_size_rule: None,
            batch_rule: None,
            mixture_alpha: Some(alpha),
            mixture_atom: Some(atom),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "gamma must be positive, got {}",
                self.gamma
            )));
        }
        if self.schedule == Schedule::Practical
            && matches!(self.kind, SamplerKind::Ula | SamplerKind::Sgld)
        {
            if self.n_steps_override.is_none() || self.step_size_rule.is_none() {
                return Err(Error::InvalidConfig(
                    "practical schedule requires n_steps_override and step_size_rule".into(),
                ));
            }
            if self.kind == SamplerKind::Sgld && self.batch_rule.is_none() {
                return Err(Error::InvalidConfig(
                    "practical SGLD requires batch_rule".into(),
                ));
            }
        }
        if self.kind == SamplerKind::AdversarialMixture {
            match self.mixture_alpha {
                Some(a) if a > 0.0 && a <= 1.0 => {}
                other => {
                    return Err(Error::InvalidConfig(format!(
                        "mixture_alpha must lie in (0, 1], got {other:?}"
                    )))
                }
            }
            if self.mixture_atom.is_none() {
                return Err(Error::InvalidConfig("mixture_atom is required".into()));
            }
        }
        Ok(())
    }
}

/// Result of one sampler invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleOutcome {
    /// The round's draw θ_{a,t} (chain end plus smoothing for Langevin kinds).
    pub theta: Vec<f64>,
    /// Final chain state θ_{Nh⁽ⁿ⁾}, stored back as the next warm start.
    pub chain_end: Vec<f64>,
    /// Likelihood gradient evaluations spent (N·n for ULA, N·k for SGLD).
    pub n_grad_evals: u64,
}

impl SampleOutcome {
    /// Outcome of a chainless draw; `chain_end` is defined equal to `theta`.
    pub fn degenerate(theta: Vec<f64>) -> Self {
        Self {
            chain_end: theta.clone(),
            theta,
            n_grad_evals: 0,
        }
    }
}

/// One Euler–Maruyama step: `θ − h·grad + √(2h)·noise`.
///
/// The standard-normal `noise` is supplied by the caller so steps are
/// deterministic under test.
pub fn ula_step(theta: &[f64], grad: &[f64], h: f64, noise: &[f64]) -> Result<Vec<f64>> {
    if !(h > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "step size must be positive, got {h}"
        )));
    }
    let diff = (2.0 * h).sqrt();
    Ok(theta
        .iter()
        .zip(grad)
        .zip(noise)
        .map(|((t, g), z)| t - h * g + diff * z)
        .collect())
}

#[inline]
fn ula_step_inplace(theta: &mut [f64], grad: &[f64], h: f64, diff: f64, noise: &[f64]) {
    for ((t, g), z) in theta.iter_mut().zip(grad).zip(noise) {
        *t = *t - h * g + diff * z;
    }
}

/// ULA schedule: `h⁽ⁿ⁾ = m/(32·n·(L + L/n)²)` and `N = ⌈640·(L + L/n)²/m²⌉`.
///
/// N is rounded up, conservative toward the convergence guarantee.
pub fn theoretical_hyperparams_ula(f: &FamilySpec, n: usize) -> Result<(f64, usize)> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let l_eff = f.l + f.l / n as f64;
    let h = f.m / (32.0 * n as f64 * l_eff * l_eff);
    let steps = (640.0 * l_eff * l_eff / (f.m * f.m)).ceil() as usize;
    Ok((h, steps))
}

/// SGLD schedule: step size as in ULA, `N = ⌈1280·(L + L/n)²/m²⌉`, and
/// minibatch `k = min(n, ⌈32·L*²/(m·ν)⌉)`.
pub fn theoretical_hyperparams_sgld(f: &FamilySpec, n: usize) -> Result<(f64, usize, usize)> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let l_eff = f.l + f.l / n as f64;
    let h = f.m / (32.0 * n as f64 * l_eff * l_eff);
    let steps = (1280.0 * l_eff * l_eff / (f.m * f.m)).ceil() as usize;
    let k = ((32.0 * f.l_star * f.l_star / (f.m * f.nu)).ceil() as usize).min(n);
    Ok((h, steps, k))
}

/// Posterior scale from the regret analysis, `γ = 1/(8·d·κ³)`. The benchmark
/// default is γ = 1.
pub fn theoretical_gamma(dim: usize, kappa: f64) -> f64 {
    1.0 / (8.0 * dim as f64 * kappa.powi(3))
}

/// Prior mode: the mean for a Gaussian prior, otherwise 100 deterministic
/// gradient-ascent steps on `log π` with step `1/L` from the origin.
pub fn prior_mode(prior: &PriorSpec, dim: usize, lipschitz: f64) -> Vec<f64> {
    if let Some(g) = &prior.gaussian {
        return g.mean.clone();
    }
    let mut theta = vec![0.0; dim];
    let mut grad = vec![0.0; dim];
    let step = 1.0 / lipschitz;
    for _ in 0..100 {
        (prior.grad_log_density)(&theta, &mut grad);
        for (t, g) in theta.iter_mut().zip(&grad) {
            *t += step * g;
        }
    }
    theta
}

/// Uniform size-`k` subset of `0..n` without replacement (Floyd's algorithm),
/// written into `buf`.
pub(crate) fn sample_batch_indices(rng: &mut ChaCha8Rng, n: usize, k: usize, buf: &mut Vec<usize>) {
    debug_assert!(k <= n);
    buf.clear();
    for j in (n - k)..n {
        let t = rng.random_range(0..=j);
        if buf.contains(&t) {
            buf.push(j);
        } else {
            buf.push(t);
        }
    }
}

/// Runs the configured Langevin chain for one round and smooths the output.
///
/// The chain starts from the stored warm start (the previous round's
/// `chain_end`) or the prior mode, takes N steps with exact (ULA) or
/// fresh-minibatch (SGLD) gradients, and returns
/// `theta = chain_end + z`, `z ~ N(0, 1/(n·L·γ)·I)`.
pub fn run_langevin(
    state: &ArmPosteriorState,
    f: &FamilySpec,
    prior: &PriorSpec,
    cfg: &SamplerConfig,
    rng: &mut ChaCha8Rng,
) -> Result<SampleOutcome> {
    run_langevin_observed(state, f, prior, cfg, rng, &mut |_| {})
}

/// [`run_langevin`] with an instrumentation hook called once with the chain's
/// initial point; used to assert warm-start threading.
pub fn run_langevin_observed(
    state: &ArmPosteriorState,
    f: &FamilySpec,
    prior: &PriorSpec,
    cfg: &SamplerConfig,
    rng: &mut ChaCha8Rng,
    observe_start: &mut dyn FnMut(&[f64]),
) -> Result<SampleOutcome> {
    cfg.validate()?;
    let n = state.n();
    if n == 0 {
        return Err(Error::NoData);
    }
    if !matches!(cfg.kind, SamplerKind::Ula | SamplerKind::Sgld) {
        return Err(Error::InvalidConfig(format!(
            "run_langevin requires a Langevin kind, got {:?}",
            cfg.kind
        )));
    }

    let (h, n_steps, batch) = resolve_hyperparams(f, cfg, n)?;
    let mut theta = match state.warm_start() {
        Some(w) => w.to_vec(),
        None => prior_mode(prior, f.dim, f.l),
    };
    observe_start(&theta);

    let dim = f.dim;
    let mut grad = vec![0.0; dim];
    let mut noise = vec![0.0; dim];
    let mut batch_buf: Vec<usize> = Vec::new();
    let diff = (2.0 * h).sqrt();

    // A full batch reduces the minibatch estimator to the exact gradient;
    // skip subsampling entirely so the SGLD path is then identical to ULA.
    let effective_batch = batch.filter(|&k| k < n);
    for _ in 0..n_steps {
        match effective_batch {
            None => grad_potential_into(state, f, prior, &theta, &mut grad)?,
            Some(k) => {
                sample_batch_indices(rng, n, k, &mut batch_buf);
                stochastic_grad_potential_into(state, f, prior, &theta, &batch_buf, &mut grad)?;
            }
        }
        for z in noise.iter_mut() {
            *z = StandardNormal.sample(rng);
        }
        ula_step_inplace(&mut theta, &grad, h, diff, &noise);
    }

    let chain_end = theta.clone();
    let smooth_sd = (1.0 / (n as f64 * f.l * cfg.gamma)).sqrt();
    let mut out = chain_end.clone();
    for o in out.iter_mut() {
        let z: f64 = StandardNormal.sample(rng);
        *o += smooth_sd * z;
    }

    let per_step = match (cfg.kind, effective_batch) {
        (SamplerKind::Ula, _) | (SamplerKind::Sgld, None) => n as u64,
        (SamplerKind::Sgld, Some(k)) => k as u64,
        _ => unreachable!(),
    };
    Ok(SampleOutcome {
        theta: out,
        chain_end,
        n_grad_evals: n_steps as u64 * per_step,
    })
}

fn resolve_hyperparams(
    f: &FamilySpec,
    cfg: &SamplerConfig,
    n: usize,
) -> Result<(f64, usize, Option<usize>)> {
    match cfg.schedule {
        Schedule::Theoretical => match cfg.kind {
            SamplerKind::Ula => {
                let (h, steps) = theoretical_hyperparams_ula(f, n)?;
                Ok((h, steps, None))
            }
            SamplerKind::Sgld => {
                let (h, steps, k) = theoretical_hyperparams_sgld(f, n)?;
                Ok((h, steps, Some(k)))
            }
            _ => Err(Error::InvalidConfig("not a Langevin kind".into())),
        },
        Schedule::Practical => {
            let steps = cfg
                .n_steps_override
                .ok_or_else(|| Error::InvalidConfig("missing n_steps_override".into()))?;
            let rule = cfg
                .step_size_rule
                .as_ref()
                .ok_or_else(|| Error::InvalidConfig("missing step_size_rule".into()))?;
            let h = rule(n);
            if !(h > 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "step_size_rule produced a nonpositive step {h}"
                )));
            }
            let k = match cfg.kind {
                SamplerKind::Sgld => {
                    let rule = cfg
                        .batch_rule
                        .as_ref()
                        .ok_or_else(|| Error::InvalidConfig("missing batch_rule".into()))?;
                    Some(rule(n).max(1).min(n))
                }
                _ => None,
            };
            Ok((h, steps, k))
        }
    }
}

/// Exact draw from the γ-scaled Gaussian posterior: tempering by γ multiplies
/// the precision by γ.
pub fn sample_exact_scaled(
    post: &GaussianPosterior,
    gamma: f64,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<f64>> {
    if !(gamma > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "gamma must be positive, got {gamma}"
        )));
    }
    let sd = (1.0 / (gamma * post.precision)).sqrt();
    Ok(post
        .mean
        .iter()
        .map(|m| {
            let z: f64 = StandardNormal.sample(rng);
            m + sd * z
        })
        .collect())
}

/// Adversarial mixture draw: the point mass `atom` with probability `n^{−α}`,
/// otherwise an exact posterior draw.
pub fn sample_adversarial_mixture(
    exact: &GaussianPosterior,
    n: usize,
    alpha: f64,
    atom: &[f64],
    rng: &mut ChaCha8Rng,
) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "alpha must lie in (0, 1], got {alpha}"
        )));
    }
    if atom.len() != exact.mean.len() {
        return Err(Error::DimensionMismatch {
            expected: exact.mean.len(),
            got: atom.len(),
        });
    }
    let w = (n as f64).powf(-alpha);
    let u: f64 = rng.random();
    if u < w {
        Ok(atom.to_vec())
    } else {
        sample_exact_scaled(exact, 1.0, rng)
    }
}

/// Round-zero draw: the Gaussian prior with precision multiplied by γ.
pub fn sample_prior_scaled(
    prior: &PriorSpec,
    gamma: f64,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<f64>> {
    if !(gamma > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "gamma must be positive, got {gamma}"
        )));
    }
    let g = prior.gaussian.as_ref().ok_or_else(|| {
        Error::InvalidConfig("exact prior sampling requires a Gaussian prior".into())
    })?;
    let sd = (g.var / gamma).sqrt();
    Ok(g.mean
        .iter()
        .map(|m| {
            let z: f64 = StandardNormal.sample(rng);
            m + sd * z
        })
        .collect())
}
