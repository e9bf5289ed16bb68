//! Parametric log-concave likelihood families, log-concave priors, and the
//! ground-truth arms that generate rewards.
//!
//! A family is a value object: closures for the log-likelihood and its
//! θ-gradient together with the smoothness/concavity constants every sampler
//! and diagnostic consumes. The constants are trusted inputs, not estimated.
//! The Gaussian known-variance family is the concrete instance used by the
//! built-in benchmark.

use std::fmt;
use std::sync::Arc;

use rand::RngCore;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// `(θ, x) → log p(x | θ)`.
pub type LogLikFn = Arc<dyn Fn(&[f64], f64) -> f64 + Send + Sync>;

/// `(θ, x, out)` writes `∇_θ log p(x | θ)` into `out`.
pub type GradLogLikFn = Arc<dyn Fn(&[f64], f64, &mut [f64]) + Send + Sync>;

/// `(θ, xs, out)` writes `Σ_i ∇_θ log p(x_i | θ)` into `out` in one pass.
///
/// Optional fast path for samplers; must agree with summing the pointwise
/// gradient. The pointwise closure stays the definitional one.
pub type GradLogLikSumFn = Arc<dyn Fn(&[f64], &[f64], &mut [f64]) + Send + Sync>;

/// `θ → log π(θ)` up to an additive constant.
pub type LogDensityFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// `(θ, out)` writes `∇ log π(θ)` into `out`.
pub type GradLogDensityFn = Arc<dyn Fn(&[f64], &mut [f64]) + Send + Sync>;

/// `rng → x` drawing one reward from the true distribution.
pub type RewardFn = Arc<dyn Fn(&mut dyn RngCore) -> f64 + Send + Sync>;

/// A parametric log-concave likelihood family plus its constants.
///
/// * `m` — strong log-concavity of `log p(x|θ)` in θ
/// * `l` — Lipschitz smoothness of `∇_θ log p` in θ
/// * `nu` — strong log-concavity of the true reward density in x
/// * `l_star` — Lipschitz constant of `∇_θ log p` in x
/// * `alpha` — linear mean map, `E[X|θ] = αᵀθ`
#[derive(Clone)]
pub struct FamilySpec {
    pub dim: usize,
    pub log_likelihood: LogLikFn,
    pub grad_log_likelihood: GradLogLikFn,
    /// One-pass gradient sum over a data slice; `None` falls back to the
    /// pointwise closure.
    pub grad_log_likelihood_sum: Option<GradLogLikSumFn>,
    pub m: f64,
    pub l: f64,
    pub nu: f64,
    pub l_star: f64,
    pub alpha: Vec<f64>,
}

impl fmt::Debug for FamilySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FamilySpec")
            .field("dim", &self.dim)
            .field("m", &self.m)
            .field("l", &self.l)
            .field("nu", &self.nu)
            .field("l_star", &self.l_star)
            .field("alpha", &self.alpha)
            .finish_non_exhaustive()
    }
}

impl FamilySpec {
    /// Sums `∇_θ log p(x|θ)` over `xs` into `out`, using the fast path when
    /// the family provides one.
    pub fn grad_log_likelihood_sum_into(&self, theta: &[f64], xs: &[f64], out: &mut [f64]) {
        if let Some(fast) = &self.grad_log_likelihood_sum {
            fast(theta, xs, out);
            return;
        }
        out.fill(0.0);
        let mut g = vec![0.0; self.dim];
        for &x in xs {
            (self.grad_log_likelihood)(theta, x, &mut g);
            for (o, gi) in out.iter_mut().zip(&g) {
                *o += gi;
            }
        }
    }
}

/// Parameters of an isotropic Gaussian prior, kept alongside the closures so
/// exact round-zero sampling and mode lookup stay closed-form.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianPriorParams {
    pub mean: Vec<f64>,
    pub var: f64,
}

/// A log-concave prior with gradient and optional quality constant.
#[derive(Clone)]
pub struct PriorSpec {
    pub log_density: LogDensityFn,
    pub grad_log_density: GradLogDensityFn,
    /// `log B = max_θ log π(θ) − log π(θ*)`; diagnostics only, absent when θ*
    /// is unknown.
    pub log_b: Option<f64>,
    /// Set when the prior is Gaussian; enables exact prior draws and gives
    /// the mode directly.
    pub gaussian: Option<GaussianPriorParams>,
}

impl fmt::Debug for PriorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PriorSpec")
            .field("log_b", &self.log_b)
            .field("gaussian", &self.gaussian)
            .finish_non_exhaustive()
    }
}

/// Ground truth for one arm: the parameter the environment draws rewards from.
#[derive(Clone)]
pub struct TrueArm {
    pub theta_star: Vec<f64>,
    pub reward_sampler: RewardFn,
}

impl fmt::Debug for TrueArm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TrueArm")
            .field("theta_star", &self.theta_star)
            .finish_non_exhaustive()
    }
}

impl TrueArm {
    pub fn draw_reward(&self, rng: &mut dyn RngCore) -> f64 {
        (self.reward_sampler)(rng)
    }
}

/// Condition number `κ = max(L/m, L/ν)`.
pub fn condition_number(f: &FamilySpec) -> Result<f64> {
    if f.m <= 0.0 || f.nu <= 0.0 {
        return Err(Error::InvalidFamily(format!(
            "m and nu must be positive (m={}, nu={})",
            f.m, f.nu
        )));
    }
    Ok((f.l / f.m).max(f.l / f.nu))
}

/// Mean reward `αᵀθ` under the family's linear mean map.
pub fn mean_reward(f: &FamilySpec, theta: &[f64]) -> Result<f64> {
    if theta.len() != f.dim {
        return Err(Error::DimensionMismatch {
            expected: f.dim,
            got: theta.len(),
        });
    }
    Ok(dot(&f.alpha, theta))
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Gaussian known-variance family: `log p(x|θ) = −(x − αᵀθ)²/(2σ²) − ½log(2πσ²)`.
///
/// For `d = 1`, `α = [1]` the constants are exact: `m = L = ν = L* = 1/σ²`.
/// For general `α` the constants use `‖α‖²/σ²`, which is exact along the mean
/// direction.
pub fn gaussian_family(sigma2: f64, alpha: Vec<f64>) -> Result<FamilySpec> {
    if !(sigma2 > 0.0) {
        return Err(Error::InvalidFamily(format!(
            "sigma2 must be positive, got {sigma2}"
        )));
    }
    if alpha.is_empty() {
        return Err(Error::InvalidFamily("alpha must be nonempty".into()));
    }
    let dim = alpha.len();
    let norm2 = dot(&alpha, &alpha);
    let c = if norm2 > 0.0 { norm2 / sigma2 } else { 1.0 / sigma2 };
    let log_norm = 0.5 * (2.0 * std::f64::consts::PI * sigma2).ln();

    let a1 = alpha.clone();
    let log_likelihood: LogLikFn = Arc::new(move |theta, x| {
        let r = x - dot(&a1, theta);
        -r * r / (2.0 * sigma2) - log_norm
    });

    let a2 = alpha.clone();
    let grad_log_likelihood: GradLogLikFn = Arc::new(move |theta, x, out| {
        let r = (x - dot(&a2, theta)) / sigma2;
        for (o, ai) in out.iter_mut().zip(&a2) {
            *o = ai * r;
        }
    });

    // Σ_i α (x_i − αᵀθ)/σ² = α (Σ x_i − n αᵀθ)/σ²: one pass over the slice.
    let a3 = alpha.clone();
    let grad_sum: GradLogLikSumFn = Arc::new(move |theta, xs, out| {
        let s = unrolled_sum(xs);
        let r = (s - xs.len() as f64 * dot(&a3, theta)) / sigma2;
        for (o, ai) in out.iter_mut().zip(&a3) {
            *o = ai * r;
        }
    });

    Ok(FamilySpec {
        dim,
        log_likelihood,
        grad_log_likelihood,
        grad_log_likelihood_sum: Some(grad_sum),
        m: c,
        l: c,
        nu: 1.0 / sigma2,
        l_star: c,
        alpha,
    })
}

// Four-lane sum; fixed association order keeps results reproducible while
// letting the chains pipeline.
pub(crate) fn unrolled_sum(xs: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let chunks = xs.chunks_exact(4);
    let rem = chunks.remainder();
    for c in chunks {
        acc[0] += c[0];
        acc[1] += c[1];
        acc[2] += c[2];
        acc[3] += c[3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for &x in rem {
        s += x;
    }
    s
}

/// Isotropic Gaussian prior `N(mean, var·I)`.
pub fn gaussian_prior(mean: Vec<f64>, var: f64) -> Result<PriorSpec> {
    if !(var > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "prior variance must be positive, got {var}"
        )));
    }
    let m1 = mean.clone();
    let log_density: LogDensityFn = Arc::new(move |theta| {
        let mut s = 0.0;
        for (t, mu) in theta.iter().zip(&m1) {
            let r = t - mu;
            s += r * r;
        }
        -s / (2.0 * var)
    });
    let m2 = mean.clone();
    let grad_log_density: GradLogDensityFn = Arc::new(move |theta, out| {
        for ((o, t), mu) in out.iter_mut().zip(theta).zip(&m2) {
            *o = -(t - mu) / var;
        }
    });
    Ok(PriorSpec {
        log_density,
        grad_log_density,
        log_b: None,
        gaussian: Some(GaussianPriorParams { mean, var }),
    })
}

/// `log B` of a Gaussian prior relative to a known true parameter:
/// `log π(mode) − log π(θ*) = ‖θ* − mean‖²/(2 var)`.
pub fn gaussian_log_b(prior: &PriorSpec, theta_star: &[f64]) -> Option<f64> {
    let g = prior.gaussian.as_ref()?;
    let mut s = 0.0;
    for (t, mu) in theta_star.iter().zip(&g.mean) {
        let r = t - mu;
        s += r * r;
    }
    Some(s / (2.0 * g.var))
}

/// True arm drawing `N(αᵀθ*, σ²)` rewards.
pub fn gaussian_true_arm(theta_star: Vec<f64>, alpha: &[f64], sigma2: f64) -> TrueArm {
    let mean = dot(alpha, &theta_star);
    let sd = sigma2.sqrt();
    let reward_sampler: RewardFn = Arc::new(move |rng: &mut dyn RngCore| {
        let z: f64 = StandardNormal.sample(rng);
        mean + sd * z
    });
    TrueArm {
        theta_star,
        reward_sampler,
    }
}
