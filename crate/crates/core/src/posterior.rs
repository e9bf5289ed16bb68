//! Negative log-posterior potential `U(θ) = −Σ log p(xᵢ|θ) − log π(θ)`, its
//! exact and minibatch gradients, and the closed-form conjugate Gaussian
//! posterior used as the exactness oracle.
//!
//! Observations are stored in full rather than as sufficient statistics so
//! minibatch subsampling and non-conjugate families work uniformly; the
//! conjugate oracle recomputes its sufficient statistics on demand.

use crate::error::{Error, Result};
use crate::family::{dot, unrolled_sum, FamilySpec, PriorSpec};

/// Per-arm observations plus the Langevin warm start carried between rounds.
#[derive(Debug, Clone, Default)]
pub struct ArmPosteriorState {
    data: Vec<f64>,
    warm_start: Option<Vec<f64>>,
}

impl ArmPosteriorState {
    pub fn new() -> Self {
        Self::default()
    }

    /// Pull count `n`; always equals the number of stored observations.
    pub fn n(&self) -> usize {
        self.data.len()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn push_reward(&mut self, x: f64) {
        self.data.push(x);
    }

    /// Final chain state `θ_{Nh}` from the previous Langevin run, if any.
    pub fn warm_start(&self) -> Option<&[f64]> {
        self.warm_start.as_deref()
    }

    pub fn set_warm_start(&mut self, theta: Vec<f64>) {
        self.warm_start = Some(theta);
    }
}

/// Closed-form Gaussian posterior with isotropic precision.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianPosterior {
    pub mean: Vec<f64>,
    pub precision: f64,
}

fn check_dim(f: &FamilySpec, theta: &[f64]) -> Result<()> {
    if theta.len() != f.dim {
        return Err(Error::DimensionMismatch {
            expected: f.dim,
            got: theta.len(),
        });
    }
    Ok(())
}

/// `U(θ) = −Σᵢ log p(xᵢ|θ) − log π(θ)`, exact to floating point.
pub fn potential(
    state: &ArmPosteriorState,
    f: &FamilySpec,
    prior: &PriorSpec,
    theta: &[f64],
) -> Result<f64> {
    check_dim(f, theta)?;
    let mut s = 0.0;
    for &x in state.data() {
        s += (f.log_likelihood)(theta, x);
    }
    Ok(-s - (prior.log_density)(theta))
}

/// `∇U(θ) = −Σᵢ ∇log p(xᵢ|θ) − ∇log π(θ)`.
pub fn grad_potential(
    state: &ArmPosteriorState,
    f: &FamilySpec,
    prior: &PriorSpec,
    theta: &[f64],
) -> Result<Vec<f64>> {
    let mut out = vec![0.0; f.dim];
    grad_potential_into(state, f, prior, theta, &mut out)?;
    Ok(out)
}

/// Allocation-free variant for the sampler hot loop.
pub fn grad_potential_into(
    state: &ArmPosteriorState,
    f: &FamilySpec,
    prior: &PriorSpec,
    theta: &[f64],
    out: &mut [f64],
) -> Result<()> {
    check_dim(f, theta)?;
    f.grad_log_likelihood_sum_into(theta, state.data(), out);
    finish_grad(prior, theta, out);
    Ok(())
}

// out currently holds the likelihood gradient sum; negate and subtract the
// prior gradient.
fn finish_grad(prior: &PriorSpec, theta: &[f64], out: &mut [f64]) {
    let mut pg = [0.0; 8];
    let d = theta.len();
    if d <= 8 {
        (prior.grad_log_density)(theta, &mut pg[..d]);
        for (o, p) in out.iter_mut().zip(&pg[..d]) {
            *o = -*o - p;
        }
    } else {
        let mut pg = vec![0.0; d];
        (prior.grad_log_density)(theta, &mut pg);
        for (o, p) in out.iter_mut().zip(&pg) {
            *o = -*o - p;
        }
    }
}

/// Unbiased minibatch gradient:
/// `−(n/|S|)·Σ_{k∈S} ∇log p(x_k|θ) − ∇log π(θ)`.
pub fn stochastic_grad_potential(
    state: &ArmPosteriorState,
    f: &FamilySpec,
    prior: &PriorSpec,
    theta: &[f64],
    batch_indices: &[usize],
) -> Result<Vec<f64>> {
    let mut out = vec![0.0; f.dim];
    stochastic_grad_potential_into(state, f, prior, theta, batch_indices, &mut out)?;
    Ok(out)
}

/// Allocation-free variant; `scratch` must have room for the batch values.
pub fn stochastic_grad_potential_into(
    state: &ArmPosteriorState,
    f: &FamilySpec,
    prior: &PriorSpec,
    theta: &[f64],
    batch_indices: &[usize],
    out: &mut [f64],
) -> Result<()> {
    check_dim(f, theta)?;
    if batch_indices.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let n = state.n();
    let data = state.data();
    let mut gathered = Vec::with_capacity(batch_indices.len());
    for &i in batch_indices {
        if i >= n {
            return Err(Error::IndexOutOfRange { index: i, n });
        }
        gathered.push(data[i]);
    }
    f.grad_log_likelihood_sum_into(theta, &gathered, out);
    let scale = n as f64 / batch_indices.len() as f64;
    for o in out.iter_mut() {
        *o *= scale;
    }
    finish_grad(prior, theta, out);
    Ok(())
}

/// Conjugate update for a scalar Gaussian likelihood with known variance:
/// `precision = 1/prior_var + n/σ²`, `mean = (prior_mean/prior_var + Σx/σ²)/precision`.
pub fn conjugate_gaussian_posterior(
    prior_mean: f64,
    prior_var: f64,
    sigma2: f64,
    data: &[f64],
) -> Result<GaussianPosterior> {
    if !(prior_var > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "prior_var must be positive, got {prior_var}"
        )));
    }
    if !(sigma2 > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "sigma2 must be positive, got {sigma2}"
        )));
    }
    let n = data.len() as f64;
    let precision = 1.0 / prior_var + n / sigma2;
    let mean = (prior_mean / prior_var + unrolled_sum(data) / sigma2) / precision;
    Ok(GaussianPosterior {
        mean: vec![mean],
        precision,
    })
}

impl GaussianPosterior {
    pub fn variance(&self) -> f64 {
        1.0 / self.precision
    }

    /// Projection of the mean onto the mean map, `αᵀ mean`.
    pub fn mean_reward(&self, alpha: &[f64]) -> f64 {
        dot(alpha, &self.mean)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::{gaussian_family, gaussian_prior};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn state_with(data: &[f64]) -> ArmPosteriorState {
        let mut s = ArmPosteriorState::new();
        for &x in data {
            s.push_reward(x);
        }
        s
    }

    #[test]
    fn empty_state_potential_is_negative_log_prior() {
        let f = gaussian_family(1.0, vec![1.0]).unwrap();
        let p = gaussian_prior(vec![0.0], 1.0).unwrap();
        let s = ArmPosteriorState::new();
        let theta = [0.7];
        let u = potential(&s, &f, &p, &theta).unwrap();
        assert!((u - (-(p.log_density)(&theta))).abs() < 1e-15);
    }

    #[test]
    fn potential_two_standard_normals_at_zero() {
        // Unit-variance likelihood at its mode plus N(0,1) prior at its mode,
        // with the prior normalizer omitted by construction.
        let f = gaussian_family(1.0, vec![1.0]).unwrap();
        let p = gaussian_prior(vec![0.0], 1.0).unwrap();
        let s = state_with(&[0.0]);
        let u = potential(&s, &f, &p, &[0.0]).unwrap();
        // −log N(0;0,1) = ½log(2π); the prior term contributes 0 because
        // log_density drops its constant. Add it back for the comparison.
        let half_log_2pi = 0.9189385332046727;
        assert!((u + (p.log_density)(&[0.0]) - half_log_2pi).abs() < 1e-12);
        assert!((u + half_log_2pi - 2.0 * half_log_2pi).abs() < 1e-12);
    }

    #[test]
    fn grad_potential_linear_case() {
        let f = gaussian_family(1.0, vec![1.0]).unwrap();
        let p = gaussian_prior(vec![0.0], 1.0).unwrap();
        let s = state_with(&[2.0, 4.0]);
        let g = grad_potential(&s, &f, &p, &[1.0]).unwrap();
        assert!((g[0] - (-3.0)).abs() < 1e-12, "{:?}", g);
    }

    #[test]
    fn grad_potential_zero_at_prior_mode_with_no_data() {
        let f = gaussian_family(1.0, vec![1.0]).unwrap();
        let p = gaussian_prior(vec![1.5], 2.0).unwrap();
        let s = ArmPosteriorState::new();
        let g = grad_potential(&s, &f, &p, &[1.5]).unwrap();
        assert_eq!(g[0], 0.0);
    }

    #[test]
    fn grad_potential_matches_finite_differences() {
        let f = gaussian_family(1.3, vec![1.0]).unwrap();
        let p = gaussian_prior(vec![0.4], 2.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let data: Vec<f64> = (0..17).map(|_| StandardNormal.sample(&mut rng)).collect();
        let s = state_with(&data);
        let h = 1e-5;
        for _ in 0..20 {
            let t: f64 = StandardNormal.sample(&mut rng);
            let g = grad_potential(&s, &f, &p, &[t]).unwrap();
            let up = potential(&s, &f, &p, &[t + h]).unwrap();
            let um = potential(&s, &f, &p, &[t - h]).unwrap();
            let fd = (up - um) / (2.0 * h);
            assert!(
                (g[0] - fd).abs() / fd.abs().max(1e-3) <= 1e-6,
                "grad {} vs fd {fd}",
                g[0]
            );
        }
    }

    // Hessian of U is constant n/σ² + 1/prior_var for the Gaussian instance.
    #[test]
    fn second_differences_give_constant_curvature() {
        let sigma2 = 0.8;
        let prior_var = 3.0;
        let f = gaussian_family(sigma2, vec![1.0]).unwrap();
        let p = gaussian_prior(vec![0.0], prior_var).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let data: Vec<f64> = (0..12).map(|_| StandardNormal.sample(&mut rng)).collect();
        let s = state_with(&data);
        let expect = 12.0 / sigma2 + 1.0 / prior_var;
        let h = 1e-4;
        for _ in 0..20 {
            let t: f64 = StandardNormal.sample(&mut rng);
            let u0 = potential(&s, &f, &p, &[t - h]).unwrap();
            let u1 = potential(&s, &f, &p, &[t]).unwrap();
            let u2 = potential(&s, &f, &p, &[t + h]).unwrap();
            let curv = (u2 - 2.0 * u1 + u0) / (h * h);
            assert!((curv - expect).abs() < 1e-3, "curv {curv} vs {expect}");
        }
    }

    fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
        fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if cur.len() == k {
                out.push(cur.clone());
                return;
            }
            for i in start..n {
                cur.push(i);
                rec(i + 1, n, k, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        rec(0, n, k, &mut Vec::new(), &mut out);
        out
    }

    #[test]
    fn full_batch_collapses_to_exact_gradient() {
        let f = gaussian_family(1.0, vec![1.0]).unwrap();
        let p = gaussian_prior(vec![0.0], 1.0).unwrap();
        let s = state_with(&[0.3, -1.1, 2.2]);
        let idx: Vec<usize> = (0..3).collect();
        let g = stochastic_grad_potential(&s, &f, &p, &[0.5], &idx).unwrap();
        let exact = grad_potential(&s, &f, &p, &[0.5]).unwrap();
        assert!((g[0] - exact[0]).abs() < 1e-12);
    }

    #[test]
    fn singleton_dataset_single_batch() {
        let f = gaussian_family(1.0, vec![1.0]).unwrap();
        let p = gaussian_prior(vec![0.0], 1.0).unwrap();
        let s = state_with(&[1.7]);
        let g = stochastic_grad_potential(&s, &f, &p, &[0.2], &[0]).unwrap();
        let exact = grad_potential(&s, &f, &p, &[0.2]).unwrap();
        assert!((g[0] - exact[0]).abs() < 1e-15);
    }

    // Enumerating every size-k subset is the unbiasedness oracle: the average
    // of the minibatch estimator over all subsets must equal the exact
    // gradient.
    #[test]
    fn unbiased_over_exhaustive_subsets() {
        let f = gaussian_family(1.0, vec![1.0]).unwrap();
        let p = gaussian_prior(vec![0.0], 1.0).unwrap();
        for n in 1..=6usize {
            let data: Vec<f64> = (0..n).map(|i| 0.7 * i as f64 - 1.3).collect();
            let s = state_with(&data);
            let theta = [0.9];
            let exact = grad_potential(&s, &f, &p, &theta).unwrap();
            for k in 1..=n {
                let subsets = combinations(n, k);
                let mut acc = 0.0;
                for sub in &subsets {
                    acc += stochastic_grad_potential(&s, &f, &p, &theta, sub).unwrap()[0];
                }
                let avg = acc / subsets.len() as f64;
                assert!(
                    (avg - exact[0]).abs() <= 1e-12,
                    "n={n} k={k}: {avg} vs {}",
                    exact[0]
                );
            }
        }
    }

    #[test]
    fn stochastic_grad_error_paths() {
        let f = gaussian_family(1.0, vec![1.0]).unwrap();
        let p = gaussian_prior(vec![0.0], 1.0).unwrap();
        let s = state_with(&[1.0, 2.0]);
        assert!(matches!(
            stochastic_grad_potential(&s, &f, &p, &[0.0], &[]),
            Err(Error::EmptyBatch)
        ));
        assert!(matches!(
            stochastic_grad_potential(&s, &f, &p, &[0.0], &[5]),
            Err(Error::IndexOutOfRange { index: 5, n: 2 })
        ));
    }

    #[test]
    fn conjugate_posterior_unit_case() {
        // Unit prior and likelihood variance: posterior variance is 1/(n+1).
        for n in [0usize, 1, 5, 20] {
            let data = vec![0.3; n];
            let post = conjugate_gaussian_posterior(0.0, 1.0, 1.0, &data).unwrap();
            assert!((post.variance() - 1.0 / (n as f64 + 1.0)).abs() < 1e-15);
        }
    }

    #[test]
    fn conjugate_posterior_no_data_is_prior() {
        let post = conjugate_gaussian_posterior(1.4, 2.5, 1.0, &[]).unwrap();
        assert!((post.mean[0] - 1.4).abs() < 1e-15);
        assert!((post.variance() - 2.5).abs() < 1e-15);
    }

    #[test]
    fn conjugate_posterior_two_ones() {
        let post = conjugate_gaussian_posterior(0.0, 1.0, 1.0, &[1.0, 1.0]).unwrap();
        assert!((post.mean[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((post.variance() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn conjugate_posterior_rejects_bad_variances() {
        assert!(conjugate_gaussian_posterior(0.0, 0.0, 1.0, &[]).is_err());
        assert!(conjugate_gaussian_posterior(0.0, 1.0, -1.0, &[]).is_err());
    }

    #[test]
    fn warm_start_absence_tracks_pull_count() {
        let mut s = ArmPosteriorState::new();
        assert_eq!(s.n(), 0);
        assert!(s.warm_start().is_none());
        s.push_reward(0.5);
        assert_eq!(s.n(), 1);
        s.set_warm_start(vec![0.1]);
        assert_eq!(s.warm_start().unwrap(), &[0.1]);
    }
}
