//! Closed-form concentration radii and empirical sampler-quality checks:
//! one-dimensional Wasserstein distances by quantile coupling, tail bounds
//! for the posterior and for the smoothed sampler outputs, and the
//! sub-Gaussianity of the averaged likelihood gradient at θ*.
//!
//! Everything here is a pure function over immutable sample buffers. All
//! empirical-vs-bound comparisons carry a 3-standard-error Monte Carlo
//! slack, reported alongside the verdict.

use std::borrow::Cow;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::family::{condition_number, FamilySpec, TrueArm};

/// One-dimensional sample buffer (raw parameters or `αᵀθ` projections).
#[derive(Debug, Clone, Default)]
pub struct EmpiricalSample {
    values: Vec<f64>,
    sorted: bool,
}

impl EmpiricalSample {
    pub fn new(values: Vec<f64>) -> Self {
        Self {
            values,
            sorted: false,
        }
    }

    pub fn from_sorted(values: Vec<f64>) -> Self {
        debug_assert!(values.windows(2).all(|w| w[0] <= w[1]));
        Self {
            values,
            sorted: true,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn sort(&mut self) {
        if !self.sorted {
            self.values.sort_unstable_by(f64::total_cmp);
            self.sorted = true;
        }
    }

    fn sorted_values(&self) -> Cow<'_, [f64]> {
        if self.sorted {
            Cow::Borrowed(&self.values)
        } else {
            let mut v = self.values.clone();
            v.sort_unstable_by(f64::total_cmp);
            Cow::Owned(v)
        }
    }

    /// Empirical `q`-quantile by order statistic, `q ∈ (0, 1]`.
    pub fn quantile(&self, q: f64) -> Result<f64> {
        if self.is_empty() {
            return Err(Error::InvalidArgument("empty sample".into()));
        }
        if !(q > 0.0 && q <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "quantile level must lie in (0, 1], got {q}"
            )));
        }
        let v = self.sorted_values();
        let idx = ((q * v.len() as f64).ceil() as usize).clamp(1, v.len()) - 1;
        Ok(v[idx])
    }

    pub fn mean(&self) -> f64 {
        crate::family::unrolled_sum(&self.values) / self.values.len().max(1) as f64
    }
}

/// Empirical Wasserstein-p distance between equal-size samples via the
/// order-statistics coupling, `(mean_i |a_(i) − b_(i)|^p)^{1/p}`.
pub fn wasserstein_1d(a: &EmpiricalSample, b: &EmpiricalSample, p: u32) -> Result<f64> {
    Ok(wasserstein_1d_with_se(a, b, p)?.0)
}

/// As [`wasserstein_1d`], also returning a plug-in standard error of the
/// distance (delta method on the mean of p-th power costs).
pub fn wasserstein_1d_with_se(
    a: &EmpiricalSample,
    b: &EmpiricalSample,
    p: u32,
) -> Result<(f64, f64)> {
    if p < 1 {
        return Err(Error::InvalidArgument("p must be at least 1".into()));
    }
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    if a.is_empty() {
        return Err(Error::InvalidArgument("empty samples".into()));
    }
    let av = a.sorted_values();
    let bv = b.sorted_values();
    let m = av.len() as f64;
    let mut sum = 0.0;
    let mut sumsq = 0.0;
    for (x, y) in av.iter().zip(bv.iter()) {
        let c = (x - y).abs().powi(p as i32);
        sum += c;
        sumsq += c * c;
    }
    let mean = sum / m;
    let var = (sumsq / m - mean * mean).max(0.0);
    let se_mean = (var / m).sqrt();
    let w = mean.powf(1.0 / p as f64);
    // d(w)/d(mean) = w^{1-p}/p
    let se_w = if mean > 0.0 {
        se_mean * w.powi(1 - p as i32) / p as f64
    } else {
        se_mean.powf(1.0 / p as f64)
    };
    Ok((w, se_w))
}

/// Posterior tail radius for the exact sampler:
/// `√((2e/(m·n))·(d/γ + log B + (32/γ + 8dκ²)·log(1/δ)))`.
pub fn concentration_radius_exact(
    f: &FamilySpec,
    log_b: f64,
    n: usize,
    gamma: f64,
    delta: f64,
) -> Result<f64> {
    radius_args_ok(n, gamma, delta)?;
    let kappa = condition_number(f)?;
    let d = f.dim as f64;
    let log_inv_delta = (1.0 / delta).ln();
    let inner = d / gamma + log_b + (32.0 / gamma + 8.0 * d * kappa * kappa) * log_inv_delta;
    Ok((2.0 * std::f64::consts::E / (f.m * n as f64) * inner).sqrt())
}

/// Tail radius for the smoothed Langevin outputs, with `σ = 16 + 4dκ²`:
/// `√((36e/(m·n))·(d + log B + 2(σ + d/(18κγ))·log(1/δ)))`.
pub fn concentration_radius_approx(
    f: &FamilySpec,
    log_b: f64,
    n: usize,
    gamma: f64,
    delta: f64,
) -> Result<f64> {
    radius_args_ok(n, gamma, delta)?;
    let kappa = condition_number(f)?;
    let d = f.dim as f64;
    let sigma = 16.0 + 4.0 * d * kappa * kappa;
    let log_inv_delta = (1.0 / delta).ln();
    let inner = d + log_b + 2.0 * (sigma + d / (18.0 * kappa * gamma)) * log_inv_delta;
    Ok((36.0 * std::f64::consts::E / (f.m * n as f64) * inner).sqrt())
}

fn radius_args_ok(n: usize, gamma: f64, delta: f64) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    if !(gamma > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "gamma must be positive, got {gamma}"
        )));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "delta must lie in (0, 1), got {delta}"
        )));
    }
    Ok(())
}

/// Result of comparing an empirical `(1−δ)`-quantile against a radius bound.
///
/// The pass rule is binomial: the fraction of samples beyond the radius may
/// not exceed `δ` by more than three standard errors.
#[derive(Debug, Clone)]
pub struct QuantileCheck {
    pub quantile: f64,
    pub radius: f64,
    pub exceed_fraction: f64,
    pub delta: f64,
    pub slack: f64,
    pub pass: bool,
}

/// Checks `P(deviation > radius) ≤ δ` on a sample of deviations `|θ − θ*|`.
pub fn concentration_quantile_check(
    deviations: &EmpiricalSample,
    radius: f64,
    delta: f64,
) -> Result<QuantileCheck> {
    if deviations.is_empty() {
        return Err(Error::InvalidArgument("empty sample".into()));
    }
    let m = deviations.len() as f64;
    let exceed = deviations.values().iter().filter(|&&x| x > radius).count() as f64 / m;
    let quantile = deviations.quantile(1.0 - delta + f64::EPSILON.min(delta / 2.0))?;
    let slack = 3.0 * (delta * (1.0 - delta) / m).sqrt();
    Ok(QuantileCheck {
        quantile,
        radius,
        exceed_fraction: exceed,
        delta,
        slack,
        pass: exceed <= delta + slack,
    })
}

/// One tail level of the gradient sub-Gaussianity check.
#[derive(Debug, Clone)]
pub struct TailLevel {
    /// Threshold `k·s` for `k ∈ {1, 2, 3}`.
    pub level: f64,
    pub empirical: f64,
    /// `2·exp(−level²/(2s²))`.
    pub bound: f64,
    pub se: f64,
    pub pass: bool,
}

/// Report of the `‖∇F_n(θ*)‖` sub-Gaussian tail check.
#[derive(Debug, Clone)]
pub struct SubGaussianReport {
    /// Claimed sub-Gaussian parameter `s = L·√(d/(n·ν))`.
    pub scale: f64,
    /// Mean of the observed gradient norms.
    pub mean_norm: f64,
    pub levels: Vec<TailLevel>,
    pub pass: bool,
}

/// Draws `n_trials` datasets of size `n` from the true arm and tests whether
/// the tail of `‖(1/n)·Σ ∇log p(xᵢ|θ*)‖` is dominated by the sub-Gaussian
/// bound with parameter `L·√(d/(n·ν))` at levels `{1, 2, 3}·s`.
pub fn grad_subgaussian_check(
    f: &FamilySpec,
    truth: &TrueArm,
    n: usize,
    n_trials: usize,
    rng: &mut ChaCha8Rng,
) -> Result<SubGaussianReport> {
    if n == 0 || n_trials == 0 {
        return Err(Error::InvalidArgument(
            "n and n_trials must be at least 1".into(),
        ));
    }
    let d = f.dim;
    let scale = f.l * (d as f64 / (n as f64 * f.nu)).sqrt();
    let mut norms = Vec::with_capacity(n_trials);
    let mut grad = vec![0.0; d];
    let mut xs = vec![0.0; n];
    for _ in 0..n_trials {
        for x in xs.iter_mut() {
            *x = truth.draw_reward(rng);
        }
        f.grad_log_likelihood_sum_into(&truth.theta_star, &xs, &mut grad);
        let norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt() / n as f64;
        norms.push(norm);
    }
    let m = n_trials as f64;
    let mean_norm = crate::family::unrolled_sum(&norms) / m;
    let mut levels = Vec::new();
    let mut all_pass = true;
    for k in 1..=3u32 {
        let level = k as f64 * scale;
        let empirical = norms.iter().filter(|&&x| x > level).count() as f64 / m;
        let bound = 2.0 * (-(k as f64 * k as f64) / 2.0).exp();
        let se = (bound.min(1.0) * (1.0 - bound.min(1.0)) / m)
            .sqrt()
            .max((empirical * (1.0 - empirical) / m).sqrt());
        let pass = empirical <= bound + 3.0 * se;
        all_pass &= pass;
        levels.push(TailLevel {
            level,
            empirical,
            bound,
            se,
            pass,
        });
    }
    Ok(SubGaussianReport {
        scale,
        mean_norm,
        levels,
        pass: all_pass,
    })
}

/// Empirical Wasserstein distance between sampler and exact draws next to the
/// theoretical convergence bound.
#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub p: u32,
    pub empirical: f64,
    pub bound: f64,
    /// Three standard errors of the distance estimator.
    pub slack: f64,
    pub pass: bool,
}

/// Compares sampler output draws against matched exact draws in `W_p` and
/// against the bound `√(8/(n·m))·(d + log B + (32 + 8dκ²)·p)^{1/2}`.
pub fn sampler_convergence_report(
    exact: &EmpiricalSample,
    sampler: &EmpiricalSample,
    n: usize,
    f: &FamilySpec,
    log_b: f64,
    p: u32,
) -> Result<ConvergenceReport> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let (empirical, se) = wasserstein_1d_with_se(exact, sampler, p)?;
    let bound = convergence_bound(f, log_b, n, p)?;
    let slack = 3.0 * se;
    Ok(ConvergenceReport {
        p,
        empirical,
        bound,
        slack,
        pass: empirical <= bound + slack,
    })
}

/// The Wasserstein-p convergence bound alone.
pub fn convergence_bound(f: &FamilySpec, log_b: f64, n: usize, p: u32) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let kappa = condition_number(f)?;
    let d = f.dim as f64;
    let inner = d + log_b + (32.0 + 8.0 * d * kappa * kappa) * p as f64;
    Ok((8.0 / (n as f64 * f.m)).sqrt() * inner.sqrt())
}

/// One row of the diagnostics table.
#[derive(Debug, Clone)]
pub struct DiagnosticRow {
    pub check: String,
    pub n: usize,
    pub empirical: f64,
    pub bound: f64,
    pub pass: bool,
}

/// Writes `check,n,empirical,bound,verdict` rows.
pub fn write_diagnostics_csv(rows: &[DiagnosticRow], path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(file);
    writeln!(w, "check,n,empirical,bound,verdict")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{:.16e},{:.16e},{}",
            r.check,
            r.n,
            r.empirical,
            r.bound,
            if r.pass { "pass" } else { "fail" }
        )?;
    }
    w.flush()?;
    Ok(())
}

/// Plain-text rendering of a diagnostics table.
pub fn render_report(rows: &[DiagnosticRow]) -> String {
    let mut out = String::new();
    for r in rows {
        let _ = writeln!(
            out,
            "{:<28} n={:<6} empirical={:<12.6} bound={:<12.6} {}",
            r.check,
            r.n,
            r.empirical,
            r.bound,
            if r.pass { "PASS" } else { "FAIL" }
        );
    }
    out
}
