//! Orchestration of the empirical bound checks: builds a fixed scalar
//! Gaussian target, collects exact and Langevin sampler outputs, and turns
//! the comparisons into diagnostic rows. Shared by the CLI and the
//! acceptance suite.

use rand_distr::{Distribution, StandardNormal};

use crate::diagnostics::{
    concentration_quantile_check, concentration_radius_approx, concentration_radius_exact,
    grad_subgaussian_check, sampler_convergence_report, DiagnosticRow, EmpiricalSample,
};
use crate::error::Result;
use crate::family::gaussian_log_b;
use crate::policies::ArmSpec;
use crate::posterior::{conjugate_gaussian_posterior, ArmPosteriorState, GaussianPosterior};
use crate::rng::stream_rng;
use crate::samplers::{run_langevin, SamplerConfig, SamplerKind, Schedule};

/// The fixed diagnostic target: rewards `N(θ*, 1)` with `θ* = 0.5` and a
/// standard normal prior, so `log B = θ*²/2 = 0.125`.
pub const DIAG_THETA_STAR: f64 = 0.5;

pub fn diagnostic_arm() -> ArmSpec {
    ArmSpec::gaussian(DIAG_THETA_STAR, 0.0, 1.0, 1.0).expect("valid arm")
}

/// Draws a dataset of size `n` from the diagnostic arm.
pub fn diagnostic_data(arm: &ArmSpec, n: usize, seed: u64) -> Vec<f64> {
    let mut rng = stream_rng(&[seed, 0xDA7A, n as u64]);
    (0..n).map(|_| arm.truth.draw_reward(&mut rng)).collect()
}

/// `m_outputs` draws from the exact conjugate posterior.
pub fn exact_outputs(post: &GaussianPosterior, m_outputs: usize, seed: u64) -> Vec<f64> {
    let mut rng = stream_rng(&[seed, 0xE8AC7]);
    let sd = post.variance().sqrt();
    (0..m_outputs)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            post.mean[0] + sd * z
        })
        .collect()
}

/// Exact draws smoothed with the same output noise the Langevin samplers
/// apply, variance `1/(n·L·γ)`.
pub fn exact_smoothed_outputs(
    post: &GaussianPosterior,
    n: usize,
    l: f64,
    gamma: f64,
    m_outputs: usize,
    seed: u64,
) -> Vec<f64> {
    let mut rng = stream_rng(&[seed, 0x5A007]);
    let sd = (post.variance() + 1.0 / (n as f64 * l * gamma)).sqrt();
    (0..m_outputs)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            post.mean[0] + sd * z
        })
        .collect()
}

/// Smoothed sampler outputs from `m_outputs` consecutive warm-started
/// Langevin invocations on a fixed dataset, mirroring rounds in which the
/// arm is not pulled.
pub fn langevin_outputs(
    arm: &ArmSpec,
    data: &[f64],
    kind: SamplerKind,
    schedule: Schedule,
    gamma: f64,
    m_outputs: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    let cfg = match schedule {
        Schedule::Theoretical => SamplerConfig::theoretical(kind, gamma),
        Schedule::Practical => SamplerConfig::practical(kind, gamma),
    };
    let mut state = ArmPosteriorState::new();
    for &x in data {
        state.push_reward(x);
    }
    let mut rng = stream_rng(&[seed, 0x1A9E, kind as u64]);
    let mut out = Vec::with_capacity(m_outputs);
    for _ in 0..m_outputs {
        let sample = run_langevin(&state, &arm.family, &arm.prior, &cfg, &mut rng)?;
        state.set_warm_start(sample.chain_end);
        out.push(sample.theta[0]);
    }
    Ok(out)
}

fn posterior_for(arm: &ArmSpec, data: &[f64]) -> Result<GaussianPosterior> {
    let c = arm.conjugate.as_ref().expect("diagnostic arm is conjugate");
    conjugate_gaussian_posterior(c.prior_mean, c.prior_var, c.sigma2, data)
}

/// Tail checks of |θ − θ*|: the exact sampler against the exact radius and
/// the ULA/SGLD outputs against the approximate radius, for
/// δ ∈ {0.5, 0.1, 0.01}.
pub fn concentration_rows(
    ns: &[usize],
    m_outputs: usize,
    seed: u64,
) -> Result<Vec<DiagnosticRow>> {
    let arm = diagnostic_arm();
    let log_b = gaussian_log_b(&arm.prior, &arm.truth.theta_star).unwrap_or(0.0);
    let gamma = 1.0;
    let deltas = [0.5, 0.1, 0.01];
    let mut rows = Vec::new();
    for &n in ns {
        let data = diagnostic_data(&arm, n, seed);
        let post = posterior_for(&arm, &data)?;

        let exact_devs = EmpiricalSample::new(
            exact_outputs(&post, m_outputs, seed ^ n as u64)
                .into_iter()
                .map(|x| (x - DIAG_THETA_STAR).abs())
                .collect(),
        );
        for &delta in &deltas {
            let radius = concentration_radius_exact(&arm.family, log_b, n, gamma, delta)?;
            let check = concentration_quantile_check(&exact_devs, radius, delta)?;
            rows.push(DiagnosticRow {
                check: format!("conc_exact_delta{delta}"),
                n,
                empirical: check.quantile,
                bound: radius,
                pass: check.pass,
            });
        }

        for kind in [SamplerKind::Ula, SamplerKind::Sgld] {
            let outputs = langevin_outputs(
                &arm,
                &data,
                kind,
                Schedule::Theoretical,
                gamma,
                m_outputs,
                seed ^ (n as u64).rotate_left(8),
            )?;
            let devs = EmpiricalSample::new(
                outputs
                    .into_iter()
                    .map(|x| (x - DIAG_THETA_STAR).abs())
                    .collect(),
            );
            let label = match kind {
                SamplerKind::Ula => "ula",
                SamplerKind::Sgld => "sgld",
                _ => unreachable!(),
            };
            for &delta in &deltas {
                let radius = concentration_radius_approx(&arm.family, log_b, n, gamma, delta)?;
                let check = concentration_quantile_check(&devs, radius, delta)?;
                rows.push(DiagnosticRow {
                    check: format!("conc_{label}_delta{delta}"),
                    n,
                    empirical: check.quantile,
                    bound: radius,
                    pass: check.pass,
                });
            }
        }
    }
    Ok(rows)
}

/// Wasserstein fidelity of ULA/SGLD outputs against matched exact smoothed
/// draws: the convergence bound at p ∈ {1, 2} and the tight practical check
/// at 0.15 posterior standard deviations.
pub fn wasserstein_rows(ns: &[usize], m_outputs: usize, seed: u64) -> Result<Vec<DiagnosticRow>> {
    let arm = diagnostic_arm();
    let log_b = gaussian_log_b(&arm.prior, &arm.truth.theta_star).unwrap_or(0.0);
    let gamma = 1.0;
    let mut rows = Vec::new();
    for &n in ns {
        let data = diagnostic_data(&arm, n, seed);
        let post = posterior_for(&arm, &data)?;
        let mut exact = EmpiricalSample::new(exact_smoothed_outputs(
            &post,
            n,
            arm.family.l,
            gamma,
            m_outputs,
            seed ^ 0xFACE ^ n as u64,
        ));
        exact.sort();
        let post_std = post.variance().sqrt();

        for kind in [SamplerKind::Ula, SamplerKind::Sgld] {
            let label = match kind {
                SamplerKind::Ula => "ula",
                SamplerKind::Sgld => "sgld",
                _ => unreachable!(),
            };
            let mut outputs = EmpiricalSample::new(langevin_outputs(
                &arm,
                &data,
                kind,
                Schedule::Theoretical,
                gamma,
                m_outputs,
                seed ^ (n as u64).rotate_left(16),
            )?);
            outputs.sort();
            for p in [1u32, 2] {
                let report =
                    sampler_convergence_report(&exact, &outputs, n, &arm.family, log_b, p)?;
                rows.push(DiagnosticRow {
                    check: format!("w{p}_{label}"),
                    n,
                    empirical: report.empirical,
                    bound: report.bound,
                    pass: report.pass,
                });
                rows.push(DiagnosticRow {
                    check: format!("w{p}_{label}_tight"),
                    n,
                    empirical: report.empirical,
                    bound: 0.15 * post_std,
                    pass: report.empirical <= 0.15 * post_std,
                });
            }
        }
    }
    Ok(rows)
}

/// Sub-Gaussian tail rows for `‖∇F_n(θ*)‖` at levels {1, 2, 3}·s.
pub fn subgaussian_rows(ns: &[usize], n_trials: usize, seed: u64) -> Result<Vec<DiagnosticRow>> {
    let arm = diagnostic_arm();
    let mut rows = Vec::new();
    for &n in ns {
        let mut rng = stream_rng(&[seed, 0x56B6, n as u64]);
        let report = grad_subgaussian_check(&arm.family, &arm.truth, n, n_trials, &mut rng)?;
        for (k, level) in report.levels.iter().enumerate() {
            rows.push(DiagnosticRow {
                check: format!("subgauss_tail{}", k + 1),
                n,
                empirical: level.empirical,
                bound: level.bound,
                pass: level.pass,
            });
        }
    }
    Ok(rows)
}
