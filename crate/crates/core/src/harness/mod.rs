//! Experiment runner: built-in bandit instances, seeded parallel runs,
//! aggregation with confidence bands, and CSV/SVG artifact emission.

mod csv;
pub mod diagnose;
mod svg;

pub use csv::{emit_csv, emit_summary_csv};
pub use svg::emit_svg;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::policies::{regret_trace, thompson_round, ucb_round, ArmSpec, BanditInstance, RegretTrace};
use crate::posterior::ArmPosteriorState;
use crate::rng::stream_rng;
use crate::samplers::{SamplerConfig, SamplerKind, Schedule};

/// Policies the harness can benchmark. Ids are stable so that RNG streams
/// never move when the policy set changes.
#[derive(Debug, Clone, PartialEq)]
pub enum PolicySpec {
    ExactTS,
    UlaTS,
    SgldTS,
    Ucb,
    MixtureTS {
        alpha: f64,
        atom: f64,
        /// 1-based arm numbers to corrupt.
        corrupted_arms: Vec<usize>,
    },
}

impl PolicySpec {
    pub fn id(&self) -> u64 {
        match self {
            PolicySpec::ExactTS => 0,
            PolicySpec::UlaTS => 1,
            PolicySpec::SgldTS => 2,
            PolicySpec::Ucb => 3,
            PolicySpec::MixtureTS { .. } => 4,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            PolicySpec::ExactTS => "ExactTS",
            PolicySpec::UlaTS => "UlaTS",
            PolicySpec::SgldTS => "SgldTS",
            PolicySpec::Ucb => "UCB",
            PolicySpec::MixtureTS { .. } => "MixtureTS",
        }
    }
}

/// The three built-in prior layouts over the common 10-arm instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BuiltinInstance {
    /// Prior means ordered like the true means (arm 1 → 5, arm 10 → 10).
    GoodPriors,
    /// Every arm gets the same prior, mean 7.5.
    AgnosticPriors,
    /// Prior means in the opposite order (arm 1 → 10, arm 10 → 5).
    AdversarialPriors,
}

impl BuiltinInstance {
    pub fn name(self) -> &'static str {
        match self {
            BuiltinInstance::GoodPriors => "good",
            BuiltinInstance::AgnosticPriors => "agnostic",
            BuiltinInstance::AdversarialPriors => "adversarial",
        }
    }
}

/// Which bandit instance an experiment runs on.
#[derive(Debug, Clone, PartialEq)]
pub enum InstanceSpec {
    Builtin(BuiltinInstance),
    Custom(PathBuf),
}

/// Full description of one experiment.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub instance: InstanceSpec,
    pub policies: Vec<PolicySpec>,
    pub horizon: usize,
    pub runs: usize,
    pub base_seed: u64,
    pub schedule: Schedule,
    pub gamma: f64,
}

/// The common 10-arm Gaussian benchmark: unit-variance rewards with means
/// 1..10 and variance-4 Gaussian priors arranged per `which`.
pub fn builtin_instance(which: BuiltinInstance, horizon: usize) -> BanditInstance {
    let arms = (0..10usize)
        .map(|i| {
            let spread = 5.0 * i as f64 / 9.0;
            let prior_mean = match which {
                BuiltinInstance::GoodPriors => 5.0 + spread,
                BuiltinInstance::AgnosticPriors => 7.5,
                BuiltinInstance::AdversarialPriors => 10.0 - spread,
            };
            ArmSpec::gaussian((i + 1) as f64, prior_mean, 4.0, 1.0).expect("valid arm")
        })
        .collect();
    BanditInstance::new(arms, horizon).expect("10 arms")
}

/// The two-arm corrupted-posterior instance: means (1, 0), unit variances,
/// standard normal priors.
pub fn counterexample_instance(horizon: usize) -> BanditInstance {
    BanditInstance::new(
        vec![
            ArmSpec::gaussian(1.0, 0.0, 1.0, 1.0).expect("valid arm"),
            ArmSpec::gaussian(0.0, 0.0, 1.0, 1.0).expect("valid arm"),
        ],
        horizon,
    )
    .expect("2 arms")
}

/// Parses the flat `key=value` custom-instance format: `reward_var` plus
/// `mean_i`, `prior_mean_i`, `prior_var_i` for arms `i = 1..K`. Lines
/// starting with `#` are comments.
pub fn custom_instance_from_file(path: &Path, horizon: usize) -> Result<BanditInstance> {
    let text = std::fs::read_to_string(path)?;
    let mut kv: BTreeMap<String, f64> = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!("line {}: expected key=value", lineno + 1))
        })?;
        let parsed: f64 = value.trim().parse().map_err(|_| {
            Error::Config(format!("line {}: bad number {value:?}", lineno + 1))
        })?;
        kv.insert(key.trim().to_string(), parsed);
    }
    let reward_var = *kv
        .get("reward_var")
        .ok_or_else(|| Error::Config("missing reward_var".into()))?;
    let mut arms = Vec::new();
    let mut i = 1usize;
    while let Some(&mean) = kv.get(&format!("mean_{i}")) {
        let prior_mean = *kv
            .get(&format!("prior_mean_{i}"))
            .ok_or_else(|| Error::Config(format!("missing prior_mean_{i}")))?;
        let prior_var = *kv
            .get(&format!("prior_var_{i}"))
            .ok_or_else(|| Error::Config(format!("missing prior_var_{i}")))?;
        arms.push(
            ArmSpec::gaussian(mean, prior_mean, prior_var, reward_var)
                .map_err(|e| Error::Config(format!("arm {i}: {e}")))?,
        );
        i += 1;
    }
    if arms.len() < 2 {
        return Err(Error::Config(format!(
            "custom instance needs at least 2 arms, found {}",
            arms.len()
        )));
    }
    BanditInstance::new(arms, horizon)
}

/// Resolves an [`InstanceSpec`] into a concrete instance and its name.
pub fn resolve_instance(spec: &InstanceSpec, horizon: usize) -> Result<(String, BanditInstance)> {
    match spec {
        InstanceSpec::Builtin(b) => Ok((b.name().to_string(), builtin_instance(*b, horizon))),
        InstanceSpec::Custom(path) => Ok((
            "custom".to_string(),
            custom_instance_from_file(path, horizon)?,
        )),
    }
}

/// One run's outcome; failed runs keep their reason instead of a trace.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub policy_idx: usize,
    pub run: usize,
    pub result: std::result::Result<RegretTrace, String>,
}

/// Per-t aggregate over the surviving runs of one policy.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateCurve {
    pub mean: Vec<f64>,
    /// `1.96·(sample std)/√runs` per t.
    pub ci_half_width: Vec<f64>,
    pub surviving_runs: usize,
}

/// All traces and aggregates of one experiment.
#[derive(Debug, Clone)]
pub struct ResultTable {
    pub instance_name: String,
    pub horizon: usize,
    pub policies: Vec<PolicySpec>,
    pub outcomes: Vec<RunOutcome>,
}

impl ResultTable {
    pub fn traces_for(&self, policy_idx: usize) -> impl Iterator<Item = (usize, &RegretTrace)> {
        self.outcomes
            .iter()
            .filter(move |o| o.policy_idx == policy_idx)
            .filter_map(|o| o.result.as_ref().ok().map(|t| (o.run, t)))
    }

    pub fn failures(&self) -> impl Iterator<Item = &RunOutcome> {
        self.outcomes.iter().filter(|o| o.result.is_err())
    }

    /// Mean and CI curves over surviving runs; `None` when no run survived or
    /// the horizon is zero.
    pub fn aggregate(&self, policy_idx: usize) -> Option<AggregateCurve> {
        let traces: Vec<&RegretTrace> = self.traces_for(policy_idx).map(|(_, t)| t).collect();
        if traces.is_empty() || self.horizon == 0 {
            return None;
        }
        let r = traces.len();
        let mut mean = vec![0.0; self.horizon];
        let mut ci = vec![0.0; self.horizon];
        for t in 0..self.horizon {
            let mut sum = 0.0;
            for tr in &traces {
                sum += tr.cum_regret[t];
            }
            let mu = sum / r as f64;
            mean[t] = mu;
            if r > 1 {
                let mut ss = 0.0;
                for tr in &traces {
                    let d = tr.cum_regret[t] - mu;
                    ss += d * d;
                }
                let std = (ss / (r as f64 - 1.0)).sqrt();
                ci[t] = 1.96 * std / (r as f64).sqrt();
            }
        }
        Some(AggregateCurve {
            mean,
            ci_half_width: ci,
            surviving_runs: r,
        })
    }

    /// Mean cumulative regret at 1-based round `t`.
    pub fn mean_cum_regret_at(&self, policy_idx: usize, t: usize) -> Option<f64> {
        if t == 0 || t > self.horizon {
            return None;
        }
        let mut sum = 0.0;
        let mut r = 0usize;
        for (_, tr) in self.traces_for(policy_idx) {
            sum += tr.cum_regret[t - 1];
            r += 1;
        }
        (r > 0).then(|| sum / r as f64)
    }

    pub fn mean_final_regret(&self, policy_idx: usize) -> Option<f64> {
        self.mean_cum_regret_at(policy_idx, self.horizon)
    }
}

fn validate(cfg: &ExperimentConfig, instance: &BanditInstance) -> Result<()> {
    if cfg.runs == 0 {
        return Err(Error::Config("runs must be at least 1".into()));
    }
    if !(cfg.gamma > 0.0) {
        return Err(Error::Config(format!(
            "gamma must be positive, got {}",
            cfg.gamma
        )));
    }
    if cfg.policies.is_empty() {
        return Err(Error::Config("at least one policy is required".into()));
    }
    if cfg
        .policies
        .iter()
        .any(|p| matches!(p, PolicySpec::Ucb))
        && cfg.horizon < instance.arms.len()
        && cfg.horizon > 0
    {
        return Err(Error::Config(format!(
            "UCB needs horizon >= {} arms for forced initialization",
            instance.arms.len()
        )));
    }
    for p in &cfg.policies {
        if let PolicySpec::MixtureTS {
            alpha,
            corrupted_arms,
            ..
        } = p
        {
            if !(*alpha > 0.0 && *alpha <= 1.0) {
                return Err(Error::Config(format!(
                    "mixture alpha must lie in (0, 1], got {alpha}"
                )));
            }
            for &a in corrupted_arms {
                if a == 0 || a > instance.arms.len() {
                    return Err(Error::Config(format!(
                        "corrupted arm {a} out of range 1..={}",
                        instance.arms.len()
                    )));
                }
            }
        }
    }
    Ok(())
}

/// Runs every `(policy, run)` cell of the experiment in parallel and collects
/// the table. Results are independent of worker count and execution order.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ResultTable> {
    let (instance_name, instance) = resolve_instance(&cfg.instance, cfg.horizon)?;
    run_experiment_on(cfg, &instance_name, &instance)
}

/// As [`run_experiment`] with a caller-supplied instance.
pub fn run_experiment_on(
    cfg: &ExperimentConfig,
    instance_name: &str,
    instance: &BanditInstance,
) -> Result<ResultTable> {
    validate(cfg, instance)?;
    let cells: Vec<(usize, usize)> = (0..cfg.policies.len())
        .flat_map(|p| (0..cfg.runs).map(move |r| (p, r)))
        .collect();
    let outcomes: Vec<RunOutcome> = cells
        .par_iter()
        .map(|&(policy_idx, run)| RunOutcome {
            policy_idx,
            run,
            result: simulate_run(cfg, instance, &cfg.policies[policy_idx], run)
                .map_err(|e| e.to_string()),
        })
        .collect();
    Ok(ResultTable {
        instance_name: instance_name.to_string(),
        horizon: cfg.horizon,
        policies: cfg.policies.clone(),
        outcomes,
    })
}

const PURPOSE_SAMPLER: u64 = 0;
const PURPOSE_REWARD: u64 = 1;

fn simulate_run(
    cfg: &ExperimentConfig,
    instance: &BanditInstance,
    policy: &PolicySpec,
    run: usize,
) -> Result<RegretTrace> {
    let k = instance.arms.len();
    let pid = policy.id();
    let mut chosen = Vec::with_capacity(cfg.horizon);
    let mut rewards = Vec::with_capacity(cfg.horizon);

    match policy {
        PolicySpec::Ucb => {
            let sigma2 = instance.arms[0]
                .conjugate
                .as_ref()
                .map(|c| c.sigma2)
                .unwrap_or(1.0);
            let mut counts = vec![0u64; k];
            let mut sums = vec![0.0; k];
            for t in 1..=cfg.horizon {
                // The index is deterministic; only the reward uses randomness,
                // on the chosen arm's stream.
                let mut probe = stream_rng(&[
                    cfg.base_seed,
                    pid,
                    run as u64,
                    t as u64,
                    k as u64,
                    PURPOSE_REWARD,
                ]);
                let (arm, reward) = ucb_round(
                    instance,
                    &mut counts,
                    &mut sums,
                    t,
                    cfg.horizon,
                    sigma2,
                    &mut probe,
                )?;
                chosen.push(arm);
                rewards.push(reward);
            }
        }
        _ => {
            let cfgs = sampler_configs(policy, cfg, k);
            let mut states = vec![ArmPosteriorState::new(); k];
            let mut arm_rngs: Vec<rand_chacha::ChaCha8Rng> = (0..k)
                .map(|a| stream_rng(&[0, 0, 0, 0, a as u64, PURPOSE_SAMPLER]))
                .collect();
            for t in 1..=cfg.horizon {
                for (a, slot) in arm_rngs.iter_mut().enumerate() {
                    *slot = stream_rng(&[
                        cfg.base_seed,
                        pid,
                        run as u64,
                        t as u64,
                        a as u64,
                        PURPOSE_SAMPLER,
                    ]);
                }
                let mut reward_rng = stream_rng(&[
                    cfg.base_seed,
                    pid,
                    run as u64,
                    t as u64,
                    k as u64,
                    PURPOSE_REWARD,
                ]);
                let (arm, reward) =
                    thompson_round(instance, &mut states, &cfgs, t, &mut arm_rngs, &mut reward_rng)?;
                chosen.push(arm);
                rewards.push(reward);
            }
        }
    }
    regret_trace(instance, chosen, rewards)
}

fn sampler_configs(policy: &PolicySpec, cfg: &ExperimentConfig, k: usize) -> Vec<SamplerConfig> {
    let langevin = |kind: SamplerKind| match cfg.schedule {
        Schedule::Theoretical => SamplerConfig::theoretical(kind, cfg.gamma),
        Schedule::Practical => SamplerConfig::practical(kind, cfg.gamma),
    };
    match policy {
        PolicySpec::ExactTS => vec![SamplerConfig::exact(cfg.gamma); k],
        PolicySpec::UlaTS => vec![langevin(SamplerKind::Ula); k],
        PolicySpec::SgldTS => vec![langevin(SamplerKind::Sgld); k],
        PolicySpec::MixtureTS {
            alpha,
            atom,
            corrupted_arms,
        } => (1..=k)
            .map(|arm_no| {
                if corrupted_arms.contains(&arm_no) {
                    SamplerConfig::adversarial_mixture(cfg.gamma, *alpha, vec![*atom])
                } else {
                    SamplerConfig::exact(cfg.gamma)
                }
            })
            .collect(),
        PolicySpec::Ucb => unreachable!("UCB has no sampler configs"),
    }
}
