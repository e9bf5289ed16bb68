//! Round-level decision loops: Thompson sampling over any sampler kind, the
//! horizon-tuned UCB baseline, and pseudo-regret accounting.

use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::family::{mean_reward, FamilySpec, PriorSpec, TrueArm};
use crate::posterior::{conjugate_gaussian_posterior, ArmPosteriorState};
use crate::samplers::{
    run_langevin, sample_adversarial_mixture, sample_exact_scaled, sample_prior_scaled,
    SampleOutcome, SamplerConfig, SamplerKind,
};

/// Conjugate parameters of a Gaussian arm; required by the exact and
/// adversarial samplers.
#[derive(Debug, Clone, PartialEq)]
pub struct ConjugateGaussian {
    pub prior_mean: f64,
    pub prior_var: f64,
    pub sigma2: f64,
}

/// One arm: likelihood family, prior, ground truth, and (for Gaussian arms)
/// the closed-form conjugate structure.
#[derive(Debug, Clone)]
pub struct ArmSpec {
    pub family: FamilySpec,
    pub prior: PriorSpec,
    pub truth: TrueArm,
    pub conjugate: Option<ConjugateGaussian>,
}

impl ArmSpec {
    /// Scalar Gaussian arm with identity mean map: rewards `N(true_mean, σ²)`
    /// and prior `N(prior_mean, prior_var)` on the mean.
    pub fn gaussian(true_mean: f64, prior_mean: f64, prior_var: f64, sigma2: f64) -> Result<Self> {
        let family = crate::family::gaussian_family(sigma2, vec![1.0])?;
        let prior = crate::family::gaussian_prior(vec![prior_mean], prior_var)?;
        let truth = crate::family::gaussian_true_arm(vec![true_mean], &[1.0], sigma2);
        Ok(Self {
            family,
            prior,
            truth,
            conjugate: Some(ConjugateGaussian {
                prior_mean,
                prior_var,
                sigma2,
            }),
        })
    }

    pub fn true_mean(&self) -> f64 {
        crate::family::dot(&self.family.alpha, &self.truth.theta_star)
    }
}

/// A bandit problem: at least two arms and a horizon.
#[derive(Debug, Clone)]
pub struct BanditInstance {
    pub arms: Vec<ArmSpec>,
    pub horizon: usize,
}

impl BanditInstance {
    pub fn new(arms: Vec<ArmSpec>, horizon: usize) -> Result<Self> {
        if arms.len() < 2 {
            return Err(Error::InvalidArgument(
                "a bandit instance needs at least 2 arms".into(),
            ));
        }
        Ok(Self { arms, horizon })
    }

    pub fn true_means(&self) -> Vec<f64> {
        self.arms.iter().map(|a| a.true_mean()).collect()
    }

    pub fn best_mean(&self) -> f64 {
        self.true_means()
            .into_iter()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Chosen arms, realized rewards, and cumulative pseudo-regret of one run.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RegretTrace {
    pub chosen: Vec<usize>,
    pub rewards: Vec<f64>,
    pub cum_regret: Vec<f64>,
}

/// First index achieving the maximum; ties go to the lowest index.
pub(crate) fn argmax_lowest(values: &[f64]) -> usize {
    let mut best = 0;
    let mut best_v = f64::NEG_INFINITY;
    for (i, &v) in values.iter().enumerate() {
        if v > best_v {
            best_v = v;
            best = i;
        }
    }
    best
}

/// One Thompson sampling round.
///
/// Samples θ_{a,t} for every arm (a scaled prior draw while the arm has no
/// data, the configured sampler otherwise), chooses the argmax of the mean
/// map, draws the reward, and stores each arm's chain end as its next warm
/// start. `round` is the 1-based round index `t`; the adversarial mixture's
/// point-mass weight `round^{−α}` decays with it, which keeps the per-round
/// corruption probability at the advertised `t^{−α}` rate.
pub fn thompson_round(
    instance: &BanditInstance,
    states: &mut [ArmPosteriorState],
    cfgs: &[SamplerConfig],
    round: usize,
    arm_rngs: &mut [ChaCha8Rng],
    reward_rng: &mut ChaCha8Rng,
) -> Result<(usize, f64)> {
    let k = instance.arms.len();
    if states.len() != k || cfgs.len() != k || arm_rngs.len() != k {
        return Err(Error::InvalidArgument(
            "states, cfgs, and arm_rngs must have one entry per arm".into(),
        ));
    }
    if round == 0 {
        return Err(Error::InvalidArgument("round is 1-based".into()));
    }

    let mut sampled_means = Vec::with_capacity(k);
    for (a, arm) in instance.arms.iter().enumerate() {
        let outcome = sample_arm(arm, &states[a], &cfgs[a], round, &mut arm_rngs[a])?;
        sampled_means.push(mean_reward(&arm.family, &outcome.theta)?);
        // Prior draws run no chain; the warm start stays absent until the
        // arm has data, so the first Langevin run cold-starts at the prior
        // mode.
        if states[a].n() > 0 {
            states[a].set_warm_start(outcome.chain_end);
        }
    }

    let chosen = argmax_lowest(&sampled_means);
    let reward = instance.arms[chosen].truth.draw_reward(reward_rng);
    states[chosen].push_reward(reward);
    Ok((chosen, reward))
}

fn sample_arm(
    arm: &ArmSpec,
    state: &ArmPosteriorState,
    cfg: &SamplerConfig,
    round: usize,
    rng: &mut ChaCha8Rng,
) -> Result<SampleOutcome> {
    if state.n() == 0 {
        let theta = sample_prior_scaled(&arm.prior, cfg.gamma, rng)?;
        return Ok(SampleOutcome::degenerate(theta));
    }
    match cfg.kind {
        SamplerKind::Exact => {
            let post = conjugate_posterior_for(arm, state)?;
            let theta = sample_exact_scaled(&post, cfg.gamma, rng)?;
            Ok(SampleOutcome::degenerate(theta))
        }
        SamplerKind::AdversarialMixture => {
            cfg.validate()?;
            let post = conjugate_posterior_for(arm, state)?;
            let alpha = cfg.mixture_alpha.expect("validated");
            let atom = cfg.mixture_atom.as_ref().expect("validated");
            let theta = sample_adversarial_mixture(&post, round, alpha, atom, rng)?;
            Ok(SampleOutcome::degenerate(theta))
        }
        SamplerKind::Ula | SamplerKind::Sgld => run_langevin(state, &arm.family, &arm.prior, cfg, rng),
    }
}

fn conjugate_posterior_for(
    arm: &ArmSpec,
    state: &ArmPosteriorState,
) -> Result<crate::posterior::GaussianPosterior> {
    let c = arm.conjugate.as_ref().ok_or_else(|| {
        Error::InvalidConfig("exact sampling requires a conjugate Gaussian arm".into())
    })?;
    conjugate_gaussian_posterior(c.prior_mean, c.prior_var, c.sigma2, state.data())
}

/// One round of horizon-tuned UCB.
///
/// Rounds `t = 1..K` pull each arm once; afterwards the index is
/// `empirical mean + √(4σ²·log(2T)/T_a(t))`, ties to the lowest index.
pub fn ucb_round(
    instance: &BanditInstance,
    counts: &mut [u64],
    sums: &mut [f64],
    t: usize,
    horizon: usize,
    sigma2: f64,
    rng: &mut ChaCha8Rng,
) -> Result<(usize, f64)> {
    let k = instance.arms.len();
    if counts.len() != k || sums.len() != k {
        return Err(Error::InvalidArgument(
            "counts and sums must have one entry per arm".into(),
        ));
    }
    if t == 0 {
        return Err(Error::InvalidArgument("t is 1-based".into()));
    }
    let chosen = if t <= k {
        t - 1
    } else {
        let log_term = (2.0 * horizon as f64).ln();
        let indices: Vec<f64> = (0..k)
            .map(|a| {
                let n = counts[a] as f64;
                sums[a] / n + (4.0 * sigma2 * log_term / n).sqrt()
            })
            .collect();
        argmax_lowest(&indices)
    };
    let reward = instance.arms[chosen].truth.draw_reward(rng);
    counts[chosen] += 1;
    sums[chosen] += reward;
    Ok((chosen, reward))
}

/// Builds the cumulative pseudo-regret trace for a choice sequence.
///
/// Pseudo-regret accumulates true-mean gaps `max_a r̄_a − r̄_{A_t}`; realized
/// rewards never enter.
pub fn regret_trace(
    instance: &BanditInstance,
    chosen: Vec<usize>,
    rewards: Vec<f64>,
) -> Result<RegretTrace> {
    if !rewards.is_empty() && rewards.len() != chosen.len() {
        return Err(Error::InvalidArgument(
            "rewards must be empty or match chosen in length".into(),
        ));
    }
    let means = instance.true_means();
    let best = instance.best_mean();
    let mut cum = Vec::with_capacity(chosen.len());
    let mut acc = 0.0;
    for &a in &chosen {
        let mean = means
            .get(a)
            .ok_or(Error::IndexOutOfRange {
                index: a,
                n: means.len(),
            })?;
        acc += best - mean;
        cum.push(acc);
    }
    Ok(RegretTrace {
        chosen,
        rewards,
        cum_regret: cum,
    })
}
