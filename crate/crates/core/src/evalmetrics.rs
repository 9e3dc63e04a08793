//! Zero-shot evaluation over the train and test distributions, the
//! actor-prediction variance metric and encoder embedding export.

use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::augment::{apply_draw, AugClass, AugDraw, AugmentationSpec, DistractorBank, Observation, RawObservation};
use crate::envs::{wrap_distribution, DistributionSpec, EnvConfig, PointGoalEnv, ACTION_DIM};
use crate::networks::{obs_batch, Agent, Real};
use crate::rng::{mix, stream, streams};
use crate::stats::{mean, population_std};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistributionStats {
    pub distribution: String,
    pub mean_reward: f64,
    pub std_reward: f64,
    pub episodes: usize,
    pub success_rate: Option<f64>,
    pub returns: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub checkpoint: String,
    pub seeds: Vec<u64>,
    pub distributions: Vec<DistributionStats>,
}

impl EvalReport {
    pub fn get(&self, name: &str) -> Option<&DistributionStats> {
        self.distributions.iter().find(|d| d.distribution == name)
    }
}

/// Seed of evaluation episode `i`; shared by every distribution so that
/// test episodes differ from train episodes only in rendering.
pub fn episode_seed(seed: u64, i: usize) -> u64 {
    mix(seed ^ 0x5eed_e7a1, i as u64)
}

/// Runs one episode to its time limit and returns `(return, success)`.
pub fn run_episode(
    env: &mut PointGoalEnv,
    seed: u64,
    mut policy: impl FnMut(&RawObservation, &PointGoalEnv) -> Result<Vec<f32>>,
) -> Result<(f64, bool)> {
    let mut obs = env.reset(seed);
    let mut total = 0.0;
    while !env.is_done() {
        let a = policy(&obs, env)?;
        let r = env.step(&a)?;
        total += r.reward;
        obs = r.observation;
    }
    Ok((total, env.success()?))
}

/// Mean-action rollouts on one distribution; the agent is not modified.
pub fn evaluate<R: Real>(
    agent: &Agent<R>,
    env_cfg: &EnvConfig,
    spec: DistributionSpec,
    episodes: usize,
    seed: u64,
) -> Result<DistributionStats> {
    if episodes == 0 {
        return Err(Error::validation("episodes", "must be at least 1"));
    }
    let mut env = wrap_distribution(PointGoalEnv::new(env_cfg.clone())?, spec)?;
    let mut returns = Vec::with_capacity(episodes);
    let mut successes = 0usize;
    for i in 0..episodes {
        let (ret, ok) = run_episode(&mut env, episode_seed(seed, i), |o, _| agent.act_mean(&o.to_unit()))?;
        returns.push(ret);
        successes += usize::from(ok);
    }
    Ok(DistributionStats {
        distribution: spec.name(),
        mean_reward: mean(&returns),
        std_reward: population_std(&returns),
        episodes,
        success_rate: Some(successes as f64 / episodes as f64),
        returns,
    })
}

/// [`evaluate`] over several distributions, each listed once.
pub fn evaluate_suite<R: Real>(
    agent: &Agent<R>,
    env_cfg: &EnvConfig,
    specs: &[DistributionSpec],
    episodes: usize,
    seed: u64,
    checkpoint: &str,
) -> Result<EvalReport> {
    let mut distributions = Vec::with_capacity(specs.len());
    for (i, s) in specs.iter().enumerate() {
        if specs[..i].iter().any(|p| p.name() == s.name()) {
            return Err(Error::validation("distributions", format!("`{}` listed twice", s.name())));
        }
        distributions.push(evaluate(agent, env_cfg, *s, episodes, seed)?);
    }
    Ok(EvalReport {
        checkpoint: checkpoint.to_string(),
        seeds: (0..episodes).map(|i| episode_seed(seed, i)).collect(),
        distributions,
    })
}

/// Observations from uniformly random rollouts on one distribution.
pub fn collect_observations(env_cfg: &EnvConfig, spec: DistributionSpec, n: usize, seed: u64) -> Result<Vec<Observation>> {
    let mut env = wrap_distribution(PointGoalEnv::new(env_cfg.clone())?, spec)?;
    let mut rng = stream(seed, streams::EVAL);
    let mut out = Vec::with_capacity(n);
    let mut episode = 0;
    let mut obs = env.reset(mix(seed, episode));
    while out.len() < n {
        let skip = rng.random_range(0..4);
        for _ in 0..skip {
            if env.is_done() {
                break;
            }
            let a: Vec<f32> = (0..ACTION_DIM).map(|_| rng.random_range(-1.0..=1.0)).collect();
            obs = env.step(&a)?.observation;
        }
        out.push(obs.to_unit());
        if env.is_done() {
            episode += 1;
            obs = env.reset(mix(seed, episode));
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VarianceEntry {
    pub family: String,
    pub class: AugClass,
    pub variance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VarianceReport {
    pub observations: usize,
    pub draws_per_obs: usize,
    pub entries: Vec<VarianceEntry>,
}

impl VarianceReport {
    pub fn get(&self, family: &str) -> Option<f64> {
        self.entries.iter().find(|e| e.family == family).map(|e| e.variance)
    }

    /// Mean of the family values in one augmentation class.
    pub fn class_mean(&self, class: AugClass) -> Option<f64> {
        let v: Vec<f64> = self.entries.iter().filter(|e| e.class == class).map(|e| e.variance).collect();
        (!v.is_empty()).then(|| mean(&v))
    }
}

fn content_hash(o: &Observation) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for v in &o.data {
        for b in v.to_bits().to_le_bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
    }
    h
}

/// Per family, the mean over observations and draws of
/// `|pi_mean(f(aug(o))) - pi_mean(f(o))|^2 / action_dim`. Draw seeds depend
/// on observation content, so the result ignores the order of `obs`.
pub fn action_variance<R: Real>(
    agent: &Agent<R>,
    obs: &[Observation],
    families: &[AugmentationSpec],
    bank: &DistractorBank,
    seed: u64,
    draws_per_obs: usize,
) -> Result<VarianceReport> {
    if obs.is_empty() {
        return Err(Error::Contract("action variance needs at least one observation".into()));
    }
    if draws_per_obs == 0 {
        return Err(Error::validation("draws_per_obs", "must be positive"));
    }
    let a_dim = agent.cfg.action_dim as f64;
    let mean_action = |o: &Observation| -> Result<Vec<f64>> {
        let f = agent.encoder.encode(obs_batch::<R>(&[o])?.view())?;
        Ok(agent.actor.mean_action(f.view()).iter().map(|v| v.as_f64()).collect())
    };
    let clean: Vec<Vec<f64>> = obs.iter().map(mean_action).collect::<Result<_>>()?;
    let mut entries = Vec::with_capacity(families.len());
    for (fi, spec) in families.iter().enumerate() {
        spec.validate()?;
        let mut total = 0.0;
        for (o, base) in obs.iter().zip(&clean) {
            let h = content_hash(o);
            for k in 0..draws_per_obs {
                let draw_seed = mix(seed ^ h, (fi * draws_per_obs + k) as u64);
                let draw = AugDraw::from_seed(*spec, draw_seed, bank.len())?;
                let aug = apply_draw(o, &draw, bank)?;
                let act = mean_action(&aug)?;
                total += act.iter().zip(base).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / a_dim;
            }
        }
        entries.push(VarianceEntry {
            family: spec.kind.name().to_string(),
            class: spec.class(),
            variance: total / (obs.len() * draws_per_obs) as f64,
        });
    }
    Ok(VarianceReport {
        observations: obs.len(),
        draws_per_obs,
        entries,
    })
}

/// Writes `label,f0..f{d-1}` rows of encoder features for
/// `samples_per_dist` observations of each distribution. Returns the number
/// of rows written.
pub fn export_embeddings<R: Real, W: Write>(
    agent: &Agent<R>,
    env_cfg: &EnvConfig,
    specs: &[DistributionSpec],
    samples_per_dist: usize,
    seed: u64,
    out: &mut W,
) -> Result<usize> {
    let d = agent.cfg.features_dim;
    let header: Vec<String> = std::iter::once("label".to_string()).chain((0..d).map(|i| format!("f{i}"))).collect();
    writeln!(out, "{}", header.join(","))?;
    let mut rows = 0;
    for spec in specs {
        let obs = collect_observations(env_cfg, *spec, samples_per_dist, seed)?;
        for o in &obs {
            let f = agent.encoder.encode(obs_batch::<R>(&[o])?.view())?;
            let cells: Vec<String> = f.iter().map(|v| v.as_f64().to_string()).collect();
            writeln!(out, "{},{}", spec.name(), cells.join(","))?;
            rows += 1;
        }
    }
    Ok(rows)
}
