//! Where strong augmentation enters the actor and critic updates, for DrQ,
//! DrQ+Aug, SVEA, SADA and the SADA ablations.

use std::fmt;
use std::str::FromStr;

use ndarray::{concatenate, Array1, Array2, Axis};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::augment::{apply_weak, sample_strong, AugPool, AugParams, AugmentationSpec, DistractorBank, Observation};
use crate::networks::{obs_batch, ActMode, Agent, Params, Real};
use crate::replay::Transition;
use crate::rng::{stream, streams, StreamRng};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AugMode {
    None,
    Naive,
    Selective,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetAug {
    None,
    Naive,
}

/// Form of the bootstrap value in the critic target.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TargetForm {
    /// `min(Q1, Q2)(f(o'), a') - alpha * log pi(a'|f(o'))` with `a' ~ pi`.
    Sac,
    /// `max_a' min(Q1, Q2)(f(o'), a')` over a uniform action grid.
    GreedyMax,
}

impl FromStr for TargetForm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sac" => Ok(Self::Sac),
            "greedy-max" => Ok(Self::GreedyMax),
            other => Err(Error::InvalidSpec(format!("unknown target form `{other}`"))),
        }
    }
}

impl fmt::Display for TargetForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Sac => "sac",
            Self::GreedyMax => "greedy-max",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Recipe {
    Drq,
    DrqAug,
    Svea,
    Sada,
    SadaNaiveActor,
    SadaNaiveCritic,
    SadaNoCriticAug,
}

impl Recipe {
    pub const ALL: [Recipe; 7] = [
        Recipe::Drq,
        Recipe::DrqAug,
        Recipe::Svea,
        Recipe::Sada,
        Recipe::SadaNaiveActor,
        Recipe::SadaNaiveCritic,
        Recipe::SadaNoCriticAug,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Recipe::Drq => "drq",
            Recipe::DrqAug => "drq_aug",
            Recipe::Svea => "svea",
            Recipe::Sada => "sada",
            Recipe::SadaNaiveActor => "sada_naive_actor",
            Recipe::SadaNaiveCritic => "sada_naive_critic",
            Recipe::SadaNoCriticAug => "sada_no_critic_aug",
        }
    }

    /// `(actor, critic online, critic target)` augmentation placement.
    pub fn modes(self) -> (AugMode, AugMode, TargetAug) {
        use AugMode::*;
        match self {
            Recipe::Drq => (None, None, TargetAug::None),
            Recipe::DrqAug => (Naive, Naive, TargetAug::Naive),
            Recipe::Svea => (None, Selective, TargetAug::None),
            Recipe::Sada => (Selective, Selective, TargetAug::None),
            Recipe::SadaNaiveActor => (Naive, Selective, TargetAug::None),
            Recipe::SadaNaiveCritic => (Selective, Naive, TargetAug::Naive),
            Recipe::SadaNoCriticAug => (Selective, None, TargetAug::None),
        }
    }
}

impl fmt::Display for Recipe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Recipe {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Recipe::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| Error::InvalidSpec(format!("unknown recipe `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecipeConfig {
    pub actor_aug: AugMode,
    pub critic_online_aug: AugMode,
    pub critic_target_aug: TargetAug,
    pub strong_pool: Vec<AugmentationSpec>,
    pub target_form: TargetForm,
    /// Grid points per action dimension for [`TargetForm::GreedyMax`].
    pub greedy_grid: usize,
}

impl RecipeConfig {
    pub fn preset(recipe: Recipe, pool: AugPool, params: AugParams) -> Self {
        let (actor_aug, critic_online_aug, critic_target_aug) = recipe.modes();
        Self {
            actor_aug,
            critic_online_aug,
            critic_target_aug,
            strong_pool: pool.specs(params),
            target_form: TargetForm::Sac,
            greedy_grid: 21,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.strong_pool.is_empty() {
            return Err(Error::InvalidSpec("strong augmentation pool is empty".into()));
        }
        for s in &self.strong_pool {
            s.validate()?;
        }
        if (self.critic_target_aug == TargetAug::Naive) != (self.critic_online_aug == AugMode::Naive) {
            return Err(Error::InvalidSpec(
                "target-side augmentation is only defined together with naive online critic augmentation".into(),
            ));
        }
        if self.target_form == TargetForm::GreedyMax && self.greedy_grid < 2 {
            return Err(Error::InvalidSpec("greedy_grid must be at least 2".into()));
        }
        Ok(())
    }
}

/// Strong-augmentation rng with a count of observations it has augmented.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrongStream {
    rng: StreamRng,
    draws: u64,
}

impl StrongStream {
    pub fn new(seed: u64, id: u64) -> Self {
        Self {
            rng: stream(seed, id),
            draws: 0,
        }
    }

    pub fn draws(&self) -> u64 {
        self.draws
    }

    /// One independent strong draw per observation.
    pub fn augment(&mut self, obs: &[Observation], pool: &[AugmentationSpec], bank: &DistractorBank) -> Result<Vec<Observation>> {
        let out = obs
            .iter()
            .map(|o| sample_strong(o, pool, bank, &mut self.rng).map(|(a, _)| a))
            .collect::<Result<Vec<_>>>()?;
        self.draws += obs.len() as u64;
        Ok(out)
    }
}

/// All rng streams consumed by updates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UpdateRngs {
    pub weak: StreamRng,
    pub strong_actor: StrongStream,
    pub strong_critic: StrongStream,
    pub strong_target: StrongStream,
    pub policy: StreamRng,
}

impl UpdateRngs {
    pub fn new(seed: u64) -> Self {
        Self {
            weak: stream(seed, streams::WEAK_AUG),
            strong_actor: StrongStream::new(seed, streams::STRONG_ACTOR),
            strong_critic: StrongStream::new(seed, streams::STRONG_CRITIC),
            strong_target: StrongStream::new(seed, streams::STRONG_TARGET),
            policy: stream(seed, streams::POLICY_NOISE),
        }
    }
}

/// A sampled minibatch with the weak shift already applied.
#[derive(Clone, Debug, PartialEq)]
pub struct Batch<R> {
    pub obs: Vec<Observation>,
    pub next_obs: Vec<Observation>,
    pub actions: Array2<R>,
    pub rewards: Array1<R>,
    pub discounts: Array1<R>,
}

impl<R: Real> Batch<R> {
    /// Converts stored transitions, weak-shifting current and next
    /// observations with independent draws.
    pub fn from_transitions<G: Rng + ?Sized>(ts: &[Transition], pad_px: u32, weak: &mut G) -> Result<Self> {
        let first = ts.first().ok_or_else(|| Error::Contract("empty batch".into()))?;
        let a = first.action.len();
        let mut obs = Vec::with_capacity(ts.len());
        let mut next_obs = Vec::with_capacity(ts.len());
        let mut actions = Array2::zeros((ts.len(), a));
        for (i, t) in ts.iter().enumerate() {
            if t.action.len() != a {
                return Err(Error::Contract("actions of differing length".into()));
            }
            obs.push(apply_weak(&t.obs.to_unit(), pad_px, weak)?);
            next_obs.push(apply_weak(&t.next_obs.to_unit(), pad_px, weak)?);
            for (j, &v) in t.action.iter().enumerate() {
                actions[[i, j]] = R::lit(f64::from(v));
            }
        }
        Ok(Self {
            obs,
            next_obs,
            actions,
            rewards: ts.iter().map(|t| R::lit(t.reward)).collect(),
            discounts: ts.iter().map(|t| R::lit(t.discount)).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.obs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.obs.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stream {
    Clean,
    Augmented,
}

/// Rows `[0, half)` are the clean stream, rows `[half, 2 * half)` the second.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PackLayout {
    pub half: usize,
    pub second: Stream,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PackedBatch {
    rows: Vec<Observation>,
    layout: Option<PackLayout>,
}

impl PackedBatch {
    pub fn pack(clean: &[Observation], second: Vec<Observation>, kind: Stream) -> Result<Self> {
        if clean.len() != second.len() || clean.is_empty() {
            return Err(Error::Contract(format!(
                "cannot pack streams of {} and {} rows",
                clean.len(),
                second.len()
            )));
        }
        let half = clean.len();
        let mut rows = clean.to_vec();
        rows.extend(second);
        Ok(Self {
            rows,
            layout: Some(PackLayout { half, second: kind }),
        })
    }

    /// Rows with no layout tag.
    pub fn untagged(rows: Vec<Observation>) -> Self {
        Self { rows, layout: None }
    }

    pub fn layout(&self) -> Option<PackLayout> {
        self.layout
    }

    pub fn rows(&self) -> &[Observation] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn unpack(&self) -> Result<(&[Observation], &[Observation])> {
        let l = self
            .layout
            .ok_or_else(|| Error::Contract("packed batch has no layout tag".into()))?;
        Ok(self.rows.split_at(l.half))
    }
}

/// `[y, y]`, the regression target for a packed critic batch.
pub fn duplicate_targets<R: Real>(y: &Array1<R>) -> Array1<R> {
    concatenate(Axis(0), &[y.view(), y.view()]).expect("1-d concat")
}

fn duplicate_rows<R: Real>(a: &Array2<R>) -> Array2<R> {
    concatenate(Axis(0), &[a.view(), a.view()]).expect("2-d concat")
}

/// `r + discount * value`.
pub fn bootstrap<R: Real>(rewards: &Array1<R>, discounts: &Array1<R>, values: &Array1<R>) -> Array1<R> {
    rewards + &(discounts * values)
}

/// Gradient accumulators laid out like the agent's parameters.
#[derive(Clone, Debug)]
pub struct Grads<R> {
    pub encoder: Params<R>,
    pub critic: Params<R>,
    pub actor: Params<R>,
    pub temperature: Params<R>,
}

impl<R: Real> Grads<R> {
    pub fn zeros(agent: &Agent<R>) -> Self {
        Self {
            encoder: agent.encoder.params.zeros_like(),
            critic: agent.critic.params.zeros_like(),
            actor: agent.actor.params.zeros_like(),
            temperature: agent.temperature.params.zeros_like(),
        }
    }
}

fn min_q<R: Real>(q1: &Array1<R>, q2: &Array1<R>) -> Array1<R> {
    ndarray::Zip::from(q1).and(q2).map_collect(|&a, &b| a.min(b))
}

fn to_refs(obs: &[Observation]) -> Vec<&Observation> {
    obs.iter().collect()
}

/// Greedy bootstrap value `max_a min(Q1, Q2)(f, a)` over a uniform grid of
/// `grid` points per action dimension.
pub fn greedy_max_value<R: Real>(agent: &Agent<R>, features: &Array2<R>, grid: usize) -> Result<Array1<R>> {
    let a = agent.cfg.action_dim;
    if a > 2 {
        return Err(Error::InvalidSpec("greedy-max targets support at most two action dimensions".into()));
    }
    let points: Vec<R> = (0..grid)
        .map(|j| R::lit(-1.0 + 2.0 * j as f64 / (grid - 1) as f64))
        .collect();
    let combos = grid.pow(a as u32);
    let mut actions = Array2::<R>::zeros((combos, a));
    for c in 0..combos {
        let mut rest = c;
        for d in 0..a {
            actions[[c, d]] = points[rest % grid];
            rest /= grid;
        }
    }
    let target = agent.critic_target.critic();
    let mut out = Array1::zeros(features.nrows());
    for (i, row) in features.rows().into_iter().enumerate() {
        let f = row.broadcast((combos, row.len())).expect("broadcast").to_owned();
        let (q1, q2) = target.q_values(f.view(), actions.view())?;
        out[i] = min_q(&q1, &q2).fold(R::neg_infinity(), |m, &v| m.max(v));
    }
    Ok(out)
}

/// Bootstrap targets from (weak-only) next observations; no gradients.
pub fn critic_targets<R: Real>(
    agent: &Agent<R>,
    next_obs: &[Observation],
    rewards: &Array1<R>,
    discounts: &Array1<R>,
    cfg: &RecipeConfig,
    policy: &mut StreamRng,
) -> Result<Array1<R>> {
    let x = obs_batch::<R>(&to_refs(next_obs))?;
    let f = agent.encoder.encode(x.view())?;
    let values = match cfg.target_form {
        TargetForm::Sac => {
            let alpha = agent.temperature.alpha();
            let (out, _) = agent.actor.act(f.view(), ActMode::Sample, policy)?;
            let (q1, q2) = agent.critic_target.critic().q_values(f.view(), out.action.view())?;
            min_q(&q1, &q2) - &out.log_prob.mapv(|l| alpha * l)
        }
        TargetForm::GreedyMax => greedy_max_value(agent, &f, cfg.greedy_grid)?,
    };
    Ok(bootstrap(rewards, discounts, &values))
}

/// Mean over rows of the summed squared error of both heads; accumulates
/// encoder and critic gradients.
fn critic_regression<R: Real>(
    agent: &Agent<R>,
    obs: &[&Observation],
    actions: &Array2<R>,
    y: &Array1<R>,
    grads: &mut Grads<R>,
) -> Result<R> {
    if obs.len() != actions.nrows() || obs.len() != y.len() {
        return Err(Error::Contract(format!(
            "{} observations, {} actions, {} targets",
            obs.len(),
            actions.nrows(),
            y.len()
        )));
    }
    let x = obs_batch::<R>(obs)?;
    let (f, etrace) = agent.encoder.encode_tracked(x.view())?;
    let ((q1, q2), ctrace) = agent.critic.forward(f.view(), actions.view())?;
    let m = R::lit(obs.len() as f64);
    let e1 = &q1 - y;
    let e2 = &q2 - y;
    let loss = (e1.mapv(|v| v * v).sum() + e2.mapv(|v| v * v).sum()) / m;
    let two = R::lit(2.0);
    let d1 = e1.mapv(|v| two * v / m);
    let d2 = e2.mapv(|v| two * v / m);
    let (df, _) = agent.critic.backward(&ctrace, d1.view(), d2.view(), Some(&mut grads.critic));
    agent.encoder.backward(&etrace, df.view(), &mut grads.encoder);
    Ok(loss)
}

/// Plain critic loss on the (weak-only) batch.
pub fn critic_loss_plain<R: Real>(agent: &Agent<R>, batch: &Batch<R>, q_tgt: &Array1<R>, grads: &mut Grads<R>) -> Result<R> {
    critic_regression(agent, &to_refs(&batch.obs), &batch.actions, q_tgt, grads)
}

/// Packed critic loss: online input `[o, aug(o)]`, targets `[y, y]`.
pub fn critic_loss_sada<R: Real>(
    agent: &Agent<R>,
    batch: &Batch<R>,
    q_tgt: &Array1<R>,
    strong: &mut StrongStream,
    cfg: &RecipeConfig,
    bank: &DistractorBank,
    grads: &mut Grads<R>,
) -> Result<R> {
    if q_tgt.len() != batch.len() {
        return Err(Error::Contract(format!("{} targets for {} rows", q_tgt.len(), batch.len())));
    }
    let aug = strong.augment(&batch.obs, &cfg.strong_pool, bank)?;
    let p = PackedBatch::pack(&batch.obs, aug, Stream::Augmented)?;
    let y = duplicate_targets(q_tgt);
    let actions = duplicate_rows(&batch.actions);
    critic_regression(agent, &to_refs(p.rows()), &actions, &y, grads)
}

/// Naive critic update: current and next observations both strongly
/// augmented, with independent draws, at batch size `N`.
pub fn critic_update_naive<R: Real>(
    agent: &Agent<R>,
    batch: &Batch<R>,
    rngs: &mut UpdateRngs,
    cfg: &RecipeConfig,
    bank: &DistractorBank,
    grads: &mut Grads<R>,
) -> Result<R> {
    let obs = rngs.strong_critic.augment(&batch.obs, &cfg.strong_pool, bank)?;
    let next = rngs.strong_target.augment(&batch.next_obs, &cfg.strong_pool, bank)?;
    let q_tgt = critic_targets(agent, &next, &batch.rewards, &batch.discounts, cfg, &mut rngs.policy)?;
    critic_regression(agent, &to_refs(&obs), &batch.actions, &q_tgt, grads)
}

/// Critic loss and gradients for the configured recipe.
pub fn critic_update<R: Real>(
    agent: &Agent<R>,
    batch: &Batch<R>,
    rngs: &mut UpdateRngs,
    cfg: &RecipeConfig,
    bank: &DistractorBank,
    grads: &mut Grads<R>,
) -> Result<R> {
    cfg.validate()?;
    match cfg.critic_online_aug {
        AugMode::Naive => critic_update_naive(agent, batch, rngs, cfg, bank, grads),
        mode => {
            let q_tgt = critic_targets(agent, &batch.next_obs, &batch.rewards, &batch.discounts, cfg, &mut rngs.policy)?;
            if mode == AugMode::Selective {
                critic_loss_sada(agent, batch, &q_tgt, &mut rngs.strong_critic, cfg, bank, grads)
            } else {
                critic_loss_plain(agent, batch, &q_tgt, grads)
            }
        }
    }
}

/// `p = [o, aug(o)]` and `m = [o, o]` for the selective actor update.
pub fn pack_actor_streams(
    obs: &[Observation],
    strong: &mut StrongStream,
    cfg: &RecipeConfig,
    bank: &DistractorBank,
) -> Result<(PackedBatch, PackedBatch)> {
    let aug = strong.augment(obs, &cfg.strong_pool, bank)?;
    let p = PackedBatch::pack(obs, aug, Stream::Augmented)?;
    let m = PackedBatch::pack(obs, obs.to_vec(), Stream::Clean)?;
    Ok((p, m))
}

#[derive(Clone, Debug)]
pub struct ActorOutcome<R> {
    pub loss: R,
    /// Log-probabilities of the actions sampled on the policy stream.
    pub log_prob: Array1<R>,
}

/// `mean(alpha * log pi(a|f(p)) - min Q(f(m), a))`, `a ~ pi(.|f(p))`, with
/// encoder features detached. Accumulates actor gradients only.
fn actor_objective<R: Real>(
    agent: &Agent<R>,
    p: &[&Observation],
    m: Option<&[&Observation]>,
    policy: &mut StreamRng,
    grads: &mut Grads<R>,
) -> Result<ActorOutcome<R>> {
    let fp = agent.encoder.encode(obs_batch::<R>(p)?.view())?;
    let fm = match m {
        Some(m) => agent.encoder.encode(obs_batch::<R>(m)?.view())?,
        None => fp.clone(),
    };
    let alpha = agent.temperature.alpha();
    let (out, atrace) = agent.actor.act(fp.view(), ActMode::Sample, policy)?;
    let ((q1, q2), ctrace) = agent.critic.forward(fm.view(), out.action.view())?;
    let n = R::lit(p.len() as f64);
    let q = min_q(&q1, &q2);
    let loss = (out.log_prob.mapv(|l| alpha * l) - &q).sum() / n;
    let inv = -R::one() / n;
    let dq1 = ndarray::Zip::from(&q1).and(&q2).map_collect(|&a, &b| if a <= b { inv } else { R::zero() });
    let dq2 = ndarray::Zip::from(&q1).and(&q2).map_collect(|&a, &b| if a <= b { R::zero() } else { inv });
    let (_, da) = agent.critic.backward(&ctrace, dq1.view(), dq2.view(), None);
    let dlogp = Array1::from_elem(p.len(), alpha / n);
    agent.actor.backward(&atrace, da.view(), dlogp.view(), &mut grads.actor);
    Ok(ActorOutcome {
        loss,
        log_prob: out.log_prob,
    })
}

/// Plain actor loss: policy and critic both see `obs`.
pub fn actor_loss_plain<R: Real>(
    agent: &Agent<R>,
    obs: &[Observation],
    policy: &mut StreamRng,
    grads: &mut Grads<R>,
) -> Result<ActorOutcome<R>> {
    actor_objective(agent, &to_refs(obs), None, policy, grads)
}

/// Selective actor loss: the policy sees `p`, the critic sees `m`.
pub fn actor_loss_sada<R: Real>(
    agent: &Agent<R>,
    p: &PackedBatch,
    m: &PackedBatch,
    policy: &mut StreamRng,
    grads: &mut Grads<R>,
) -> Result<ActorOutcome<R>> {
    let (pl, ml) = match (p.layout(), m.layout()) {
        (Some(pl), Some(ml)) => (pl, ml),
        _ => return Err(Error::Contract("packed batch has no layout tag".into())),
    };
    if pl.half != ml.half || pl.second != Stream::Augmented || ml.second != Stream::Clean {
        return Err(Error::Contract(format!("misaligned packed batches {pl:?} and {ml:?}")));
    }
    let (p_clean, _) = p.unpack()?;
    let (m_clean, m_second) = m.unpack()?;
    if p_clean != m_clean || m_clean != m_second {
        return Err(Error::Contract("clean halves of the packed batches differ".into()));
    }
    actor_objective(agent, &to_refs(p.rows()), Some(&to_refs(m.rows())), policy, grads)
}

/// Actor loss and gradients for the configured placement.
pub fn actor_update_variant<R: Real>(
    agent: &Agent<R>,
    obs: &[Observation],
    rngs: &mut UpdateRngs,
    cfg: &RecipeConfig,
    bank: &DistractorBank,
    grads: &mut Grads<R>,
) -> Result<ActorOutcome<R>> {
    match cfg.actor_aug {
        AugMode::None => actor_loss_plain(agent, obs, &mut rngs.policy, grads),
        AugMode::Naive => {
            let aug = rngs.strong_actor.augment(obs, &cfg.strong_pool, bank)?;
            actor_loss_plain(agent, &aug, &mut rngs.policy, grads)
        }
        AugMode::Selective => {
            let (p, m) = pack_actor_streams(obs, &mut rngs.strong_actor, cfg, bank)?;
            actor_loss_sada(agent, &p, &m, &mut rngs.policy, grads)
        }
    }
}

/// `mean(-alpha * log pi - alpha * target_entropy)`; accumulates the gradient
/// with respect to `log_alpha`.
pub fn temperature_loss<R: Real>(log_probs: &Array1<R>, agent: &Agent<R>, grads: &mut Grads<R>) -> R {
    let alpha = agent.temperature.alpha();
    let h = R::lit(agent.temperature.target_entropy);
    let mean = log_probs.iter().map(|&l| l + h).sum::<R>() / R::lit(log_probs.len() as f64);
    let id = agent.temperature.log_alpha_id();
    grads.temperature.get_mut(id)[0] += -alpha * mean;
    -alpha * mean
}

pub fn step_critic<R: Real>(agent: &mut Agent<R>, grads: &Grads<R>) {
    agent.encoder_opt.step(&mut agent.encoder.params, &grads.encoder);
    agent.critic_opt.step(&mut agent.critic.params, &grads.critic);
}

pub fn step_actor<R: Real>(agent: &mut Agent<R>, grads: &Grads<R>) {
    agent.actor_opt.step(&mut agent.actor.params, &grads.actor);
}

pub fn step_temperature<R: Real>(agent: &mut Agent<R>, grads: &Grads<R>) {
    agent.temperature_opt.step(&mut agent.temperature.params, &grads.temperature);
}

#[cfg(test)]
mod tests;
