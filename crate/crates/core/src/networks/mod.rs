//! Encoder, squashed-Gaussian actor, twin critics, EMA target and learned
//! temperature, all with hand-written backward passes over `f32` or `f64`.

mod actor;
mod critic;
mod encoder;
mod layers;
mod optim;
mod params;

use std::fmt::Debug;
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use ndarray::{Array4, LinalgScalar, ScalarOperand};
use num_traits::{Float, FromPrimitive};
use rand::Rng;
use serde::{Deserialize, Serialize};

pub use actor::{ActMode, Actor, ActorTrace, PolicyOutput};
pub use critic::{Critic, CriticTrace};
pub use encoder::{Encoder, EncoderConfig, EncoderTrace};
pub use layers::{Conv2d, LayerNorm, Linear};
pub use optim::Adam;
pub use params::{ParamId, Params, Tensor};

use crate::augment::{Observation, RawObservation};
use crate::{Error, Result};

/// Floating-point element type for network parameters.
pub trait Real:
    Float
    + FromPrimitive
    + LinalgScalar
    + ScalarOperand
    + Sum
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Debug
    + Default
    + Send
    + Sync
    + 'static
{
    const DTYPE: &'static str;

    fn lit(v: f64) -> Self;
    fn as_f64(self) -> f64;
}

impl Real for f32 {
    const DTYPE: &'static str = "F32";

    #[inline]
    fn lit(v: f64) -> Self {
        v as f32
    }

    #[inline]
    fn as_f64(self) -> f64 {
        f64::from(self)
    }
}

impl Real for f64 {
    const DTYPE: &'static str = "F64";

    #[inline]
    fn lit(v: f64) -> Self {
        v
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self
    }
}

/// Stacks observations into an `N x C x H x W` batch.
pub fn obs_batch<R: Real>(batch: &[&Observation]) -> Result<Array4<R>> {
    let first = batch.first().ok_or_else(|| Error::Contract("empty observation batch".into()))?;
    let (c, h, w) = (first.channels(), first.height, first.width);
    let mut data = Vec::with_capacity(batch.len() * c * h * w);
    for o in batch {
        if !o.same_shape(first) {
            return Err(Error::Contract("observations in a batch differ in shape".into()));
        }
        data.extend(o.data.iter().map(|&v| R::lit(f64::from(v))));
    }
    Ok(Array4::from_shape_vec((batch.len(), c, h, w), data).expect("batch shape"))
}

/// Same as [`obs_batch`] for 8-bit observations.
pub fn raw_batch<R: Real>(batch: &[&RawObservation]) -> Result<Array4<R>> {
    let first = batch.first().ok_or_else(|| Error::Contract("empty observation batch".into()))?;
    let (c, h, w) = (first.channels(), first.height, first.width);
    let mut data = Vec::with_capacity(batch.len() * c * h * w);
    for o in batch {
        if o.frames != first.frames || o.height != h || o.width != w {
            return Err(Error::Contract("observations in a batch differ in shape".into()));
        }
        data.extend(o.data.iter().map(|&v| R::lit(f64::from(v) / 255.0)));
    }
    Ok(Array4::from_shape_vec((batch.len(), c, h, w), data).expect("batch shape"))
}

/// Slowly tracking copy of a [`Critic`]; changed only by [`ema_update`].
#[derive(Clone, Debug)]
pub struct TargetCritic<R>(Critic<R>);

impl<R: Real> TargetCritic<R> {
    pub fn from_online(online: &Critic<R>) -> Self {
        Self(online.clone())
    }

    pub fn critic(&self) -> &Critic<R> {
        &self.0
    }

    pub fn params(&self) -> &Params<R> {
        &self.0.params
    }

    /// Restores parameters from a checkpoint.
    pub fn load(&mut self, tensors: &[Tensor<R>], prefix: &str) -> Result<()> {
        self.0.params.load_from(tensors, prefix)
    }

    #[cfg(test)]
    pub(crate) fn params_mut(&mut self) -> &mut Params<R> {
        &mut self.0.params
    }
}

/// `target <- (1 - tau) * target + tau * online`.
pub fn ema_update<R: Real>(target: &mut TargetCritic<R>, online: &Critic<R>, tau: f64) -> Result<()> {
    if !(tau > 0.0 && tau <= 1.0) {
        return Err(Error::Range(format!("tau = {tau} must lie in (0, 1]")));
    }
    if !target.0.params.same_layout(&online.params) {
        return Err(Error::Contract("target and online critic layouts differ".into()));
    }
    if tau == 1.0 {
        target.0.params.copy_from(&online.params);
    } else {
        target.0.params.lerp_towards(&online.params, R::lit(tau));
    }
    Ok(())
}

/// Learned entropy temperature, stored as `log_alpha`.
#[derive(Clone, Debug)]
pub struct Temperature<R> {
    pub params: Params<R>,
    log_alpha: ParamId,
    pub target_entropy: f64,
}

impl<R: Real> Temperature<R> {
    pub fn new(init_alpha: f64, target_entropy: f64) -> Result<Self> {
        if !(init_alpha > 0.0 && init_alpha.is_finite()) {
            return Err(Error::validation("init_temperature", "must be positive"));
        }
        let mut params = Params::new();
        let log_alpha = params.push("log_alpha", vec![1], vec![R::lit(init_alpha.ln())]);
        Ok(Self {
            params,
            log_alpha,
            target_entropy,
        })
    }

    pub fn log_alpha(&self) -> R {
        self.params.get(self.log_alpha)[0]
    }

    pub fn alpha(&self) -> R {
        self.log_alpha().exp()
    }

    pub fn log_alpha_id(&self) -> ParamId {
        self.log_alpha
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetConfig {
    pub obs_channels: usize,
    pub image_size: usize,
    pub action_dim: usize,
    pub features_dim: usize,
    pub hidden_dim: usize,
    pub num_filters: usize,
    pub num_conv_layers: usize,
    pub log_std_min: f64,
    pub log_std_max: f64,
    pub init_temperature: f64,
    pub lr: f64,
}

impl Default for NetConfig {
    fn default() -> Self {
        Self {
            obs_channels: 9,
            image_size: 84,
            action_dim: 2,
            features_dim: 50,
            hidden_dim: 1024,
            num_filters: 32,
            num_conv_layers: 4,
            log_std_min: -10.0,
            log_std_max: 2.0,
            init_temperature: 0.1,
            lr: 5e-4,
        }
    }
}

impl NetConfig {
    pub fn encoder(&self) -> EncoderConfig {
        EncoderConfig {
            in_channels: self.obs_channels,
            image_size: self.image_size,
            num_filters: self.num_filters,
            num_layers: self.num_conv_layers,
            features_dim: self.features_dim,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.action_dim == 0 || self.hidden_dim == 0 {
            return Err(Error::validation("hidden_dim", "widths must be positive"));
        }
        if !(self.log_std_min < self.log_std_max) {
            return Err(Error::validation("log_std_min", "must be below log_std_max"));
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(Error::validation("lr", "must be positive"));
        }
        if self.encoder().conv_output_size().is_none() {
            return Err(Error::validation("image_size", "too small for the encoder"));
        }
        Ok(())
    }
}

/// Every learnable component of one agent plus its optimizers. The target
/// critic has no optimizer.
#[derive(Clone, Debug)]
pub struct Agent<R> {
    pub cfg: NetConfig,
    pub encoder: Encoder<R>,
    pub actor: Actor<R>,
    pub critic: Critic<R>,
    pub critic_target: TargetCritic<R>,
    pub temperature: Temperature<R>,
    pub encoder_opt: Adam<R>,
    pub critic_opt: Adam<R>,
    pub actor_opt: Adam<R>,
    pub temperature_opt: Adam<R>,
}

impl<R: Real> Agent<R> {
    pub fn new<G: Rng + ?Sized>(cfg: NetConfig, rng: &mut G) -> Result<Self> {
        cfg.validate()?;
        let encoder = Encoder::new(cfg.encoder(), rng)?;
        let actor = Actor::new(
            cfg.features_dim,
            cfg.hidden_dim,
            cfg.action_dim,
            (cfg.log_std_min, cfg.log_std_max),
            rng,
        );
        let critic = Critic::new(cfg.features_dim, cfg.hidden_dim, cfg.action_dim, rng);
        let critic_target = TargetCritic::from_online(&critic);
        let temperature = Temperature::new(cfg.init_temperature, -(cfg.action_dim as f64))?;
        Ok(Self {
            encoder_opt: Adam::new(&encoder.params, cfg.lr),
            critic_opt: Adam::new(&critic.params, cfg.lr),
            actor_opt: Adam::new(&actor.params, cfg.lr),
            temperature_opt: Adam::new(&temperature.params, cfg.lr),
            cfg,
            encoder,
            actor,
            critic,
            critic_target,
            temperature,
        })
    }

    /// Deterministic mean action for a single observation.
    pub fn act_mean(&self, obs: &Observation) -> Result<Vec<f32>> {
        let x = obs_batch::<R>(&[obs])?;
        let f = self.encoder.encode(x.view())?;
        let a = self.actor.mean_action(f.view());
        Ok(a.iter().map(|v| v.as_f64() as f32).collect())
    }

    /// Sampled action for a single observation.
    pub fn act_sample<G: Rng + ?Sized>(&self, obs: &Observation, rng: &mut G) -> Result<Vec<f32>> {
        let x = obs_batch::<R>(&[obs])?;
        let f = self.encoder.encode(x.view())?;
        let (out, _) = self.actor.act(f.view(), ActMode::Sample, rng)?;
        Ok(out.action.iter().map(|v| v.as_f64() as f32).collect())
    }
}

#[cfg(test)]
mod tests;
