//! Training configuration: defaults, flat `key = value` text format,
//! overrides and validation.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::augment::{AugParams, AugPool};
use crate::envs::EnvConfig;
use crate::error::Error;
use crate::networks::NetConfig;
use crate::recipes::{Recipe, RecipeConfig, TargetForm};
use crate::Result;

/// A value that can appear on the right of `key = value`.
pub trait ConfigValue: Sized {
    fn parse_value(key: &str, s: &str) -> Result<Self>;
    fn render(&self) -> String;
}

macro_rules! parse_via_fromstr {
    ($($t:ty => $what:literal),* $(,)?) => {$(
        impl ConfigValue for $t {
            fn parse_value(key: &str, s: &str) -> Result<Self> {
                s.parse::<$t>()
                    .map_err(|_| Error::validation(key, format!("expected {}, got `{s}`", $what)))
            }

            fn render(&self) -> String {
                self.to_string()
            }
        }
    )*};
}

parse_via_fromstr!(u64 => "a non-negative integer", usize => "a non-negative integer", u32 => "a non-negative integer", f64 => "a number", f32 => "a number", bool => "true or false");

macro_rules! parse_named {
    ($($t:ty),* $(,)?) => {$(
        impl ConfigValue for $t {
            fn parse_value(key: &str, s: &str) -> Result<Self> {
                <$t>::from_str(s).map_err(|e| Error::validation(key, e.to_string()))
            }

            fn render(&self) -> String {
                self.to_string()
            }
        }
    )*};
}

parse_named!(Recipe, TargetForm);

impl ConfigValue for AugPool {
    fn parse_value(key: &str, s: &str) -> Result<Self> {
        AugPool::from_str(s).map_err(|e| Error::validation(key, e.to_string()))
    }

    fn render(&self) -> String {
        self.name().to_string()
    }
}

macro_rules! train_config {
    ($( $(#[$doc:meta])* $name:ident : $ty:ty = $default:expr ),* $(,)?) => {
        /// Every run setting. Defaults are the desk-scale profile.
        #[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
        pub struct TrainConfig {
            $( $(#[$doc])* pub $name: $ty, )*
        }

        impl Default for TrainConfig {
            fn default() -> Self {
                Self { $( $name: $default, )* }
            }
        }

        impl TrainConfig {
            /// Keys in canonical order.
            pub const KEYS: &'static [&'static str] = &[$(stringify!($name)),*];

            /// Sets one field from its text form.
            pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
                match key {
                    $( stringify!($name) => self.$name = <$ty as ConfigValue>::parse_value(key, value)?, )*
                    _ => return Err(Error::validation(key, "unknown key")),
                }
                Ok(())
            }

            pub fn get(&self, key: &str) -> Option<String> {
                match key {
                    $( stringify!($name) => Some(self.$name.render()), )*
                    _ => None,
                }
            }
        }
    };
}

train_config! {
    total_steps: u64 = 30_000,
    seed_frames: u64 = 4_000,
    exploration_steps: u64 = 2_000,
    update_frequency: u64 = 2,
    batch_size: usize = 256,
    gamma: f64 = 0.99,
    tau: f64 = 0.01,
    lr: f64 = 5e-4,
    eval_interval: u64 = 2_000,
    eval_episodes: usize = 10,
    seed: u64 = 0,
    capacity: usize = 1_000_000,
    recipe: Recipe = Recipe::Sada,
    augs: AugPool = AugPool::All,
    target_form: TargetForm = TargetForm::Sac,
    greedy_grid: usize = 21,
    image_size: usize = 84,
    frame_stack: usize = 3,
    action_repeat: usize = 2,
    episode_length: usize = 200,
    features_dim: usize = 50,
    hidden_dim: usize = 1024,
    num_filters: usize = 32,
    num_conv_layers: usize = 4,
    log_std_min: f64 = -10.0,
    log_std_max: f64 = 2.0,
    init_temperature: f64 = 0.1,
    max_shift_px: u32 = 16,
    max_rotate_deg: f32 = 180.0,
    overlay_alpha: f32 = 0.5,
    pad_px: u32 = 4,
    distractors: usize = 32,
    checkpoint_interval: u64 = 10_000,
    /// Keep the replay buffer inside checkpoints so runs can resume exactly.
    checkpoint_replay: bool = true,
    /// Write wall-clock frames per second to the metrics file. Off by
    /// default so that metric files are byte-reproducible.
    timing: bool = false,
}

fn strip_comment(line: &str) -> &str {
    line.split('#').next().unwrap_or("")
}

impl TrainConfig {
    /// Parses `key = value` lines on top of the defaults. Blank lines and
    /// `#` comments are ignored; unknown or repeated keys are rejected.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut seen = std::collections::HashSet::new();
        for (n, raw) in text.lines().enumerate() {
            let line = strip_comment(raw).trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::validation(format!("line {}", n + 1), "expected `key = value`"))?;
            let (k, v) = (k.trim(), v.trim());
            if !seen.insert(k.to_string()) {
                return Err(Error::validation(k, "given more than once"));
            }
            cfg.set(k, v)?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    /// Applies `(key, value)` overrides in order, then validates.
    pub fn with_overrides<'a>(mut self, overrides: impl IntoIterator<Item = (&'a str, String)>) -> Result<Self> {
        for (k, v) in overrides {
            self.set(k, &v)?;
        }
        self.validate()?;
        Ok(self)
    }

    /// Canonical text form: every key, in [`TrainConfig::KEYS`] order.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        for k in Self::KEYS {
            let _ = writeln!(out, "{k} = {}", self.get(k).expect("known key"));
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |k: &str, r: &str| Err(Error::validation(k, r));
        if self.update_frequency == 0 {
            return bad("update_frequency", "must be positive");
        }
        if self.batch_size == 0 {
            return bad("batch_size", "must be positive");
        }
        if self.batch_size > self.capacity {
            return bad("batch_size", "must not exceed capacity");
        }
        if (self.batch_size as u64) > self.seed_frames + self.update_frequency {
            return bad("batch_size", "must not exceed the transitions collected before the first update");
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return bad("gamma", "must lie in (0, 1]");
        }
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return bad("tau", "must lie in (0, 1]");
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return bad("lr", "must be positive");
        }
        if self.eval_episodes == 0 {
            return bad("eval_episodes", "must be positive");
        }
        if self.capacity == 0 {
            return bad("capacity", "must be positive");
        }
        if self.greedy_grid < 2 {
            return bad("greedy_grid", "must be at least 2");
        }
        if !(self.init_temperature > 0.0 && self.init_temperature.is_finite()) {
            return bad("init_temperature", "must be positive");
        }
        if self.max_shift_px as usize > self.image_size {
            return bad("max_shift_px", "must not exceed image_size");
        }
        if !(0.0..=180.0).contains(&self.max_rotate_deg) {
            return bad("max_rotate_deg", "must lie in [0, 180]");
        }
        if !(0.0..=1.0).contains(&self.overlay_alpha) {
            return bad("overlay_alpha", "must lie in [0, 1]");
        }
        if self.pad_px as usize >= self.image_size {
            return bad("pad_px", "must be smaller than image_size");
        }
        if self.distractors == 0 {
            return bad("distractors", "must be positive");
        }
        if self.features_dim == 0 || self.num_filters == 0 || self.num_conv_layers == 0 {
            return bad("features_dim", "network widths must be positive");
        }
        self.env_config().validate()?;
        self.net_config().validate()?;
        Ok(())
    }

    pub fn env_config(&self) -> EnvConfig {
        EnvConfig {
            image_size: self.image_size,
            frame_stack: self.frame_stack,
            action_repeat: self.action_repeat,
            episode_length: self.episode_length,
            ..EnvConfig::default()
        }
    }

    pub fn net_config(&self) -> NetConfig {
        NetConfig {
            obs_channels: 3 * self.frame_stack,
            image_size: self.image_size,
            action_dim: crate::envs::ACTION_DIM,
            features_dim: self.features_dim,
            hidden_dim: self.hidden_dim,
            num_filters: self.num_filters,
            num_conv_layers: self.num_conv_layers,
            log_std_min: self.log_std_min,
            log_std_max: self.log_std_max,
            init_temperature: self.init_temperature,
            lr: self.lr,
        }
    }

    pub fn aug_params(&self) -> AugParams {
        AugParams {
            max_shift_px: self.max_shift_px,
            max_rotate_deg: self.max_rotate_deg,
            overlay_alpha: self.overlay_alpha,
            pad_px: self.pad_px,
            ..AugParams::default()
        }
    }

    pub fn recipe_config(&self) -> RecipeConfig {
        let mut r = RecipeConfig::preset(self.recipe, self.augs, self.aug_params());
        r.target_form = self.target_form;
        r.greedy_grid = self.greedy_grid;
        r
    }

    /// Number of agent updates scheduled within the first `steps` steps.
    pub fn updates_after(&self, steps: u64) -> u64 {
        steps.saturating_sub(self.seed_frames) / self.update_frequency
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn key_of(e: Error) -> String {
        match e {
            Error::Validation { key, .. } => key,
            other => panic!("expected a validation error, got {other:?}"),
        }
    }

    #[test]
    fn empty_config_is_defaults() {
        let c = TrainConfig::parse("").unwrap();
        assert_eq!(c, TrainConfig::default());
        c.validate().unwrap();
        assert_eq!((c.gamma, c.batch_size, c.tau, c.lr, c.init_temperature), (0.99, 256, 0.01, 5e-4, 0.1));
        assert_eq!((c.capacity, c.action_repeat, c.frame_stack, c.seed_frames), (1_000_000, 2, 3, 4000));
        assert_eq!((c.exploration_steps, c.update_frequency, c.features_dim, c.hidden_dim), (2000, 2, 50, 1024));
        assert_eq!((c.log_std_min, c.log_std_max), (-10.0, 2.0));
        assert_eq!((c.max_shift_px, c.max_rotate_deg, c.overlay_alpha), (16, 180.0, 0.5));
    }

    #[test]
    fn range_and_type_errors_are_named() {
        let c = TrainConfig::parse("gamma = 1.5").unwrap();
        assert_eq!(key_of(c.validate().unwrap_err()), "gamma");
        assert_eq!(key_of(TrainConfig::parse("batch_size = lots").unwrap_err()), "batch_size");
        assert_eq!(key_of(TrainConfig::parse("learning_rate = 0.1").unwrap_err()), "learning_rate");
        assert_eq!(key_of(TrainConfig::parse("tau = 0.1\ntau = 0.2").unwrap_err()), "tau");
        assert_eq!(key_of(TrainConfig::parse("recipe = ppo").unwrap_err()), "recipe");
        assert!(TrainConfig::parse("just text").is_err());
    }

    #[test]
    fn flags_override_file() {
        let c = TrainConfig::parse("batch_size = 256 # file value\nseed = 3")
            .unwrap()
            .with_overrides([("batch_size", "64".to_string())])
            .unwrap();
        assert_eq!(c.batch_size, 64);
        assert_eq!(c.seed, 3);
    }

    #[test]
    fn serialize_round_trip() {
        let text = "recipe = svea\naugs = geometric\n  gamma=0.95\n# note\ntarget_form = greedy-max\nlr = 0.0003\n";
        let c = TrainConfig::parse(text).unwrap();
        let s = c.serialize();
        let back = TrainConfig::parse(&s).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.serialize(), s);
        assert_eq!(s.lines().count(), TrainConfig::KEYS.len());
        assert!(s.contains("target_form = greedy-max"));
    }

    #[test]
    fn update_schedule() {
        let c = TrainConfig::default();
        assert_eq!(c.updates_after(0), 0);
        assert_eq!(c.updates_after(4000), 0);
        assert_eq!(c.updates_after(4001), 0);
        assert_eq!(c.updates_after(4002), 1);
        assert_eq!(c.updates_after(30_000), 13_000);
    }
}
