//! A procedurally rendered point-goal reaching task.
//!
//! The agent (an orange disc) moves in the square arena `[-1, 1]^2` with a
//! velocity set by the 2-D action; the goal is a green disc. Each environment
//! step repeats the action `action_repeat` times and pays the mean of
//! `exp(-sharpness * distance)` over the repeats, so per-step reward lies in
//! `[0, 1]`. Observations are the `frame_stack` most recent 8-bit RGB frames,
//! newest first.
//!
//! [`wrap_distribution`] turns the training scene into one of the twelve test
//! distributions. Wrappers only change what is rendered; dynamics, actions
//! and rewards are untouched.

mod distribution;
mod render;

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::augment::{Fill, Image, RawObservation};
use crate::rng::{self, streams};
use crate::{Error, Result};

pub use distribution::{DistributionSpec, EpisodeDraw, Family, Level};
pub use render::{render_scene, Palette, SceneState, VideoParams, AGENT_RADIUS, GOAL_RADIUS};

use rand::Rng;

pub const ACTION_DIM: usize = 2;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvConfig {
    pub image_size: usize,
    pub frame_stack: usize,
    pub action_repeat: usize,
    pub episode_length: usize,
    /// Distance moved per repeat at full action.
    pub max_speed: f64,
    /// `c` in the shaped reward `exp(-c * distance)`.
    pub reward_sharpness: f64,
    pub success_radius: f64,
    /// Range of initial agent and goal coordinates.
    pub spawn_extent: f64,
}

impl Default for EnvConfig {
    fn default() -> Self {
        Self {
            image_size: 84,
            frame_stack: 3,
            action_repeat: 2,
            episode_length: 200,
            max_speed: 0.04,
            reward_sharpness: 3.0,
            success_radius: 0.1,
            spawn_extent: 0.8,
        }
    }
}

impl EnvConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |k: &str, r: &str| Err(Error::validation(k, r));
        if self.image_size < 8 {
            return bad("image_size", "must be at least 8");
        }
        if self.frame_stack == 0 {
            return bad("frame_stack", "must be positive");
        }
        if self.action_repeat == 0 {
            return bad("action_repeat", "must be positive");
        }
        if self.episode_length == 0 {
            return bad("episode_length", "must be positive");
        }
        if !(self.max_speed > 0.0 && self.max_speed.is_finite()) {
            return bad("max_speed", "must be positive");
        }
        if !(self.reward_sharpness >= 0.0 && self.reward_sharpness.is_finite()) {
            return bad("reward_sharpness", "must be non-negative");
        }
        if !(self.success_radius >= 0.0) {
            return bad("success_radius", "must be non-negative");
        }
        if !(0.0..=1.0).contains(&self.spawn_extent) {
            return bad("spawn_extent", "must lie in [0, 1]");
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvState {
    pub agent_pos: [f64; 2],
    pub agent_vel: [f64; 2],
    pub goal_pos: [f64; 2],
    pub step: usize,
    pub episode_length: usize,
}

impl EnvState {
    pub fn distance(&self) -> f64 {
        let dx = self.agent_pos[0] - self.goal_pos[0];
        let dy = self.agent_pos[1] - self.goal_pos[1];
        (dx * dx + dy * dy).sqrt()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepResult {
    pub observation: RawObservation,
    pub reward: f64,
    pub done: bool,
    pub info: StepInfo,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepInfo {
    pub distance: f64,
    pub reached: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PointGoalEnv {
    cfg: EnvConfig,
    dist: DistributionSpec,
    base_palette: Palette,
    state: EnvState,
    draw: EpisodeDraw,
    frames: VecDeque<Vec<u8>>,
    started: bool,
    done: bool,
    reached: bool,
}

impl PointGoalEnv {
    pub fn new(cfg: EnvConfig) -> Result<Self> {
        cfg.validate()?;
        let base_palette = Palette::default();
        Ok(Self {
            state: EnvState {
                agent_pos: [0.0; 2],
                agent_vel: [0.0; 2],
                goal_pos: [0.0; 2],
                step: 0,
                episode_length: cfg.episode_length,
            },
            cfg,
            dist: DistributionSpec::train(),
            draw: EpisodeDraw::neutral(base_palette),
            base_palette,
            frames: VecDeque::new(),
            started: false,
            done: false,
            reached: false,
        })
    }

    pub fn config(&self) -> &EnvConfig {
        &self.cfg
    }

    pub fn distribution(&self) -> &DistributionSpec {
        &self.dist
    }

    pub fn state(&self) -> &EnvState {
        &self.state
    }

    pub fn episode_draw(&self) -> &EpisodeDraw {
        &self.draw
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    pub fn action_dim(&self) -> usize {
        ACTION_DIM
    }

    /// `(channels, height, width)` of observations.
    pub fn observation_shape(&self) -> (usize, usize, usize) {
        (3 * self.cfg.frame_stack, self.cfg.image_size, self.cfg.image_size)
    }

    /// Starts an episode with agent and goal placed from `seed`.
    pub fn reset(&mut self, seed: u64) -> RawObservation {
        let mut dyn_rng = rng::stream(seed, streams::DYNAMICS);
        let e = self.cfg.spawn_extent;
        let mut pick = || -> [f64; 2] {
            if e == 0.0 {
                [0.0, 0.0]
            } else {
                [dyn_rng.random_range(-e..=e), dyn_rng.random_range(-e..=e)]
            }
        };
        let agent = pick();
        let goal = pick();
        self.reset_to(seed, agent, goal)
    }

    /// Starts an episode with explicit agent and goal positions; `seed` still
    /// drives the distribution's per-episode draw.
    pub fn reset_to(&mut self, seed: u64, agent: [f64; 2], goal: [f64; 2]) -> RawObservation {
        let clamp = |p: [f64; 2]| [p[0].clamp(-1.0, 1.0), p[1].clamp(-1.0, 1.0)];
        self.state = EnvState {
            agent_pos: clamp(agent),
            agent_vel: [0.0; 2],
            goal_pos: clamp(goal),
            step: 0,
            episode_length: self.cfg.episode_length,
        };
        let mut pert_rng = rng::stream(seed, streams::PERTURBATION);
        self.draw = self.dist.sample_episode(&self.base_palette, &mut pert_rng);
        self.started = true;
        self.done = false;
        self.reached = self.state.distance() <= self.cfg.success_radius;
        let first = self.render_frame();
        self.frames = std::iter::repeat_n(first, self.cfg.frame_stack).collect();
        self.observation()
    }

    pub fn step(&mut self, action: &[f32]) -> Result<StepResult> {
        if !self.started {
            return Err(Error::Contract("step called before reset".into()));
        }
        if self.done {
            return Err(Error::Contract("step called on a finished episode".into()));
        }
        if action.len() != ACTION_DIM || action.iter().any(|a| !a.is_finite()) {
            return Err(Error::Contract(format!("expected {ACTION_DIM} finite action values, got {action:?}")));
        }
        let mut reward = 0.0;
        for _ in 0..self.cfg.action_repeat {
            for d in 0..ACTION_DIM {
                let v = f64::from(action[d].clamp(-1.0, 1.0)) * self.cfg.max_speed;
                let p = self.state.agent_pos[d] + v;
                let clamped = p.clamp(-1.0, 1.0);
                self.state.agent_vel[d] = if clamped == p { v } else { 0.0 };
                self.state.agent_pos[d] = clamped;
            }
            let dist = self.state.distance();
            reward += (-self.cfg.reward_sharpness * dist).exp();
            self.reached |= dist <= self.cfg.success_radius;
        }
        reward /= self.cfg.action_repeat as f64;
        self.state.step += 1;
        self.done = self.state.step >= self.state.episode_length;
        let frame = self.render_frame();
        self.frames.push_front(frame);
        self.frames.truncate(self.cfg.frame_stack);
        Ok(StepResult {
            observation: self.observation(),
            reward,
            done: self.done,
            info: StepInfo {
                distance: self.state.distance(),
                reached: self.reached,
            },
        })
    }

    /// Whether the agent came within the success radius (closed ball) at any
    /// point of the finished episode.
    pub fn success(&self) -> Result<bool> {
        if !self.done {
            return Err(Error::Contract("success queried before the episode finished".into()));
        }
        Ok(self.reached)
    }

    pub fn observation(&self) -> RawObservation {
        let size = self.cfg.image_size;
        let mut data = Vec::with_capacity(self.frames.len() * 3 * size * size);
        for f in &self.frames {
            data.extend_from_slice(f);
        }
        RawObservation {
            frames: self.frames.len(),
            height: size,
            width: size,
            data,
        }
    }

    /// Renders the unperturbed scene for the current state as 8-bit.
    pub fn render_base(&self) -> Vec<u8> {
        let scene = SceneState {
            agent: self.state.agent_pos,
            goal: self.state.goal_pos,
        };
        render_scene(
            &scene,
            self.cfg.image_size,
            &self.draw.palette,
            self.draw.video.as_ref(),
            self.state.step as f32,
        )
        .quantize()
    }

    fn render_frame(&self) -> Vec<u8> {
        let base = self.render_base();
        if self.draw.is_geometric_identity() {
            return base;
        }
        let size = self.cfg.image_size;
        let img = Image::from_u8(size, size, &base).expect("rendered frame has the configured size");
        perturb_geometric(&img, &self.draw).quantize()
    }
}

/// Rotation then zero-filled shift, the order used by the composite
/// augmentation.
pub fn perturb_geometric(img: &Image, draw: &EpisodeDraw) -> Image {
    let rotated = if draw.angle_deg != 0.0 {
        img.rotated(draw.angle_deg)
    } else {
        img.clone()
    };
    if draw.dx != 0 || draw.dy != 0 {
        rotated.translated(draw.dx, draw.dy, Fill::Zero)
    } else {
        rotated
    }
}

/// Returns `env` rendering `spec` from its next reset on.
pub fn wrap_distribution(mut env: PointGoalEnv, spec: DistributionSpec) -> Result<PointGoalEnv> {
    spec.validate()?;
    env.dist = spec;
    env.started = false;
    Ok(env)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::augment::{apply_shift, AugParams};

    fn small_cfg() -> EnvConfig {
        EnvConfig {
            image_size: 32,
            episode_length: 20,
            ..EnvConfig::default()
        }
    }

    #[test]
    fn reset_is_deterministic_with_stacked_frames() {
        let mut env = PointGoalEnv::new(EnvConfig::default()).unwrap();
        let a = env.reset(4);
        let b = env.reset(4);
        assert_eq!(a, b);
        assert_eq!(a.channels(), 9);
        assert_eq!((a.height, a.width), (84, 84));
        assert_eq!(a.frame(0), a.frame(1));
        assert_eq!(a.frame(1), a.frame(2));
        assert!(!env.is_done());
        assert_ne!(env.reset(5), a);
    }

    #[test]
    fn zero_action_keeps_stationary_agent_in_place() {
        let mut env = PointGoalEnv::new(small_cfg()).unwrap();
        env.reset(1);
        let before = env.state().agent_pos;
        env.step(&[0.0, 0.0]).unwrap();
        assert_eq!(env.state().agent_pos, before);
    }

    #[test]
    fn reward_is_one_on_goal() {
        let mut env = PointGoalEnv::new(small_cfg()).unwrap();
        env.reset_to(0, [0.3, -0.2], [0.3, -0.2]);
        let r = env.step(&[0.0, 0.0]).unwrap();
        assert_eq!(r.reward, 1.0);
    }

    #[test]
    fn reward_increases_as_distance_shrinks() {
        let mut env = PointGoalEnv::new(small_cfg()).unwrap();
        env.reset_to(0, [-0.8, 0.0], [0.8, 0.0]);
        let mut last = 0.0;
        for _ in 0..10 {
            let r = env.step(&[1.0, 0.0]).unwrap().reward;
            assert!(r > last);
            last = r;
        }
    }

    #[test]
    fn frame_stack_shifts_newest_first() {
        let mut env = PointGoalEnv::new(small_cfg()).unwrap();
        let o0 = env.reset_to(0, [-0.5, 0.0], [0.5, 0.5]);
        let o1 = env.step(&[1.0, 0.0]).unwrap().observation;
        let o2 = env.step(&[1.0, 0.0]).unwrap().observation;
        assert_eq!(o1.frame(1), o0.frame(0));
        assert_eq!(o2.frame(1), o1.frame(0));
        assert_eq!(o2.frame(2), o1.frame(1));
        assert_ne!(o2.frame(0), o2.frame(1));
    }

    #[test]
    fn episode_ends_at_length_and_refuses_further_steps() {
        let mut env = PointGoalEnv::new(small_cfg()).unwrap();
        env.reset(0);
        let mut total = 0.0;
        for i in 0..20 {
            let r = env.step(&[0.3, -0.1]).unwrap();
            total += r.reward;
            assert!((0.0..=1.0).contains(&r.reward));
            assert_eq!(r.done, i == 19);
        }
        assert!((0.0..=20.0).contains(&total));
        assert!(matches!(env.step(&[0.0, 0.0]), Err(Error::Contract(_))));
    }

    #[test]
    fn success_semantics() {
        let mut env = PointGoalEnv::new(small_cfg()).unwrap();
        env.reset_to(0, [0.1, 0.1], [0.1, 0.1]);
        assert!(matches!(env.success(), Err(Error::Contract(_))));
        while !env.is_done() {
            env.step(&[0.0, 0.0]).unwrap();
        }
        assert!(env.success().unwrap());

        env.reset_to(0, [-0.9, -0.9], [0.9, 0.9]);
        while !env.is_done() {
            env.step(&[0.0, 0.0]).unwrap();
        }
        assert!(!env.success().unwrap());

        // distance exactly equal to the radius counts
        let cfg = EnvConfig {
            success_radius: 0.5,
            ..small_cfg()
        };
        let mut env = PointGoalEnv::new(cfg).unwrap();
        env.reset_to(0, [0.0, 0.0], [0.5, 0.0]);
        while !env.is_done() {
            env.step(&[0.0, 0.0]).unwrap();
        }
        assert!(env.success().unwrap());
    }

    #[test]
    fn episodes_are_reproducible() {
        let run = || {
            let mut env = wrap_distribution(
                PointGoalEnv::new(small_cfg()).unwrap(),
                DistributionSpec::new(Family::ColorVideo, Level::Hard),
            )
            .unwrap();
            let mut obs = vec![env.reset(9)];
            let mut rewards = vec![];
            for i in 0..20 {
                let a = [(i as f32 * 0.37).sin(), (i as f32 * 0.11).cos()];
                let r = env.step(&a).unwrap();
                obs.push(r.observation);
                rewards.push(r.reward);
            }
            (obs, rewards)
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn train_wrapper_is_identity_and_zero_rotation_matches_train() {
        let base = PointGoalEnv::new(small_cfg()).unwrap();
        let mut plain = base.clone();
        let mut train = wrap_distribution(base.clone(), DistributionSpec::train()).unwrap();
        let mut rot0 = wrap_distribution(
            base,
            DistributionSpec::new(Family::Rotate, Level::Easy).with_intensity(0.0),
        )
        .unwrap();
        assert_eq!(plain.reset(3), train.reset(3));
        assert_eq!(train.reset(3), rot0.reset(3));
        for _ in 0..5 {
            let a = plain.step(&[0.5, 0.5]).unwrap();
            let b = rot0.step(&[0.5, 0.5]).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn shift_hard_frames_equal_shift_of_unwrapped_frames() {
        let base = PointGoalEnv::new(small_cfg()).unwrap();
        let mut plain = base.clone();
        let mut shifted = wrap_distribution(base, DistributionSpec::new(Family::Shift, Level::Hard)).unwrap();
        let params = AugParams::default();
        for seed in 0..6 {
            let p = plain.reset(seed);
            let s = shifted.reset(seed);
            let draw = shifted.episode_draw().clone();
            assert!(draw.dx.abs() <= 16 && draw.dy.abs() <= 16);
            let check = |p: &RawObservation, s: &RawObservation| {
                let expect = apply_shift(&p.to_unit(), draw.dx, draw.dy, &params).unwrap().quantize();
                assert_eq!(&expect, s);
            };
            check(&p, &s);
            for _ in 0..4 {
                let a = plain.step(&[0.4, -0.6]).unwrap();
                let b = shifted.step(&[0.4, -0.6]).unwrap();
                assert_eq!(a.reward, b.reward);
                check(&a.observation, &b.observation);
            }
        }
    }

    #[test]
    fn rotation_wrapper_commutes_with_rotate_operator() {
        let base = PointGoalEnv::new(small_cfg()).unwrap();
        let mut plain = base.clone();
        let mut rotated = wrap_distribution(base, DistributionSpec::new(Family::Rotate, Level::Hard)).unwrap();
        let p = plain.reset(2);
        let r = rotated.reset(2);
        let angle = rotated.episode_draw().angle_deg;
        assert!(angle.abs() <= 180.0);
        let expect = p.to_unit().rotated(angle).quantize();
        assert_eq!(expect, r);
    }

    #[test]
    fn photometric_wrappers_change_pixels_not_dynamics() {
        for family in [Family::Color, Family::Video, Family::ColorVideo] {
            let base = PointGoalEnv::new(small_cfg()).unwrap();
            let mut plain = base.clone();
            let mut wrapped = wrap_distribution(base, DistributionSpec::new(family, Level::Hard)).unwrap();
            assert_ne!(plain.reset(7), wrapped.reset(7));
            for _ in 0..3 {
                let a = plain.step(&[-0.2, 0.9]).unwrap();
                let b = wrapped.step(&[-0.2, 0.9]).unwrap();
                assert_eq!(a.reward, b.reward);
                assert_eq!(a.done, b.done);
                assert_eq!(plain.state(), wrapped.state());
            }
        }
    }

    #[test]
    fn video_background_animates() {
        let mut env = wrap_distribution(
            PointGoalEnv::new(small_cfg()).unwrap(),
            DistributionSpec::new(Family::Video, Level::Hard),
        )
        .unwrap();
        let o = env.reset_to(1, [0.0, 0.0], [0.0, 0.0]);
        let n = env.step(&[0.0, 0.0]).unwrap().observation;
        assert_ne!(o.frame(0), n.frame(0));
    }

    #[test]
    fn invalid_config_is_rejected() {
        let cfg = EnvConfig {
            frame_stack: 0,
            ..EnvConfig::default()
        };
        assert!(matches!(PointGoalEnv::new(cfg), Err(Error::Validation { .. })));
    }
}
