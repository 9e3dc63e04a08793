//! Brute-force reference implementations checked against the main modules.
//!
//! Everything here is written out longhand in `f64`: scalar loops instead of
//! array code, series expansions instead of continued fractions, explicit
//! coordinate bookkeeping instead of the pixel kernels. Oracles only call into
//! the crate to obtain the value under test (and, where a case checks a loss,
//! the encoder features fed into it).

use std::fmt;

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::augment::{
    apply_conv, apply_draw, sample_strong, weak_shift, AugDraw, AugKind, AugParams, AugPool, AugmentationSpec,
    ConvKernel, DistractorBank, DrawParams, Observation, RawObservation,
};
use crate::config::TrainConfig;
use crate::envs::{wrap_distribution, DistributionSpec, EnvConfig, Family, Level, PointGoalEnv};
use crate::evalmetrics::{action_variance, collect_observations};
use crate::networks::{obs_batch, Agent, NetConfig, Params};
use crate::recipes::{
    actor_loss_plain, actor_loss_sada, critic_loss_sada, critic_targets, critic_update, greedy_max_value,
    temperature_loss, Batch, Grads, PackedBatch, Recipe, RecipeConfig, Stream, TargetForm, UpdateRngs,
};
use crate::replay::{ReplayBuffer, Transition};
use crate::rng::StreamRng;
use crate::stats::{self, SampleSet};
use crate::trainer::Trainer;
use crate::{Error, Result};

/// What a case measured. `deviation <= tolerance` passes.
#[derive(Clone, Debug, PartialEq)]
pub struct Measured {
    pub deviation: f64,
    pub detail: String,
}

impl Measured {
    fn new(deviation: f64, detail: impl Into<String>) -> Self {
        Self {
            deviation,
            detail: detail.into(),
        }
    }
}

/// A registered oracle comparison.
#[derive(Clone, Copy)]
pub struct OracleCase {
    pub name: &'static str,
    pub input: &'static str,
    pub expected: &'static str,
    pub tolerance: f64,
    run: fn() -> Result<Measured>,
}

impl fmt::Debug for OracleCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OracleCase")
            .field("name", &self.name)
            .field("tolerance", &self.tolerance)
            .finish()
    }
}

impl OracleCase {
    pub fn run(&self) -> CaseOutcome {
        match (self.run)() {
            Ok(m) => CaseOutcome {
                name: self.name,
                tolerance: self.tolerance,
                deviation: m.deviation,
                passed: m.deviation <= self.tolerance,
                detail: m.detail,
            },
            Err(e) => CaseOutcome {
                name: self.name,
                tolerance: self.tolerance,
                deviation: f64::INFINITY,
                passed: false,
                detail: format!("error: {e}"),
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CaseOutcome {
    pub name: &'static str,
    pub tolerance: f64,
    pub deviation: f64,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for CaseOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:<28} deviation={:.3e} tolerance={:.1e} {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.deviation,
            self.tolerance,
            self.detail
        )
    }
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct OracleReport {
    pub cases: Vec<CaseOutcome>,
}

impl OracleReport {
    pub fn passed(&self) -> bool {
        self.cases.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&CaseOutcome> {
        self.cases.iter().filter(|c| !c.passed).collect()
    }

    pub fn get(&self, name: &str) -> Option<&CaseOutcome> {
        self.cases.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for OracleReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.cases {
            writeln!(f, "{c}")?;
        }
        let failed = self.failures().len();
        write!(f, "{} cases, {} passed, {} failed", self.cases.len(), self.cases.len() - failed, failed)
    }
}

macro_rules! case {
    ($name:literal, $input:literal, $expected:literal, $tol:expr, $run:path) => {
        OracleCase {
            name: $name,
            input: $input,
            expected: $expected,
            tolerance: $tol,
            run: $run,
        }
    };
}

/// Every registered case.
pub fn registry() -> Vec<OracleCase> {
    vec![
        case!("weak_shift_edge_fill", "8x8 column ramp, pad 4, draw (4, 0)", "columns moved right by 4, left edge replicated", 0.0, weak_shift_edge_fill),
        case!("conv_fixed_kernel", "seeded 3x3 kernel, 2-frame 10x12 gradient image", "nested-loop convolution", 1e-6, conv_fixed_kernel),
        case!("conv_seeded_8x8", "seeded kernel and seeded 8x8 image", "nested-loop convolution", 1e-6, conv_seeded_8x8),
        case!("rotate90_then_shift", "2x2 image, rotate 90 then shift (1, 0)", "composed permutation", 0.0, rotate_then_shift),
        case!("strong_pool_frequencies", "10000 draws from the 6-spec pool", "each frequency within 5 sigma of 1/6", 5.0, strong_pool_frequencies),
        case!("shift_hard_episode", "shift hard episode, 21x21", "frames equal zero-filled shift of the clean render", 0.0, shift_hard_episode),
        case!("rotation_non_invariance", "random encoder, 20 random inputs", "embedding changes under 90 degree rotation", 0.0, rotation_non_invariance),
        case!("squashed_gaussian_mass", "1-d policy density on a noise grid", "integral 1", 1e-3, squashed_gaussian_mass),
        case!("q1_weight_fd", "tiny critic, one fc2 weight", "central difference of the scalar critic", 1e-4, q1_weight_fd),
        case!("critic_loss_fd", "tiny agent, critic fc1 and fc2 weights", "central difference of the scalar critic loss", 1e-4, critic_loss_fd),
        case!("actor_loss_fd", "tiny agent, actor fc1 and fc3 weights", "central difference of the scalar actor loss", 1e-4, actor_loss_fd),
        case!("actor_loss_sada_trace", "one transition, fixed noise", "scalar trace of the selective actor loss", 1e-10, actor_loss_sada_trace),
        case!("temperature_gradient", "log-probs below the entropy target", "alpha * mean(-log pi - target) with positive sign", 1e-12, temperature_gradient),
        case!("greedy_max_grid", "1-d actions, 21-point grid", "exhaustive max of min target Q", 1e-10, greedy_max_grid),
        case!("critic_loss_sada_trace", "one transition, fixed draws", "scalar trace of the selective critic loss", 1e-10, critic_loss_sada_trace),
        case!("critic_loss_plain_trace", "one transition, fixed noise", "scalar trace of the plain critic loss", 1e-10, critic_loss_plain_trace),
        case!("replay_uniformity", "100000 draws from 10 items", "chi-square p > 0.01", 0.0, replay_uniformity),
        case!("exploration_uniformity", "10000 exploration action values", "KS p > 0.01", 0.0, exploration_uniformity),
        case!("optimal_point_goal", "scripted policy, 5 episodes", "within 5% of the closed-form return", 0.05, optimal_point_goal),
        case!("geometric_variance_positive", "random agent, 8 observations", "geometric variance > 0", 0.0, geometric_variance_positive),
        case!("welch_textbook", "two fixed samples", "textbook t, dof and p", 1e-10, welch_textbook),
        case!("holm_all_reject", "p = (0.01, 0.02, 0.04)", "(true, true, true)", 0.0, holm_all_reject),
        case!("holm_stops_early", "p = (0.02, 0.5, 0.6)", "(false, false, false)", 0.0, holm_stops_early),
        case!("holm_adjusted_alphas", "m = 3, alpha = 0.05", "(0.05/3, 0.025, 0.05)", 1e-15, holm_adjusted_alphas),
        case!("ci_three_points", "(1, 2, 3)", "2 -+ 1.96/sqrt(3)", 1e-15, ci_three_points),
        case!("student_t_cdf", "50 (t, dof) pairs, dof in [1, 100]", "series incomplete beta", 1e-10, student_t_cdf_pairs),
    ]
}

/// Runs every case whose name contains `filter`; an empty filter runs all.
pub fn run_oracle_suite(filter: &str) -> OracleReport {
    OracleReport {
        cases: registry()
            .iter()
            .filter(|c| filter.is_empty() || c.name.contains(filter))
            .map(OracleCase::run)
            .collect(),
    }
}

// ---------------------------------------------------------------- images

fn max_abs(a: &[f32], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(&x, &y)| (f64::from(x) - y).abs()).fold(0.0, f64::max)
}

fn seeded_obs(frames: usize, h: usize, w: usize, seed: u64) -> Observation {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..frames * 3 * h * w).map(|_| rng.random::<f32>()).collect();
    Observation::new(frames, h, w, data).expect("consistent shape")
}

fn weak_shift_edge_fill() -> Result<Measured> {
    let (h, w) = (8, 8);
    let v = |c: usize| 0.05 + 0.1 * c as f64;
    let mut data = Vec::new();
    for _ch in 0..3 {
        for _y in 0..h {
            for x in 0..w {
                data.push(v(x) as f32);
            }
        }
    }
    let obs = Observation::new(1, h, w, data)?;
    let out = weak_shift(&obs, 4, 0, 4)?;
    let mut expected = Vec::new();
    for _ch in 0..3 {
        for _y in 0..h {
            for c in 0..w {
                // Columns 0..4 are vacated and take the value of original column 0.
                expected.push(if c >= 4 { v(c - 4) } else { v(0) });
            }
        }
    }
    let expected: Vec<f64> = expected.iter().map(|&e| f64::from(e as f32)).collect();
    Ok(Measured::new(max_abs(&out.data, &expected), "8x8, 3 channels"))
}

/// Zero-padded 3-in/3-out correlation, clipped to [0, 1].
fn nested_conv(obs: &Observation, k: &ConvKernel) -> Vec<f64> {
    let (h, w, n) = (obs.height as i64, obs.width as i64, k.size as i64);
    let r = n / 2;
    let px = |f: usize, c: usize, y: i64, x: i64| -> f64 {
        if y < 0 || x < 0 || y >= h || x >= w {
            0.0
        } else {
            f64::from(obs.data[((f * 3 + c) * h as usize + y as usize) * w as usize + x as usize])
        }
    };
    let mut out = Vec::new();
    for f in 0..obs.frames {
        for o in 0..3 {
            for y in 0..h {
                for x in 0..w {
                    let mut s = 0.0;
                    for i in 0..3 {
                        for ky in 0..n {
                            for kx in 0..n {
                                let wt = f64::from(k.weights[((o * 3 + i) * n as usize + ky as usize) * n as usize + kx as usize]);
                                s += wt * px(f, i, y + ky - r, x + kx - r);
                            }
                        }
                    }
                    out.push(s.clamp(0.0, 1.0));
                }
            }
        }
    }
    out
}

fn conv_fixed_kernel() -> Result<Measured> {
    let (f, h, w) = (2, 10, 12);
    let data = (0..f * 3 * h * w)
        .map(|i| {
            let x = i % w;
            let y = (i / w) % h;
            let c = (i / (w * h)) % 3;
            ((x as f32 + 2.0 * y as f32 + 5.0 * c as f32) % 17.0) / 17.0
        })
        .collect();
    let obs = Observation::new(f, h, w, data)?;
    let kernel = ConvKernel::sample(3, 1.0, &mut ChaCha8Rng::seed_from_u64(11));
    let got = apply_conv(&obs, &kernel)?;
    Ok(Measured::new(max_abs(&got.data, &nested_conv(&obs, &kernel)), "2 frames, 10x12"))
}

fn conv_seeded_8x8() -> Result<Measured> {
    let obs = seeded_obs(1, 8, 8, 21);
    let kernel = ConvKernel::sample(3, 1.0, &mut ChaCha8Rng::seed_from_u64(22));
    let got = apply_conv(&obs, &kernel)?;
    Ok(Measured::new(max_abs(&got.data, &nested_conv(&obs, &kernel)), "8x8"))
}

/// Counter-clockwise quarter turn of one square plane as transpose followed by
/// a vertical flip.
fn quarter_turn(plane: &[f64], n: usize) -> Vec<f64> {
    let mut t = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            t[i * n + j] = plane[j * n + i];
        }
    }
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            out[i * n + j] = t[(n - 1 - i) * n + j];
        }
    }
    out
}

fn rotate_then_shift() -> Result<Measured> {
    let n = 2;
    let data: Vec<f32> = (0..3 * n * n).map(|i| (i + 1) as f32 / 16.0).collect();
    let obs = Observation::new(1, n, n, data.clone())?;
    let params = AugParams {
        max_shift_px: 1,
        ..AugParams::default()
    };
    let draw = AugDraw {
        spec: AugmentationSpec {
            kind: AugKind::RotateShift,
            params,
        },
        params: DrawParams::RotateShift {
            angle_deg: 90.0,
            dx: 1,
            dy: 0,
        },
        seed: 0,
    };
    let got = apply_draw(&obs, &draw, &DistractorBank::procedural(1, n, n, 0))?;
    let mut expected = Vec::new();
    for c in 0..3 {
        let plane: Vec<f64> = data[c * n * n..(c + 1) * n * n].iter().map(|&v| f64::from(v)).collect();
        let r = quarter_turn(&plane, n);
        for y in 0..n {
            for x in 0..n {
                expected.push(if x >= 1 { r[y * n + x - 1] } else { 0.0 });
            }
        }
    }
    Ok(Measured::new(max_abs(&got.data, &expected), "2x2"))
}

fn strong_pool_frequencies() -> Result<Measured> {
    let obs = seeded_obs(1, 8, 8, 3);
    let bank = DistractorBank::procedural(2, 8, 8, 4);
    let pool = AugPool::All.specs(AugParams {
        max_shift_px: 2,
        ..AugParams::default()
    });
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let n = 10_000;
    let mut counts = vec![0usize; pool.len()];
    for _ in 0..n {
        let (_, draw) = sample_strong(&obs, &pool, &bank, &mut rng)?;
        let i = pool.iter().position(|s| s.kind == draw.spec.kind).expect("drawn from pool");
        counts[i] += 1;
    }
    let p = 1.0 / pool.len() as f64;
    let sigma = (n as f64 * p * (1.0 - p)).sqrt();
    let z = counts
        .iter()
        .map(|&c| (c as f64 - n as f64 * p).abs() / sigma)
        .fold(0.0, f64::max);
    Ok(Measured::new(z, format!("counts {counts:?}")))
}

fn shift_hard_episode() -> Result<Measured> {
    let cfg = EnvConfig {
        image_size: 21,
        episode_length: 6,
        ..EnvConfig::default()
    };
    let spec = DistributionSpec::new(Family::Shift, Level::Hard);
    let bound = spec.intensity().round() as i32;
    let mut env = wrap_distribution(PointGoalEnv::new(cfg)?, spec)?;
    let n = 21usize;
    let mut worst = 0.0f64;
    let mut offsets = Vec::new();
    for seed in 0..4u64 {
        let mut obs = env.reset(seed);
        let (dx, dy) = (env.episode_draw().dx, env.episode_draw().dy);
        if dx.abs() > bound || dy.abs() > bound {
            return Ok(Measured::new(f64::INFINITY, format!("offset ({dx}, {dy}) beyond {bound}")));
        }
        offsets.push((dx, dy));
        let mut t = 0;
        loop {
            if (env.episode_draw().dx, env.episode_draw().dy) != (dx, dy) {
                return Ok(Measured::new(f64::INFINITY, "offset changed within the episode"));
            }
            let base = env.render_base();
            let newest = obs.frame(0);
            for c in 0..3 {
                for y in 0..n as i32 {
                    for x in 0..n as i32 {
                        let (sy, sx) = (y - dy, x - dx);
                        let want = if sy < 0 || sx < 0 || sy >= n as i32 || sx >= n as i32 {
                            0
                        } else {
                            base[(c * n + sy as usize) * n + sx as usize]
                        };
                        let got = newest[(c * n + y as usize) * n + x as usize];
                        worst = worst.max((f64::from(got) - f64::from(want)).abs());
                    }
                }
            }
            if env.is_done() {
                break;
            }
            let a = [((t as f32) * 0.7).sin(), ((t as f32) * 0.3).cos()];
            obs = env.step(&a)?.observation;
            t += 1;
        }
    }
    Ok(Measured::new(worst, format!("offsets {offsets:?}")))
}

// ---------------------------------------------------------------- networks

fn tiny_net(action_dim: usize) -> NetConfig {
    NetConfig {
        obs_channels: 9,
        image_size: 15,
        action_dim,
        features_dim: 4,
        hidden_dim: 6,
        num_filters: 2,
        num_conv_layers: 2,
        ..NetConfig::default()
    }
}

fn tiny_agent(action_dim: usize, seed: u64) -> Result<Agent<f64>> {
    Agent::new(tiny_net(action_dim), &mut ChaCha8Rng::seed_from_u64(seed))
}

fn tensor<'a>(p: &'a Params<f64>, name: &str) -> &'a [f64] {
    &p.tensors()
        .iter()
        .find(|t| t.name == name)
        .unwrap_or_else(|| panic!("no tensor {name}"))
        .data
}

fn set_tensor(p: &mut Params<f64>, name: &str, i: usize, v: f64) {
    let t = p.tensors_mut().iter_mut().find(|t| t.name == name).expect("tensor exists");
    t.data[i] = v;
}

/// `relu?(x W + b)` with `W` stored row-major as `[in, out]`.
fn dense(p: &Params<f64>, name: &str, x: &[f64], relu: bool) -> Vec<f64> {
    let w = tensor(p, &format!("{name}.weight"));
    let b = tensor(p, &format!("{name}.bias"));
    let out = b.len();
    (0..out)
        .map(|j| {
            let mut s = b[j];
            for (i, xi) in x.iter().enumerate() {
                s += xi * w[i * out + j];
            }
            if relu {
                s.max(0.0)
            } else {
                s
            }
        })
        .collect()
}

fn q_head(p: &Params<f64>, head: &str, f: &[f64], a: &[f64]) -> f64 {
    let x: Vec<f64> = f.iter().chain(a).copied().collect();
    let h1 = dense(p, &format!("{head}.fc1"), &x, true);
    let h2 = dense(p, &format!("{head}.fc2"), &h1, true);
    dense(p, &format!("{head}.fc3"), &h2, false)[0]
}

fn min_q(p: &Params<f64>, f: &[f64], a: &[f64]) -> f64 {
    q_head(p, "q1", f, a).min(q_head(p, "q2", f, a))
}

/// Action and log-probability for explicit noise.
fn policy(agent: &Agent<f64>, p: &Params<f64>, f: &[f64], eps: &[f64]) -> (Vec<f64>, f64) {
    let a_dim = eps.len();
    let h1 = dense(p, "fc1", f, true);
    let h2 = dense(p, "fc2", &h1, true);
    let out = dense(p, "fc3", &h2, false);
    let (lo, hi) = (agent.actor.log_std_min, agent.actor.log_std_max);
    let mut action = Vec::new();
    let mut lp = 0.0;
    for d in 0..a_dim {
        let mu = out[d];
        let log_std = lo + 0.5 * (hi - lo) * (out[a_dim + d].tanh() + 1.0);
        let u = mu + log_std.exp() * eps[d];
        let a = u.tanh();
        lp += -0.5 * eps[d] * eps[d] - log_std - 0.5 * (2.0 * std::f64::consts::PI).ln() - (1.0 - a * a).ln();
        action.push(a);
    }
    (action, lp)
}

fn draw_noise(rng: &mut StreamRng, rows: usize, a_dim: usize) -> Vec<Vec<f64>> {
    (0..rows)
        .map(|_| (0..a_dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect())
        .collect()
}

fn features(agent: &Agent<f64>, obs: &[Observation]) -> Result<Vec<Vec<f64>>> {
    let refs: Vec<&Observation> = obs.iter().collect();
    let f = agent.encoder.encode(obs_batch::<f64>(&refs)?.view())?;
    Ok(f.rows().into_iter().map(|r| r.to_vec()).collect())
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-8)
}

fn rotation_non_invariance() -> Result<Measured> {
    let mut cfg = tiny_net(2);
    cfg.image_size = 21;
    cfg.num_conv_layers = 3;
    let agent: Agent<f64> = Agent::new(cfg, &mut ChaCha8Rng::seed_from_u64(31))?;
    let mut violations = 0;
    let mut smallest = f64::INFINITY;
    for s in 0..20 {
        let o = seeded_obs(3, 21, 21, 100 + s);
        let mut rot = Vec::new();
        for plane in o.data.chunks(21 * 21) {
            let p: Vec<f64> = plane.iter().map(|&v| f64::from(v)).collect();
            rot.extend(quarter_turn(&p, 21).into_iter().map(|v| v as f32));
        }
        let r = Observation::new(3, 21, 21, rot)?;
        let f = features(&agent, &[o.clone(), r, o])?;
        let dist = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
        let d_rot = dist(&f[0], &f[1]);
        let d_id = dist(&f[0], &f[2]);
        smallest = smallest.min(d_rot - d_id);
        if d_rot <= d_id {
            violations += 1;
        }
    }
    Ok(Measured::new(f64::from(violations), format!("smallest margin {smallest:.3e}")))
}

fn squashed_gaussian_mass() -> Result<Measured> {
    let agent = tiny_agent(1, 41)?;
    let f = Array2::from_shape_vec((1, 4), vec![0.3, -0.2, 0.8, 0.1]).expect("shape");
    let n = 40_001;
    let (lo, hi) = (-10.0, 10.0);
    let step = (hi - lo) / (n - 1) as f64;
    let eps: Vec<f64> = (0..n).map(|i| lo + step * i as f64).collect();
    let feats = Array2::from_shape_fn((n, 4), |(_, j)| f[[0, j]]);
    let (out, _) = agent
        .actor
        .forward_with_noise(feats.view(), Array2::from_shape_vec((n, 1), eps.clone()).expect("shape"));
    // Recover mu and std from two mean/unit-noise probes, then integrate
    // p(a(eps)) * da/deps over the noise grid.
    let probe = agent
        .actor
        .forward_with_noise(f.view(), Array2::from_shape_vec((1, 1), vec![0.0]).expect("shape"))
        .0;
    let unit = agent
        .actor
        .forward_with_noise(f.view(), Array2::from_shape_vec((1, 1), vec![1.0]).expect("shape"))
        .0;
    let mu = probe.action[[0, 0]].atanh();
    let std = unit.action[[0, 0]].atanh() - mu;
    let mut total = 0.0;
    for i in 0..n {
        let a = out.action[[i, 0]];
        let jac = std * (1.0 - a * a);
        let wt = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
        total += wt * out.log_prob[i].exp() * jac * step;
    }
    Ok(Measured::new((total - 1.0).abs(), format!("mass {total:.8}, std {std:.3e}")))
}

fn q1_weight_fd() -> Result<Measured> {
    let mut agent = tiny_agent(2, 51)?;
    let f = vec![0.4, -0.3, 0.9, 0.2];
    let a = vec![0.5, -0.25];
    let fa = Array2::from_shape_vec((1, 4), f.clone()).expect("shape");
    let aa = Array2::from_shape_vec((1, 2), a.clone()).expect("shape");
    let (_, trace) = agent.critic.forward(fa.view(), aa.view())?;
    let mut g = agent.critic.params.zeros_like();
    agent
        .critic
        .backward(&trace, Array1::from(vec![1.0]).view(), Array1::from(vec![0.0]).view(), Some(&mut g));
    let name = "q1.fc2.weight";
    let mut worst = 0.0f64;
    for i in [0usize, 7, 13, 29] {
        let base = tensor(&agent.critic.params, name)[i];
        let h = 1e-6;
        set_tensor(&mut agent.critic.params, name, i, base + h);
        let up = q_head(&agent.critic.params, "q1", &f, &a);
        set_tensor(&mut agent.critic.params, name, i, base - h);
        let down = q_head(&agent.critic.params, "q1", &f, &a);
        set_tensor(&mut agent.critic.params, name, i, base);
        let fd = (up - down) / (2.0 * h);
        worst = worst.max(rel_err(tensor(&g, name)[i], fd));
    }
    Ok(Measured::new(worst, "4 weights"))
}

/// One transition of seeded observations for the loss traces.
fn one_transition_batch(seed: u64) -> Batch<f64> {
    Batch {
        obs: vec![seeded_obs(3, 15, 15, seed)],
        next_obs: vec![seeded_obs(3, 15, 15, seed + 1)],
        actions: Array2::from_shape_vec((1, 2), vec![0.3, -0.6]).expect("shape"),
        rewards: Array1::from(vec![0.7]),
        discounts: Array1::from(vec![0.99]),
    }
}

/// Scalar SAC target for one next observation with noise `eps`.
fn scalar_target(agent: &Agent<f64>, f_next: &[f64], eps: &[f64], r: f64, discount: f64) -> f64 {
    let (a, lp) = policy(agent, &agent.actor.params, f_next, eps);
    let alpha = agent.temperature.alpha();
    r + discount * (min_q(agent.critic_target.params(), f_next, &a) - alpha * lp)
}

fn scalar_critic_loss(p: &Params<f64>, feats: &[Vec<f64>], a: &[f64], y: f64) -> f64 {
    feats
        .iter()
        .map(|f| (q_head(p, "q1", f, a) - y).powi(2) + (q_head(p, "q2", f, a) - y).powi(2))
        .sum::<f64>()
        / feats.len() as f64
}

fn perturbed_agent(seed: u64) -> Result<Agent<f64>> {
    let mut agent = tiny_agent(2, seed)?;
    // Move the target away from the online critic so both enter the trace.
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabc);
    for t in agent.critic.params.tensors_mut() {
        for v in &mut t.data {
            *v += 0.05 * rng.sample::<f64, _>(StandardNormal);
        }
    }
    Ok(agent)
}

fn drq_config() -> RecipeConfig {
    RecipeConfig::preset(Recipe::Drq, AugPool::All, AugParams::default())
}

fn critic_loss_plain_trace() -> Result<Measured> {
    let agent = perturbed_agent(61)?;
    let batch = one_transition_batch(62);
    let mut rngs = UpdateRngs::new(63);
    let eps = draw_noise(&mut rngs.policy.clone(), 1, 2);
    let mut g = Grads::zeros(&agent);
    let got = critic_update(&agent, &batch, &mut rngs, &drq_config(), &DistractorBank::procedural(1, 15, 15, 0), &mut g)?;
    let f = features(&agent, &batch.obs)?;
    let f_next = features(&agent, &batch.next_obs)?;
    let y = scalar_target(&agent, &f_next[0], &eps[0], 0.7, 0.99);
    let want = scalar_critic_loss(&agent.critic.params, &f, &[0.3, -0.6], y);
    Ok(Measured::new((got - want).abs(), format!("loss {want:.6}")))
}

fn critic_loss_sada_trace() -> Result<Measured> {
    let agent = perturbed_agent(71)?;
    let batch = one_transition_batch(72);
    let cfg = RecipeConfig::preset(Recipe::Sada, AugPool::All, AugParams::default());
    let bank = DistractorBank::procedural(2, 15, 15, 1);
    let mut rngs = UpdateRngs::new(73);
    let eps = draw_noise(&mut rngs.policy.clone(), 1, 2);
    let aug = rngs.strong_critic.clone().augment(&batch.obs, &cfg.strong_pool, &bank)?;
    let q_tgt = critic_targets(&agent, &batch.next_obs, &batch.rewards, &batch.discounts, &cfg, &mut rngs.policy)?;
    let mut g = Grads::zeros(&agent);
    let got = critic_loss_sada(&agent, &batch, &q_tgt, &mut rngs.strong_critic, &cfg, &bank, &mut g)?;
    let f_next = features(&agent, &batch.next_obs)?;
    let y = scalar_target(&agent, &f_next[0], &eps[0], 0.7, 0.99);
    let feats = features(&agent, &[batch.obs[0].clone(), aug[0].clone()])?;
    let want = scalar_critic_loss(&agent.critic.params, &feats, &[0.3, -0.6], y);
    Ok(Measured::new(
        ((got - want).abs()).max((q_tgt[0] - y).abs()),
        format!("loss {want:.6}"),
    ))
}

fn critic_loss_fd() -> Result<Measured> {
    let mut agent = perturbed_agent(81)?;
    let batch = one_transition_batch(82);
    let mut rngs = UpdateRngs::new(83);
    let eps = draw_noise(&mut rngs.policy.clone(), 1, 2);
    let mut g = Grads::zeros(&agent);
    critic_update(&agent, &batch, &mut rngs, &drq_config(), &DistractorBank::procedural(1, 15, 15, 0), &mut g)?;
    let f = features(&agent, &batch.obs)?;
    let f_next = features(&agent, &batch.next_obs)?;
    let y = scalar_target(&agent, &f_next[0], &eps[0], 0.7, 0.99);
    let mut worst = 0.0f64;
    for (name, i) in [("q1.fc1.weight", 3usize), ("q2.fc2.weight", 10), ("q1.fc3.bias", 0), ("q2.fc1.bias", 2)] {
        let base = tensor(&agent.critic.params, name)[i];
        let h = 1e-6;
        set_tensor(&mut agent.critic.params, name, i, base + h);
        let up = scalar_critic_loss(&agent.critic.params, &f, &[0.3, -0.6], y);
        set_tensor(&mut agent.critic.params, name, i, base - h);
        let down = scalar_critic_loss(&agent.critic.params, &f, &[0.3, -0.6], y);
        set_tensor(&mut agent.critic.params, name, i, base);
        worst = worst.max(rel_err(tensor(&g.critic, name)[i], (up - down) / (2.0 * h)));
    }
    Ok(Measured::new(worst, "4 parameters"))
}

fn scalar_actor_loss(agent: &Agent<f64>, p: &Params<f64>, fp: &[Vec<f64>], fm: &[Vec<f64>], eps: &[Vec<f64>]) -> f64 {
    let alpha = agent.temperature.alpha();
    fp.iter()
        .zip(fm)
        .zip(eps)
        .map(|((fp, fm), e)| {
            let (a, lp) = policy(agent, p, fp, e);
            alpha * lp - min_q(&agent.critic.params, fm, &a)
        })
        .sum::<f64>()
        / fp.len() as f64
}

fn actor_loss_fd() -> Result<Measured> {
    let mut agent = perturbed_agent(91)?;
    let obs = vec![seeded_obs(3, 15, 15, 92), seeded_obs(3, 15, 15, 93)];
    let mut rng = UpdateRngs::new(94).policy;
    let eps = draw_noise(&mut rng.clone(), 2, 2);
    let mut g = Grads::zeros(&agent);
    actor_loss_plain(&agent, &obs, &mut rng, &mut g)?;
    let f = features(&agent, &obs)?;
    let mut worst = 0.0f64;
    for (name, i) in [("fc1.weight", 5usize), ("fc2.weight", 9), ("fc3.weight", 2), ("fc3.bias", 3)] {
        let base = tensor(&agent.actor.params, name)[i];
        let h = 1e-6;
        set_tensor(&mut agent.actor.params, name, i, base + h);
        let up = scalar_actor_loss(&agent, &agent.actor.params, &f, &f, &eps);
        set_tensor(&mut agent.actor.params, name, i, base - h);
        let down = scalar_actor_loss(&agent, &agent.actor.params, &f, &f, &eps);
        set_tensor(&mut agent.actor.params, name, i, base);
        worst = worst.max(rel_err(tensor(&g.actor, name)[i], (up - down) / (2.0 * h)));
    }
    Ok(Measured::new(worst, "4 parameters"))
}

fn actor_loss_sada_trace() -> Result<Measured> {
    let agent = perturbed_agent(101)?;
    let o = seeded_obs(3, 15, 15, 102);
    let aug = seeded_obs(3, 15, 15, 103);
    let p = PackedBatch::pack(std::slice::from_ref(&o), vec![aug.clone()], Stream::Augmented)?;
    let m = PackedBatch::pack(std::slice::from_ref(&o), vec![o.clone()], Stream::Clean)?;
    let mut rng = UpdateRngs::new(104).policy;
    let eps = draw_noise(&mut rng.clone(), 2, 2);
    let mut g = Grads::zeros(&agent);
    let got = actor_loss_sada(&agent, &p, &m, &mut rng, &mut g)?;
    let fp = features(&agent, &[o.clone(), aug])?;
    let fm = features(&agent, &[o.clone(), o])?;
    let want = scalar_actor_loss(&agent, &agent.actor.params, &fp, &fm, &eps);
    Ok(Measured::new((got.loss - want).abs(), format!("loss {want:.6}")))
}

fn temperature_gradient() -> Result<Measured> {
    let agent = tiny_agent(2, 111)?;
    let log_probs = Array1::from(vec![-3.5, -4.0, -2.5]);
    let mut g = Grads::zeros(&agent);
    temperature_loss(&log_probs, &agent, &mut g);
    let got = g.temperature.get(agent.temperature.log_alpha_id())[0];
    let alpha = agent.temperature.alpha();
    let h_bar = agent.temperature.target_entropy;
    let d_alpha = log_probs.iter().map(|lp| -lp - h_bar).sum::<f64>() / 3.0;
    // dL/dlog_alpha = alpha * dL/dalpha, positive here: descent lowers alpha.
    let want = alpha * d_alpha;
    let sign_ok = want > 0.0 && got > 0.0;
    let dev = if sign_ok { (got - want).abs() } else { f64::INFINITY };
    Ok(Measured::new(dev, format!("dL/dalpha {d_alpha:.3}")))
}

fn greedy_max_grid() -> Result<Measured> {
    let mut agent = tiny_agent(1, 121)?;
    let mut rng = ChaCha8Rng::seed_from_u64(122);
    for t in agent.critic.params.tensors_mut() {
        for v in &mut t.data {
            *v = rng.random_range(-1.0..1.0);
        }
    }
    agent.critic_target = crate::networks::TargetCritic::from_online(&agent.critic);
    let feats = Array2::from_shape_fn((3, 4), |(i, j)| ((i * 4 + j) as f64 * 0.37).sin());
    let grid = 21;
    let got = greedy_max_value(&agent, &feats, grid)?;
    let cfg = RecipeConfig {
        target_form: TargetForm::GreedyMax,
        greedy_grid: grid,
        ..drq_config()
    };
    let mut worst = 0.0f64;
    let mut fine_gap = 0.0f64;
    for i in 0..3 {
        let f: Vec<f64> = feats.row(i).to_vec();
        let best = (0..grid)
            .map(|j| min_q(agent.critic_target.params(), &f, &[-1.0 + 2.0 * j as f64 / (grid - 1) as f64]))
            .fold(f64::NEG_INFINITY, f64::max);
        let fine = (0..=2000)
            .map(|j| min_q(agent.critic_target.params(), &f, &[-1.0 + j as f64 / 1000.0]))
            .fold(f64::NEG_INFINITY, f64::max);
        worst = worst.max((got[i] - best).abs());
        fine_gap = fine_gap.max(fine - got[i]);
    }
    cfg.validate()?;
    Ok(Measured::new(worst, format!("fine-grid gap {fine_gap:.3e}")))
}

// ---------------------------------------------------------------- sampling

/// Upper tail of the chi-square distribution via the series for the lower
/// regularized gamma function.
fn chi_square_sf(x: f64, dof: f64) -> f64 {
    let a = dof / 2.0;
    let z = x / 2.0;
    let mut term = 1.0 / a;
    let mut sum = term;
    let mut n = 1.0;
    while term > sum * 1e-17 {
        term *= z / (a + n);
        sum += term;
        n += 1.0;
    }
    let lower = (a * z.ln() - z - ln_gamma_stirling(a)).exp() * sum;
    1.0 - lower
}

fn replay_uniformity() -> Result<Measured> {
    let mut buf = ReplayBuffer::new(10)?;
    for i in 0..10u8 {
        let obs = RawObservation {
            frames: 1,
            height: 2,
            width: 2,
            data: vec![i; 12],
        };
        let next = RawObservation {
            data: vec![i.wrapping_add(100); 12],
            ..obs.clone()
        };
        buf.push(Transition {
            obs,
            action: vec![0.0],
            reward: 0.0,
            next_obs: next,
            discount: 0.99,
        })?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(131);
    let mut counts = [0f64; 10];
    for _ in 0..10_000 {
        for i in buf.sample_indices(10, &mut rng)? {
            counts[i] += 1.0;
        }
    }
    let e = 10_000.0;
    let chi2: f64 = counts.iter().map(|c| (c - e) * (c - e) / e).sum();
    let p = chi_square_sf(chi2, 9.0);
    Ok(Measured::new((0.01 - p).max(0.0), format!("chi2 {chi2:.3}, p {p:.4}")))
}

/// Kolmogorov distribution tail `P(K > x)`.
fn kolmogorov_sf(x: f64) -> f64 {
    let mut s = 0.0;
    for k in 1..200 {
        let k = k as f64;
        s += 2.0 * (-1f64).powf(k - 1.0) * (-2.0 * k * k * x * x).exp();
    }
    s.clamp(0.0, 1.0)
}

fn exploration_uniformity() -> Result<Measured> {
    let cfg = TrainConfig {
        image_size: 15,
        features_dim: 4,
        hidden_dim: 4,
        num_filters: 2,
        num_conv_layers: 2,
        distractors: 1,
        batch_size: 4,
        max_shift_px: 4,
        pad_px: 2,
        seed: 141,
        ..TrainConfig::default()
    };
    let mut trainer = Trainer::new(cfg, None)?;
    let mut xs = Vec::with_capacity(10_000);
    while xs.len() < 10_000 {
        xs.extend(trainer.select_action()?.into_iter().map(f64::from));
    }
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let d = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let cdf = ((x + 1.0) / 2.0).clamp(0.0, 1.0);
            (cdf - i as f64 / n).abs().max(((i + 1) as f64 / n - cdf).abs())
        })
        .fold(0.0, f64::max);
    let p = kolmogorov_sf(n.sqrt() * d);
    Ok(Measured::new((0.01 - p).max(0.0), format!("D {d:.4}, p {p:.4}")))
}

// ---------------------------------------------------------------- env, eval

fn optimal_point_goal() -> Result<Measured> {
    let cfg = EnvConfig {
        image_size: 16,
        episode_length: 60,
        ..EnvConfig::default()
    };
    let (v, repeat, k) = (cfg.max_speed, cfg.action_repeat, cfg.reward_sharpness);
    let mut env = PointGoalEnv::new(cfg.clone())?;
    let mut worst = 0.0f64;
    for seed in 0..5 {
        env.reset(seed);
        let st = env.state().clone();
        let dx = (st.goal_pos[0] - st.agent_pos[0]).abs();
        let dy = (st.goal_pos[1] - st.agent_pos[1]).abs();
        let mut best = 0.0;
        for step in 0..cfg.episode_length {
            let mut r = 0.0;
            for j in 1..=repeat {
                let moved = v * (step * repeat + j) as f64;
                let d = ((dx - moved).max(0.0).powi(2) + (dy - moved).max(0.0).powi(2)).sqrt();
                r += (-k * d).exp();
            }
            best += r / repeat as f64;
        }
        let mut got = 0.0;
        while !env.is_done() {
            let s = env.state();
            let a: Vec<f32> = (0..2)
                .map(|d| (((s.goal_pos[d] - s.agent_pos[d]) / (v * repeat as f64)).clamp(-1.0, 1.0)) as f32)
                .collect();
            got += env.step(&a)?.reward;
        }
        worst = worst.max((best - got).abs() / best);
    }
    Ok(Measured::new(worst, "5 episodes"))
}

fn geometric_variance_positive() -> Result<Measured> {
    let env = EnvConfig {
        image_size: 15,
        episode_length: 10,
        ..EnvConfig::default()
    };
    let agent = tiny_agent(2, 151)?;
    let obs = collect_observations(&env, DistributionSpec::train(), 8, 152)?;
    let params = AugParams {
        max_shift_px: 4,
        ..AugParams::default()
    };
    let specs = AugPool::Geometric.specs(params);
    let bank = DistractorBank::procedural(1, 15, 15, 0);
    let report = action_variance(&agent, &obs, &specs, &bank, 153, 4)?;
    let bad = report.entries.iter().filter(|e| !(e.variance > 0.0)).count();
    let vals: Vec<String> = report.entries.iter().map(|e| format!("{}={:.2e}", e.family, e.variance)).collect();
    Ok(Measured::new(bad as f64, vals.join(" ")))
}

// ---------------------------------------------------------------- statistics

/// `ln Gamma` by upward recurrence to `z >= 15` and the Stirling series.
fn ln_gamma_stirling(z: f64) -> f64 {
    let mut shift = 0.0;
    let mut z = z;
    while z < 15.0 {
        shift += z.ln();
        z += 1.0;
    }
    let z2 = z * z;
    let series = 1.0 / (12.0 * z) - 1.0 / (360.0 * z * z2) + 1.0 / (1260.0 * z * z2 * z2)
        - 1.0 / (1680.0 * z * z2 * z2 * z2)
        + 1.0 / (1188.0 * z * z2 * z2 * z2 * z2);
    (z - 0.5) * z.ln() - z + 0.5 * (2.0 * std::f64::consts::PI).ln() + series - shift
}

/// Regularized incomplete beta by the hypergeometric power series, using the
/// reflection `I_x(a, b) = 1 - I_{1-x}(b, a)` to keep `x <= 1/2`.
fn inc_beta_series(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    if x > 0.5 {
        return 1.0 - inc_beta_series(b, a, 1.0 - x);
    }
    let ln_beta = ln_gamma_stirling(a) + ln_gamma_stirling(b) - ln_gamma_stirling(a + b);
    let front = (a * x.ln() + b * (1.0 - x).ln() - ln_beta).exp() / a;
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    let mut n = 0.0;
    while term.abs() > 1e-18 * sum.abs() {
        term *= (a + b + n) / (a + 1.0 + n) * x;
        sum += term;
        n += 1.0;
    }
    front * sum
}

fn t_cdf(t: f64, dof: f64) -> f64 {
    let x = dof / (dof + t * t);
    let tail = 0.5 * inc_beta_series(dof / 2.0, 0.5, x);
    if t >= 0.0 {
        1.0 - tail
    } else {
        tail
    }
}

fn student_t_cdf_pairs() -> Result<Measured> {
    let mut worst = 0.0f64;
    for k in 0..50 {
        let dof = 1.0 + 99.0 * (k as f64 / 49.0).powf(1.5);
        let t = -6.0 + 12.0 * ((k * 37) % 50) as f64 / 49.0;
        worst = worst.max((stats::student_t_cdf(t, dof) - t_cdf(t, dof)).abs());
    }
    Ok(Measured::new(worst, "50 pairs"))
}

fn welch_textbook() -> Result<Measured> {
    let a = [0.81, 0.92, 0.77, 0.95, 0.88, 0.70];
    let b = [0.62, 0.75, 0.58, 0.71];
    let moments = |v: &[f64]| {
        let n = v.len() as f64;
        let m = v.iter().sum::<f64>() / n;
        let s2 = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
        (n, m, s2)
    };
    let (na, ma, sa) = moments(&a);
    let (nb, mb, sb) = moments(&b);
    let t = (ma - mb) / (sa / na + sb / nb).sqrt();
    let dof = (sa / na + sb / nb).powi(2) / ((sa / na).powi(2) / (na - 1.0) + (sb / nb).powi(2) / (nb - 1.0));
    let p = 1.0 - t_cdf(t, dof);
    let got = stats::welch_one_tailed(&SampleSet::new("a", a.to_vec())?, &SampleSet::new("b", b.to_vec())?)?;
    let dev = (got.t - t).abs().max((got.dof - dof).abs()).max((got.p - p).abs());
    Ok(Measured::new(dev, format!("t {t:.6} dof {dof:.6} p {p:.3e}")))
}

fn holm_case(ps: &[f64], want: &[bool]) -> Result<Measured> {
    let got = stats::holm_bonferroni(ps, 0.05)?;
    let wrong = got.iter().zip(want).filter(|(g, w)| g.reject != **w).count();
    let shown: Vec<bool> = got.iter().map(|g| g.reject).collect();
    Ok(Measured::new(wrong as f64, format!("{shown:?}")))
}

fn holm_all_reject() -> Result<Measured> {
    // 0.01 < 0.05/3, 0.02 < 0.05/2, 0.04 < 0.05/1.
    holm_case(&[0.01, 0.02, 0.04], &[true, true, true])
}

fn holm_stops_early() -> Result<Measured> {
    // 0.02 > 0.05/3 stops the procedure at the first step.
    holm_case(&[0.02, 0.5, 0.6], &[false, false, false])
}

fn holm_adjusted_alphas() -> Result<Measured> {
    let got = stats::holm_bonferroni(&[0.3, 0.001, 0.04], 0.05)?;
    let mut by_p: Vec<_> = got.iter().collect();
    by_p.sort_by(|a, b| a.p.total_cmp(&b.p));
    let want = [0.05 / 3.0, 0.025, 0.05];
    let dev = by_p
        .iter()
        .zip(want)
        .map(|(g, w)| (g.adjusted_alpha - w).abs())
        .fold(0.0, f64::max);
    let shown: Vec<String> = by_p.iter().map(|g| format!("{:.4}", g.adjusted_alpha)).collect();
    Ok(Measured::new(dev, shown.join(" ")))
}

fn ci_three_points() -> Result<Measured> {
    // mean 2, sample sd 1, sem 1/sqrt(3).
    let (lo, hi) = stats::ci95(&[1.0, 2.0, 3.0]);
    let h = 1.96 / 3f64.sqrt();
    Ok(Measured::new((lo - (2.0 - h)).abs().max((hi - (2.0 + h)).abs()), format!("({lo:.6}, {hi:.6})")))
}

/// Chi-square survival, exposed for statistical checks elsewhere.
pub fn chi_square_p(stat: f64, dof: f64) -> f64 {
    chi_square_sf(stat, dof)
}

/// Kolmogorov-Smirnov p-value for statistic `d` over `n` samples.
pub fn ks_p(d: f64, n: usize) -> f64 {
    kolmogorov_sf((n as f64).sqrt() * d)
}

/// Unit check that an oracle failure is reported, not swallowed.
pub fn failing_case() -> OracleCase {
    fn fail() -> Result<Measured> {
        Err(Error::Contract("intentional".into()))
    }
    case!("intentional_failure", "none", "error", 0.0, fail)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stirling_matches_known_values() {
        assert!((ln_gamma_stirling(1.0)).abs() < 1e-14);
        assert!((ln_gamma_stirling(0.5) - 0.5 * std::f64::consts::PI.ln()).abs() < 1e-14);
        assert!((ln_gamma_stirling(10.0) - 362_880f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn series_t_cdf_closed_forms() {
        // dof = 1 is Cauchy, dof = 2 has a closed form.
        for t in [-3.0, -0.5, 0.0, 0.7, 4.0] {
            let cauchy = 0.5 + f64::atan(t) / std::f64::consts::PI;
            assert!((t_cdf(t, 1.0) - cauchy).abs() < 1e-13, "{t}");
            let two = 0.5 + t / (2.0 * (2.0 + t * t).sqrt());
            assert!((t_cdf(t, 2.0) - two).abs() < 1e-13, "{t}");
        }
    }

    #[test]
    fn chi_square_tail_known_value() {
        // Critical value at p = 0.01 for 9 degrees of freedom.
        assert!((chi_square_sf(21.665994, 9.0) - 0.01).abs() < 1e-6);
    }

    #[test]
    fn errors_are_failures() {
        let out = failing_case().run();
        assert!(!out.passed);
        assert!(out.detail.contains("intentional"));
    }

    #[test]
    fn filter_selects_by_name() {
        let r = run_oracle_suite("holm");
        assert_eq!(r.cases.len(), 3);
        assert!(r.passed(), "{r}");
        assert!(run_oracle_suite("no-such-case").cases.is_empty());
    }
}
