//! The outer training loop: collection, seeding and exploration phases,
//! scheduled updates, target tracking, periodic evaluation, metric files and
//! checkpoints.

use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::augment::{apply_weak, DistractorBank, Image};
use crate::checkpoint::{self, Archive};
use crate::config::TrainConfig;
use crate::envs::{DistributionSpec, PointGoalEnv, ACTION_DIM};
use crate::evalmetrics::evaluate;
use crate::networks::{ema_update, Agent};
use crate::recipes::{
    actor_update_variant, critic_update, step_actor, step_critic, step_temperature, temperature_loss, Batch, Grads,
    RecipeConfig, UpdateRngs,
};
use crate::replay::{ReplayBuffer, Transition};
use crate::rng::{mix, stream, streams, StreamRng};
use crate::{Error, Result};

pub const TRAIN_HEADER: &str = "step,episode,episode_reward,critic_loss,actor_loss,alpha,fps";
pub const EVAL_HEADER: &str = "step,distribution,mean_reward,std_reward,success_rate";

/// One row of `train.csv`, written at the end of every episode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub step: u64,
    pub episode: u64,
    pub episode_reward: f64,
    pub critic_loss: Option<f64>,
    pub actor_loss: Option<f64>,
    pub alpha: f64,
    pub fps: Option<f64>,
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl MetricRow {
    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.step,
            self.episode,
            self.episode_reward,
            opt(self.critic_loss),
            opt(self.actor_loss),
            self.alpha,
            opt(self.fps)
        )
    }
}

/// One row of `eval.csv`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalRow {
    pub step: u64,
    pub distribution: String,
    pub mean_reward: f64,
    pub std_reward: f64,
    pub success_rate: f64,
}

impl EvalRow {
    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.step, self.distribution, self.mean_reward, self.std_reward, self.success_rate
        )
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct LoopState {
    step: u64,
    episode: u64,
    updates: u64,
    episode_reward: f64,
    critic_loss: Option<f64>,
    actor_loss: Option<f64>,
    env: PointGoalEnv,
    rngs: UpdateRngs,
    collect_rng: StreamRng,
    replay_rng: StreamRng,
    config: String,
}

/// Counts of a finished [`Trainer::run`].
#[derive(Clone, Debug, PartialEq)]
pub struct RunSummary {
    pub steps: u64,
    pub episodes: u64,
    pub updates: u64,
    pub rows: Vec<MetricRow>,
    pub eval_rows: Vec<EvalRow>,
}

/// Diagnostic record written when a loss becomes non-finite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AbortRecord {
    pub step: u64,
    pub loss: String,
    pub rng_state: String,
}

pub struct Trainer {
    pub cfg: TrainConfig,
    pub recipe: RecipeConfig,
    pub agent: Agent<f32>,
    pub env: PointGoalEnv,
    pub buffer: ReplayBuffer,
    pub bank: DistractorBank,
    pub rngs: UpdateRngs,
    collect_rng: StreamRng,
    replay_rng: StreamRng,
    step: u64,
    episode: u64,
    updates: u64,
    episode_reward: f64,
    critic_loss: Option<f64>,
    actor_loss: Option<f64>,
    out: Option<PathBuf>,
    clock: Instant,
    clock_step: u64,
}

fn train_episode_seed(seed: u64, episode: u64) -> u64 {
    mix(seed ^ 0x7a1d_0000, episode)
}

fn append_line(path: &Path, header: &str, line: &str) -> Result<()> {
    let fresh = !path.exists();
    let mut f = OpenOptions::new().create(true).append(true).open(path)?;
    if fresh {
        writeln!(f, "{header}")?;
    }
    writeln!(f, "{line}")?;
    Ok(())
}

fn put_bank(a: &mut Archive, bank: &DistractorBank) -> Result<()> {
    let (h, w) = bank.size();
    let mut bytes = Vec::new();
    for i in 0..bank.len() {
        for v in &bank.get(i).expect("index in range").data {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
    }
    a.put_bytes("bank.images", vec![bytes.len()], bytes);
    a.put_state("bank", &(bank.len(), h, w))
}

fn load_bank(a: &Archive) -> Result<DistractorBank> {
    let (n, h, w): (usize, usize, usize) = a.get_state("bank")?;
    let bytes = a.get_bytes("bank.images")?;
    let per = 3 * h * w;
    if bytes.len() != n * per * 4 {
        return Err(Error::Contract("distractor bank size mismatch".into()));
    }
    let floats: Vec<f32> = bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")))
        .collect();
    let images = floats
        .chunks(per)
        .map(|c| Image::new(h, w, c.to_vec()))
        .collect::<Result<Vec<_>>>()?;
    DistractorBank::from_images(images)
}

impl Trainer {
    /// A fresh run. Without a `bank`, a procedural distractor bank is built
    /// from the run seed.
    pub fn new(cfg: TrainConfig, bank: Option<DistractorBank>) -> Result<Self> {
        cfg.validate()?;
        let recipe = cfg.recipe_config();
        recipe.validate()?;
        let bank = match bank {
            Some(b) => {
                if b.size() != (cfg.image_size, cfg.image_size) {
                    return Err(Error::validation("distractors", "image size differs from image_size"));
                }
                b
            }
            None => DistractorBank::procedural(cfg.distractors, cfg.image_size, cfg.image_size, mix(cfg.seed, 77)),
        };
        let agent = Agent::new(cfg.net_config(), &mut stream(cfg.seed, streams::INIT))?;
        let mut env = PointGoalEnv::new(cfg.env_config())?;
        env.reset(train_episode_seed(cfg.seed, 0));
        Ok(Self {
            recipe,
            agent,
            env,
            buffer: ReplayBuffer::new(cfg.capacity)?,
            bank,
            rngs: UpdateRngs::new(cfg.seed),
            collect_rng: stream(cfg.seed, streams::EXPLORATION),
            replay_rng: stream(cfg.seed, streams::REPLAY),
            step: 0,
            episode: 0,
            updates: 0,
            episode_reward: 0.0,
            critic_loss: None,
            actor_loss: None,
            out: None,
            clock: Instant::now(),
            clock_step: 0,
            cfg,
        })
    }

    /// Directs metric files and checkpoints to `dir`.
    pub fn with_output(mut self, dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir.join("checkpoints"))?;
        self.out = Some(dir.to_path_buf());
        Ok(self)
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    pub fn episode(&self) -> u64 {
        self.episode
    }

    pub fn updates(&self) -> u64 {
        self.updates
    }

    /// Uniform action during exploration, a policy sample afterwards.
    pub fn select_action(&mut self) -> Result<Vec<f32>> {
        if self.step < self.cfg.exploration_steps {
            Ok((0..ACTION_DIM).map(|_| self.collect_rng.random_range(-1.0f32..=1.0)).collect())
        } else {
            let obs = self.env.observation().to_unit();
            self.agent.act_sample(&obs, &mut self.collect_rng)
        }
    }

    /// Takes one environment step and returns the transition and whether the
    /// episode ended.
    pub fn collect_step(&mut self) -> Result<(Transition, bool)> {
        let obs = self.env.observation();
        let action = self.select_action()?;
        let r = self.env.step(&action)?;
        let t = Transition {
            obs,
            action,
            reward: r.reward,
            next_obs: r.observation,
            discount: self.cfg.gamma,
        };
        Ok((t, r.done))
    }

    fn non_finite(&self, loss: &str) -> Error {
        let rng_state = serde_json::to_string(&self.rngs).unwrap_or_default();
        let rec = AbortRecord {
            step: self.step,
            loss: loss.to_string(),
            rng_state: rng_state.clone(),
        };
        if let Some(dir) = &self.out {
            if let Ok(s) = serde_json::to_string_pretty(&rec) {
                let _ = std::fs::write(dir.join("abort.json"), s);
            }
        }
        Error::NonFinite {
            step: self.step,
            loss: loss.to_string(),
            rng_state,
        }
    }

    /// Critic, then actor, then temperature, then the target average. Critic
    /// and actor draw separate minibatches.
    pub fn update(&mut self) -> Result<()> {
        let n = self.cfg.batch_size;
        let pad = self.cfg.pad_px;
        let ts = self.buffer.sample(n, &mut self.replay_rng)?;
        let batch = Batch::<f32>::from_transitions(&ts, pad, &mut self.rngs.weak)?;
        let mut g = Grads::zeros(&self.agent);
        let lc = critic_update(&self.agent, &batch, &mut self.rngs, &self.recipe, &self.bank, &mut g)?;
        if !lc.is_finite() {
            return Err(self.non_finite("critic_loss"));
        }
        step_critic(&mut self.agent, &g);

        let ts = self.buffer.sample(n, &mut self.replay_rng)?;
        let obs = ts
            .iter()
            .map(|t| apply_weak(&t.obs.to_unit(), pad, &mut self.rngs.weak))
            .collect::<Result<Vec<_>>>()?;
        let mut g = Grads::zeros(&self.agent);
        let out = actor_update_variant(&self.agent, &obs, &mut self.rngs, &self.recipe, &self.bank, &mut g)?;
        if !out.loss.is_finite() {
            return Err(self.non_finite("actor_loss"));
        }
        step_actor(&mut self.agent, &g);
        let la = temperature_loss(&out.log_prob, &self.agent, &mut g);
        if !la.is_finite() {
            return Err(self.non_finite("temperature_loss"));
        }
        step_temperature(&mut self.agent, &g);
        ema_update(&mut self.agent.critic_target, &self.agent.critic, self.cfg.tau)?;
        self.updates += 1;
        self.critic_loss = Some(f64::from(lc));
        self.actor_loss = Some(f64::from(out.loss));
        Ok(())
    }

    fn checkpoint_due(&self) -> bool {
        self.cfg.checkpoint_interval > 0 && self.step % self.cfg.checkpoint_interval == 0
    }

    /// One environment step plus any scheduled update, evaluation or
    /// checkpoint. Returns the metric row if an episode ended.
    pub fn tick(&mut self, eval_rows: &mut Vec<EvalRow>) -> Result<Option<MetricRow>> {
        let (t, done) = self.collect_step()?;
        self.episode_reward += t.reward;
        self.buffer.push(t)?;
        self.step += 1;
        if self.step > self.cfg.seed_frames && (self.step - self.cfg.seed_frames) % self.cfg.update_frequency == 0 {
            self.update()?;
        }
        let mut row = None;
        if done {
            let fps = self.cfg.timing.then(|| {
                let secs = self.clock.elapsed().as_secs_f64().max(1e-9);
                (self.step - self.clock_step) as f64 / secs
            });
            let r = MetricRow {
                step: self.step,
                episode: self.episode,
                episode_reward: self.episode_reward,
                critic_loss: self.critic_loss,
                actor_loss: self.actor_loss,
                alpha: f64::from(self.agent.temperature.alpha()),
                fps,
            };
            if let Some(dir) = &self.out {
                append_line(&dir.join("train.csv"), TRAIN_HEADER, &r.to_csv())?;
            }
            self.clock = Instant::now();
            self.clock_step = self.step;
            self.episode += 1;
            self.episode_reward = 0.0;
            self.env.reset(train_episode_seed(self.cfg.seed, self.episode));
            row = Some(r);
        }
        if self.cfg.eval_interval > 0 && self.step % self.cfg.eval_interval == 0 {
            let s = evaluate(
                &self.agent,
                &self.cfg.env_config(),
                DistributionSpec::train(),
                self.cfg.eval_episodes,
                mix(self.cfg.seed, self.step),
            )?;
            let e = EvalRow {
                step: self.step,
                distribution: s.distribution,
                mean_reward: s.mean_reward,
                std_reward: s.std_reward,
                success_rate: s.success_rate.unwrap_or(0.0),
            };
            if let Some(dir) = &self.out {
                append_line(&dir.join("eval.csv"), EVAL_HEADER, &e.to_csv())?;
            }
            eval_rows.push(e);
        }
        if self.checkpoint_due() {
            self.write_checkpoints()?;
        }
        Ok(row)
    }

    /// Runs until `cfg.total_steps`. A fresh run with an output directory
    /// first writes the step-0 checkpoint.
    pub fn run(&mut self) -> Result<RunSummary> {
        self.run_with(|_| {})
    }

    /// [`Trainer::run`], calling `on_row` for every finished episode.
    pub fn run_with(&mut self, mut on_row: impl FnMut(&MetricRow)) -> Result<RunSummary> {
        let mut rows = Vec::new();
        let mut eval_rows = Vec::new();
        if self.step == 0 && self.out.is_some() {
            self.write_checkpoints()?;
        }
        while self.step < self.cfg.total_steps {
            if let Some(r) = self.tick(&mut eval_rows)? {
                on_row(&r);
                rows.push(r);
            }
        }
        if self.out.is_some() && !self.checkpoint_due() {
            self.write_checkpoints()?;
        }
        Ok(RunSummary {
            steps: self.step,
            episodes: self.episode,
            updates: self.updates,
            rows,
            eval_rows,
        })
    }

    fn write_checkpoints(&self) -> Result<()> {
        let Some(dir) = &self.out else { return Ok(()) };
        let ckpt = dir.join("checkpoints");
        self.to_archive(false)?
            .save(&ckpt.join(format!("step_{:08}.safetensors", self.step)))?;
        self.to_archive(self.cfg.checkpoint_replay)?
            .save(&ckpt.join("latest.safetensors"))
    }

    /// Agent and loop state, optionally with the replay buffer.
    pub fn to_archive(&self, with_replay: bool) -> Result<Archive> {
        let mut a = Archive::new();
        checkpoint::put_agent(&mut a, &self.agent)?;
        put_bank(&mut a, &self.bank)?;
        a.put_state(
            "loop",
            &LoopState {
                step: self.step,
                episode: self.episode,
                updates: self.updates,
                episode_reward: self.episode_reward,
                critic_loss: self.critic_loss,
                actor_loss: self.actor_loss,
                env: self.env.clone(),
                rngs: self.rngs.clone(),
                collect_rng: self.collect_rng.clone(),
                replay_rng: self.replay_rng.clone(),
                config: self.cfg.serialize(),
            },
        )?;
        a.put_state("step", &self.step)?;
        if with_replay {
            checkpoint::put_replay(&mut a, &self.buffer)?;
        }
        Ok(a)
    }

    pub fn save_checkpoint(&self, path: &Path) -> Result<()> {
        self.to_archive(true)?.save(path)
    }

    /// Continues a run from an archive that includes its replay buffer.
    /// `overrides` may change settings such as `total_steps`.
    pub fn resume<'a>(archive: &Archive, overrides: impl IntoIterator<Item = (&'a str, String)>) -> Result<Self> {
        if !archive.has_state("replay") {
            return Err(Error::Contract("checkpoint does not include the replay buffer".into()));
        }
        let st: LoopState = archive.get_state("loop")?;
        let cfg = TrainConfig::parse(&st.config)?.with_overrides(overrides)?;
        let recipe = cfg.recipe_config();
        Ok(Self {
            recipe,
            agent: checkpoint::load_agent(archive)?,
            env: st.env,
            buffer: checkpoint::load_replay(archive)?,
            bank: load_bank(archive)?,
            rngs: st.rngs,
            collect_rng: st.collect_rng,
            replay_rng: st.replay_rng,
            step: st.step,
            episode: st.episode,
            updates: st.updates,
            episode_reward: st.episode_reward,
            critic_loss: st.critic_loss,
            actor_loss: st.actor_loss,
            out: None,
            clock: Instant::now(),
            clock_step: st.step,
            cfg,
        })
    }
}

/// Agent stored in any checkpoint written by a [`Trainer`], with the run
/// configuration when present.
pub fn load_agent_checkpoint(path: &Path) -> Result<(Agent<f32>, Option<TrainConfig>, u64)> {
    let a = Archive::load(path)?;
    let agent = checkpoint::load_agent(&a)?;
    let cfg = match a.get_state::<LoopState>("loop") {
        Ok(st) => Some(TrainConfig::parse(&st.config)?),
        Err(_) => None,
    };
    let step = a.get_state("step").unwrap_or(0);
    Ok((agent, cfg, step))
}

/// Reads a metrics file back into rows.
pub fn read_train_csv(path: &Path) -> Result<Vec<MetricRow>> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == TRAIN_HEADER => {}
        _ => return Err(Error::validation(path.display().to_string(), "missing train.csv header")),
    }
    let bad = |n: usize, what: &str| Error::validation(path.display().to_string(), format!("line {}: bad {what}", n + 2));
    let num = |s: &str| -> Option<Option<f64>> {
        if s.is_empty() {
            Some(None)
        } else {
            s.parse().ok().map(Some)
        }
    };
    lines
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(n, l)| {
            let c: Vec<&str> = l.split(',').collect();
            if c.len() != 7 {
                return Err(bad(n, "column count"));
            }
            Ok(MetricRow {
                step: c[0].parse().map_err(|_| bad(n, "step"))?,
                episode: c[1].parse().map_err(|_| bad(n, "episode"))?,
                episode_reward: c[2].parse().map_err(|_| bad(n, "episode_reward"))?,
                critic_loss: num(c[3]).ok_or_else(|| bad(n, "critic_loss"))?,
                actor_loss: num(c[4]).ok_or_else(|| bad(n, "actor_loss"))?,
                alpha: c[5].parse().map_err(|_| bad(n, "alpha"))?,
                fps: num(c[6]).ok_or_else(|| bad(n, "fps"))?,
            })
        })
        .collect()
}

/// Creates `path` and writes a header line; used by tools that emit
/// metric files outside the trainer.
pub fn create_with_header(path: &Path, header: &str) -> Result<File> {
    let mut f = File::create(path)?;
    writeln!(f, "{header}")?;
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::recipes::Recipe;

    /// A configuration small enough to train for a few hundred steps in a
    /// unit test.
    pub(crate) fn tiny(seed: u64, recipe: Recipe) -> TrainConfig {
        TrainConfig {
            total_steps: 60,
            seed_frames: 20,
            exploration_steps: 10,
            batch_size: 4,
            eval_interval: 30,
            eval_episodes: 1,
            seed,
            recipe,
            image_size: 15,
            episode_length: 12,
            features_dim: 4,
            hidden_dim: 16,
            num_filters: 2,
            max_shift_px: 4,
            pad_px: 2,
            distractors: 3,
            checkpoint_interval: 0,
            ..TrainConfig::default()
        }
    }

    #[test]
    fn schedule_and_rows() {
        let mut t = Trainer::new(tiny(1, Recipe::Sada), None).unwrap();
        let s = t.run().unwrap();
        assert_eq!(s.steps, 60);
        assert_eq!(s.updates, t.cfg.updates_after(60));
        assert_eq!(s.updates, 20);
        assert_eq!(s.rows.len(), 5);
        assert_eq!(s.eval_rows.len(), 2);
        assert!(s.rows[0].critic_loss.is_none());
        assert!(s.rows[4].critic_loss.is_some());
        assert!(s.rows.iter().all(|r| r.fps.is_none()));
    }

    #[test]
    fn no_update_before_seed_frames() {
        let mut t = Trainer::new(tiny(2, Recipe::Drq), None).unwrap();
        let fp = t.agent.critic.params.fingerprint();
        let mut ev = Vec::new();
        for _ in 0..20 {
            t.tick(&mut ev).unwrap();
        }
        assert_eq!(t.updates(), 0);
        assert_eq!(t.agent.critic.params.fingerprint(), fp);
        t.tick(&mut ev).unwrap();
        assert_eq!(t.updates(), 0);
        t.tick(&mut ev).unwrap();
        assert_eq!(t.updates(), 1);
    }

    #[test]
    fn zero_steps_writes_only_initial_checkpoint() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = TrainConfig {
            total_steps: 0,
            ..tiny(3, Recipe::Drq)
        };
        let mut t = Trainer::new(cfg, None).unwrap().with_output(dir.path()).unwrap();
        let s = t.run().unwrap();
        assert!(s.rows.is_empty());
        assert!(!dir.path().join("train.csv").exists());
        let files: Vec<_> = std::fs::read_dir(dir.path().join("checkpoints"))
            .unwrap()
            .map(|e| e.unwrap().file_name().into_string().unwrap())
            .collect();
        assert!(files.contains(&"step_00000000.safetensors".to_string()));
        assert_eq!(files.len(), 2);
    }

    #[test]
    fn same_seed_identical_metric_files() {
        let run = |dir: &Path| {
            let mut t = Trainer::new(tiny(4, Recipe::Sada), None).unwrap().with_output(dir).unwrap();
            t.run().unwrap();
            (
                std::fs::read(dir.join("train.csv")).unwrap(),
                std::fs::read(dir.join("eval.csv")).unwrap(),
            )
        };
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        assert_eq!(run(a.path()), run(b.path()));
        let rows = read_train_csv(&a.path().join("train.csv")).unwrap();
        assert_eq!(rows.len(), 5);
    }

    #[test]
    fn resume_matches_uninterrupted_run() {
        let full = tempfile::tempdir().unwrap();
        let mut t = Trainer::new(tiny(5, Recipe::Svea), None).unwrap().with_output(full.path()).unwrap();
        t.run().unwrap();

        let part = tempfile::tempdir().unwrap();
        let cfg = TrainConfig {
            total_steps: 30,
            ..tiny(5, Recipe::Svea)
        };
        let mut t = Trainer::new(cfg, None).unwrap().with_output(part.path()).unwrap();
        t.run().unwrap();
        let a = Archive::load(&part.path().join("checkpoints/latest.safetensors")).unwrap();
        let mut t = Trainer::resume(&a, [("total_steps", "60".to_string())])
            .unwrap()
            .with_output(part.path())
            .unwrap();
        t.run().unwrap();
        for f in ["train.csv", "eval.csv"] {
            assert_eq!(
                std::fs::read_to_string(full.path().join(f)).unwrap(),
                std::fs::read_to_string(part.path().join(f)).unwrap(),
                "{f}"
            );
        }
        let step_only = Archive::load(&part.path().join("checkpoints/step_00000030.safetensors")).unwrap();
        assert!(Trainer::resume(&step_only, []).is_err());
        let (agent, cfg, step) =
            load_agent_checkpoint(&part.path().join("checkpoints/step_00000030.safetensors")).unwrap();
        assert_eq!(step, 30);
        assert_eq!(cfg.unwrap().recipe, Recipe::Svea);
        assert_eq!(agent.cfg.features_dim, 4);
    }

    #[test]
    fn non_finite_loss_aborts_with_record() {
        let dir = tempfile::tempdir().unwrap();
        let mut t = Trainer::new(tiny(6, Recipe::Drq), None).unwrap().with_output(dir.path()).unwrap();
        let mut ev = Vec::new();
        for _ in 0..21 {
            t.tick(&mut ev).unwrap();
        }
        for tensor in t.agent.critic.params.tensors_mut() {
            if tensor.name == "q1.fc3.bias" {
                tensor.data[0] = f32::NAN;
            }
        }
        let err = t.tick(&mut ev).unwrap_err();
        assert!(matches!(err, Error::NonFinite { step: 22, .. }), "{err:?}");
        let rec: AbortRecord = serde_json::from_str(&std::fs::read_to_string(dir.path().join("abort.json")).unwrap()).unwrap();
        assert_eq!(rec.loss, "critic_loss");
    }

    #[test]
    fn exploration_actions_in_box() {
        let mut t = Trainer::new(tiny(7, Recipe::Drq), None).unwrap();
        for _ in 0..5 {
            let a = t.select_action().unwrap();
            assert!(a.iter().all(|v| (-1.0..=1.0).contains(v)));
        }
    }
}
