//! Keyed tensor archives (safetensors layout) for agent parameters,
//! optimizer state and replay snapshots, plus a JSON state record.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use safetensors::tensor::TensorView;
use safetensors::{Dtype, SafeTensors};
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::networks::{Adam, Agent, Params, Real};
use crate::replay::{ReplayBuffer, ReplaySnapshot};
use crate::{Error, Result};

const STATE_KEY: &str = "state";

#[derive(Clone, Debug, PartialEq)]
struct Blob {
    dtype: Dtype,
    shape: Vec<usize>,
    bytes: Vec<u8>,
}

/// In-memory archive; written and read as one safetensors file whose
/// metadata holds a single JSON object.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Archive {
    tensors: BTreeMap<String, Blob>,
    state: serde_json::Map<String, serde_json::Value>,
}

fn ckpt_err(path: &Path, reason: impl Into<String>) -> Error {
    Error::Checkpoint {
        path: path.to_path_buf(),
        reason: reason.into(),
    }
}

impl Archive {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.tensors.keys().map(String::as_str)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.tensors.contains_key(name)
    }

    pub fn put_params<R: Real>(&mut self, prefix: &str, params: &Params<R>) {
        for t in params.tensors() {
            let bytes = if R::DTYPE == "F64" {
                t.data.iter().flat_map(|v| v.as_f64().to_le_bytes()).collect()
            } else {
                t.data.iter().flat_map(|v| (v.as_f64() as f32).to_le_bytes()).collect()
            };
            let dtype = if R::DTYPE == "F64" { Dtype::F64 } else { Dtype::F32 };
            self.tensors.insert(
                format!("{prefix}{}", t.name),
                Blob {
                    dtype,
                    shape: t.shape.clone(),
                    bytes,
                },
            );
        }
    }

    /// Overwrites `params` with the tensors stored under `prefix`.
    pub fn load_params<R: Real>(&self, prefix: &str, params: &mut Params<R>) -> Result<()> {
        for t in params.tensors_mut() {
            let key = format!("{prefix}{}", t.name);
            let b = self
                .tensors
                .get(&key)
                .ok_or_else(|| Error::Contract(format!("archive has no tensor `{key}`")))?;
            if b.shape != t.shape {
                return Err(Error::Contract(format!(
                    "tensor `{key}` has shape {:?}, expected {:?}",
                    b.shape, t.shape
                )));
            }
            match b.dtype {
                Dtype::F32 => {
                    for (v, c) in t.data.iter_mut().zip(b.bytes.chunks_exact(4)) {
                        *v = R::lit(f64::from(f32::from_le_bytes(c.try_into().expect("4 bytes"))));
                    }
                }
                Dtype::F64 => {
                    for (v, c) in t.data.iter_mut().zip(b.bytes.chunks_exact(8)) {
                        *v = R::lit(f64::from_le_bytes(c.try_into().expect("8 bytes")));
                    }
                }
                other => return Err(Error::Contract(format!("tensor `{key}` has dtype {other:?}"))),
            }
        }
        Ok(())
    }

    pub fn put_bytes(&mut self, name: &str, shape: Vec<usize>, bytes: Vec<u8>) {
        self.tensors.insert(
            name.to_string(),
            Blob {
                dtype: Dtype::U8,
                shape,
                bytes,
            },
        );
    }

    pub fn get_bytes(&self, name: &str) -> Result<&[u8]> {
        match self.tensors.get(name) {
            Some(b) if b.dtype == Dtype::U8 => Ok(&b.bytes),
            Some(_) => Err(Error::Contract(format!("tensor `{name}` is not U8"))),
            None => Err(Error::Contract(format!("archive has no tensor `{name}`"))),
        }
    }

    pub fn put_state<T: Serialize>(&mut self, key: &str, value: &T) -> Result<()> {
        self.state.insert(key.to_string(), serde_json::to_value(value)?);
        Ok(())
    }

    pub fn get_state<T: DeserializeOwned>(&self, key: &str) -> Result<T> {
        let v = self
            .state
            .get(key)
            .ok_or_else(|| Error::Contract(format!("archive has no state entry `{key}`")))?;
        Ok(serde_json::from_value(v.clone())?)
    }

    pub fn has_state(&self, key: &str) -> bool {
        self.state.contains_key(key)
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let views = self
            .tensors
            .iter()
            .map(|(k, b)| {
                TensorView::new(b.dtype, b.shape.clone(), &b.bytes)
                    .map(|v| (k.clone(), v))
                    .map_err(|e| Error::Contract(format!("tensor `{k}`: {e:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut meta = HashMap::new();
        meta.insert(STATE_KEY.to_string(), serde_json::to_string(&self.state)?);
        safetensors::tensor::serialize(views, &Some(meta)).map_err(|e| Error::Contract(format!("serialising archive: {e:?}")))
    }

    pub fn from_bytes(bytes: &[u8], path: &Path) -> Result<Self> {
        let st = SafeTensors::deserialize(bytes).map_err(|e| ckpt_err(path, format!("{e:?}")))?;
        let (_, meta) = SafeTensors::read_metadata(bytes).map_err(|e| ckpt_err(path, format!("{e:?}")))?;
        let state = match meta.metadata().as_ref().and_then(|m| m.get(STATE_KEY)) {
            Some(s) => serde_json::from_str(s).map_err(|e| ckpt_err(path, e.to_string()))?,
            None => serde_json::Map::new(),
        };
        let tensors = st
            .tensors()
            .into_iter()
            .map(|(k, v)| {
                (
                    k,
                    Blob {
                        dtype: v.dtype(),
                        shape: v.shape().to_vec(),
                        bytes: v.data().to_vec(),
                    },
                )
            })
            .collect();
        Ok(Self { tensors, state })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent() {
            if !dir.as_os_str().is_empty() {
                std::fs::create_dir_all(dir)?;
            }
        }
        let tmp = path.with_extension("partial");
        std::fs::write(&tmp, self.to_bytes()?)?;
        std::fs::rename(&tmp, path)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| ckpt_err(path, e.to_string()))?;
        Self::from_bytes(&bytes, path)
    }
}

fn put_adam<R: Real>(a: &mut Archive, name: &str, opt: &Adam<R>) -> Result<()> {
    a.put_params(&format!("optim.{name}.m."), &opt.m);
    a.put_params(&format!("optim.{name}.v."), &opt.v);
    a.put_state(&format!("optim.{name}.step"), &opt.step)
}

fn load_adam<R: Real>(a: &Archive, name: &str, opt: &mut Adam<R>) -> Result<()> {
    a.load_params(&format!("optim.{name}.m."), &mut opt.m)?;
    a.load_params(&format!("optim.{name}.v."), &mut opt.v)?;
    opt.step = a.get_state(&format!("optim.{name}.step"))?;
    Ok(())
}

/// Stores every parameter set and optimizer state of `agent`.
pub fn put_agent<R: Real>(a: &mut Archive, agent: &Agent<R>) -> Result<()> {
    a.put_state("net_config", &agent.cfg)?;
    a.put_params("encoder.", &agent.encoder.params);
    a.put_params("actor.", &agent.actor.params);
    a.put_params("critic.", &agent.critic.params);
    a.put_params("critic_target.", agent.critic_target.params());
    a.put_params("temperature.", &agent.temperature.params);
    put_adam(a, "encoder", &agent.encoder_opt)?;
    put_adam(a, "critic", &agent.critic_opt)?;
    put_adam(a, "actor", &agent.actor_opt)?;
    put_adam(a, "temperature", &agent.temperature_opt)
}

/// Rebuilds an agent from an archive written by [`put_agent`].
pub fn load_agent<R: Real>(a: &Archive) -> Result<Agent<R>> {
    let cfg = a.get_state("net_config")?;
    // Parameter values are overwritten below; the init rng only shapes them.
    let mut agent = Agent::new(cfg, &mut crate::rng::stream(0, crate::rng::streams::INIT))?;
    a.load_params("encoder.", &mut agent.encoder.params)?;
    a.load_params("actor.", &mut agent.actor.params)?;
    a.load_params("critic.", &mut agent.critic.params)?;
    let mut target = agent.critic.params.clone();
    a.load_params("critic_target.", &mut target)?;
    agent.critic_target.load(target.tensors(), "")?;
    a.load_params("temperature.", &mut agent.temperature.params)?;
    load_adam(a, "encoder", &mut agent.encoder_opt)?;
    load_adam(a, "critic", &mut agent.critic_opt)?;
    load_adam(a, "actor", &mut agent.actor_opt)?;
    load_adam(a, "temperature", &mut agent.temperature_opt)?;
    Ok(agent)
}

pub fn put_replay(a: &mut Archive, buf: &ReplayBuffer) -> Result<()> {
    let mut snap = buf.snapshot();
    let frames = std::mem::take(&mut snap.frames);
    let entries = snap.entries_json().to_string();
    a.put_bytes("replay.frames", vec![frames.len()], frames);
    a.put_bytes("replay.entries", vec![entries.len()], entries.into_bytes());
    a.put_state("replay", &snap)
}

pub fn load_replay(a: &Archive) -> Result<ReplayBuffer> {
    let snap: ReplaySnapshot = a.get_state("replay")?;
    let entries = String::from_utf8(a.get_bytes("replay.entries")?.to_vec())
        .map_err(|_| Error::Contract("replay entries are not UTF-8".into()))?;
    let mut snap = snap.with_entries_json(entries);
    snap.frames = a.get_bytes("replay.frames")?.to_vec();
    ReplayBuffer::from_snapshot(&snap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::augment::RawObservation;
    use crate::networks::NetConfig;
    use crate::replay::Transition;

    fn tiny() -> NetConfig {
        NetConfig {
            obs_channels: 3,
            image_size: 15,
            features_dim: 4,
            hidden_dim: 8,
            num_filters: 2,
            ..NetConfig::default()
        }
    }

    #[test]
    fn agent_round_trip() {
        let mut agent = Agent::<f32>::new(tiny(), &mut crate::rng::stream(5, 9)).unwrap();
        agent.critic_opt.step = 7;
        agent.critic_opt.m.flat_set(3, 0.25);
        let mut a = Archive::new();
        put_agent(&mut a, &agent).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ckpt.safetensors");
        a.save(&path).unwrap();
        let back = Archive::load(&path).unwrap();
        assert_eq!(back, a);
        let restored = load_agent::<f32>(&back).unwrap();
        assert_eq!(restored.encoder.params, agent.encoder.params);
        assert_eq!(restored.actor.params, agent.actor.params);
        assert_eq!(restored.critic.params, agent.critic.params);
        assert_eq!(restored.critic_target.params(), agent.critic_target.params());
        assert_eq!(restored.temperature.params, agent.temperature.params);
        assert_eq!(restored.critic_opt.m, agent.critic_opt.m);
        assert_eq!(restored.critic_opt.step, 7);
        assert_eq!(a.to_bytes().unwrap(), back.to_bytes().unwrap());
    }

    #[test]
    fn f64_params_survive() {
        let agent = Agent::<f64>::new(tiny(), &mut crate::rng::stream(6, 9)).unwrap();
        let mut a = Archive::new();
        put_agent(&mut a, &agent).unwrap();
        let back = Archive::from_bytes(&a.to_bytes().unwrap(), Path::new("mem")).unwrap();
        assert_eq!(load_agent::<f64>(&back).unwrap().actor.params, agent.actor.params);
    }

    #[test]
    fn replay_round_trip() {
        let mut buf = ReplayBuffer::new(10).unwrap();
        for i in 0..4u8 {
            let o = RawObservation {
                frames: 2,
                height: 2,
                width: 2,
                data: vec![i; 24],
            };
            buf.push(Transition {
                obs: o.clone(),
                action: vec![0.5, -0.5],
                reward: f64::from(i),
                next_obs: o,
                discount: 0.99,
            })
            .unwrap();
        }
        let mut a = Archive::new();
        put_replay(&mut a, &buf).unwrap();
        let back = Archive::from_bytes(&a.to_bytes().unwrap(), Path::new("mem")).unwrap();
        assert_eq!(load_replay(&back).unwrap(), buf);
    }

    #[test]
    fn corrupt_file_is_a_checkpoint_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.safetensors");
        std::fs::write(&path, b"not an archive").unwrap();
        assert!(matches!(Archive::load(&path), Err(Error::Checkpoint { .. })));
        assert!(matches!(Archive::load(&dir.path().join("missing")), Err(Error::Checkpoint { .. })));
    }
}
