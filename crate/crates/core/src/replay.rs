//! Fixed-capacity FIFO transition store with uniform sampling.
//!
//! Observations are kept as 8-bit frames in a shared frame store; consecutive
//! transitions of an episode reference the same frames instead of copying
//! whole stacks.

use std::collections::VecDeque;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::augment::RawObservation;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Transition {
    pub obs: RawObservation,
    pub action: Vec<f32>,
    pub reward: f64,
    pub next_obs: RawObservation,
    /// 0 at a true terminal, the discount factor otherwise.
    pub discount: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct Entry {
    obs: Vec<u64>,
    next: Vec<u64>,
    action: Vec<f32>,
    reward: f64,
    discount: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameShape {
    pub frames: usize,
    pub height: usize,
    pub width: usize,
}

impl FrameShape {
    fn frame_len(&self) -> usize {
        3 * self.height * self.width
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReplayBuffer {
    capacity: usize,
    shape: Option<FrameShape>,
    frames: VecDeque<Vec<u8>>,
    first_frame: u64,
    entries: VecDeque<Entry>,
    pushed: u64,
}

/// Flat, serialisable copy of a buffer's contents.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplaySnapshot {
    pub capacity: usize,
    pub shape: Option<FrameShape>,
    pub first_frame: u64,
    pub pushed: u64,
    pub frame_len: usize,
    pub frames: Vec<u8>,
    #[serde(skip)]
    entries_json: String,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::validation("capacity", "must be positive"));
        }
        Ok(Self {
            capacity,
            shape: None,
            frames: VecDeque::new(),
            first_frame: 0,
            entries: VecDeque::new(),
            pushed: 0,
        })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Slot that the next push writes, as in a ring buffer.
    pub fn cursor(&self) -> usize {
        (self.pushed % self.capacity as u64) as usize
    }

    pub fn total_pushed(&self) -> u64 {
        self.pushed
    }

    /// Number of distinct 8-bit frames currently held.
    pub fn stored_frames(&self) -> usize {
        self.frames.len()
    }

    fn frame(&self, id: u64) -> &[u8] {
        &self.frames[(id - self.first_frame) as usize]
    }

    fn insert_frame(&mut self, data: &[u8]) -> u64 {
        self.frames.push_back(data.to_vec());
        self.first_frame + self.frames.len() as u64 - 1
    }

    fn check_shape(&mut self, o: &RawObservation) -> Result<()> {
        let s = FrameShape {
            frames: o.frames,
            height: o.height,
            width: o.width,
        };
        match self.shape {
            None => {
                self.shape = Some(s);
                Ok(())
            }
            Some(prev) if prev == s => Ok(()),
            Some(prev) => Err(Error::Contract(format!("observation shape {s:?} differs from buffer shape {prev:?}"))),
        }
    }

    pub fn push(&mut self, t: Transition) -> Result<()> {
        self.check_shape(&t.obs)?;
        self.check_shape(&t.next_obs)?;
        let k = t.obs.frames;
        let reuse = self
            .entries
            .back()
            .filter(|e| (0..k).all(|i| self.frame(e.next[i]) == t.obs.frame(i)))
            .map(|e| e.next.clone());
        let obs = match reuse {
            Some(ids) => ids,
            None => (0..k).map(|i| self.insert_frame(t.obs.frame(i))).collect(),
        };
        let shifted = (1..k).all(|i| t.next_obs.frame(i) == t.obs.frame(i - 1));
        let next = if shifted {
            let mut ids = vec![self.insert_frame(t.next_obs.frame(0))];
            ids.extend_from_slice(&obs[..k - 1]);
            ids
        } else {
            (0..k).map(|i| self.insert_frame(t.next_obs.frame(i))).collect()
        };
        self.entries.push_back(Entry {
            obs,
            next,
            action: t.action,
            reward: t.reward,
            discount: t.discount,
        });
        self.pushed += 1;
        if self.entries.len() > self.capacity {
            self.entries.pop_front();
            let keep = self
                .entries
                .front()
                .map(|e| e.obs.iter().chain(e.next.iter()).copied().min().unwrap_or(0))
                .unwrap_or(self.first_frame + self.frames.len() as u64);
            while self.first_frame < keep {
                self.frames.pop_front();
                self.first_frame += 1;
            }
        }
        Ok(())
    }

    fn stack(&self, ids: &[u64]) -> RawObservation {
        let s = self.shape.expect("non-empty buffer has a shape");
        let mut data = Vec::with_capacity(ids.len() * s.frame_len());
        for &id in ids {
            data.extend_from_slice(self.frame(id));
        }
        RawObservation {
            frames: s.frames,
            height: s.height,
            width: s.width,
            data,
        }
    }

    /// Transition `i`, oldest first.
    pub fn get(&self, i: usize) -> Option<Transition> {
        let e = self.entries.get(i)?;
        Some(Transition {
            obs: self.stack(&e.obs),
            action: e.action.clone(),
            reward: e.reward,
            next_obs: self.stack(&e.next),
            discount: e.discount,
        })
    }

    /// `n` indices drawn uniformly with replacement.
    pub fn sample_indices<G: Rng + ?Sized>(&self, n: usize, rng: &mut G) -> Result<Vec<usize>> {
        if self.len() < n || self.is_empty() {
            return Err(Error::InsufficientData {
                requested: n,
                available: self.len(),
            });
        }
        Ok((0..n).map(|_| rng.random_range(0..self.len())).collect())
    }

    pub fn sample<G: Rng + ?Sized>(&self, n: usize, rng: &mut G) -> Result<Vec<Transition>> {
        let idx = self.sample_indices(n, rng)?;
        Ok(idx.into_iter().map(|i| self.get(i).expect("index in range")).collect())
    }

    pub fn snapshot(&self) -> ReplaySnapshot {
        let frame_len = self.shape.map_or(0, |s| s.frame_len());
        let mut frames = Vec::with_capacity(self.frames.len() * frame_len);
        for f in &self.frames {
            frames.extend_from_slice(f);
        }
        ReplaySnapshot {
            capacity: self.capacity,
            shape: self.shape,
            first_frame: self.first_frame,
            pushed: self.pushed,
            frame_len,
            frames,
            entries_json: serde_json::to_string(&self.entries).expect("entries serialise"),
        }
    }

    pub fn from_snapshot(s: &ReplaySnapshot) -> Result<Self> {
        let bad = |reason: &str| Error::Contract(format!("replay snapshot: {reason}"));
        let entries: VecDeque<Entry> = serde_json::from_str(&s.entries_json)?;
        if s.capacity == 0 || entries.len() > s.capacity {
            return Err(bad("capacity"));
        }
        let frames: VecDeque<Vec<u8>> = if s.frame_len == 0 {
            if !s.frames.is_empty() {
                return Err(bad("frame data without a frame size"));
            }
            VecDeque::new()
        } else {
            if s.frames.len() % s.frame_len != 0 {
                return Err(bad("truncated frame data"));
            }
            s.frames.chunks(s.frame_len).map(<[u8]>::to_vec).collect()
        };
        let end = s.first_frame + frames.len() as u64;
        if entries
            .iter()
            .flat_map(|e| e.obs.iter().chain(e.next.iter()))
            .any(|&id| id < s.first_frame || id >= end)
        {
            return Err(bad("dangling frame reference"));
        }
        Ok(Self {
            capacity: s.capacity,
            shape: s.shape,
            frames,
            first_frame: s.first_frame,
            entries,
            pushed: s.pushed,
        })
    }
}

impl ReplaySnapshot {
    pub fn entries_json(&self) -> &str {
        &self.entries_json
    }

    pub fn with_entries_json(mut self, json: String) -> Self {
        self.entries_json = json;
        self
    }
}
