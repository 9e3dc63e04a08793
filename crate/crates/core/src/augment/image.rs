use crate::{Error, Result};

/// Colour channels per rendered frame.
pub const CHANNELS_PER_FRAME: usize = 3;

/// A single RGB frame, planar (channel-major), values in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Image {
    pub height: usize,
    pub width: usize,
    pub data: Vec<f32>,
}

impl Image {
    pub fn new(height: usize, width: usize, data: Vec<f32>) -> Result<Self> {
        if data.len() != CHANNELS_PER_FRAME * height * width {
            return Err(Error::Contract(format!(
                "image buffer of {} values does not match 3x{height}x{width}",
                data.len()
            )));
        }
        Ok(Self {
            height,
            width,
            data,
        })
    }

    pub fn filled(height: usize, width: usize, value: f32) -> Self {
        Self {
            height,
            width,
            data: vec![value; CHANNELS_PER_FRAME * height * width],
        }
    }

    #[inline]
    pub fn get(&self, c: usize, y: usize, x: usize) -> f32 {
        self.data[(c * self.height + y) * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, c: usize, y: usize, x: usize, v: f32) {
        self.data[(c * self.height + y) * self.width + x] = v;
    }

    pub fn plane_len(&self) -> usize {
        self.height * self.width
    }

    /// Quantises to 8-bit, rounding to nearest.
    pub fn quantize(&self) -> Vec<u8> {
        self.data.iter().map(|&v| quantize_unit(v)).collect()
    }

    pub fn from_u8(height: usize, width: usize, data: &[u8]) -> Result<Self> {
        Self::new(height, width, data.iter().map(|&b| f32::from(b) / 255.0).collect())
    }
}

/// A stack of `frames` RGB frames along the channel axis, newest frame first.
#[derive(Clone, Debug, PartialEq)]
pub struct Observation {
    pub frames: usize,
    pub height: usize,
    pub width: usize,
    pub data: Vec<f32>,
}

impl Observation {
    pub fn new(frames: usize, height: usize, width: usize, data: Vec<f32>) -> Result<Self> {
        if frames == 0 || data.len() != frames * CHANNELS_PER_FRAME * height * width {
            return Err(Error::Contract(format!(
                "observation buffer of {} values does not match {frames} frames of 3x{height}x{width}",
                data.len()
            )));
        }
        Ok(Self {
            frames,
            height,
            width,
            data,
        })
    }

    pub fn zeros(frames: usize, height: usize, width: usize) -> Self {
        Self {
            frames,
            height,
            width,
            data: vec![0.0; frames * CHANNELS_PER_FRAME * height * width],
        }
    }

    pub fn from_frames(frames: &[Image]) -> Result<Self> {
        let first = frames
            .first()
            .ok_or_else(|| Error::Contract("observation needs at least one frame".into()))?;
        let (h, w) = (first.height, first.width);
        let mut data = Vec::with_capacity(frames.len() * first.data.len());
        for f in frames {
            if f.height != h || f.width != w {
                return Err(Error::Contract("frames of differing size".into()));
            }
            data.extend_from_slice(&f.data);
        }
        Self::new(frames.len(), h, w, data)
    }

    pub fn channels(&self) -> usize {
        self.frames * CHANNELS_PER_FRAME
    }

    pub fn plane_len(&self) -> usize {
        self.height * self.width
    }

    pub fn frame_len(&self) -> usize {
        CHANNELS_PER_FRAME * self.plane_len()
    }

    /// Frame `i` (0 = newest).
    pub fn frame(&self, i: usize) -> Image {
        let n = self.frame_len();
        Image {
            height: self.height,
            width: self.width,
            data: self.data[i * n..(i + 1) * n].to_vec(),
        }
    }

    #[inline]
    pub fn get(&self, c: usize, y: usize, x: usize) -> f32 {
        self.data[(c * self.height + y) * self.width + x]
    }

    pub fn same_shape(&self, other: &Observation) -> bool {
        self.frames == other.frames && self.height == other.height && self.width == other.width
    }

    pub fn quantize(&self) -> RawObservation {
        RawObservation {
            frames: self.frames,
            height: self.height,
            width: self.width,
            data: self.data.iter().map(|&v| quantize_unit(v)).collect(),
        }
    }
}

/// 8-bit storage form of an [`Observation`], as rendered by the environment
/// and kept in the replay buffer.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RawObservation {
    pub frames: usize,
    pub height: usize,
    pub width: usize,
    pub data: Vec<u8>,
}

impl RawObservation {
    pub fn channels(&self) -> usize {
        self.frames * CHANNELS_PER_FRAME
    }

    pub fn frame_len(&self) -> usize {
        CHANNELS_PER_FRAME * self.height * self.width
    }

    pub fn to_unit(&self) -> Observation {
        Observation {
            frames: self.frames,
            height: self.height,
            width: self.width,
            data: self.data.iter().map(|&b| f32::from(b) / 255.0).collect(),
        }
    }

    pub fn frame(&self, i: usize) -> &[u8] {
        let n = self.frame_len();
        &self.data[i * n..(i + 1) * n]
    }
}

#[inline]
pub fn quantize_unit(v: f32) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}
