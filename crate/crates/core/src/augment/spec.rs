use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AugKind {
    Identity,
    WeakShift,
    Shift,
    Rotate,
    RotateShift,
    Conv,
    Overlay,
    ConvOverlay,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AugClass {
    Identity,
    Weak,
    Geometric,
    Photometric,
}

impl AugKind {
    pub const STRONG: [AugKind; 6] = [
        AugKind::Shift,
        AugKind::Rotate,
        AugKind::RotateShift,
        AugKind::Conv,
        AugKind::Overlay,
        AugKind::ConvOverlay,
    ];

    pub fn class(self) -> AugClass {
        match self {
            AugKind::Identity => AugClass::Identity,
            AugKind::WeakShift => AugClass::Weak,
            AugKind::Shift | AugKind::Rotate | AugKind::RotateShift => AugClass::Geometric,
            AugKind::Conv | AugKind::Overlay | AugKind::ConvOverlay => AugClass::Photometric,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            AugKind::Identity => "identity",
            AugKind::WeakShift => "weak_shift",
            AugKind::Shift => "shift",
            AugKind::Rotate => "rotate",
            AugKind::RotateShift => "rotate_shift",
            AugKind::Conv => "conv",
            AugKind::Overlay => "overlay",
            AugKind::ConvOverlay => "conv_overlay",
        }
    }

    pub fn is_composite(self) -> bool {
        matches!(self, AugKind::RotateShift | AugKind::ConvOverlay)
    }
}

impl fmt::Display for AugKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AugKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "identity" => AugKind::Identity,
            "weak_shift" => AugKind::WeakShift,
            "shift" => AugKind::Shift,
            "rotate" => AugKind::Rotate,
            "rotate_shift" => AugKind::RotateShift,
            "conv" => AugKind::Conv,
            "overlay" => AugKind::Overlay,
            "conv_overlay" => AugKind::ConvOverlay,
            other => return Err(Error::InvalidSpec(format!("unknown augmentation `{other}`"))),
        })
    }
}

/// Sampling ranges and constants shared by all operators.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AugParams {
    pub max_shift_px: u32,
    pub max_rotate_deg: f32,
    pub overlay_alpha: f32,
    pub conv_kernel_size: usize,
    /// Multiplier on the variance-preserving standard deviation of random
    /// convolution weights.
    pub weight_scale: f32,
    /// Padding of the weak pad-and-crop shift.
    pub pad_px: u32,
}

impl Default for AugParams {
    fn default() -> Self {
        Self {
            max_shift_px: 16,
            max_rotate_deg: 180.0,
            overlay_alpha: 0.5,
            conv_kernel_size: 3,
            weight_scale: 1.0,
            pad_px: 4,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AugmentationSpec {
    pub kind: AugKind,
    pub params: AugParams,
}

impl AugmentationSpec {
    pub fn new(kind: AugKind) -> Self {
        Self {
            kind,
            params: AugParams::default(),
        }
    }

    pub fn class(&self) -> AugClass {
        self.kind.class()
    }

    pub fn validate(&self) -> Result<()> {
        let p = &self.params;
        if !(0.0..=1.0).contains(&p.overlay_alpha) {
            return Err(Error::InvalidSpec(format!(
                "overlay_alpha {} outside [0, 1]",
                p.overlay_alpha
            )));
        }
        if p.conv_kernel_size == 0 || p.conv_kernel_size % 2 == 0 {
            return Err(Error::InvalidSpec(format!(
                "conv_kernel_size {} must be odd",
                p.conv_kernel_size
            )));
        }
        if !(p.max_rotate_deg >= 0.0 && p.max_rotate_deg <= 180.0) {
            return Err(Error::InvalidSpec(format!(
                "max_rotate_deg {} outside [0, 180]",
                p.max_rotate_deg
            )));
        }
        if !(p.weight_scale.is_finite() && p.weight_scale >= 0.0) {
            return Err(Error::InvalidSpec("weight_scale must be finite and >= 0".into()));
        }
        Ok(())
    }
}

/// Named augmentation pools selectable from the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AugPool {
    Geometric,
    Photometric,
    All,
    None,
}

impl AugPool {
    pub fn kinds(self) -> Vec<AugKind> {
        match self {
            AugPool::Geometric => vec![AugKind::Shift, AugKind::Rotate, AugKind::RotateShift],
            AugPool::Photometric => vec![AugKind::Conv, AugKind::Overlay, AugKind::ConvOverlay],
            AugPool::All => AugKind::STRONG.to_vec(),
            AugPool::None => vec![AugKind::Identity],
        }
    }

    pub fn specs(self, params: AugParams) -> Vec<AugmentationSpec> {
        self.kinds()
            .into_iter()
            .map(|kind| AugmentationSpec { kind, params })
            .collect()
    }

    pub fn name(self) -> &'static str {
        match self {
            AugPool::Geometric => "geometric",
            AugPool::Photometric => "photometric",
            AugPool::All => "all",
            AugPool::None => "none",
        }
    }
}

impl FromStr for AugPool {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "geometric" => Ok(AugPool::Geometric),
            "photometric" => Ok(AugPool::Photometric),
            "all" => Ok(AugPool::All),
            "none" => Ok(AugPool::None),
            other => Err(Error::InvalidSpec(format!("unknown augmentation pool `{other}`"))),
        }
    }
}

/// Weights of a random convolution: `[out][in][ky][kx]` over the three colour
/// channels of a frame.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvKernel {
    pub size: usize,
    pub weights: Vec<f32>,
}

impl ConvKernel {
    pub fn expected_len(size: usize) -> usize {
        3 * 3 * size * size
    }

    pub fn identity(size: usize) -> Self {
        let mut weights = vec![0.0; Self::expected_len(size)];
        let c = size / 2;
        for ch in 0..3 {
            weights[((ch * 3 + ch) * size + c) * size + c] = 1.0;
        }
        Self { size, weights }
    }

    pub fn zeros(size: usize) -> Self {
        Self {
            size,
            weights: vec![0.0; Self::expected_len(size)],
        }
    }

    /// I.i.d. Gaussian weights with standard deviation `scale / sqrt(fan_in)`,
    /// which keeps the output variance close to the input's.
    pub fn sample<R: Rng + ?Sized>(size: usize, scale: f32, rng: &mut R) -> Self {
        let fan_in = (3 * size * size) as f32;
        let normal = Normal::new(0.0f32, scale / fan_in.sqrt()).expect("finite std");
        let weights = (0..Self::expected_len(size))
            .map(|_| normal.sample(rng))
            .collect();
        Self { size, weights }
    }

    #[inline]
    pub fn weight(&self, out: usize, inp: usize, ky: usize, kx: usize) -> f32 {
        self.weights[((out * 3 + inp) * self.size + ky) * self.size + kx]
    }
}

/// Concrete parameters drawn for one application of an augmentation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum DrawParams {
    Identity,
    WeakShift { dx: i32, dy: i32 },
    Shift { dx: i32, dy: i32 },
    Rotate { angle_deg: f32 },
    RotateShift { angle_deg: f32, dx: i32, dy: i32 },
    Conv { kernel: ConvKernel },
    Overlay { distractor: usize, alpha: f32 },
    ConvOverlay { kernel: ConvKernel, distractor: usize, alpha: f32 },
}

/// A reproducible augmentation draw: applying the same draw to the same
/// observation is bit-identical.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AugDraw {
    pub spec: AugmentationSpec,
    pub params: DrawParams,
    pub seed: u64,
}

fn symmetric_int<R: Rng + ?Sized>(rng: &mut R, max: u32) -> i32 {
    let m = max as i32;
    rng.random_range(-m..=m)
}

impl AugDraw {
    /// Derives all parameters of `spec` from `seed`. `bank_len` is the number
    /// of overlay distractors available.
    pub fn from_seed(spec: AugmentationSpec, seed: u64, bank_len: usize) -> Result<Self> {
        spec.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = spec.params;
        let needs_bank = matches!(spec.kind, AugKind::Overlay | AugKind::ConvOverlay);
        if needs_bank && bank_len == 0 {
            return Err(Error::InvalidSpec("overlay requires a non-empty distractor bank".into()));
        }
        let angle = |rng: &mut ChaCha8Rng| {
            if p.max_rotate_deg == 0.0 {
                0.0
            } else {
                rng.random_range(-p.max_rotate_deg..=p.max_rotate_deg)
            }
        };
        let params = match spec.kind {
            AugKind::Identity => DrawParams::Identity,
            AugKind::WeakShift => DrawParams::WeakShift {
                dx: symmetric_int(&mut rng, p.pad_px),
                dy: symmetric_int(&mut rng, p.pad_px),
            },
            AugKind::Shift => DrawParams::Shift {
                dx: symmetric_int(&mut rng, p.max_shift_px),
                dy: symmetric_int(&mut rng, p.max_shift_px),
            },
            AugKind::Rotate => DrawParams::Rotate {
                angle_deg: angle(&mut rng),
            },
            AugKind::RotateShift => {
                let angle_deg = angle(&mut rng);
                DrawParams::RotateShift {
                    angle_deg,
                    dx: symmetric_int(&mut rng, p.max_shift_px),
                    dy: symmetric_int(&mut rng, p.max_shift_px),
                }
            }
            AugKind::Conv => DrawParams::Conv {
                kernel: ConvKernel::sample(p.conv_kernel_size, p.weight_scale, &mut rng),
            },
            AugKind::Overlay => DrawParams::Overlay {
                distractor: rng.random_range(0..bank_len),
                alpha: p.overlay_alpha,
            },
            AugKind::ConvOverlay => {
                let kernel = ConvKernel::sample(p.conv_kernel_size, p.weight_scale, &mut rng);
                DrawParams::ConvOverlay {
                    kernel,
                    distractor: rng.random_range(0..bank_len),
                    alpha: p.overlay_alpha,
                }
            }
        };
        Ok(Self { spec, params, seed })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classes_follow_taxonomy() {
        for k in [AugKind::Shift, AugKind::Rotate, AugKind::RotateShift] {
            assert_eq!(k.class(), AugClass::Geometric);
        }
        for k in [AugKind::Conv, AugKind::Overlay, AugKind::ConvOverlay] {
            assert_eq!(k.class(), AugClass::Photometric);
        }
        assert_eq!(AugKind::WeakShift.class(), AugClass::Weak);
    }

    #[test]
    fn defaults_match_hyperparameter_table() {
        let p = AugParams::default();
        assert_eq!(p.max_shift_px, 16);
        assert_eq!(p.max_rotate_deg, 180.0);
        assert_eq!(p.overlay_alpha, 0.5);
    }

    #[test]
    fn names_round_trip() {
        for k in AugKind::STRONG {
            assert_eq!(k.name().parse::<AugKind>().unwrap(), k);
        }
        assert!("blur".parse::<AugKind>().is_err());
    }

    #[test]
    fn draws_are_reproducible_and_in_range() {
        let spec = AugmentationSpec::new(AugKind::RotateShift);
        for seed in 0..200 {
            let a = AugDraw::from_seed(spec, seed, 4).unwrap();
            assert_eq!(a, AugDraw::from_seed(spec, seed, 4).unwrap());
            match a.params {
                DrawParams::RotateShift { angle_deg, dx, dy } => {
                    assert!(angle_deg.abs() <= 180.0);
                    assert!(dx.abs() <= 16 && dy.abs() <= 16);
                }
                _ => unreachable!(),
            }
        }
    }

    #[test]
    fn overlay_without_bank_is_rejected() {
        let spec = AugmentationSpec::new(AugKind::Overlay);
        assert!(matches!(
            AugDraw::from_seed(spec, 0, 0),
            Err(Error::InvalidSpec(_))
        ));
    }

    #[test]
    fn identity_kernel_layout() {
        let k = ConvKernel::identity(3);
        assert_eq!(k.weight(1, 1, 1, 1), 1.0);
        assert_eq!(k.weight(1, 0, 1, 1), 0.0);
        assert_eq!(k.weights.iter().sum::<f32>(), 3.0);
    }
}
