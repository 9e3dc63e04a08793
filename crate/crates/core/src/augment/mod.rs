//! Image augmentation operators and the strong-augmentation sampler.
//!
//! Operators take an [`Observation`] (a stack of frames) and transform every
//! frame with the same parameters. Geometric operators (shift, rotate) move
//! pixels; photometric operators (random convolution, overlay) keep every
//! pixel where it is and only change its value.

mod bank;
mod image;
pub mod ops;
mod spec;

use rand::Rng;

pub use bank::DistractorBank;
pub use image::{quantize_unit, Image, Observation, RawObservation, CHANNELS_PER_FRAME};
pub use ops::Fill;
pub use spec::{AugClass, AugDraw, AugKind, AugParams, AugPool, AugmentationSpec, ConvKernel, DrawParams};

use crate::{Error, Result};

impl Image {
    pub fn translated(&self, dx: i32, dy: i32, fill: Fill) -> Image {
        Image {
            height: self.height,
            width: self.width,
            data: ops::translate_planes(&self.data, CHANNELS_PER_FRAME, self.height, self.width, dx, dy, fill),
        }
    }

    pub fn rotated(&self, angle_deg: f32) -> Image {
        Image {
            height: self.height,
            width: self.width,
            data: ops::rotate_planes(&self.data, CHANNELS_PER_FRAME, self.height, self.width, angle_deg),
        }
    }
}

impl Observation {
    fn with_data(&self, data: Vec<f32>) -> Observation {
        Observation {
            frames: self.frames,
            height: self.height,
            width: self.width,
            data,
        }
    }

    pub fn translated(&self, dx: i32, dy: i32, fill: Fill) -> Observation {
        self.with_data(ops::translate_planes(
            &self.data,
            self.channels(),
            self.height,
            self.width,
            dx,
            dy,
            fill,
        ))
    }

    pub fn rotated(&self, angle_deg: f32) -> Observation {
        self.with_data(ops::rotate_planes(
            &self.data,
            self.channels(),
            self.height,
            self.width,
            angle_deg,
        ))
    }
}

/// Pad-and-crop shift by `(dx, dy)` with edge replication.
pub fn weak_shift(obs: &Observation, dx: i32, dy: i32, pad_px: u32) -> Result<Observation> {
    if pad_px as usize >= obs.height || pad_px as usize >= obs.width {
        return Err(Error::InvalidSpec(format!(
            "pad_px {pad_px} must be smaller than the {}x{} frame",
            obs.height, obs.width
        )));
    }
    if dx.unsigned_abs() > pad_px || dy.unsigned_abs() > pad_px {
        return Err(Error::Range(format!("weak shift ({dx}, {dy}) exceeds pad {pad_px}")));
    }
    Ok(obs.translated(dx, dy, Fill::Edge))
}

/// The weak augmentation: a random pad-and-crop shift of at most `pad_px`.
pub fn apply_weak<R: Rng + ?Sized>(obs: &Observation, pad_px: u32, rng: &mut R) -> Result<Observation> {
    let p = pad_px as i32;
    let dx = rng.random_range(-p..=p);
    let dy = rng.random_range(-p..=p);
    weak_shift(obs, dx, dy, pad_px)
}

/// Strong shift with zero fill.
pub fn apply_shift(obs: &Observation, dx: i32, dy: i32, params: &AugParams) -> Result<Observation> {
    let max = params.max_shift_px;
    if dx.unsigned_abs() > max || dy.unsigned_abs() > max {
        return Err(Error::Range(format!("shift ({dx}, {dy}) exceeds max {max} px")));
    }
    Ok(obs.translated(dx, dy, Fill::Zero))
}

pub fn apply_rotate(obs: &Observation, angle_deg: f32, params: &AugParams) -> Result<Observation> {
    if !angle_deg.is_finite() || angle_deg.abs() > params.max_rotate_deg {
        return Err(Error::Range(format!(
            "rotation {angle_deg} exceeds max {} degrees",
            params.max_rotate_deg
        )));
    }
    Ok(obs.rotated(angle_deg))
}

pub fn apply_conv(obs: &Observation, kernel: &ConvKernel) -> Result<Observation> {
    if kernel.size == 0
        || kernel.size % 2 == 0
        || kernel.weights.len() != ConvKernel::expected_len(kernel.size)
    {
        return Err(Error::InvalidSpec(format!(
            "kernel of size {} with {} weights; expected an odd size and 3x3xkxk weights",
            kernel.size,
            kernel.weights.len()
        )));
    }
    Ok(obs.with_data(ops::convolve_frames(
        &obs.data,
        obs.frames,
        obs.height,
        obs.width,
        kernel,
    )))
}

pub fn apply_overlay(obs: &Observation, distractor: &Image, alpha: f32) -> Result<Observation> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidSpec(format!("overlay alpha {alpha} outside [0, 1]")));
    }
    if distractor.height != obs.height || distractor.width != obs.width {
        return Err(Error::InvalidSpec(format!(
            "distractor {}x{} does not match observation {}x{}",
            distractor.height, distractor.width, obs.height, obs.width
        )));
    }
    Ok(obs.with_data(ops::blend_frames(&obs.data, obs.frames, &distractor.data, alpha)))
}

fn distractor(bank: &DistractorBank, id: usize) -> Result<&Image> {
    bank.get(id)
        .ok_or_else(|| Error::InvalidSpec(format!("distractor {id} not in bank of {}", bank.len())))
}

/// Applies one of the two composite augmentations: rotate then shift, or
/// convolution then overlay.
pub fn apply_composite(obs: &Observation, draw: &AugDraw, bank: &DistractorBank) -> Result<Observation> {
    let p = &draw.spec.params;
    match &draw.params {
        DrawParams::RotateShift { angle_deg, dx, dy } => {
            let rotated = apply_rotate(obs, *angle_deg, p)?;
            apply_shift(&rotated, *dx, *dy, p)
        }
        DrawParams::ConvOverlay {
            kernel,
            distractor: id,
            alpha,
        } => {
            let convolved = apply_conv(obs, kernel)?;
            apply_overlay(&convolved, distractor(bank, *id)?, *alpha)
        }
        other => Err(Error::InvalidSpec(format!("{other:?} is not a composite augmentation"))),
    }
}

/// Applies any draw. Reapplying a draw to the same input is bit-identical.
pub fn apply_draw(obs: &Observation, draw: &AugDraw, bank: &DistractorBank) -> Result<Observation> {
    let p = &draw.spec.params;
    match &draw.params {
        DrawParams::Identity => Ok(obs.clone()),
        DrawParams::WeakShift { dx, dy } => weak_shift(obs, *dx, *dy, p.pad_px),
        DrawParams::Shift { dx, dy } => apply_shift(obs, *dx, *dy, p),
        DrawParams::Rotate { angle_deg } => apply_rotate(obs, *angle_deg, p),
        DrawParams::Conv { kernel } => apply_conv(obs, kernel),
        DrawParams::Overlay {
            distractor: id,
            alpha,
        } => apply_overlay(obs, distractor(bank, *id)?, *alpha),
        DrawParams::RotateShift { .. } | DrawParams::ConvOverlay { .. } => apply_composite(obs, draw, bank),
    }
}

/// Picks one spec of `pool` uniformly, draws its parameters and applies them.
pub fn sample_strong<R: Rng + ?Sized>(
    obs: &Observation,
    pool: &[AugmentationSpec],
    bank: &DistractorBank,
    rng: &mut R,
) -> Result<(Observation, AugDraw)> {
    if pool.is_empty() {
        return Err(Error::InvalidSpec("strong augmentation pool is empty".into()));
    }
    let spec = pool[rng.random_range(0..pool.len())];
    let draw = AugDraw::from_seed(spec, rng.next_u64(), bank.len())?;
    let out = apply_draw(obs, &draw, bank)?;
    Ok((out, draw))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use proptest::prelude::*;

    fn ramp_obs(frames: usize, h: usize, w: usize) -> Observation {
        let n = frames * 3 * h * w;
        let data = (0..n).map(|i| ((i * 37) % 101) as f32 / 100.0).collect();
        Observation::new(frames, h, w, data).unwrap()
    }

    fn single_channel_grid(vals: [f32; 4]) -> Observation {
        // 1 frame, 2x2, every channel holds the same [[a, b], [c, d]] plane.
        let mut data = Vec::new();
        for _ in 0..3 {
            data.extend_from_slice(&vals);
        }
        Observation::new(1, 2, 2, data).unwrap()
    }

    fn plane(obs: &Observation, c: usize) -> Vec<f32> {
        let n = obs.plane_len();
        obs.data[c * n..(c + 1) * n].to_vec()
    }

    #[test]
    fn weak_zero_draw_is_identity() {
        let o = ramp_obs(3, 8, 8);
        assert_eq!(weak_shift(&o, 0, 0, 4).unwrap(), o);
    }

    #[test]
    fn weak_shift_moves_constant_column_with_edge_fill() {
        // 8x8 test image whose column c holds value c/10.
        let mut data = Vec::new();
        for _ in 0..3 {
            for _y in 0..8 {
                for x in 0..8 {
                    data.push(x as f32 / 10.0);
                }
            }
        }
        let o = Observation::new(1, 8, 8, data).unwrap();
        let s = weak_shift(&o, 4, 0, 4).unwrap();
        for c in 0..3 {
            for y in 0..8 {
                for x in 0..4 {
                    assert_eq!(s.get(c, y, x + 4), x as f32 / 10.0);
                    // vacated columns replicate the left edge
                    assert_eq!(s.get(c, y, x), 0.0);
                }
            }
        }
    }

    #[test]
    fn weak_pad_larger_than_frame_is_invalid() {
        let o = ramp_obs(1, 4, 4);
        assert!(matches!(weak_shift(&o, 0, 0, 4), Err(Error::InvalidSpec(_))));
        let mut r = stream(0, 0);
        assert!(apply_weak(&o, 5, &mut r).is_err());
    }

    #[test]
    fn weak_is_deterministic_per_seed() {
        let o = ramp_obs(3, 12, 12);
        let a = apply_weak(&o, 4, &mut stream(11, 0)).unwrap();
        let b = apply_weak(&o, 4, &mut stream(11, 0)).unwrap();
        assert_eq!(a.data, b.data);
    }

    #[test]
    fn shift_moves_bright_pixel() {
        let mut o = Observation::zeros(1, 10, 10);
        let idx = 4 * 10 + 2;
        o.data[idx] = 1.0;
        let s = apply_shift(&o, 3, 0, &AugParams::default()).unwrap();
        assert_eq!(s.get(0, 4, 5), 1.0);
        assert_eq!(s.data.iter().filter(|&&v| v > 0.0).count(), 1);
    }

    #[test]
    fn shift_range_is_enforced() {
        let o = ramp_obs(1, 40, 40);
        let p = AugParams::default();
        assert!(apply_shift(&o, 16, -16, &p).is_ok());
        assert!(matches!(apply_shift(&o, 17, 0, &p), Err(Error::Range(_))));
        assert!(matches!(apply_shift(&o, 0, -17, &p), Err(Error::Range(_))));
        assert_eq!(apply_shift(&o, 0, 0, &p).unwrap(), o);
    }

    #[test]
    fn rotate_quarter_turn_permutes_grid() {
        let (a, b, c, d) = (0.1, 0.2, 0.3, 0.4);
        let o = single_channel_grid([a, b, c, d]);
        let r = apply_rotate(&o, 90.0, &AugParams::default()).unwrap();
        for ch in 0..3 {
            assert_eq!(plane(&r, ch), vec![b, d, a, c]);
        }
    }

    #[test]
    fn rotate_zero_and_double_half_turn_are_identity() {
        let o = ramp_obs(3, 9, 9);
        let p = AugParams::default();
        assert_eq!(apply_rotate(&o, 0.0, &p).unwrap(), o);
        let twice = apply_rotate(&apply_rotate(&o, 180.0, &p).unwrap(), 180.0, &p).unwrap();
        assert_eq!(twice, o);
        assert!(matches!(apply_rotate(&o, 180.5, &p), Err(Error::Range(_))));
    }

    #[test]
    fn bilinear_rotation_agrees_with_exact_path_near_quarter_turn() {
        let o = ramp_obs(1, 9, 9);
        let exact = o.rotated(90.0);
        let near = o.rotated(89.9999);
        let max = exact
            .data
            .iter()
            .zip(near.data.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f32, f32::max);
        assert!(max < 1e-3, "max deviation {max}");
    }

    #[test]
    fn conv_identity_and_zero_kernels() {
        let o = ramp_obs(3, 8, 8);
        assert_eq!(apply_conv(&o, &ConvKernel::identity(3)).unwrap(), o);
        let z = apply_conv(&o, &ConvKernel::zeros(3)).unwrap();
        assert!(z.data.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn conv_rejects_bad_kernels() {
        let o = ramp_obs(1, 8, 8);
        let mut k = ConvKernel::identity(3);
        k.weights.pop();
        assert!(matches!(apply_conv(&o, &k), Err(Error::InvalidSpec(_))));
        assert!(apply_conv(&o, &ConvKernel::zeros(2)).is_err());
    }

    #[test]
    fn conv_response_moves_with_impulse() {
        let kernel = ConvKernel::sample(3, 1.0, &mut stream(5, 0));
        let mut a = Observation::zeros(1, 12, 12);
        let mut b = Observation::zeros(1, 12, 12);
        a.data[5 * 12 + 5] = 1.0;
        b.data[7 * 12 + 4] = 1.0;
        // add a positive bias so clipping does not hide the response
        let ra = apply_conv(&a, &kernel).unwrap();
        let rb = apply_conv(&b, &kernel).unwrap();
        for c in 0..3 {
            for dy in -1i32..=1 {
                for dx in -1i32..=1 {
                    let va = ra.get(c, (5 + dy) as usize, (5 + dx) as usize);
                    let vb = rb.get(c, (7 + dy) as usize, (4 + dx) as usize);
                    assert_eq!(va, vb);
                }
            }
        }
    }

    #[test]
    fn overlay_arithmetic() {
        let o = Observation::new(1, 1, 1, vec![0.4, 0.4, 0.4]).unwrap();
        let d = Image::new(1, 1, vec![0.8, 0.8, 0.8]).unwrap();
        assert_eq!(apply_overlay(&o, &d, 0.0).unwrap(), o);
        let half = apply_overlay(&o, &d, 0.5).unwrap();
        assert!(half.data.iter().all(|v| (v - 0.6).abs() < 1e-6));
        assert_eq!(apply_overlay(&o, &d, 1.0).unwrap().data, d.data);
        let wrong = Image::filled(2, 1, 0.0);
        assert!(matches!(apply_overlay(&o, &wrong, 0.5), Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn composite_identities() {
        let o = ramp_obs(3, 8, 8);
        let bank = DistractorBank::procedural(3, 8, 8, 0);
        let rs = AugDraw {
            spec: AugmentationSpec::new(AugKind::RotateShift),
            params: DrawParams::RotateShift {
                angle_deg: 0.0,
                dx: 0,
                dy: 0,
            },
            seed: 0,
        };
        assert_eq!(apply_composite(&o, &rs, &bank).unwrap(), o);
        let co = AugDraw {
            spec: AugmentationSpec::new(AugKind::ConvOverlay),
            params: DrawParams::ConvOverlay {
                kernel: ConvKernel::identity(3),
                distractor: 1,
                alpha: 0.0,
            },
            seed: 0,
        };
        assert_eq!(apply_composite(&o, &co, &bank).unwrap(), o);
        let not_composite = AugDraw {
            spec: AugmentationSpec::new(AugKind::Shift),
            params: DrawParams::Shift { dx: 0, dy: 0 },
            seed: 0,
        };
        assert!(matches!(
            apply_composite(&o, &not_composite, &bank),
            Err(Error::InvalidSpec(_))
        ));
    }

    #[test]
    fn composite_rotate_then_shift_on_grid() {
        // rot90 of [[a,b],[c,d]] is [[b,d],[a,c]]; shifting right by one
        // with zero fill gives [[0,b],[0,a]].
        let (a, b, c, d) = (0.1, 0.2, 0.3, 0.4);
        let o = single_channel_grid([a, b, c, d]);
        let draw = AugDraw {
            spec: AugmentationSpec::new(AugKind::RotateShift),
            params: DrawParams::RotateShift {
                angle_deg: 90.0,
                dx: 1,
                dy: 0,
            },
            seed: 0,
        };
        let bank = DistractorBank::procedural(1, 2, 2, 0);
        let out = apply_composite(&o, &draw, &bank).unwrap();
        assert_eq!(plane(&out, 0), vec![0.0, b, 0.0, a]);
    }

    #[test]
    fn identity_pool_is_identity() {
        let o = ramp_obs(3, 8, 8);
        let bank = DistractorBank::procedural(2, 8, 8, 0);
        let pool = AugPool::None.specs(AugParams::default());
        let (out, draw) = sample_strong(&o, &pool, &bank, &mut stream(1, 1)).unwrap();
        assert_eq!(out, o);
        assert_eq!(draw.params, DrawParams::Identity);
        assert!(matches!(
            sample_strong(&o, &[], &bank, &mut stream(1, 1)),
            Err(Error::InvalidSpec(_))
        ));
    }

    #[test]
    fn same_seed_same_spec_sequence() {
        let o = ramp_obs(1, 8, 8);
        let bank = DistractorBank::procedural(4, 8, 8, 0);
        let pool = AugPool::All.specs(AugParams::default());
        let run = |seed| {
            let mut r = stream(seed, 3);
            (0..50)
                .map(|_| sample_strong(&o, &pool, &bank, &mut r).unwrap().1.spec.kind)
                .collect::<Vec<_>>()
        };
        assert_eq!(run(9), run(9));
        assert_ne!(run(9), run(10));
    }

    #[test]
    fn geometric_ops_move_non_uniform_content() {
        let o = ramp_obs(3, 12, 12);
        let p = AugParams::default();
        assert_ne!(apply_shift(&o, 1, 0, &p).unwrap(), o);
        assert_ne!(apply_shift(&o, 0, -2, &p).unwrap(), o);
        assert_ne!(apply_rotate(&o, 30.0, &p).unwrap(), o);
        assert_ne!(apply_rotate(&o, -90.0, &p).unwrap(), o);
    }

    fn arb_obs() -> impl Strategy<Value = Observation> {
        (1usize..=3, 4usize..=10).prop_flat_map(|(frames, size)| {
            proptest::collection::vec(0.0f32..=1.0, frames * 3 * size * size)
                .prop_map(move |data| Observation::new(frames, size, size, data).unwrap())
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn strong_draws_preserve_shape_range_and_replay(obs in arb_obs(), seed in any::<u64>()) {
            let bank = DistractorBank::procedural(3, obs.height, obs.width, 1);
            let pool = AugPool::All.specs(AugParams::default());
            let mut r = stream(seed, 0);
            let (out, draw) = sample_strong(&obs, &pool, &bank, &mut r).unwrap();
            prop_assert!(out.same_shape(&obs));
            prop_assert!(out.data.iter().all(|v| (0.0..=1.0).contains(v)));
            let again = apply_draw(&obs, &draw, &bank).unwrap();
            prop_assert_eq!(again.data, out.data);
        }

        #[test]
        fn every_frame_gets_the_same_transform(frame in proptest::collection::vec(0.0f32..=1.0, 3 * 36), seed in any::<u64>()) {
            let img = Image::new(6, 6, frame).unwrap();
            let obs = Observation::from_frames(&[img.clone(), img.clone(), img]).unwrap();
            let bank = DistractorBank::procedural(3, 6, 6, 2);
            let pool = AugPool::All.specs(AugParams::default());
            let (out, _) = sample_strong(&obs, &pool, &bank, &mut stream(seed, 0)).unwrap();
            prop_assert_eq!(out.frame(0), out.frame(1));
            prop_assert_eq!(out.frame(1), out.frame(2));
        }
    }
}
