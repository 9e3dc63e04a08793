use rand::Rng;

use super::image::{Image, CHANNELS_PER_FRAME};
use crate::rng;
use crate::{Error, Result};

/// Distractor images for the overlay augmentation.
#[derive(Clone, Debug)]
pub struct DistractorBank {
    height: usize,
    width: usize,
    images: Vec<Image>,
}

impl DistractorBank {
    /// `count` procedurally generated distractors cycling through smooth
    /// multi-octave value noise, linear colour gradients and checkerboards.
    pub fn procedural(count: usize, height: usize, width: usize, seed: u64) -> Self {
        let images = (0..count)
            .map(|id| {
                let mut r = rng::stream(rng::mix(seed, id as u64), 0);
                match id % 3 {
                    0 => value_noise(height, width, &mut r),
                    1 => gradient(height, width, &mut r),
                    _ => checkerboard(height, width, &mut r),
                }
            })
            .collect();
        Self {
            height,
            width,
            images,
        }
    }

    pub fn from_images(images: Vec<Image>) -> Result<Self> {
        let first = images
            .first()
            .ok_or_else(|| Error::InvalidSpec("distractor bank is empty".into()))?;
        let (height, width) = (first.height, first.width);
        if images.iter().any(|i| i.height != height || i.width != width) {
            return Err(Error::InvalidSpec("distractors must share one size".into()));
        }
        Ok(Self {
            height,
            width,
            images,
        })
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn get(&self, id: usize) -> Option<&Image> {
        self.images.get(id)
    }

    pub fn size(&self) -> (usize, usize) {
        (self.height, self.width)
    }
}

fn random_color<R: Rng>(r: &mut R) -> [f32; 3] {
    [r.random(), r.random(), r.random()]
}

fn smoothstep(t: f32) -> f32 {
    t * t * (3.0 - 2.0 * t)
}

pub(crate) fn value_noise<R: Rng>(h: usize, w: usize, r: &mut R) -> Image {
    let mut img = Image::filled(h, w, 0.0);
    let octaves = [(4usize, 0.55f32), (8, 0.3), (16, 0.15)];
    for &(cells, amp) in &octaves {
        let lattice: Vec<[f32; 3]> = (0..(cells + 1) * (cells + 1))
            .map(|_| random_color(r))
            .collect();
        for y in 0..h {
            let gy = y as f32 / h as f32 * cells as f32;
            let (y0, ty) = (gy.floor() as usize, smoothstep(gy.fract()));
            for x in 0..w {
                let gx = x as f32 / w as f32 * cells as f32;
                let (x0, tx) = (gx.floor() as usize, smoothstep(gx.fract()));
                let at = |yy: usize, xx: usize| lattice[yy * (cells + 1) + xx];
                let (a, b, c, d) = (at(y0, x0), at(y0, x0 + 1), at(y0 + 1, x0), at(y0 + 1, x0 + 1));
                for ch in 0..CHANNELS_PER_FRAME {
                    let top = a[ch] + (b[ch] - a[ch]) * tx;
                    let bot = c[ch] + (d[ch] - c[ch]) * tx;
                    let v = img.get(ch, y, x) + amp * (top + (bot - top) * ty);
                    img.set(ch, y, x, v);
                }
            }
        }
    }
    img.data.iter_mut().for_each(|v| *v = v.clamp(0.0, 1.0));
    img
}

fn gradient<R: Rng>(h: usize, w: usize, r: &mut R) -> Image {
    let (a, b) = (random_color(r), random_color(r));
    let theta: f32 = r.random_range(0.0..std::f32::consts::TAU);
    let (s, c) = theta.sin_cos();
    let mut img = Image::filled(h, w, 0.0);
    for y in 0..h {
        for x in 0..w {
            let u = (x as f32 / w as f32 - 0.5) * c + (y as f32 / h as f32 - 0.5) * s;
            let t = (u / std::f32::consts::SQRT_2 + 0.5).clamp(0.0, 1.0);
            for ch in 0..CHANNELS_PER_FRAME {
                img.set(ch, y, x, a[ch] + (b[ch] - a[ch]) * t);
            }
        }
    }
    img
}

fn checkerboard<R: Rng>(h: usize, w: usize, r: &mut R) -> Image {
    let (a, b) = (random_color(r), random_color(r));
    let cell = r.random_range(4..=16usize);
    let (oy, ox) = (r.random_range(0..cell), r.random_range(0..cell));
    let mut img = Image::filled(h, w, 0.0);
    for y in 0..h {
        for x in 0..w {
            let col = if ((y + oy) / cell + (x + ox) / cell) % 2 == 0 { a } else { b };
            for ch in 0..CHANNELS_PER_FRAME {
                img.set(ch, y, x, col[ch]);
            }
        }
    }
    img
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn procedural_bank_is_deterministic_and_in_range() {
        let a = DistractorBank::procedural(6, 20, 20, 3);
        let b = DistractorBank::procedural(6, 20, 20, 3);
        assert_eq!(a.len(), 6);
        for i in 0..6 {
            let (x, y) = (a.get(i).unwrap(), b.get(i).unwrap());
            assert_eq!(x, y);
            assert!(x.data.iter().all(|v| (0.0..=1.0).contains(v)));
        }
        assert_ne!(a.get(0), a.get(3));
    }

    #[test]
    fn mixed_sizes_rejected() {
        let imgs = vec![Image::filled(4, 4, 0.0), Image::filled(5, 4, 0.0)];
        assert!(DistractorBank::from_images(imgs).is_err());
    }
}
