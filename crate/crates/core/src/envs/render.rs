use rand::Rng;
use serde::{Deserialize, Serialize};

use super::distribution::Level;
use crate::augment::Image;

pub type Rgb = [f32; 3];

/// Colours of the rendered scene.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Palette {
    pub floor_a: Rgb,
    pub floor_b: Rgb,
    pub agent: Rgb,
    pub goal: Rgb,
}

impl Default for Palette {
    fn default() -> Self {
        Self {
            floor_a: [0.22, 0.27, 0.33],
            floor_b: [0.30, 0.36, 0.42],
            agent: [0.90, 0.35, 0.20],
            goal: [0.25, 0.85, 0.35],
        }
    }
}

impl Palette {
    /// Jitters every colour by up to `amount` per channel; `amount >= 1`
    /// replaces the palette with uniformly random colours.
    pub fn recolored<R: Rng + ?Sized>(&self, amount: f32, rng: &mut R) -> Palette {
        let mut jitter = |c: Rgb| -> Rgb {
            let mut out = c;
            for v in out.iter_mut() {
                *v = if amount >= 1.0 {
                    rng.random()
                } else if amount > 0.0 {
                    (*v + rng.random_range(-amount..=amount)).clamp(0.0, 1.0)
                } else {
                    *v
                };
            }
            out
        };
        Palette {
            floor_a: jitter(self.floor_a),
            floor_b: jitter(self.floor_b),
            agent: jitter(self.agent),
            goal: jitter(self.goal),
        }
    }
}

/// Animated procedural background replacing the floor texture.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VideoParams {
    pub color_a: Rgb,
    pub color_b: Rgb,
    /// Peak-to-peak modulation in `[0, 1]`.
    pub contrast: f32,
    /// Phase advance per rendered frame, radians.
    pub speed: f32,
    pub freq: [[f32; 2]; 3],
    pub phase: [f32; 3],
}

impl VideoParams {
    pub fn sample<R: Rng + ?Sized>(level: Level, contrast: f32, rng: &mut R) -> Self {
        let speed = match level {
            Level::Easy => 0.05,
            Level::Hard => 0.4,
        };
        let fmax = match level {
            Level::Easy => 6.0,
            Level::Hard => 14.0,
        };
        let mut freq = [[0.0; 2]; 3];
        for f in freq.iter_mut() {
            *f = [rng.random_range(-fmax..fmax), rng.random_range(-fmax..fmax)];
        }
        Self {
            color_a: [rng.random(), rng.random(), rng.random()],
            color_b: [rng.random(), rng.random(), rng.random()],
            contrast: contrast.clamp(0.0, 1.0),
            speed,
            freq,
            phase: [
                rng.random_range(0.0..std::f32::consts::TAU),
                rng.random_range(0.0..std::f32::consts::TAU),
                rng.random_range(0.0..std::f32::consts::TAU),
            ],
        }
    }

    fn value(&self, u: f32, v: f32, t: f32) -> f32 {
        let mut s = 0.0;
        for (k, f) in self.freq.iter().enumerate() {
            s += (f[0] * u + f[1] * v + self.phase[k] + self.speed * t * (k as f32 + 1.0)).sin();
        }
        0.5 + 0.5 * self.contrast * (s / 3.0)
    }
}

/// Positions in arena coordinates `[-1, 1]^2`.
pub struct SceneState {
    pub agent: [f64; 2],
    pub goal: [f64; 2],
}

pub const AGENT_RADIUS: f64 = 0.10;
pub const GOAL_RADIUS: f64 = 0.12;
const TILE: usize = 12;

fn to_px(coord: f64, size: usize) -> f64 {
    (coord + 1.0) / 2.0 * (size as f64 - 1.0)
}

fn paint_disc(img: &mut Image, center: [f64; 2], radius: f64, color: Rgb) {
    let size = img.width;
    let (cx, cy) = (to_px(center[0], size), to_px(center[1], img.height));
    let r = radius / 2.0 * (size as f64 - 1.0);
    let y_lo = (cy - r - 1.0).floor().max(0.0) as usize;
    let y_hi = ((cy + r + 1.0).ceil() as usize).min(img.height - 1);
    let x_lo = (cx - r - 1.0).floor().max(0.0) as usize;
    let x_hi = ((cx + r + 1.0).ceil() as usize).min(img.width - 1);
    for y in y_lo..=y_hi {
        for x in x_lo..=x_hi {
            let d = ((x as f64 - cx).powi(2) + (y as f64 - cy).powi(2)).sqrt();
            let cover = (r + 0.5 - d).clamp(0.0, 1.0) as f32;
            if cover > 0.0 {
                for (ch, &c) in color.iter().enumerate() {
                    let old = img.get(ch, y, x);
                    img.set(ch, y, x, old + (c - old) * cover);
                }
            }
        }
    }
}

/// Renders one frame: floor (tiles or animated background), goal, agent.
pub fn render_scene(state: &SceneState, size: usize, palette: &Palette, video: Option<&VideoParams>, t: f32) -> Image {
    let mut img = Image::filled(size, size, 0.0);
    for y in 0..size {
        for x in 0..size {
            let color = match video {
                Some(v) => {
                    let s = v.value(x as f32 / size as f32, y as f32 / size as f32, t);
                    let mut c = [0.0; 3];
                    for ch in 0..3 {
                        c[ch] = v.color_a[ch] + (v.color_b[ch] - v.color_a[ch]) * s;
                    }
                    c
                }
                None if ((x / TILE) + (y / TILE)) % 2 == 0 => palette.floor_a,
                None => palette.floor_b,
            };
            for (ch, &c) in color.iter().enumerate() {
                img.set(ch, y, x, c.clamp(0.0, 1.0));
            }
        }
    }
    paint_disc(&mut img, state.goal, GOAL_RADIUS, palette.goal);
    paint_disc(&mut img, state.agent, AGENT_RADIUS, palette.agent);
    img
}
