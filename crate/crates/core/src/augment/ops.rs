//! Pixel kernels shared by the augmentation operators and the environment
//! wrappers. All kernels act plane by plane, so every channel of every stacked
//! frame receives the same transform.

use super::image::CHANNELS_PER_FRAME;
use super::spec::ConvKernel;

/// How pixels uncovered by a geometric transform are filled.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fill {
    Zero,
    Edge,
}

/// Moves content by `(dx, dy)`: `out[y][x] = src[y - dy][x - dx]`.
pub fn translate_planes(
    src: &[f32],
    planes: usize,
    h: usize,
    w: usize,
    dx: i32,
    dy: i32,
    fill: Fill,
) -> Vec<f32> {
    if dx == 0 && dy == 0 {
        return src.to_vec();
    }
    let mut out = vec![0.0f32; src.len()];
    let (hi, wi) = (h as i64, w as i64);
    for p in 0..planes {
        let base = p * h * w;
        for y in 0..hi {
            let sy = y - dy as i64;
            let sy = match fill {
                Fill::Edge => sy.clamp(0, hi - 1),
                Fill::Zero if sy < 0 || sy >= hi => continue,
                Fill::Zero => sy,
            };
            let src_row = &src[base + sy as usize * w..base + (sy as usize + 1) * w];
            let dst_row = &mut out[base + y as usize * w..base + (y as usize + 1) * w];
            for x in 0..wi {
                let sx = x - dx as i64;
                let v = match fill {
                    Fill::Edge => src_row[sx.clamp(0, wi - 1) as usize],
                    Fill::Zero if sx < 0 || sx >= wi => 0.0,
                    Fill::Zero => src_row[sx as usize],
                };
                dst_row[x as usize] = v;
            }
        }
    }
    out
}

/// Number of counter-clockwise quarter turns when `angle_deg` is an exact
/// multiple of 90 degrees.
fn quarter_turns(angle_deg: f32) -> Option<u32> {
    let q = angle_deg / 90.0;
    if q.fract() == 0.0 {
        Some((q as i64).rem_euclid(4) as u32)
    } else {
        None
    }
}

/// Rotates counter-clockwise (as displayed, rows growing downwards) about the
/// image centre. Multiples of 90 degrees on square images are exact
/// permutations; everything else is bilinear with zero-filled corners.
pub fn rotate_planes(src: &[f32], planes: usize, h: usize, w: usize, angle_deg: f32) -> Vec<f32> {
    match quarter_turns(angle_deg) {
        Some(0) => return src.to_vec(),
        Some(2) => return rotate_exact(src, planes, h, w, 2),
        Some(k) if h == w => return rotate_exact(src, planes, h, w, k),
        _ => {}
    }
    let theta = (angle_deg as f64).to_radians();
    let (s, c) = theta.sin_cos();
    let cx = (w as f64 - 1.0) / 2.0;
    let cy = (h as f64 - 1.0) / 2.0;

    // (source index, weight) for up to four neighbours per output pixel.
    let mut taps: Vec<[(u32, f32); 4]> = Vec::with_capacity(h * w);
    for y in 0..h {
        for x in 0..w {
            let xr = x as f64 - cx;
            let yr = y as f64 - cy;
            let xs = c * xr - s * yr + cx;
            let ys = s * xr + c * yr + cy;
            let x0 = xs.floor();
            let y0 = ys.floor();
            let fx = xs - x0;
            let fy = ys - y0;
            let mut t = [(0u32, 0.0f32); 4];
            let corners = [
                (x0, y0, (1.0 - fx) * (1.0 - fy)),
                (x0 + 1.0, y0, fx * (1.0 - fy)),
                (x0, y0 + 1.0, (1.0 - fx) * fy),
                (x0 + 1.0, y0 + 1.0, fx * fy),
            ];
            for (slot, &(px, py, wt)) in t.iter_mut().zip(corners.iter()) {
                if px >= 0.0 && py >= 0.0 && (px as usize) < w && (py as usize) < h {
                    *slot = ((py as usize * w + px as usize) as u32, wt as f32);
                }
            }
            taps.push(t);
        }
    }
    let mut out = vec![0.0f32; src.len()];
    for p in 0..planes {
        let plane = &src[p * h * w..(p + 1) * h * w];
        let dst = &mut out[p * h * w..(p + 1) * h * w];
        for (o, t) in dst.iter_mut().zip(taps.iter()) {
            let v: f32 = t.iter().map(|&(i, wt)| wt * plane[i as usize]).sum();
            *o = v.clamp(0.0, 1.0);
        }
    }
    out
}

fn rotate_exact(src: &[f32], planes: usize, h: usize, w: usize, turns: u32) -> Vec<f32> {
    let mut out = vec![0.0f32; src.len()];
    for p in 0..planes {
        let plane = &src[p * h * w..(p + 1) * h * w];
        let dst = &mut out[p * h * w..(p + 1) * h * w];
        for y in 0..h {
            for x in 0..w {
                let (sy, sx) = match turns {
                    1 => (x, w - 1 - y),
                    2 => (h - 1 - y, w - 1 - x),
                    3 => (h - 1 - x, y),
                    _ => (y, x),
                };
                dst[y * w + x] = plane[sy * w + sx];
            }
        }
    }
    out
}

/// Same 3-in/3-out convolution on every frame, zero padding, clipped to `[0, 1]`.
pub fn convolve_frames(src: &[f32], frames: usize, h: usize, w: usize, kernel: &ConvKernel) -> Vec<f32> {
    let k = kernel.size;
    let pad = (k / 2) as i64;
    let plane = h * w;
    let frame_len = CHANNELS_PER_FRAME * plane;
    let mut out = vec![0.0f32; src.len()];
    let mut acc = vec![0.0f32; plane];
    for f in 0..frames {
        let frame = &src[f * frame_len..(f + 1) * frame_len];
        for o in 0..CHANNELS_PER_FRAME {
            acc.iter_mut().for_each(|a| *a = 0.0);
            for i in 0..CHANNELS_PER_FRAME {
                let input = &frame[i * plane..(i + 1) * plane];
                for ky in 0..k {
                    let oy = ky as i64 - pad;
                    for kx in 0..k {
                        let wt = kernel.weight(o, i, ky, kx);
                        if wt == 0.0 {
                            continue;
                        }
                        let ox = kx as i64 - pad;
                        let y_lo = (-oy).max(0) as usize;
                        let y_hi = (h as i64 - oy).min(h as i64) as usize;
                        let x_lo = (-ox).max(0) as usize;
                        let x_hi = (w as i64 - ox).min(w as i64) as usize;
                        for y in y_lo..y_hi {
                            let sy = (y as i64 + oy) as usize;
                            let row = &input[sy * w..(sy + 1) * w];
                            let dst = &mut acc[y * w..(y + 1) * w];
                            for x in x_lo..x_hi {
                                dst[x] += wt * row[(x as i64 + ox) as usize];
                            }
                        }
                    }
                }
            }
            let dst = &mut out[f * frame_len + o * plane..f * frame_len + (o + 1) * plane];
            for (d, a) in dst.iter_mut().zip(acc.iter()) {
                *d = a.clamp(0.0, 1.0);
            }
        }
    }
    out
}

/// `(1 - alpha) * src + alpha * distractor`, the distractor frame repeated
/// across the stack.
pub fn blend_frames(src: &[f32], frames: usize, distractor: &[f32], alpha: f32) -> Vec<f32> {
    let frame_len = distractor.len();
    let mut out = Vec::with_capacity(src.len());
    for f in 0..frames {
        let frame = &src[f * frame_len..(f + 1) * frame_len];
        out.extend(
            frame
                .iter()
                .zip(distractor.iter())
                .map(|(&s, &d)| ((1.0 - alpha) * s + alpha * d).clamp(0.0, 1.0)),
        );
    }
    out
}
