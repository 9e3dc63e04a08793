//! PNG output of observations and loading of distractor images.

use std::path::{Path, PathBuf};

use image::{imageops::FilterType, RgbImage};
use sada_core::augment::{Image, Observation};
use sada_core::{DistractorBank, Error, Result};

fn image_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::validation(path.display().to_string(), e.to_string())
}

/// One RGB frame as an 8-bit image.
pub fn to_rgb(img: &Image) -> RgbImage {
    let plane = img.height * img.width;
    RgbImage::from_fn(img.width as u32, img.height as u32, |x, y| {
        let i = y as usize * img.width + x as usize;
        let px = |c: usize| (img.data[c * plane + i].clamp(0.0, 1.0) * 255.0).round() as u8;
        image::Rgb([px(0), px(1), px(2)])
    })
}

/// Newest frame of a stacked observation.
pub fn newest_frame(obs: &Observation) -> RgbImage {
    to_rgb(&obs.frame(0))
}

pub fn save_png(img: &RgbImage, path: &Path) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    img.save(path).map_err(|e| image_err(path, e))
}

/// Nearest-neighbour upscale so small frames stay legible.
pub fn upscale(img: &RgbImage, factor: u32) -> RgbImage {
    image::imageops::resize(img, img.width() * factor, img.height() * factor, FilterType::Nearest)
}

/// Side-by-side strip of equally sized images with a 2 px gap.
pub fn strip(images: &[RgbImage]) -> RgbImage {
    let gap = 2;
    let h = images.iter().map(|i| i.height()).max().unwrap_or(1);
    let w: u32 = images.iter().map(|i| i.width() + gap).sum::<u32>().saturating_sub(gap).max(1);
    let mut out = RgbImage::from_pixel(w, h, image::Rgb([255, 255, 255]));
    let mut x = 0;
    for img in images {
        image::imageops::replace(&mut out, img, i64::from(x), 0);
        x += img.width() + gap;
    }
    out
}

fn load_one(path: &Path, size: usize) -> Result<Image> {
    let img = image::open(path).map_err(|e| image_err(path, e))?;
    let rgb = img.resize_exact(size as u32, size as u32, FilterType::Triangle).to_rgb8();
    let plane = size * size;
    let mut data = vec![0.0f32; 3 * plane];
    for (x, y, p) in rgb.enumerate_pixels() {
        let i = y as usize * size + x as usize;
        for c in 0..3 {
            data[c * plane + i] = f32::from(p[c]) / 255.0;
        }
    }
    Image::new(size, size, data)
}

/// Every PNG or JPEG in `dir` (sorted by name), resized to `size`.
pub fn load_distractors(dir: &Path, size: usize) -> Result<DistractorBank> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| image_err(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension()
                .and_then(|e| e.to_str())
                .map(|e| matches!(e.to_ascii_lowercase().as_str(), "png" | "jpg" | "jpeg"))
                .unwrap_or(false)
        })
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(Error::validation(dir.display().to_string(), "no png or jpeg images found"));
    }
    let images = paths.iter().map(|p| load_one(p, size)).collect::<Result<Vec<_>>>()?;
    DistractorBank::from_images(images)
}
