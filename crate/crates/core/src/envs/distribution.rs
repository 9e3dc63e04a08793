use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::render::{Palette, VideoParams};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Train,
    Color,
    Video,
    ColorVideo,
    Rotate,
    Shift,
    RotateShift,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Level {
    Easy,
    Hard,
}

impl Family {
    pub const TEST: [Family; 6] = [
        Family::Rotate,
        Family::Shift,
        Family::RotateShift,
        Family::Color,
        Family::Video,
        Family::ColorVideo,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Train => "train",
            Family::Color => "color",
            Family::Video => "video",
            Family::ColorVideo => "color_video",
            Family::Rotate => "rotate",
            Family::Shift => "shift",
            Family::RotateShift => "rotate_shift",
        }
    }

    pub fn is_geometric(self) -> bool {
        matches!(self, Family::Rotate | Family::Shift | Family::RotateShift)
    }

    pub fn is_photometric(self) -> bool {
        matches!(self, Family::Color | Family::Video | Family::ColorVideo)
    }
}

impl Level {
    pub fn name(self) -> &'static str {
        match self {
            Level::Easy => "easy",
            Level::Hard => "hard",
        }
    }
}

/// One evaluation distribution: the training scene or one of the twelve
/// perturbed test sets.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistributionSpec {
    pub family: Family,
    pub level: Level,
    /// Overrides the level's default intensity (degrees for rotation,
    /// pixels for shift, palette jitter for colour, contrast for video).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intensity: Option<f32>,
}

impl DistributionSpec {
    pub fn train() -> Self {
        Self {
            family: Family::Train,
            level: Level::Easy,
            intensity: None,
        }
    }

    pub fn new(family: Family, level: Level) -> Self {
        Self {
            family,
            level,
            intensity: None,
        }
    }

    pub fn with_intensity(mut self, intensity: f32) -> Self {
        self.intensity = Some(intensity);
        self
    }

    /// The twelve test distributions, geometric first.
    pub fn tests() -> Vec<Self> {
        let mut out = Vec::with_capacity(12);
        for family in Family::TEST {
            for level in [Level::Easy, Level::Hard] {
                out.push(Self::new(family, level));
            }
        }
        out
    }

    /// Training distribution followed by the twelve tests.
    pub fn all() -> Vec<Self> {
        let mut out = vec![Self::train()];
        out.extend(Self::tests());
        out
    }

    pub fn name(&self) -> String {
        match self.family {
            Family::Train => "train".to_string(),
            f => format!("{}_{}", f.name(), self.level.name()),
        }
    }

    /// Default intensity for the family and level.
    pub fn default_intensity(&self) -> f32 {
        match (self.family, self.level) {
            (Family::Train, _) => 0.0,
            (Family::Rotate | Family::RotateShift, Level::Easy) => 45.0,
            (Family::Rotate | Family::RotateShift, Level::Hard) => 180.0,
            (Family::Shift, Level::Easy) => 8.0,
            (Family::Shift, Level::Hard) => 16.0,
            (Family::Color | Family::ColorVideo, Level::Easy) => 0.1,
            (Family::Color | Family::ColorVideo, Level::Hard) => 1.0,
            (Family::Video, Level::Easy) => 0.15,
            (Family::Video, Level::Hard) => 0.5,
        }
    }

    pub fn intensity(&self) -> f32 {
        self.intensity.unwrap_or_else(|| self.default_intensity())
    }

    pub fn validate(&self) -> Result<()> {
        let i = self.intensity();
        if !i.is_finite() || i < 0.0 {
            return Err(Error::InvalidSpec(format!("intensity {i} for {}", self.name())));
        }
        if self.family.is_geometric() && matches!(self.family, Family::Rotate | Family::RotateShift) && i > 180.0 {
            return Err(Error::InvalidSpec(format!("rotation intensity {i} exceeds 180")));
        }
        Ok(())
    }

    /// Draws the per-episode perturbation.
    pub fn sample_episode<R: Rng + ?Sized>(&self, base: &Palette, rng: &mut R) -> EpisodeDraw {
        let intensity = self.intensity();
        let mut draw = EpisodeDraw::neutral(*base);
        let shift_px = match self.level {
            Level::Easy => 8,
            Level::Hard => 16,
        };
        let angle = |rng: &mut R, max: f32| if max == 0.0 { 0.0 } else { rng.random_range(-max..=max) };
        match self.family {
            Family::Train => {}
            Family::Rotate => draw.angle_deg = angle(rng, intensity),
            Family::Shift => {
                let m = intensity.round() as i32;
                draw.dx = rng.random_range(-m..=m);
                draw.dy = rng.random_range(-m..=m);
            }
            Family::RotateShift => {
                draw.angle_deg = angle(rng, intensity);
                draw.dx = rng.random_range(-shift_px..=shift_px);
                draw.dy = rng.random_range(-shift_px..=shift_px);
            }
            Family::Color => draw.palette = base.recolored(intensity, rng),
            Family::Video => draw.video = Some(VideoParams::sample(self.level, intensity, rng)),
            Family::ColorVideo => {
                draw.palette = base.recolored(intensity, rng);
                let contrast = match self.level {
                    Level::Easy => 0.15,
                    Level::Hard => 0.5,
                };
                draw.video = Some(VideoParams::sample(self.level, contrast, rng));
            }
        }
        draw
    }
}

impl fmt::Display for DistributionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for DistributionSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "train" {
            return Ok(Self::train());
        }
        Self::tests()
            .into_iter()
            .find(|d| d.name() == s)
            .ok_or_else(|| Error::InvalidSpec(format!("unknown distribution `{s}`")))
    }
}

/// Perturbation parameters held fixed for one episode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeDraw {
    pub angle_deg: f32,
    pub dx: i32,
    pub dy: i32,
    pub palette: Palette,
    pub video: Option<VideoParams>,
}

impl EpisodeDraw {
    pub fn neutral(palette: Palette) -> Self {
        Self {
            angle_deg: 0.0,
            dx: 0,
            dy: 0,
            palette,
            video: None,
        }
    }

    pub fn is_geometric_identity(&self) -> bool {
        self.angle_deg == 0.0 && self.dx == 0 && self.dy == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_tests_plus_train() {
        let all = DistributionSpec::all();
        assert_eq!(all.len(), 13);
        let mut names: Vec<_> = all.iter().map(|d| d.name()).collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), 13);
        for d in &all {
            assert_eq!(d.name().parse::<DistributionSpec>().unwrap(), *d);
        }
        assert!("rotate_medium".parse::<DistributionSpec>().is_err());
    }

    #[test]
    fn split_into_geometric_and_photometric() {
        let tests = DistributionSpec::tests();
        assert_eq!(tests.iter().filter(|d| d.family.is_geometric()).count(), 6);
        assert_eq!(tests.iter().filter(|d| d.family.is_photometric()).count(), 6);
    }
}
