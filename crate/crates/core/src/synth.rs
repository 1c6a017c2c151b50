//! Deterministic synthetic sequences: one moving object with injected
//! detection dropouts, plus the exact ground-truth masks.
//!
//! Randomness comes from xoshiro256** seeded through SplitMix64. The dropout
//! schedule uses the generator as seeded; Gaussian noise uses the same
//! generator advanced by one `jump()` (2^128 steps), so changing the noise level
//! never changes which frames drop out. Uniform doubles take the top 53 bits of
//! a draw; Gaussians use the Box-Muller transform, emitting the cosine branch
//! first and the sine branch on the following call.

use std::f64::consts::TAU;

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;

use crate::error::{ConfigError, Result};
use crate::tensor::{BinaryMask, Category, CategoryTable, LogitMap, MAX_CATEGORIES};

pub const DEFAULT_LOGIT_CONTRAST: f64 = 4.0;
pub const DEFAULT_NOISE_SIGMA: f64 = 0.5;

/// Seeded xoshiro256** with uniform and Gaussian helpers.
#[derive(Debug, Clone)]
pub struct SynthRng {
    inner: Xoshiro256StarStar,
    spare: Option<f64>,
}

impl SynthRng {
    pub fn new(seed: u64) -> Self {
        Self {
            inner: Xoshiro256StarStar::seed_from_u64(seed),
            spare: None,
        }
    }

    /// Independent stream: this generator advanced by 2^128 steps.
    pub fn jumped(&self) -> Self {
        let mut inner = self.inner.clone();
        inner.jump();
        Self { inner, spare: None }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform in `[0, 1)`.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal deviate.
    pub fn next_gaussian(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        // u1 in (0, 1] keeps ln finite
        let u1 = ((self.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64);
        let u2 = self.next_f64();
        let r = (-2.0 * u1.ln()).sqrt();
        self.spare = Some(r * (TAU * u2).sin());
        r * (TAU * u2).cos()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObjectShape {
    /// Axis-aligned square of side `size`.
    Rectangle,
    /// Disc of diameter `size` inscribed in the square.
    Disc,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Dropout {
    None,
    /// Each frame independently drops with this probability.
    Probability(f64),
    /// Exactly these frame indices drop.
    Frames(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub height: usize,
    pub width: usize,
    pub channels: usize,
    pub frames: usize,
    pub shape: ObjectShape,
    pub size: usize,
    /// Pixels per frame, `(dx, dy)`.
    pub velocity: (f64, f64),
    /// Top-left corner at frame 0, `(x, y)`. `None` centres the whole trajectory.
    pub origin: Option<(f64, f64)>,
    pub target_category: usize,
    pub background_category: usize,
    pub dropout: Dropout,
    /// On dropout frames, suppress only this top fraction of the object's rows.
    pub partial_occlusion: Option<f64>,
    pub logit_contrast: f64,
    pub noise_sigma: f64,
    pub seed: u64,
    /// One name per channel; `None` gives `background`, `object`, `class_<i>`.
    pub category_names: Option<Vec<String>>,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            height: 64,
            width: 64,
            channels: 3,
            frames: 20,
            shape: ObjectShape::Rectangle,
            size: 16,
            velocity: (1.0, 0.0),
            origin: None,
            target_category: 1,
            background_category: 0,
            dropout: Dropout::None,
            partial_occlusion: None,
            logit_contrast: DEFAULT_LOGIT_CONTRAST,
            noise_sigma: DEFAULT_NOISE_SIGMA,
            seed: 0,
            category_names: None,
        }
    }
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Synth(msg.into())
}

impl SynthConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.height == 0 || self.width == 0 {
            return Err(invalid("height and width must be at least 1"));
        }
        if !(2..=MAX_CATEGORIES).contains(&self.channels) {
            return Err(invalid(format!(
                "channels must be in 2..={MAX_CATEGORIES}, got {}",
                self.channels
            )));
        }
        if self.frames == 0 {
            return Err(invalid("frames must be at least 1"));
        }
        if self.size == 0 {
            return Err(invalid("size must be at least 1"));
        }
        if self.target_category >= self.channels || self.background_category >= self.channels {
            return Err(invalid(
                "target and background categories must be < channels",
            ));
        }
        if self.target_category == self.background_category {
            return Err(invalid("target and background categories must differ"));
        }
        match &self.dropout {
            Dropout::None => {}
            Dropout::Probability(p) => {
                if !(0.0..=1.0).contains(p) {
                    return Err(invalid(format!("dropout probability {p} outside [0, 1]")));
                }
            }
            Dropout::Frames(list) => {
                if let Some(f) = list.iter().find(|&&f| f >= self.frames) {
                    return Err(invalid(format!(
                        "dropout frame {f} is beyond the last frame {}",
                        self.frames - 1
                    )));
                }
            }
        }
        if let Some(f) = self.partial_occlusion {
            if !(0.0..=1.0).contains(&f) {
                return Err(invalid(format!("partial_occlusion {f} outside [0, 1]")));
            }
        }
        if !(self.logit_contrast.is_finite() && self.logit_contrast > 0.0) {
            return Err(invalid("logit_contrast must be finite and > 0"));
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return Err(invalid("noise_sigma must be finite and >= 0"));
        }
        let (vx, vy) = self.velocity;
        if !(vx.is_finite() && vy.is_finite()) {
            return Err(invalid("velocity must be finite"));
        }
        if let Some((x, y)) = self.origin {
            if !(x.is_finite() && y.is_finite()) {
                return Err(invalid("origin must be finite"));
            }
        }
        if let Some(names) = &self.category_names {
            if names.len() != self.channels {
                return Err(invalid(format!(
                    "{} category names for {} channels",
                    names.len(),
                    self.channels
                )));
            }
        }
        self.categories().map_err(|e| invalid(e.to_string()))?;
        for frame in 0..self.frames {
            let (x, y) = self.position(frame);
            let inside = x >= 0
                && y >= 0
                && x as usize + self.size <= self.width
                && y as usize + self.size <= self.height;
            if !inside {
                return Err(ConfigError::ObjectExitsFrame {
                    frame,
                    height: self.height,
                    width: self.width,
                });
            }
        }
        Ok(())
    }

    fn origin(&self) -> (f64, f64) {
        self.origin.unwrap_or_else(|| {
            let span = (self.frames - 1) as f64 / 2.0;
            (
                (self.width as f64 - self.size as f64) / 2.0 - self.velocity.0 * span,
                (self.height as f64 - self.size as f64) / 2.0 - self.velocity.1 * span,
            )
        })
    }

    /// Top-left corner `(x, y)` of the object's bounding square at `frame`.
    pub fn position(&self, frame: usize) -> (i64, i64) {
        let (ox, oy) = self.origin();
        let t = frame as f64;
        (
            (ox + self.velocity.0 * t).round() as i64,
            (oy + self.velocity.1 * t).round() as i64,
        )
    }

    pub fn categories(&self) -> Result<CategoryTable> {
        let names: Vec<String> = match &self.category_names {
            Some(n) => n.clone(),
            None => (0..self.channels)
                .map(|i| match i {
                    _ if i == self.background_category => "background".to_string(),
                    _ if i == self.target_category => "object".to_string(),
                    _ => format!("class_{i}"),
                })
                .collect(),
        };
        CategoryTable::new(
            names
                .into_iter()
                .enumerate()
                .map(|(i, n)| Category::new(i, n, i == self.target_category))
                .collect(),
        )
    }
}

/// Output of [`generate`].
#[derive(Debug, Clone, PartialEq)]
pub struct SynthSequence {
    pub frames: Vec<LogitMap>,
    pub masks: Vec<BinaryMask>,
    /// Which frames had the object's detection suppressed.
    pub dropped: Vec<bool>,
    pub categories: CategoryTable,
}

/// Builds the logit frames and ground-truth masks described by `config`.
///
/// Off-object pixels score `+contrast` on the background channel and
/// `-contrast` on the target channel; on-object pixels the reverse. Other
/// channels score 0. On a dropout frame the suppressed object pixels score as
/// background. Noise of standard deviation `noise_sigma` is added to every
/// logit, drawn frame by frame in row-major, channel-fastest order.
pub fn generate(config: &SynthConfig) -> Result<SynthSequence> {
    config.validate()?;
    let categories = config.categories()?;
    let mut dropout_rng = SynthRng::new(config.seed);
    let mut noise_rng = dropout_rng.jumped();

    let dropped: Vec<bool> = match &config.dropout {
        Dropout::None => vec![false; config.frames],
        Dropout::Probability(p) => (0..config.frames)
            .map(|_| dropout_rng.next_f64() < *p)
            .collect(),
        Dropout::Frames(list) => (0..config.frames).map(|f| list.contains(&f)).collect(),
    };

    let (h, w, c) = (config.height, config.width, config.channels);
    let k = config.logit_contrast;
    let (tg, bg) = (config.target_category, config.background_category);
    let suppressed_rows = match config.partial_occlusion {
        Some(f) => (f * config.size as f64).ceil() as usize,
        None => config.size,
    };

    let mut frames = Vec::with_capacity(config.frames);
    let mut masks = Vec::with_capacity(config.frames);
    for (frame, &drop) in dropped.iter().enumerate() {
        let mask = object_mask(config, frame);
        let (_, top) = config.position(frame);
        let mut values = vec![0.0f32; h * w * c];
        for row in 0..h {
            for col in 0..w {
                let on_object = mask[row * w + col];
                let hidden = drop && on_object && row < top as usize + suppressed_rows;
                let object = on_object && !hidden;
                let px = &mut values[(row * w + col) * c..][..c];
                for (ch, v) in px.iter_mut().enumerate() {
                    let base = if ch == tg {
                        if object {
                            k
                        } else {
                            -k
                        }
                    } else if ch == bg {
                        if object {
                            -k
                        } else {
                            k
                        }
                    } else {
                        0.0
                    };
                    let noise = if config.noise_sigma > 0.0 {
                        config.noise_sigma * noise_rng.next_gaussian()
                    } else {
                        0.0
                    };
                    *v = (base + noise) as f32;
                }
            }
        }
        frames.push(LogitMap::new(h, w, c, values)?);
        masks.push(BinaryMask::new(h, w, mask)?);
    }

    Ok(SynthSequence {
        frames,
        masks,
        dropped,
        categories,
    })
}

fn object_mask(config: &SynthConfig, frame: usize) -> Vec<bool> {
    let (h, w, size) = (config.height, config.width, config.size);
    let (x, y) = config.position(frame);
    let (x, y) = (x as usize, y as usize);
    let mut mask = vec![false; h * w];
    let radius = size as f64 / 2.0;
    let (cx, cy) = (x as f64 + radius, y as f64 + radius);
    for row in y..y + size {
        for col in x..x + size {
            mask[row * w + col] = match config.shape {
                ObjectShape::Rectangle => true,
                ObjectShape::Disc => {
                    let dx = col as f64 + 0.5 - cx;
                    let dy = row as f64 + 0.5 - cy;
                    dx * dx + dy * dy <= radius * radius
                }
            };
        }
    }
    mask
}
