//! Seeded generator of small shape-classification datasets.
//!
//! Every class has one primary shape and two secondary cues; each sample draws
//! its class's shape at a jittered position and scale plus one of the two cues.
//! With `noise_sigma = 0` an image holds exactly two intensity levels.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::data::dataset::LabeledDataset;
use crate::data::encoding::InputSpec;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const MAX_SYNTHETIC_CLASSES: usize = 4;
const CLASS_NAMES: [&str; MAX_SYNTHETIC_CLASSES] = ["disk", "cross", "stripes", "ring"];

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticConfig {
    pub class_count: usize,
    pub train_per_class: usize,
    pub test_per_class: usize,
    pub height: usize,
    pub width: usize,
    pub channels: usize,
    pub noise_sigma: f64,
    pub background: f64,
    pub foreground: f64,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            class_count: 3,
            train_per_class: 200,
            test_per_class: 100,
            height: 16,
            width: 16,
            channels: 1,
            noise_sigma: 0.1,
            background: 0.0,
            foreground: 1.0,
            seed: 7,
        }
    }
}

impl SyntheticConfig {
    pub fn validate(&self) -> Result<()> {
        if self.class_count == 0 || self.class_count > MAX_SYNTHETIC_CLASSES {
            return Err(Error::invalid(format!(
                "class_count must be in 1..={MAX_SYNTHETIC_CLASSES}, got {}",
                self.class_count
            )));
        }
        if self.train_per_class == 0 || self.test_per_class == 0 {
            return Err(Error::invalid("per-class sample counts must be at least 1"));
        }
        if self.height < 8 || self.width < 8 {
            return Err(Error::invalid(format!(
                "image size must be at least 8x8, got {}x{}",
                self.height, self.width
            )));
        }
        if self.channels == 0 {
            return Err(Error::invalid("channels must be at least 1"));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::invalid("noise_sigma must be finite and non-negative"));
        }
        for (name, v) in [("background", self.background), ("foreground", self.foreground)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::invalid(format!("{name} must lie in [0, 1]")));
            }
        }
        Ok(())
    }

    /// Parses a line-oriented `key = value` file. Unknown keys are errors.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Format(format!("line {}: expected key=value", lineno + 1))
            })?;
            cfg.set(key.trim(), value.trim())
                .map_err(|e| Error::Format(format!("line {}: {e}", lineno + 1)))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<V: std::str::FromStr>(key: &str, value: &str) -> Result<V> {
            value
                .parse()
                .map_err(|_| Error::invalid(format!("bad value {value:?} for {key}")))
        }
        match key {
            "class_count" => self.class_count = num(key, value)?,
            "train_per_class" => self.train_per_class = num(key, value)?,
            "test_per_class" => self.test_per_class = num(key, value)?,
            "height" => self.height = num(key, value)?,
            "width" => self.width = num(key, value)?,
            "channels" => self.channels = num(key, value)?,
            "noise_sigma" => self.noise_sigma = num(key, value)?,
            "background" => self.background = num(key, value)?,
            "foreground" => self.foreground = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            _ => return Err(Error::invalid(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        format!(
            "class_count = {}\ntrain_per_class = {}\ntest_per_class = {}\nheight = {}\nwidth = {}\n\
             channels = {}\nnoise_sigma = {}\nbackground = {}\nforeground = {}\nseed = {}\n",
            self.class_count,
            self.train_per_class,
            self.test_per_class,
            self.height,
            self.width,
            self.channels,
            self.noise_sigma,
            self.background,
            self.foreground,
            self.seed
        )
    }
}

/// Generates the `(train, test)` pair described by `cfg`.
pub fn generate_synthetic<T: Scalar>(
    cfg: &SyntheticConfig,
) -> Result<(LabeledDataset<T>, LabeledDataset<T>)> {
    cfg.validate()?;
    let spec = InputSpec::new(cfg.height, cfg.width, cfg.channels)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let noise = Normal::new(0.0, cfg.noise_sigma.max(f64::MIN_POSITIVE))
        .map_err(|e| Error::invalid(e.to_string()))?;
    let names: Vec<String> = CLASS_NAMES[..cfg.class_count]
        .iter()
        .map(|s| s.to_string())
        .collect();

    let mut make = |per_class: usize, part: &str| {
        let n = per_class * cfg.class_count;
        let mut images = Vec::with_capacity(n * spec.raw_dim());
        let mut labels = Vec::with_capacity(n);
        for i in 0..n {
            let class = i % cfg.class_count;
            let mask = draw_sample(class, cfg.width, cfg.height, &mut rng);
            for &on in &mask {
                let base = if on { cfg.foreground } else { cfg.background };
                for _ in 0..cfg.channels {
                    let v = if cfg.noise_sigma > 0.0 {
                        (base + noise.sample(&mut rng)).clamp(0.0, 1.0)
                    } else {
                        base
                    };
                    images.push(T::of(v));
                }
            }
            labels.push(class);
        }
        LabeledDataset::new(
            spec,
            images,
            labels,
            names.clone(),
            format!("synthetic {part} seed={} {:?}", cfg.seed, cfg),
        )
    };
    let train = make(cfg.train_per_class, "train")?;
    let test = make(cfg.test_per_class, "test")?;
    Ok((train, test))
}

struct Canvas {
    w: i64,
    h: i64,
    mask: Vec<bool>,
}

impl Canvas {
    fn new(w: usize, h: usize) -> Self {
        Self {
            w: w as i64,
            h: h as i64,
            mask: vec![false; w * h],
        }
    }

    fn set(&mut self, x: i64, y: i64) {
        if (0..self.w).contains(&x) && (0..self.h).contains(&y) {
            self.mask[(y * self.w + x) as usize] = true;
        }
    }

    fn fill(&mut self, pred: impl Fn(f64, f64) -> bool) {
        for y in 0..self.h {
            for x in 0..self.w {
                if pred(x as f64 + 0.5, y as f64 + 0.5) {
                    self.set(x, y);
                }
            }
        }
    }

    /// Top-left anchor of a `size`-pixel patch in a random corner.
    fn corner(&self, size: i64, rng: &mut impl Rng) -> (i64, i64) {
        let right = rng.random_bool(0.5);
        let bottom = rng.random_bool(0.5);
        (
            if right { self.w - size } else { 0 },
            if bottom { self.h - size } else { 0 },
        )
    }
}

fn draw_sample(class: usize, w: usize, h: usize, rng: &mut impl Rng) -> Vec<bool> {
    let mut c = Canvas::new(w, h);
    let s = w.min(h) as f64;
    let jitter = (s / 8.0).max(1.0);
    let cx = w as f64 / 2.0 + rng.random_range(-jitter..=jitter);
    let cy = h as f64 / 2.0 + rng.random_range(-jitter..=jitter);
    let r = rng.random_range(0.18 * s..=0.28 * s);

    match class {
        0 => c.fill(|x, y| (x - cx).powi(2) + (y - cy).powi(2) <= r * r),
        1 => {
            let t = 0.75;
            c.fill(|x, y| {
                let (dx, dy) = ((x - cx).abs(), (y - cy).abs());
                (dx <= t && dy <= r) || (dy <= t && dx <= r)
            })
        }
        2 => {
            let phase = rng.random_range(0..2) as f64;
            c.fill(|x, y| {
                (x - cx).abs() <= r && (y - cy).abs() <= r && ((x + phase).floor() as i64) % 2 == 0
            })
        }
        _ => c.fill(|x, y| {
            let d = ((x - cx).powi(2) + (y - cy).powi(2)).sqrt();
            d <= r && d >= r - 1.2
        }),
    }

    let cue_a = rng.random_bool(0.5);
    match (class, cue_a) {
        (0, true) => {
            let (x0, y0) = c.corner(2, rng);
            for (dx, dy) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
                c.set(x0 + dx, y0 + dy);
            }
        }
        (0, false) => {
            let y = if rng.random_bool(0.5) { 0 } else { c.h - 1 };
            let x0 = rng.random_range(0..=c.w - 4);
            (0..4).for_each(|k| c.set(x0 + k, y));
        }
        (1, true) => {
            for k in 0..c.w {
                c.set(k, 0);
                c.set(k, c.h - 1);
            }
            for k in 0..c.h {
                c.set(0, k);
                c.set(c.w - 1, k);
            }
        }
        (1, false) => {
            let (x0, y0) = c.corner(3, rng);
            (0..3).for_each(|k| c.set(x0 + k, y0 + k));
        }
        (2, true) => {
            let x = if rng.random_bool(0.5) { 0 } else { c.w - 1 };
            let y0 = rng.random_range(0..=c.h - 4);
            (0..4).for_each(|k| c.set(x, y0 + k));
        }
        (2, false) => {
            let (x0, y0) = c.corner(3, rng);
            for dy in 0..3 {
                for dx in 0..3 {
                    if (dx + dy) % 2 == 0 {
                        c.set(x0 + dx, y0 + dy);
                    }
                }
            }
        }
        (_, true) => {
            let (x0, y0) = c.corner(3, rng);
            (0..3).for_each(|k| c.set(x0 + k, y0 + 2));
            (0..3).for_each(|k| c.set(x0, y0 + k));
        }
        (_, false) => {
            let y = c.h - 1;
            let phase = rng.random_range(0..2);
            (0..c.w).filter(|x| x % 2 == phase).for_each(|x| c.set(x, y));
        }
    }
    c.mask
}
