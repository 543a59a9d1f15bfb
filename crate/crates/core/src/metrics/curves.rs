use crate::data::InputSpec;
use crate::error::{check_dim, Error, Result};
use crate::scalar::{cmp, Scalar};

/// Maps a raw image to a class score in `[0, 1]`. Implementations are called
/// concurrently from several threads and must not mutate shared state.
pub trait ScoreFunction<T>: Sync {
    fn score(&self, image: &[T]) -> T;
}

impl<T, F> ScoreFunction<T> for F
where
    F: Fn(&[T]) -> T + Sync,
{
    fn score(&self, image: &[T]) -> T {
        self(image)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveResult<T> {
    pub fractions: Vec<T>,
    pub scores: Vec<T>,
    pub auc: T,
}

impl<T: Scalar> CurveResult<T> {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("fraction,score\n");
        for (f, s) in self.fractions.iter().zip(&self.scores) {
            out.push_str(&format!("{},{}\n", f.lossy_f64(), s.lossy_f64()));
        }
        out
    }
}

/// Trapezoidal area under `(xs, ys)`.
pub fn trapezoid<T: Scalar>(xs: &[T], ys: &[T]) -> T {
    let two = T::of(2.0);
    xs.windows(2)
        .zip(ys.windows(2))
        .map(|(x, y)| (x[1] - x[0]) * (y[0] + y[1]) / two)
        .sum()
}

/// Pixel indices by descending attribution; ties keep row-major order.
pub fn pixel_order<T: Scalar>(attribution: &[T]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..attribution.len()).collect();
    order.sort_by(|&a, &b| cmp(attribution[b], attribution[a]));
    order
}

/// Number of pixels affected at fraction `t`: `⌈t·n⌉`, clamped to `n`.
pub fn pixel_count(t: f64, n: usize) -> usize {
    let raw = (t * n as f64 - 1e-9).ceil().max(0.0) as usize;
    raw.min(n)
}

fn copy_pixels<T: Scalar>(dst: &mut [T], src: &[T], pixels: &[usize], channels: usize) {
    for &p in pixels {
        let r = p * channels..(p + 1) * channels;
        dst[r.clone()].copy_from_slice(&src[r]);
    }
}

fn check_curve_inputs<T>(
    image: &[T],
    attribution: &[T],
    baseline: &[T],
    spec: &InputSpec,
) -> Result<()> {
    check_dim("curve image", spec.raw_dim(), image.len())?;
    check_dim("curve baseline", spec.raw_dim(), baseline.len())?;
    check_dim("curve attribution", spec.pixels(), attribution.len())
}

fn curve<T: Scalar>(
    score: &impl ScoreFunction<T>,
    image: &[T],
    attribution: &[T],
    baseline: &[T],
    spec: &InputSpec,
    steps: usize,
    insert: bool,
) -> Result<CurveResult<T>> {
    if steps < 2 {
        return Err(Error::invalid(format!("curve needs at least two steps, got {steps}")));
    }
    check_curve_inputs(image, attribution, baseline, spec)?;
    let order = pixel_order(attribution);
    let n = spec.pixels();
    let (start, fill) = if insert { (baseline, image) } else { (image, baseline) };
    let mut fractions = Vec::with_capacity(steps + 1);
    let mut scores = Vec::with_capacity(steps + 1);
    for k in 0..=steps {
        let t = k as f64 / steps as f64;
        let mut current = start.to_vec();
        copy_pixels(&mut current, fill, &order[..pixel_count(t, n)], spec.raw_channels);
        fractions.push(T::of(t));
        scores.push(score.score(&current));
    }
    let auc = trapezoid(&fractions, &scores);
    Ok(CurveResult {
        fractions,
        scores,
        auc,
    })
}

/// Starts from `baseline` and copies in the top-attributed pixels of `image`.
pub fn insertion_curve<T: Scalar>(
    score: &impl ScoreFunction<T>,
    image: &[T],
    attribution: &[T],
    baseline: &[T],
    spec: &InputSpec,
    steps: usize,
) -> Result<CurveResult<T>> {
    curve(score, image, attribution, baseline, spec, steps, true)
}

/// Starts from `image` and overwrites its top-attributed pixels with `baseline`.
pub fn deletion_curve<T: Scalar>(
    score: &impl ScoreFunction<T>,
    image: &[T],
    attribution: &[T],
    baseline: &[T],
    spec: &InputSpec,
    steps: usize,
) -> Result<CurveResult<T>> {
    curve(score, image, attribution, baseline, spec, steps, false)
}

/// Keeps the `⌈(1 - fraction)·n⌉` most attributed pixels of `image` and takes
/// the rest from `baseline`.
pub fn keep_top<T: Scalar>(
    image: &[T],
    attribution: &[T],
    baseline: &[T],
    spec: &InputSpec,
    fraction: f64,
) -> Result<Vec<T>> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::invalid(format!("mask fraction {fraction} outside (0, 1)")));
    }
    check_curve_inputs(image, attribution, baseline, spec)?;
    let order = pixel_order(attribution);
    let keep = pixel_count(1.0 - fraction, spec.pixels());
    let mut masked = baseline.to_vec();
    copy_pixels(&mut masked, image, &order[..keep], spec.raw_channels);
    Ok(masked)
}

/// Average Drop and Average Increase (percent) from `(full, masked)` score pairs.
pub fn drop_increase_from_scores<T: Scalar>(pairs: &[(T, T)]) -> Result<(T, T)> {
    if pairs.is_empty() {
        return Err(Error::Empty("average drop needs samples"));
    }
    let floor = T::of(1e-12);
    let mut drop = T::zero();
    let mut increase = 0usize;
    for &(full, partial) in pairs {
        drop = drop + (full - partial).max(T::zero()) / full.max(floor);
        if partial > full {
            increase += 1;
        }
    }
    let n = T::of(pairs.len() as f64);
    let hundred = T::of(100.0);
    Ok((hundred * drop / n, hundred * T::of(increase as f64) / n))
}

/// Average Drop and Average Increase over a set of samples, masking each with
/// [`keep_top`]. `score(i, image)` scores sample `i`.
pub fn average_drop_increase<T: Scalar, F>(
    score: F,
    images: &[&[T]],
    attributions: &[&[T]],
    baseline: &[T],
    spec: &InputSpec,
    fraction: f64,
) -> Result<(T, T)>
where
    F: Fn(usize, &[T]) -> T,
{
    if images.is_empty() {
        return Err(Error::Empty("average drop needs samples"));
    }
    check_dim("attribution count", images.len(), attributions.len())?;
    let mut pairs = Vec::with_capacity(images.len());
    for (i, (&image, &attr)) in images.iter().zip(attributions).enumerate() {
        let masked = keep_top(image, attr, baseline, spec, fraction)?;
        pairs.push((score(i, image), score(i, &masked)));
    }
    drop_increase_from_scores(&pairs)
}
