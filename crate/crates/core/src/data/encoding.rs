//! Flat input encoding: every raw channel value `v` becomes the pair `[v, 1 - v]`.
//!
//! Layout is row-major over pixels with channels innermost. For a pixel with raw
//! channels `[r, g, b]` the encoded group is `[r, g, b, 1-r, 1-g, 1-b]`, so the
//! encoded group always carries an l1 mass of `raw_channels`.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputSpec {
    pub height: usize,
    pub width: usize,
    pub raw_channels: usize,
}

impl InputSpec {
    pub fn new(height: usize, width: usize, raw_channels: usize) -> Result<Self> {
        if height == 0 || width == 0 || raw_channels == 0 {
            return Err(Error::invalid(format!(
                "input spec needs positive dimensions, got {height}x{width}x{raw_channels}"
            )));
        }
        Ok(Self {
            height,
            width,
            raw_channels,
        })
    }

    #[inline]
    pub fn encoded_channels(&self) -> usize {
        2 * self.raw_channels
    }

    #[inline]
    pub fn pixels(&self) -> usize {
        self.height * self.width
    }

    /// Length of a raw image (`H * W * raw_channels`).
    #[inline]
    pub fn raw_dim(&self) -> usize {
        self.pixels() * self.raw_channels
    }

    /// Flat encoded input dimension `D_in`.
    #[inline]
    pub fn input_dim(&self) -> usize {
        self.pixels() * self.encoded_channels()
    }
}

pub fn encode_input<T: Scalar>(image: &[T], spec: &InputSpec) -> Result<Vec<T>> {
    check_dim("raw image length", spec.raw_dim(), image.len())?;
    let c = spec.raw_channels;
    let mut out = Vec::with_capacity(spec.input_dim());
    for pixel in image.chunks_exact(c) {
        if let Some(v) = pixel
            .iter()
            .find(|v| !(**v >= T::zero() && **v <= T::one()))
        {
            return Err(Error::invalid(format!("pixel value {v} outside [0, 1]")));
        }
        out.extend_from_slice(pixel);
        out.extend(pixel.iter().map(|&v| T::one() - v));
    }
    Ok(out)
}

/// Recovers the raw image from the primal half of each channel group.
pub fn decode_input<T: Scalar>(encoded: &[T], spec: &InputSpec) -> Result<Vec<T>> {
    check_dim("encoded input length", spec.input_dim(), encoded.len())?;
    Ok(encoded
        .chunks_exact(spec.encoded_channels())
        .flat_map(|group| group[..spec.raw_channels].iter().copied())
        .collect())
}
