//! Binary PGM (P5) and PPM (P6) input images with 8-bit samples.

use std::path::Path;

use crate::data::InputSpec;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

fn header_tokens(bytes: &[u8]) -> Result<([usize; 3], &[u8], usize)> {
    let mut fields = Vec::with_capacity(3);
    let mut pos = 2;
    while fields.len() < 3 {
        match bytes.get(pos) {
            None => return Err(Error::Format("PNM header truncated".into())),
            Some(b'#') => {
                while bytes.get(pos).is_some_and(|&b| b != b'\n') {
                    pos += 1;
                }
            }
            Some(b) if b.is_ascii_whitespace() => pos += 1,
            Some(b) if b.is_ascii_digit() => {
                let start = pos;
                while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
                    pos += 1;
                }
                let text = std::str::from_utf8(&bytes[start..pos]).unwrap_or("");
                fields.push(
                    text.parse()
                        .map_err(|_| Error::Format(format!("bad PNM header number '{text}'")))?,
                );
            }
            Some(&b) => {
                return Err(Error::Format(format!("unexpected byte {b:#04x} in PNM header")))
            }
        }
    }
    // exactly one whitespace byte separates the header from the raster
    if !bytes.get(pos).is_some_and(u8::is_ascii_whitespace) {
        return Err(Error::Format("PNM header truncated".into()));
    }
    Ok(([fields[0], fields[1], fields[2]], &bytes[pos + 1..], pos + 1))
}

/// Decodes a P5 or P6 image into row-major, channel-minor values in `[0, 1]`.
pub fn parse_pnm<T: Scalar>(bytes: &[u8]) -> Result<(InputSpec, Vec<T>)> {
    let channels = match bytes.get(..2) {
        Some(b"P5") => 1,
        Some(b"P6") => 3,
        _ => return Err(Error::Format("not a binary PGM/PPM image (expected P5 or P6)".into())),
    };
    let ([width, height, maxval], raster, _) = header_tokens(bytes)?;
    if maxval == 0 || maxval > 255 {
        return Err(Error::Format(format!("unsupported PNM maxval {maxval}")));
    }
    let spec = InputSpec::new(height, width, channels)?;
    if raster.len() != spec.raw_dim() {
        return Err(Error::Format(format!(
            "PNM raster has {} bytes, expected {}",
            raster.len(),
            spec.raw_dim()
        )));
    }
    let scale = maxval as f64;
    let values = raster
        .iter()
        .map(|&b| T::of((b as f64 / scale).min(1.0)))
        .collect();
    Ok((spec, values))
}

pub fn read_pnm<T: Scalar>(path: &Path) -> Result<(InputSpec, Vec<T>)> {
    parse_pnm(&std::fs::read(path)?)
}
