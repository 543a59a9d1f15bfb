//! IDX container reading and writing (big-endian headers, unsigned byte payload).
//!
//! Images use magic `0x00000803` (`n × rows × cols`) or `0x00000804`
//! (`n × rows × cols × channels`); labels use `0x00000801`.

use std::fs;
use std::path::Path;

use crate::data::dataset::LabeledDataset;
use crate::data::encoding::InputSpec;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const IMAGES_MAGIC_3D: u32 = 0x0000_0803;
pub const IMAGES_MAGIC_4D: u32 = 0x0000_0804;
pub const LABELS_MAGIC: u32 = 0x0000_0801;

pub const IMAGES_FILE: &str = "images.idx";
pub const LABELS_FILE: &str = "labels.idx";
pub const CLASSES_FILE: &str = "classes.txt";

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
    what: &'a str,
}

impl<'a> Reader<'a> {
    fn u32(&mut self) -> Result<u32> {
        let b = self.take(4)?;
        Ok(u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| {
            Error::Format(format!(
                "{} truncated: need {n} bytes at offset {}, have {}",
                self.what,
                self.pos,
                self.bytes.len()
            ))
        })?;
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }
}

/// Decoded image block: `(count, height, width, channels, bytes)`.
pub fn parse_idx_images(bytes: &[u8]) -> Result<(usize, usize, usize, usize, &[u8])> {
    let mut r = Reader {
        bytes,
        pos: 0,
        what: "IDX image file",
    };
    let magic = r.u32()?;
    let ndim = match magic {
        IMAGES_MAGIC_3D => 3,
        IMAGES_MAGIC_4D => 4,
        other => {
            return Err(Error::Format(format!(
                "bad IDX image magic 0x{other:08x} (expected 0x{IMAGES_MAGIC_3D:08x} or 0x{IMAGES_MAGIC_4D:08x})"
            )))
        }
    };
    let n = r.u32()? as usize;
    let h = r.u32()? as usize;
    let w = r.u32()? as usize;
    let c = if ndim == 4 { r.u32()? as usize } else { 1 };
    let len = n
        .checked_mul(h)
        .and_then(|v| v.checked_mul(w))
        .and_then(|v| v.checked_mul(c))
        .ok_or_else(|| Error::Format("IDX image dimensions overflow".into()))?;
    let data = r.take(len)?;
    Ok((n, h, w, c, data))
}

pub fn parse_idx_labels(bytes: &[u8]) -> Result<&[u8]> {
    let mut r = Reader {
        bytes,
        pos: 0,
        what: "IDX label file",
    };
    let magic = r.u32()?;
    if magic != LABELS_MAGIC {
        return Err(Error::Format(format!(
            "bad IDX label magic 0x{magic:08x} (expected 0x{LABELS_MAGIC:08x})"
        )));
    }
    let n = r.u32()? as usize;
    r.take(n)
}

pub fn load_idx<T: Scalar>(images_path: &Path, labels_path: &Path) -> Result<LabeledDataset<T>> {
    let image_bytes = fs::read(images_path)?;
    let label_bytes = fs::read(labels_path)?;
    let (n, h, w, c, pixels) = parse_idx_images(&image_bytes)?;
    let labels = parse_idx_labels(&label_bytes)?;
    if labels.len() != n {
        return Err(Error::Format(format!(
            "IDX count mismatch: {n} images but {} labels",
            labels.len()
        )));
    }
    let labels: Vec<usize> = labels.iter().map(|&b| b as usize).collect();
    let classes = labels.iter().copied().max().map_or(1, |m| m + 1);
    let names = (0..classes).map(|c| c.to_string()).collect();
    let scale = T::of(255.0);
    let images = pixels.iter().map(|&b| T::of(b as f64) / scale).collect();
    LabeledDataset::new(
        InputSpec::new(h, w, c)?,
        images,
        labels,
        names,
        format!("idx {} + {}", images_path.display(), labels_path.display()),
    )
}

pub fn encode_idx_images<T: Scalar>(ds: &LabeledDataset<T>) -> Vec<u8> {
    let spec = ds.spec();
    let mut out = Vec::with_capacity(20 + ds.pixels().len());
    let magic = if spec.raw_channels == 1 {
        IMAGES_MAGIC_3D
    } else {
        IMAGES_MAGIC_4D
    };
    out.extend_from_slice(&magic.to_be_bytes());
    for d in [ds.len(), spec.height, spec.width] {
        out.extend_from_slice(&(d as u32).to_be_bytes());
    }
    if spec.raw_channels != 1 {
        out.extend_from_slice(&(spec.raw_channels as u32).to_be_bytes());
    }
    out.extend(
        ds.pixels()
            .iter()
            .map(|v| (v.lossy_f64() * 255.0).round().clamp(0.0, 255.0) as u8),
    );
    out
}

pub fn encode_idx_labels<T: Scalar>(ds: &LabeledDataset<T>) -> Result<Vec<u8>> {
    let mut out = Vec::with_capacity(8 + ds.len());
    out.extend_from_slice(&LABELS_MAGIC.to_be_bytes());
    out.extend_from_slice(&(ds.len() as u32).to_be_bytes());
    for &l in ds.labels() {
        let b = u8::try_from(l)
            .map_err(|_| Error::invalid(format!("label {l} does not fit in an IDX byte")))?;
        out.push(b);
    }
    Ok(out)
}

/// Writes `images.idx`, `labels.idx` and `classes.txt` into `dir`.
pub fn save_dataset_dir<T: Scalar>(ds: &LabeledDataset<T>, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(IMAGES_FILE), encode_idx_images(ds))?;
    fs::write(dir.join(LABELS_FILE), encode_idx_labels(ds)?)?;
    let mut names = ds.class_names().join("\n");
    names.push('\n');
    fs::write(dir.join(CLASSES_FILE), names)?;
    Ok(())
}

/// Loads a dataset directory written by [`save_dataset_dir`]. `classes.txt` is
/// optional; when present it fixes the class count and names.
pub fn load_dataset_dir<T: Scalar>(dir: &Path) -> Result<LabeledDataset<T>> {
    let ds = load_idx::<T>(&dir.join(IMAGES_FILE), &dir.join(LABELS_FILE))?;
    let classes_path = dir.join(CLASSES_FILE);
    if !classes_path.exists() {
        return Ok(ds);
    }
    let names: Vec<String> = fs::read_to_string(&classes_path)?
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(String::from)
        .collect();
    LabeledDataset::new(
        ds.spec(),
        ds.pixels().to_vec(),
        ds.labels().to_vec(),
        names,
        format!("idx dir {}", dir.display()),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn header(magic: u32, dims: &[u32]) -> Vec<u8> {
        let mut v = magic.to_be_bytes().to_vec();
        for d in dims {
            v.extend_from_slice(&d.to_be_bytes());
        }
        v
    }

    fn write_pair(dir: &Path, images: &[u8], labels: &[u8]) -> (std::path::PathBuf, std::path::PathBuf) {
        let ip = dir.join("i.idx");
        let lp = dir.join("l.idx");
        fs::write(&ip, images).unwrap();
        fs::write(&lp, labels).unwrap();
        (ip, lp)
    }

    #[test]
    fn hand_crafted_pair_scales_bytes() {
        let tmp = tempfile::tempdir().unwrap();
        let mut images = header(IMAGES_MAGIC_3D, &[2, 1, 3]);
        images.extend_from_slice(&[0, 128, 255, 255, 0, 128]);
        let mut labels = header(LABELS_MAGIC, &[2]);
        labels.extend_from_slice(&[1, 0]);
        let (ip, lp) = write_pair(tmp.path(), &images, &labels);
        let ds = load_idx::<f64>(&ip, &lp).unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds.image(0), &[0.0, 128.0 / 255.0, 1.0]);
        assert_eq!(ds.image(1), &[1.0, 0.0, 128.0 / 255.0]);
        assert_eq!(ds.labels(), &[1, 0]);
        assert_eq!(ds.class_count(), 2);
    }

    #[test]
    fn count_mismatch_is_an_error() {
        let tmp = tempfile::tempdir().unwrap();
        let mut images = header(IMAGES_MAGIC_3D, &[2, 1, 1]);
        images.extend_from_slice(&[0, 1]);
        let mut labels = header(LABELS_MAGIC, &[1]);
        labels.push(0);
        let (ip, lp) = write_pair(tmp.path(), &images, &labels);
        let err = load_idx::<f64>(&ip, &lp).unwrap_err();
        assert!(matches!(err, Error::Format(ref m) if m.contains("count mismatch")), "{err}");
    }

    #[test]
    fn wrong_magic_and_truncation_are_errors() {
        let tmp = tempfile::tempdir().unwrap();
        let mut labels = header(LABELS_MAGIC, &[1]);
        labels.push(0);
        let mut bad = header(0x0000_0802, &[1, 1, 1]);
        bad.push(0);
        let (ip, lp) = write_pair(tmp.path(), &bad, &labels);
        assert!(matches!(load_idx::<f64>(&ip, &lp), Err(Error::Format(m)) if m.contains("magic")));

        let short = header(IMAGES_MAGIC_3D, &[1, 2, 2]);
        let (ip, lp) = write_pair(tmp.path(), &short, &labels);
        assert!(matches!(load_idx::<f64>(&ip, &lp), Err(Error::Format(m)) if m.contains("truncated")));
    }

    #[test]
    fn dataset_dir_round_trip_for_color() {
        let tmp = tempfile::tempdir().unwrap();
        let spec = InputSpec::new(1, 2, 3).unwrap();
        let px: Vec<f64> = [0u8, 51, 102, 153, 204, 255]
            .iter()
            .map(|&b| b as f64 / 255.0)
            .collect();
        let ds = LabeledDataset::new(spec, px, vec![2], vec!["a".into(), "b".into(), "c".into()], "")
            .unwrap();
        save_dataset_dir(&ds, tmp.path()).unwrap();
        let back = load_dataset_dir::<f64>(tmp.path()).unwrap();
        assert_eq!(back.pixels(), ds.pixels());
        assert_eq!(back.class_names(), ds.class_names());
        assert_eq!(back.spec(), spec);
    }
}
