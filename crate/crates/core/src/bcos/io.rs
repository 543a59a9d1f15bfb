//! Versioned binary model container.
//!
//! Layout (integers little-endian):
//! `"COMIX-BCOS"`, `u32` version, `u32` height, `u32` width, `u32` raw channels,
//! `u32` encoded channels, `u64` seed, `u32` layer count (encoder layers then
//! head), per layer `u32 out_dim, u32 in_dim, f64 B`, then every layer's
//! weights as row-major `f64`.

use std::fs;
use std::path::Path;

use crate::bcos::layer::BcosLayer;
use crate::bcos::network::BcosNetwork;
use crate::data::InputSpec;
use crate::digest::hex_digest;
use crate::error::{Error, Result};
use crate::io::ByteReader;
use crate::matrix::Matrix;
use crate::scalar::Scalar;

pub const MODEL_MAGIC: &[u8; 10] = b"COMIX-BCOS";
pub const MODEL_VERSION: u32 = 1;

pub fn model_to_bytes<T: Scalar>(net: &BcosNetwork<T>) -> Vec<u8> {
    let spec = net.input_spec();
    let layers: Vec<_> = net.layers().collect();
    let mut out = Vec::new();
    out.extend_from_slice(MODEL_MAGIC);
    out.extend_from_slice(&MODEL_VERSION.to_le_bytes());
    for v in [
        spec.height,
        spec.width,
        spec.raw_channels,
        spec.encoded_channels(),
    ] {
        out.extend_from_slice(&(v as u32).to_le_bytes());
    }
    out.extend_from_slice(&net.seed().to_le_bytes());
    out.extend_from_slice(&(layers.len() as u32).to_le_bytes());
    for l in &layers {
        out.extend_from_slice(&(l.out_dim() as u32).to_le_bytes());
        out.extend_from_slice(&(l.in_dim() as u32).to_le_bytes());
        out.extend_from_slice(&l.exponent().lossy_f64().to_le_bytes());
    }
    for l in &layers {
        for w in l.weights().as_slice() {
            out.extend_from_slice(&w.lossy_f64().to_le_bytes());
        }
    }
    out
}

pub fn model_from_bytes<T: Scalar>(bytes: &[u8]) -> Result<BcosNetwork<T>> {
    let mut r = ByteReader::new(bytes, "model file");
    let magic = r.take(MODEL_MAGIC.len())?;
    if magic != MODEL_MAGIC {
        return Err(Error::Version(format!(
            "not a COMIX-BCOS model (header {:?})",
            String::from_utf8_lossy(magic)
        )));
    }
    let version = r.u32()?;
    if version != MODEL_VERSION {
        return Err(Error::Version(format!(
            "model format version {version}, expected {MODEL_VERSION}"
        )));
    }
    let height = r.u32()? as usize;
    let width = r.u32()? as usize;
    let raw = r.u32()? as usize;
    let encoded = r.u32()? as usize;
    if encoded != 2 * raw {
        return Err(Error::Format(format!(
            "encoded channels {encoded} is not twice raw channels {raw}"
        )));
    }
    let spec = InputSpec::new(height, width, raw)?;
    let seed = r.u64()?;
    let count = r.u32()? as usize;
    if count < 2 {
        return Err(Error::Format(format!("model has {count} layers, need at least 2")));
    }
    let mut headers = Vec::with_capacity(count);
    for _ in 0..count {
        let out_dim = r.u32()? as usize;
        let in_dim = r.u32()? as usize;
        let exponent = r.f64()?;
        headers.push((out_dim, in_dim, exponent));
    }
    let mut layers = Vec::with_capacity(count);
    for &(out_dim, in_dim, exponent) in &headers {
        let len = out_dim
            .checked_mul(in_dim)
            .ok_or_else(|| Error::Format("layer shape overflows".into()))?;
        let raw = r.take(len.checked_mul(8).ok_or_else(|| Error::Format("layer too large".into()))?)?;
        let data = raw
            .chunks_exact(8)
            .map(|c| T::of(f64::from_le_bytes(c.try_into().expect("8-byte chunk"))))
            .collect();
        let layer = BcosLayer::new(Matrix::from_vec(out_dim, in_dim, data)?, T::of(exponent))
            .map_err(|e| Error::Format(format!("corrupt layer: {e}")))?;
        layers.push(layer);
    }
    r.finish()?;
    let head = layers.pop().expect("count >= 2");
    BcosNetwork::new(layers, head, spec, seed).map_err(|e| Error::Format(format!("corrupt model shape: {e}")))
}

pub fn save_model<T: Scalar>(net: &BcosNetwork<T>, path: &Path) -> Result<()> {
    fs::write(path, model_to_bytes(net))?;
    Ok(())
}

pub fn load_model<T: Scalar>(path: &Path) -> Result<BcosNetwork<T>> {
    model_from_bytes(&fs::read(path)?)
}

/// Hex SHA-256 of the serialised model; banks and tables record it.
pub fn model_hash<T: Scalar>(net: &BcosNetwork<T>) -> String {
    hex_digest(&model_to_bytes(net))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn net() -> BcosNetwork<f64> {
        BcosNetwork::random(InputSpec::new(3, 3, 1).unwrap(), &[7, 4], 3, 1.5, 12).unwrap()
    }

    #[test]
    fn round_trip_gives_identical_logits() {
        let tmp = tempfile::tempdir().unwrap();
        let path = tmp.path().join("m.bin");
        let net = net();
        save_model(&net, &path).unwrap();
        let back: BcosNetwork<f64> = load_model(&path).unwrap();
        assert_eq!(back, net);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..10 {
            let x: Vec<f64> = (0..18).map(|_| rng.random()).collect();
            assert_eq!(back.forward(&x).unwrap(), net.forward(&x).unwrap());
        }
        assert_eq!(model_hash(&back), model_hash(&net));
    }

    #[test]
    fn f32_model_round_trips_exactly() {
        let net = BcosNetwork::<f32>::random(InputSpec::new(2, 2, 2).unwrap(), &[3], 2, 2.0, 5)
            .unwrap();
        let back: BcosNetwork<f32> = model_from_bytes(&model_to_bytes(&net)).unwrap();
        assert_eq!(back, net);
    }

    #[test]
    fn truncated_file_is_rejected() {
        let bytes = model_to_bytes(&net());
        for cut in [0, 5, 20, bytes.len() - 1] {
            assert!(matches!(
                model_from_bytes::<f64>(&bytes[..cut]),
                Err(Error::Format(_)) | Err(Error::Version(_))
            ));
        }
        let err = model_from_bytes::<f64>(&bytes[..bytes.len() - 3]).unwrap_err();
        assert!(matches!(err, Error::Format(ref m) if m.contains("truncated")), "{err}");
    }

    #[test]
    fn wrong_magic_is_a_version_error() {
        let mut bytes = model_to_bytes(&net());
        bytes[0] = b'X';
        assert!(matches!(model_from_bytes::<f64>(&bytes), Err(Error::Version(_))));
        let mut bytes = model_to_bytes(&net());
        bytes[10] = 9;
        assert!(matches!(model_from_bytes::<f64>(&bytes), Err(Error::Version(_))));
    }

    #[test]
    fn trailing_bytes_are_rejected() {
        let mut bytes = model_to_bytes(&net());
        bytes.push(0);
        assert!(model_from_bytes::<f64>(&bytes).is_err());
    }
}
