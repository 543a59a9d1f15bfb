//! SHA-256 digests used to tie banks, tables and records to their sources.

use sha2::{Digest, Sha256};

use crate::scalar::Scalar;

pub fn hex_digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Digest of a vector's values as 64-bit little-endian floats.
pub fn vector_digest<T: Scalar>(values: &[T]) -> String {
    let mut hasher = Sha256::new();
    for v in values {
        hasher.update(v.lossy_f64().to_le_bytes());
    }
    hex::encode(hasher.finalize())
}
