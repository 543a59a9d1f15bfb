//! Bank (binary) and CDF table (text) persistence.
//!
//! Bank layout, little-endian: `"COMIX-BANK"`, `u32` version, `u64` n,
//! `u64` embedding dimension, `u32` class count, 32-byte model digest,
//! `n × dim` row-major `f64` embeddings, `n` `u32` labels, `n` `u64` sample refs.
//!
//! Table text: a `COMIX-CDF <version>` line, `model`, `bins`, `features` and `M`
//! lines, then one line per class: the class id followed by `feature:mi` pairs.

use std::fs;
use std::path::Path;

use crate::cdf::bank::FeatureBank;
use crate::cdf::select::{CdfTable, RankedFeature};
use crate::error::{Error, Result};
use crate::io::ByteReader;
use crate::matrix::Matrix;
use crate::scalar::Scalar;

pub const BANK_MAGIC: &[u8; 10] = b"COMIX-BANK";
pub const BANK_VERSION: u32 = 1;
pub const CDF_HEADER: &str = "COMIX-CDF";
pub const CDF_VERSION: u32 = 1;

pub fn bank_to_bytes<T: Scalar>(bank: &FeatureBank<T>) -> Result<Vec<u8>> {
    let hash = hex::decode(bank.model_hash())
        .ok()
        .filter(|h| h.len() == 32)
        .ok_or_else(|| Error::invalid("bank model hash is not a 32-byte hex digest"))?;
    let mut out = Vec::with_capacity(70 + bank.len() * (bank.dim() * 8 + 12));
    out.extend_from_slice(BANK_MAGIC);
    out.extend_from_slice(&BANK_VERSION.to_le_bytes());
    out.extend_from_slice(&(bank.len() as u64).to_le_bytes());
    out.extend_from_slice(&(bank.dim() as u64).to_le_bytes());
    out.extend_from_slice(&(bank.class_count() as u32).to_le_bytes());
    out.extend_from_slice(&hash);
    for v in bank.embeddings().as_slice() {
        out.extend_from_slice(&v.lossy_f64().to_le_bytes());
    }
    for &l in bank.labels() {
        out.extend_from_slice(&(l as u32).to_le_bytes());
    }
    for &r in bank.sample_refs() {
        out.extend_from_slice(&(r as u64).to_le_bytes());
    }
    Ok(out)
}

pub fn bank_from_bytes<T: Scalar>(bytes: &[u8]) -> Result<FeatureBank<T>> {
    let mut r = ByteReader::new(bytes, "bank file");
    if r.take(BANK_MAGIC.len())? != BANK_MAGIC {
        return Err(Error::Version("not a COMIX-BANK file".into()));
    }
    let version = r.u32()?;
    if version != BANK_VERSION {
        return Err(Error::Version(format!(
            "bank format version {version}, expected {BANK_VERSION}"
        )));
    }
    let n = r.u64()? as usize;
    let dim = r.u64()? as usize;
    let classes = r.u32()? as usize;
    let hash = hex::encode(r.take(32)?);
    let len = n
        .checked_mul(dim)
        .and_then(|v| v.checked_mul(8))
        .ok_or_else(|| Error::Format("bank shape overflows".into()))?;
    let data = r
        .take(len)?
        .chunks_exact(8)
        .map(|c| T::of(f64::from_le_bytes(c.try_into().expect("8 bytes"))))
        .collect();
    let labels = (0..n).map(|_| r.u32().map(|v| v as usize)).collect::<Result<Vec<_>>>()?;
    let refs = (0..n).map(|_| r.u64().map(|v| v as usize)).collect::<Result<Vec<_>>>()?;
    r.finish()?;
    FeatureBank::new(Matrix::from_vec(n, dim, data)?, labels, refs, classes, hash)
        .map_err(|e| Error::Format(format!("corrupt bank: {e}")))
}

pub fn save_bank<T: Scalar>(bank: &FeatureBank<T>, path: &Path) -> Result<()> {
    fs::write(path, bank_to_bytes(bank)?)?;
    Ok(())
}

/// Loads a bank and checks it was produced by the model with `expected_model_hash`.
pub fn load_bank<T: Scalar>(path: &Path, expected_model_hash: &str) -> Result<FeatureBank<T>> {
    let bank = bank_from_bytes(&fs::read(path)?)?;
    bank.verify_model(expected_model_hash)?;
    Ok(bank)
}

pub fn cdf_table_to_text<T: Scalar>(table: &CdfTable<T>) -> String {
    let mut out = format!(
        "{CDF_HEADER} {CDF_VERSION}\nmodel {}\nbins {}\nfeatures {}\nM {}\n",
        table.model_hash(),
        table.bins(),
        table.embedding_dim(),
        table.m()
    );
    for c in 0..table.class_count() {
        out.push_str(&c.to_string());
        for r in table.ranked(c).expect("class in range") {
            out.push_str(&format!(" {}:{}", r.feature, r.mi.lossy_f64()));
        }
        out.push('\n');
    }
    out
}

pub fn cdf_table_from_text<T: Scalar>(text: &str) -> Result<CdfTable<T>> {
    let bad = |msg: String| Error::Format(format!("CDF table: {msg}"));
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| bad("empty file".into()))?;
    match header.split_whitespace().collect::<Vec<_>>().as_slice() {
        [CDF_HEADER, v] if v.parse::<u32>().ok() == Some(CDF_VERSION) => {}
        [CDF_HEADER, v] => return Err(Error::Version(format!("CDF table version {v}"))),
        _ => return Err(Error::Version("not a COMIX-CDF table".into())),
    }
    let mut field = |name: &str| -> Result<String> {
        let line = lines.next().ok_or_else(|| bad(format!("missing {name} line")))?;
        match line.split_once(' ') {
            Some((k, v)) if k == name => Ok(v.trim().to_string()),
            _ => Err(bad(format!("expected {name} line, found {line:?}"))),
        }
    };
    let model = field("model")?;
    let parse_usize = |s: String, what: &str| {
        s.parse::<usize>().map_err(|_| bad(format!("bad {what} value {s:?}")))
    };
    let bins = parse_usize(field("bins")?, "bins")?;
    let dim = parse_usize(field("features")?, "features")?;
    let m = parse_usize(field("M")?, "M")?;
    let mut classes = Vec::new();
    for (expected, line) in lines.enumerate() {
        let mut parts = line.split_whitespace();
        let id = parts.next().and_then(|s| s.parse::<usize>().ok());
        if id != Some(expected) {
            return Err(bad(format!("expected class {expected}, found {line:?}")));
        }
        let ranked = parts
            .map(|p| {
                let (f, mi) = p.split_once(':').ok_or_else(|| bad(format!("bad pair {p:?}")))?;
                let feature = f.parse().map_err(|_| bad(format!("bad feature {f:?}")))?;
                let mi: f64 = mi.parse().map_err(|_| bad(format!("bad MI {mi:?}")))?;
                Ok(RankedFeature {
                    feature,
                    mi: T::of(mi),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        if ranked.len() != m {
            return Err(bad(format!("class {expected} lists {} features, expected {m}", ranked.len())));
        }
        classes.push(ranked);
    }
    CdfTable::new(classes, bins, dim, model).map_err(|e| bad(e.to_string()))
}

pub fn save_cdf_table<T: Scalar>(table: &CdfTable<T>, path: &Path) -> Result<()> {
    fs::write(path, cdf_table_to_text(table))?;
    Ok(())
}

/// Loads a table and checks it was derived from the model with `expected_model_hash`.
pub fn load_cdf_table<T: Scalar>(path: &Path, expected_model_hash: &str) -> Result<CdfTable<T>> {
    let table = cdf_table_from_text(&fs::read_to_string(path)?)?;
    table.verify_model(expected_model_hash)?;
    Ok(table)
}
