use crate::data::InputSpec;
use crate::error::{check_dim, Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MapSource {
    Test,
    Train { sample_ref: usize },
}

/// Per-pixel contribution of one embedding feature.
#[derive(Debug, Clone, PartialEq)]
pub struct AttributionMap<T> {
    pub height: usize,
    pub width: usize,
    pub values: Vec<T>,
    pub feature: usize,
    pub source: MapSource,
}

impl<T: Scalar> AttributionMap<T> {
    pub fn total(&self) -> T {
        self.values.iter().copied().sum()
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }
}

/// `map[p] = Σ_c row[p,c]·x[p,c]` over the encoded channels of pixel `p`,
/// so the map sums to `row·x`.
pub fn attribution_map<T: Scalar>(
    row: &[T],
    x: &[T],
    spec: &InputSpec,
    feature: usize,
    source: MapSource,
) -> Result<AttributionMap<T>> {
    check_dim("attribution row", spec.input_dim(), row.len())?;
    check_dim("attribution input", spec.input_dim(), x.len())?;
    let ec = spec.encoded_channels();
    let values = row
        .chunks_exact(ec)
        .zip(x.chunks_exact(ec))
        .map(|(r, v)| r.iter().zip(v).fold(T::zero(), |acc, (&a, &b)| acc + a * b))
        .collect();
    Ok(AttributionMap {
        height: spec.height,
        width: spec.width,
        values,
        feature,
        source,
    })
}

/// Pixel-wise dominant feature; `None` where no feature contributes positively.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentationMap {
    pub height: usize,
    pub width: usize,
    pub cells: Vec<Option<usize>>,
    /// Features that may appear in `cells`, in input order.
    pub legend: Vec<usize>,
}

impl SegmentationMap {
    pub fn segment_count(&self) -> usize {
        let mut seen: Vec<usize> = self.cells.iter().flatten().copied().collect();
        seen.sort_unstable();
        seen.dedup();
        seen.len()
    }
}

/// Assigns each pixel the feature with the largest attribution; exact ties go
/// to the lowest feature index.
pub fn segment_dominant<T: Scalar>(maps: &[AttributionMap<T>]) -> Result<SegmentationMap> {
    let first = maps.first().ok_or(Error::Empty("segmentation needs at least one map"))?;
    let (h, w) = (first.height, first.width);
    for m in maps {
        if m.height != h || m.width != w || m.values.len() != h * w {
            return Err(Error::dims("segmentation map size", h * w, m.values.len()));
        }
    }
    let cells = (0..h * w)
        .map(|p| {
            let mut best: Option<(T, usize)> = None;
            for m in maps {
                let v = m.values[p];
                if v <= T::zero() {
                    continue;
                }
                best = match best {
                    Some((bv, bf)) if bv > v || (bv == v && bf <= m.feature) => Some((bv, bf)),
                    _ => Some((v, m.feature)),
                };
            }
            best.map(|(_, f)| f)
        })
        .collect();
    Ok(SegmentationMap {
        height: h,
        width: w,
        cells,
        legend: maps.iter().map(|m| m.feature).collect(),
    })
}
