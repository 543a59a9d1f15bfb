//! Binary PPM (P6) output for images, heatmaps, segmentations and panels.

use std::fs;
use std::path::{Path, PathBuf};

use crate::attrib::maps::{attribution_map, AttributionMap, MapSource, SegmentationMap};
use crate::comix::ExplanationPanel;
use crate::data::{encode_input, InputSpec, LabeledDataset};
use crate::error::{check_dim, Result};
use crate::scalar::Scalar;

pub const INDEX_FILE: &str = "index.tsv";

const PALETTE: [[u8; 3]; 12] = [
    [230, 25, 75],
    [60, 180, 75],
    [255, 225, 25],
    [0, 130, 200],
    [245, 130, 48],
    [145, 30, 180],
    [70, 240, 240],
    [240, 50, 230],
    [210, 245, 60],
    [250, 190, 212],
    [0, 128, 128],
    [170, 110, 40],
];

/// RGB raster with 8-bit channels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rgb {
    pub width: usize,
    pub height: usize,
    pub data: Vec<u8>,
}

impl Rgb {
    /// Nearest-neighbour upscaling by an integer factor.
    pub fn upscale(&self, factor: usize) -> Rgb {
        let factor = factor.max(1);
        let (w, h) = (self.width * factor, self.height * factor);
        let mut data = Vec::with_capacity(w * h * 3);
        for y in 0..h {
            for x in 0..w {
                let p = ((y / factor) * self.width + x / factor) * 3;
                data.extend_from_slice(&self.data[p..p + 3]);
            }
        }
        Rgb {
            width: w,
            height: h,
            data,
        }
    }

    pub fn to_ppm(&self) -> Vec<u8> {
        let mut out = format!("P6\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.data);
        out
    }

    pub fn write_ppm(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_ppm())?;
        Ok(())
    }
}

fn to_byte(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

/// Raw image to RGB: one channel is grey, three are colour, otherwise the
/// first channel is shown as grey.
pub fn image_to_rgb<T: Scalar>(image: &[T], spec: &InputSpec) -> Result<Rgb> {
    check_dim("image length", spec.raw_dim(), image.len())?;
    let c = spec.raw_channels;
    let mut data = Vec::with_capacity(spec.pixels() * 3);
    for px in image.chunks_exact(c) {
        if c == 3 {
            data.extend(px.iter().map(|v| to_byte(v.lossy_f64())));
        } else {
            let g = to_byte(px[0].lossy_f64());
            data.extend_from_slice(&[g, g, g]);
        }
    }
    Ok(Rgb {
        width: spec.width,
        height: spec.height,
        data,
    })
}

/// Diverging blue-white-red ramp for `v ∈ [-1, 1]`.
pub fn diverging(v: f64) -> [u8; 3] {
    let v = if v.is_finite() { v.clamp(-1.0, 1.0) } else { 0.0 };
    if v >= 0.0 {
        let fade = to_byte(1.0 - v);
        [255, fade, fade]
    } else {
        let fade = to_byte(1.0 + v);
        [fade, fade, 255]
    }
}

/// Heatmap of `map` divided by `scale` (floored at 1e-12).
pub fn heatmap_to_rgb<T: Scalar>(map: &AttributionMap<T>, scale: f64) -> Rgb {
    let s = scale.max(1e-12);
    Rgb {
        width: map.width,
        height: map.height,
        data: map
            .values
            .iter()
            .flat_map(|v| diverging(v.lossy_f64() / s))
            .collect(),
    }
}

pub fn segmentation_to_rgb(seg: &SegmentationMap) -> Rgb {
    Rgb {
        width: seg.width,
        height: seg.height,
        data: seg
            .cells
            .iter()
            .flat_map(|cell| match cell {
                None => [0, 0, 0],
                Some(f) => {
                    let slot = seg.legend.iter().position(|l| l == f).unwrap_or(0);
                    PALETTE[slot % PALETTE.len()]
                }
            })
            .collect(),
    }
}

/// Lines `feature<TAB>r g b` describing segmentation colours.
pub fn segmentation_legend(seg: &SegmentationMap) -> String {
    let mut out = String::from("feature\tcolor\n");
    for (slot, f) in seg.legend.iter().enumerate() {
        let [r, g, b] = PALETTE[slot % PALETTE.len()];
        out.push_str(&format!("{f}\t{r} {g} {b}\n"));
    }
    out.push_str("none\t0 0 0\n");
    out
}

/// Writes the four images of every panel entry plus an index file.
///
/// Per entry: the test image, the test attribution heatmap, the neighbour
/// attribution heatmap and the neighbour image. Both heatmaps of an entry share
/// one symmetric scale, the larger of their maximum absolute values. The index
/// has one `role<TAB>feature<TAB>rank<TAB>path` line per image.
pub fn render_panel<T: Scalar>(
    panel: &ExplanationPanel<T>,
    test_image: &[T],
    reference: &LabeledDataset<T>,
    out_dir: &Path,
    upscale: usize,
) -> Result<Vec<PathBuf>> {
    let spec = reference.spec();
    fs::create_dir_all(out_dir)?;
    let x = encode_input(test_image, &spec)?;
    let test_rgb = image_to_rgb(test_image, &spec)?.upscale(upscale);
    let mut written = Vec::new();
    let mut index = String::from("role\tfeature\trank\tpath\n");
    for e in &panel.entries {
        let neighbour_raw = reference.image(e.sample_ref);
        let neighbour = reference.encoded(e.sample_ref);
        let test_map = attribution_map(&e.test_row, &x, &spec, e.feature, MapSource::Test)?;
        let train_map = attribution_map(
            &e.train_row,
            &neighbour,
            &spec,
            e.feature,
            MapSource::Train {
                sample_ref: e.sample_ref,
            },
        )?;
        let scale = test_map.max_abs().lossy_f64().max(train_map.max_abs().lossy_f64());
        let images = [
            ("test_image", test_rgb.clone()),
            ("test_attribution", heatmap_to_rgb(&test_map, scale).upscale(upscale)),
            ("train_attribution", heatmap_to_rgb(&train_map, scale).upscale(upscale)),
            ("train_image", image_to_rgb(neighbour_raw, &spec)?.upscale(upscale)),
        ];
        for (role, rgb) in images {
            let name = format!("f{:03}_r{}_{role}.ppm", e.feature, e.rank);
            let path = out_dir.join(&name);
            rgb.write_ppm(&path)?;
            index.push_str(&format!("{role}\t{}\t{}\t{name}\n", e.feature, e.rank));
            written.push(path);
        }
    }
    let index_path = out_dir.join(INDEX_FILE);
    fs::write(&index_path, index)?;
    written.push(index_path);
    Ok(written)
}
