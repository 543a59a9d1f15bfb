//! Attribution maps, dominant-feature segmentation and PPM rendering.

pub mod maps;
pub mod render;

pub use maps::{attribution_map, segment_dominant, AttributionMap, MapSource, SegmentationMap};
pub use render::{
    heatmap_to_rgb, image_to_rgb, render_panel, segmentation_legend, segmentation_to_rgb, Rgb,
};
