//! Image inpainting on pixel graphs.

pub mod color;
pub mod graphs;
pub mod grid;
pub mod inpaint;

pub use color::{rgb_to_yuv, yuv_to_rgb, ColorTransform, YUV_MATRIX};
pub use graphs::{build_grid_graph, build_knn_graph, patch_distance, Adjacency, KnnGraph, PatchConfig};
pub use grid::{read_image, read_mask, read_masked, write_image, write_mask, BitDepth, ImageGrid};
pub use inpaint::{inpaint, inpaint_partial, ColorSpace, GraphKind, InpaintConfig, InpaintOutcome, Method, SolveStats};
