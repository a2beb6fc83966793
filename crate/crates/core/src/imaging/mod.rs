//! Image container, PGM I/O, gradients and pixel-level edge detection.

mod edges;
mod gradient;
mod image;
pub mod pgm;

pub use edges::{detect_edges, detect_edges_with_margin, Axis, EdgeMap, EdgePixel};
pub use gradient::{sobel_gradients, GradientField};
pub use image::ImageBuffer;
pub use pgm::{load_grayscale, save_grayscale};
