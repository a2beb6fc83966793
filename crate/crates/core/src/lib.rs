//! Subpixel edge localization by converted intensity summation (CIS).
//!
//! The pipeline stages are:
//!
//! 1. **Imaging** – grayscale container, PGM I/O, Sobel gradients and a
//!    Canny-style pixel-level edge detector that tags each edge pixel with
//!    its discrete deflection (DD) axis.
//! 2. **CIS** – closed-form subpixel localization of the edge inside a 1-D
//!    pixel sequence along the DD axis.
//! 3. **SER** – stable edge regions: per-pixel stable sequence growth,
//!    tangential expansion and robust side-intensity estimation shared by
//!    every sequence of a region.
//! 4. **Complement** – extension of region endpoints through irregular edge
//!    pixels, intensity adjustment and localization of the bridged pixels.
//! 5. **Synth / Eval** – synthetic circle, line and slant datasets and the
//!    metrics and benchmark harness used to evaluate the methods.
//!
//! # Features
//!
//! - `parallel` *(default)* – per-edge-pixel work, stable sequence growth and
//!   benchmark cells run on the `rayon` thread pool. Results are identical to
//!   the sequential path; only wall time changes. Without the feature every
//!   [`Exec`] request runs sequentially.

pub mod cis;
pub mod complement;
pub mod error;
pub mod eval;
pub mod imaging;
mod par;
pub mod pipeline;
pub mod ser;
pub mod synth;

pub use cis::{CisParams, Dds, SidePair, Source, SubpixelPoint};
pub use error::{Error, Result};
pub use imaging::{Axis, EdgeMap, EdgePixel, GradientField, ImageBuffer};
pub use par::Exec;
pub use pipeline::{detect, DetectConfig, Detection, Method};
pub use ser::{Ser, SerThresholds};
