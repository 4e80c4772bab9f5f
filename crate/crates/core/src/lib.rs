//! Road sign color segmentation with photometric-invariant spherical color
//! coordinates.
//!
//! Pixels are mapped from rgb to `(l, theta, phi)`; the two angles depend
//! only on the direction of the color vector and so are unaffected by
//! shading and overall illumination intensity. Red and blue sign pixels are
//! found with a hybrid distance: the angular distance to a trained reference
//! chromaticity, gated by a transfer function of the pixel's red/blue ratio.
//!
//! Modules, in pipeline order:
//!
//! - [`color_model`]: spherical transform and a Lambertian blackbody pixel model
//! - [`segmentation`]: hybrid-distance classifier and its training
//! - [`baselines`]: HSV, red-enhancing and log-chromatic segmenters for comparison
//! - [`detection`]: connected components and candidate boxes
//! - [`evaluation`]: ground truth, IoU matching, precision/recall reports, PR sweeps
//! - [`pipeline`]: end-to-end runs backing the `hdsc` command
//! - [`synth`]: seeded synthetic scenes with exact ground truth

pub mod baselines;
pub mod color_model;
pub mod detection;
pub mod error;
pub mod evaluation;
pub mod image;
pub mod kv;
pub mod pipeline;
pub mod segmentation;
mod stats;
pub mod synth;

pub use error::{Error, Result};
