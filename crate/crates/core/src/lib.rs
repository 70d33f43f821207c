//! Level-set segmentation of the left-ventricular endocardium and
//! epicardium using distance-regularized level-set evolution.
//!
//! The crate is organized as:
//!
//! - [`imgrid`]: raster types, finite differences, convolution, ellipse masks
//! - [`preproc`]: bilateral, Wiener and gradient enhancement
//! - [`drlse`]: edge indicator, evolution, energy, redistancing, contours
//! - [`pipeline`]: the two-stage endocardium/epicardium procedure and phantoms
//! - [`metrics`]: Dice, Hausdorff, pixel accuracy and MCC

pub mod drlse;
mod error;
pub mod imgrid;
pub mod metrics;
pub mod pipeline;
pub mod preproc;

pub use error::{Error, Result};
