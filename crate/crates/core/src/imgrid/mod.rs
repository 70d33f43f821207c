//! Raster types and the finite-difference / convolution primitives the
//! rest of the crate is built on.
//!
//! All grids are row-major, `index = y * width + x`.

mod conv;
mod diff;
mod mask;

pub use conv::{convolve2d, gaussian_kernel, Kernel2D};
pub use diff::{central_gradient, divergence, laplacian};
pub use mask::{rasterize_ellipse, BinaryMask, EllipseSpec};

use crate::error::{invalid, Error, Result};

/// Smallest edge length a [`GrayImage`] may have; the difference stencils
/// need three samples along each axis.
pub const MIN_SIDE: usize = 3;

/// Dense 2D grid of finite real intensities.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if width < MIN_SIDE || height < MIN_SIDE {
            return invalid(format!(
                "image must be at least {MIN_SIDE}x{MIN_SIDE}, got {width}x{height}"
            ));
        }
        if data.len() != width * height {
            return invalid(format!(
                "data length {} does not match {width}x{height}",
                data.len()
            ));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return invalid(format!(
                "non-finite intensity at pixel ({}, {})",
                i % width,
                i / width
            ));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::new(width, height, data)
    }

    pub fn constant(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    /// Builds an image from data already known to satisfy the invariants.
    pub(crate) fn from_raw(width: usize, height: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), width * height);
        Self {
            width,
            height,
            data,
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    /// Sample with coordinates clamped into the grid (edge replication).
    #[inline]
    pub fn get_clamped(&self, x: isize, y: isize) -> f64 {
        let cx = x.clamp(0, self.width as isize - 1) as usize;
        let cy = y.clamp(0, self.height as isize - 1) as usize;
        self.data[cy * self.width + cx]
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Applies `f` to every pixel. Fails if `f` produces a non-finite value.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(
            self.width,
            self.height,
            self.data.iter().map(|&v| f(v)).collect(),
        )
    }

    pub(crate) fn check_same_dims(&self, width: usize, height: usize) -> Result<()> {
        if self.width != width || self.height != height {
            return Err(Error::DimensionMismatch {
                left_w: self.width,
                left_h: self.height,
                right_w: width,
                right_h: height,
            });
        }
        Ok(())
    }
}

/// Per-pixel 2D vectors, e.g. the gradient of a [`GrayImage`].
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    width: usize,
    height: usize,
    vx: Vec<f64>,
    vy: Vec<f64>,
}

impl VectorField {
    pub fn new(width: usize, height: usize, vx: Vec<f64>, vy: Vec<f64>) -> Result<Self> {
        if width < MIN_SIDE || height < MIN_SIDE {
            return invalid(format!("vector field too small: {width}x{height}"));
        }
        if vx.len() != width * height || vy.len() != width * height {
            return invalid("vector component length does not match dimensions");
        }
        if vx.iter().chain(vy.iter()).any(|v| !v.is_finite()) {
            return invalid("non-finite vector component");
        }
        Ok(Self {
            width,
            height,
            vx,
            vy,
        })
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> (f64, f64),
    ) -> Result<Self> {
        let n = width * height;
        let (mut vx, mut vy) = (Vec::with_capacity(n), Vec::with_capacity(n));
        for y in 0..height {
            for x in 0..width {
                let (a, b) = f(x, y);
                vx.push(a);
                vy.push(b);
            }
        }
        Self::new(width, height, vx, vy)
    }

    pub(crate) fn from_raw(width: usize, height: usize, vx: Vec<f64>, vy: Vec<f64>) -> Self {
        Self {
            width,
            height,
            vx,
            vy,
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn vx(&self) -> &[f64] {
        &self.vx
    }

    #[inline]
    pub fn vy(&self) -> &[f64] {
        &self.vy
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> (f64, f64) {
        let i = y * self.width + x;
        (self.vx[i], self.vy[i])
    }

    /// Per-pixel Euclidean norm.
    pub fn magnitude(&self) -> GrayImage {
        let data = self
            .vx
            .iter()
            .zip(&self.vy)
            .map(|(a, b)| a.hypot(*b))
            .collect();
        GrayImage::from_raw(self.width, self.height, data)
    }
}
