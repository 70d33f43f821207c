use crate::error::{invalid, Error, Result};

/// Per-pixel foreground/background decision. `true` is foreground.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize, bits: Vec<bool>) -> Result<Self> {
        if width == 0 || height == 0 {
            return invalid(format!(
                "mask dimensions must be positive, got {width}x{height}"
            ));
        }
        if bits.len() != width * height {
            return invalid("mask length does not match dimensions");
        }
        Ok(Self {
            width,
            height,
            bits,
        })
    }

    pub fn empty(width: usize, height: usize) -> Result<Self> {
        Self::new(width, height, vec![false; width * height])
    }

    pub fn full(width: usize, height: usize) -> Result<Self> {
        Self::new(width, height, vec![true; width * height])
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> bool,
    ) -> Result<Self> {
        let mut bits = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                bits.push(f(x, y));
            }
        }
        Self::new(width, height, bits)
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
    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: bool) {
        self.bits[y * self.width + x] = v;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    pub fn is_full(&self) -> bool {
        self.bits.iter().all(|&b| b)
    }

    /// Foreground pixel coordinates in row-major order.
    pub fn foreground(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let w = self.width;
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(move |(i, _)| (i % w, i / w))
    }

    pub fn complement(&self) -> Self {
        Self {
            width: self.width,
            height: self.height,
            bits: self.bits.iter().map(|b| !b).collect(),
        }
    }

    pub fn check_same_dims(&self, other: &BinaryMask) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(Error::DimensionMismatch {
                left_w: self.width,
                left_h: self.height,
                right_w: other.width,
                right_h: other.height,
            });
        }
        Ok(())
    }

    /// Number of foreground pixels of `inner` that are background here.
    pub fn count_missing(&self, inner: &BinaryMask) -> Result<usize> {
        self.check_same_dims(inner)?;
        Ok(self
            .bits
            .iter()
            .zip(&inner.bits)
            .filter(|(&outer, &inn)| inn && !outer)
            .count())
    }

    pub fn contains(&self, inner: &BinaryMask) -> Result<bool> {
        Ok(self.count_missing(inner)? == 0)
    }

    /// Morphological dilation by `steps` iterations of the 4-neighbor cross.
    pub fn dilate4(&self, steps: usize) -> Self {
        let (w, h) = self.dims();
        let mut cur = self.bits.clone();
        for _ in 0..steps {
            let prev = cur.clone();
            for y in 0..h {
                for x in 0..w {
                    let i = y * w + x;
                    if prev[i] {
                        continue;
                    }
                    cur[i] = (x > 0 && prev[i - 1])
                        || (x + 1 < w && prev[i + 1])
                        || (y > 0 && prev[i - w])
                        || (y + 1 < h && prev[i + w]);
                }
            }
        }
        Self {
            width: w,
            height: h,
            bits: cur,
        }
    }
}

/// Axis-aligned ellipse in pixel-center coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipseSpec {
    pub cx: f64,
    pub cy: f64,
    pub rx: f64,
    pub ry: f64,
}

impl EllipseSpec {
    pub fn new(cx: f64, cy: f64, rx: f64, ry: f64) -> Self {
        Self { cx, cy, rx, ry }
    }

    pub fn circle(cx: f64, cy: f64, r: f64) -> Self {
        Self::new(cx, cy, r, r)
    }

    /// Checks the semi-axes and that the bounding box stays within the
    /// pixel-center extent `[0, width-1] x [0, height-1]`.
    pub fn validate(&self, width: usize, height: usize) -> Result<()> {
        let vals = [self.cx, self.cy, self.rx, self.ry];
        if vals.iter().any(|v| !v.is_finite()) {
            return invalid("ellipse parameters must be finite");
        }
        if !(self.rx > 0.0 && self.ry > 0.0) {
            return invalid(format!(
                "ellipse semi-axes must be positive, got rx={} ry={}",
                self.rx, self.ry
            ));
        }
        let inside = self.cx - self.rx >= 0.0
            && self.cy - self.ry >= 0.0
            && self.cx + self.rx <= (width as f64 - 1.0)
            && self.cy + self.ry <= (height as f64 - 1.0);
        if !inside {
            return invalid(format!(
                "ellipse (c=({}, {}), r=({}, {})) exceeds {width}x{height} image",
                self.cx, self.cy, self.rx, self.ry
            ));
        }
        Ok(())
    }

    #[inline]
    pub fn contains(&self, x: f64, y: f64) -> bool {
        let u = (x - self.cx) / self.rx;
        let v = (y - self.cy) / self.ry;
        u * u + v * v <= 1.0
    }
}

/// Foreground wherever the pixel center lies inside or on the ellipse.
pub fn rasterize_ellipse(shape: (usize, usize), e: &EllipseSpec) -> Result<BinaryMask> {
    let (w, h) = shape;
    e.validate(w, h)?;
    BinaryMask::from_fn(w, h, |x, y| e.contains(x as f64, y as f64))
}
