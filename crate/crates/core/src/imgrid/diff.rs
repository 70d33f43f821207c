use super::{GrayImage, VectorField};

/// Derivative along one axis: central difference in the interior,
/// one-sided (forward/backward) on the first and last sample.
#[inline]
fn axis_diff(at: impl Fn(usize) -> f64, i: usize, n: usize) -> f64 {
    if i == 0 {
        at(1) - at(0)
    } else if i == n - 1 {
        at(n - 1) - at(n - 2)
    } else {
        0.5 * (at(i + 1) - at(i - 1))
    }
}

/// Discrete gradient `(d/dx, d/dy)` with unit grid spacing.
pub fn central_gradient(img: &GrayImage) -> VectorField {
    let (w, h) = img.dims();
    let d = img.data();
    let mut vx = Vec::with_capacity(w * h);
    let mut vy = Vec::with_capacity(w * h);
    for y in 0..h {
        let row = y * w;
        for x in 0..w {
            vx.push(axis_diff(|i| d[row + i], x, w));
            vy.push(axis_diff(|j| d[j * w + x], y, h));
        }
    }
    VectorField::from_raw(w, h, vx, vy)
}

/// `d(vx)/dx + d(vy)/dy` using the same stencils as [`central_gradient`].
pub fn divergence(v: &VectorField) -> GrayImage {
    let (w, h) = (v.width(), v.height());
    let (vx, vy) = (v.vx(), v.vy());
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h {
        let row = y * w;
        for x in 0..w {
            let dx = axis_diff(|i| vx[row + i], x, w);
            let dy = axis_diff(|j| vy[j * w + x], y, h);
            out.push(dx + dy);
        }
    }
    GrayImage::from_raw(w, h, out)
}

/// Five-point Laplacian with replicated (zero-flux) borders.
pub fn laplacian(img: &GrayImage) -> GrayImage {
    let (w, h) = img.dims();
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h as isize {
        for x in 0..w as isize {
            let c = img.get_clamped(x, y);
            out.push(
                img.get_clamped(x + 1, y)
                    + img.get_clamped(x - 1, y)
                    + img.get_clamped(x, y + 1)
                    + img.get_clamped(x, y - 1)
                    - 4.0 * c,
            );
        }
    }
    GrayImage::from_raw(w, h, out)
}
