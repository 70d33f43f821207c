use std::f64::consts::PI;

use crate::error::{invalid, Result};
use crate::imgrid::{central_gradient, convolve2d, gaussian_kernel, GrayImage};

const TWO_PI: f64 = 2.0 * PI;

/// Double-well potential `p(s)`: minima at `s = 0` and `s = 1`.
pub fn potential(s: f64) -> f64 {
    if s <= 1.0 {
        (1.0 - (TWO_PI * s).cos()) / (TWO_PI * TWO_PI)
    } else {
        0.5 * (s - 1.0) * (s - 1.0)
    }
}

/// Diffusion rate `p'(s) / s` of the double-well potential, with the
/// `s -> 0` limit of 1.
pub fn dp_ratio(s: f64) -> f64 {
    if s == 0.0 {
        1.0
    } else if s <= 1.0 {
        (TWO_PI * s).sin() / (TWO_PI * s)
    } else {
        (s - 1.0) / s
    }
}

/// Smoothed Dirac delta with compact support `[-epsilon, epsilon]`.
pub fn dirac(x: f64, epsilon: f64) -> f64 {
    if x.abs() > epsilon {
        0.0
    } else {
        (1.0 + (PI * x / epsilon).cos()) / (2.0 * epsilon)
    }
}

/// Smoothed Heaviside whose derivative is [`dirac`].
pub fn heaviside(x: f64, epsilon: f64) -> f64 {
    if x > epsilon {
        1.0
    } else if x < -epsilon {
        0.0
    } else {
        0.5 * (1.0 + x / epsilon + (PI * x / epsilon).sin() / PI)
    }
}

/// Edge indicator `1 / (1 + |grad(G_sigma * img)|^2)`, in `(0, 1]` and small
/// along strong edges.
pub fn edge_indicator(img: &GrayImage, sigma: f64) -> Result<GrayImage> {
    if sigma.is_nan() || sigma <= 0.0 {
        return invalid(format!(
            "edge indicator sigma must be positive, got {sigma}"
        ));
    }
    let smooth = convolve2d(img, &gaussian_kernel(sigma)?)?;
    let grad = central_gradient(&smooth);
    let data = grad
        .vx()
        .iter()
        .zip(grad.vy())
        .map(|(gx, gy)| 1.0 / (1.0 + gx * gx + gy * gy))
        .collect();
    GrayImage::new(img.width(), img.height(), data)
}
