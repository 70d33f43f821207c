use super::GrayImage;
use crate::error::{invalid, Result};

/// Square convolution kernel with odd side length.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel2D {
    size: usize,
    weights: Vec<f64>,
}

impl Kernel2D {
    pub fn new(size: usize, weights: Vec<f64>) -> Result<Self> {
        if size.is_multiple_of(2) {
            return invalid(format!("kernel size must be odd, got {size}"));
        }
        if weights.len() != size * size {
            return invalid("kernel weight count does not match size");
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return invalid("non-finite kernel weight");
        }
        Ok(Self { size, weights })
    }

    /// Normalized Gaussian truncated to `radius` pixels on each side.
    pub fn gaussian_with_radius(sigma: f64, radius: usize) -> Result<Self> {
        if sigma <= 0.0 || !sigma.is_finite() {
            return invalid(format!("gaussian sigma must be positive, got {sigma}"));
        }
        let size = 2 * radius + 1;
        let r = radius as isize;
        let denom = 2.0 * sigma * sigma;
        let mut weights = Vec::with_capacity(size * size);
        for dy in -r..=r {
            for dx in -r..=r {
                weights.push((-((dx * dx + dy * dy) as f64) / denom).exp());
            }
        }
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        Ok(Self { size, weights })
    }

    #[inline]
    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn radius(&self) -> usize {
        self.size / 2
    }

    #[inline]
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Weight at offset `(dx, dy)` from the kernel center.
    #[inline]
    pub fn at(&self, dx: isize, dy: isize) -> f64 {
        let r = self.radius() as isize;
        self.weights[((dy + r) as usize) * self.size + (dx + r) as usize]
    }
}

/// Gaussian kernel with support `2 * ceil(3 * sigma) + 1`, weights summing to one.
pub fn gaussian_kernel(sigma: f64) -> Result<Kernel2D> {
    if sigma <= 0.0 || !sigma.is_finite() {
        return invalid(format!("gaussian sigma must be positive, got {sigma}"));
    }
    Kernel2D::gaussian_with_radius(sigma, (3.0 * sigma).ceil() as usize)
}

/// Same-size 2D convolution with clamp-to-edge borders.
///
/// The kernel is applied as a correlation; every kernel built in this crate
/// is point-symmetric, where the two coincide.
pub fn convolve2d(img: &GrayImage, k: &Kernel2D) -> Result<GrayImage> {
    let (w, h) = img.dims();
    if k.size() > w.min(h) {
        return invalid(format!("kernel of size {} exceeds image {w}x{h}", k.size()));
    }
    let r = k.radius() as isize;
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h as isize {
        for x in 0..w as isize {
            let mut acc = 0.0;
            for dy in -r..=r {
                for dx in -r..=r {
                    acc += k.at(dx, dy) * img.get_clamped(x + dx, y + dy);
                }
            }
            out.push(acc);
        }
    }
    Ok(GrayImage::from_raw(w, h, out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_kernel() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let img = GrayImage::from_fn(5, 4, |_, _| rng.random()).unwrap();
        let k = Kernel2D::new(1, vec![1.0]).unwrap();
        assert_eq!(convolve2d(&img, &k).unwrap(), img);
    }

    #[test]
    fn impulse_spreads_kernel_weights() {
        let img =
            GrayImage::from_fn(7, 7, |x, y| if (x, y) == (3, 3) { 1.0 } else { 0.0 }).unwrap();
        let k = Kernel2D::new(3, (1..=9).map(|v| v as f64).collect()).unwrap();
        let out = convolve2d(&img, &k).unwrap();
        // Correlation places the kernel's mirror around the impulse; the
        // weights 1..9 read back in reverse order.
        for dy in -1isize..=1 {
            for dx in -1isize..=1 {
                let got = out.get((3 + dx) as usize, (3 + dy) as usize);
                assert_eq!(got, k.at(-dx, -dy));
            }
        }
        assert_eq!(out.get(0, 0), 0.0);
    }

    #[test]
    fn box_kernel_matches_nested_loop_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let vals: Vec<f64> = (0..49).map(|_| rng.random()).collect();
        let img = GrayImage::new(7, 7, vals.clone()).unwrap();
        let k = Kernel2D::new(3, vec![1.0 / 9.0; 9]).unwrap();
        let out = convolve2d(&img, &k).unwrap();
        for y in 0..7i32 {
            for x in 0..7i32 {
                let mut want = 0.0;
                for j in y - 1..=y + 1 {
                    for i in x - 1..=x + 1 {
                        let ci = i.clamp(0, 6) as usize;
                        let cj = j.clamp(0, 6) as usize;
                        want += vals[cj * 7 + ci] / 9.0;
                    }
                }
                assert!((out.get(x as usize, y as usize) - want).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn oversized_kernel_rejected() {
        let img = GrayImage::constant(5, 9, 0.0).unwrap();
        let k = Kernel2D::new(7, vec![0.0; 49]).unwrap();
        assert!(convolve2d(&img, &k).is_err());
    }

    #[test]
    fn gaussian_normalized_and_symmetric() {
        for &sigma in &[0.3, 0.5, 1.0, 1.5, 2.7] {
            let k = gaussian_kernel(sigma).unwrap();
            assert_eq!(k.size(), 2 * (3.0f64 * sigma).ceil() as usize + 1);
            let total: f64 = k.weights().iter().sum();
            assert!((total - 1.0).abs() < 1e-12);
            let r = k.radius() as isize;
            for y in -r..=r {
                for x in -r..=r {
                    assert_eq!(k.at(x, y), k.at(-x, y));
                    assert_eq!(k.at(x, y), k.at(x, -y));
                }
            }
        }
    }

    #[test]
    fn gaussian_center_weight_sigma_one() {
        // Direct evaluation of exp(-(x^2+y^2)/2) over the 7x7 support.
        let mut z = 0.0;
        for y in -3i32..=3 {
            for x in -3i32..=3 {
                z += (-((x * x + y * y) as f64) / 2.0).exp();
            }
        }
        let k = gaussian_kernel(1.0).unwrap();
        assert_eq!(k.size(), 7);
        assert!((k.at(0, 0) - 1.0 / z).abs() < 1e-15);
        assert!((k.at(0, 0) - 0.15924112569070242).abs() < 1e-12);
    }

    #[test]
    fn gaussian_rejects_nonpositive_sigma() {
        assert!(gaussian_kernel(0.0).is_err());
        assert!(gaussian_kernel(-1.0).is_err());
        assert!(gaussian_kernel(f64::NAN).is_err());
    }

    #[test]
    fn normalized_kernel_fixes_constant_image() {
        let img = GrayImage::constant(9, 9, 0.625).unwrap();
        // dyadic weights so the sum is exactly one
        let k = Kernel2D::new(
            3,
            vec![
                0.0625, 0.125, 0.0625, 0.125, 0.25, 0.125, 0.0625, 0.125, 0.0625,
            ],
        )
        .unwrap();
        let out = convolve2d(&img, &k).unwrap();
        assert!(out.data().iter().all(|&v| v == 0.625));
    }
}
