use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{invalid, Result};
use crate::imgrid::{BinaryMask, GrayImage};

pub const BLOOD_POOL: f64 = 0.8;
pub const MYOCARDIUM: f64 = 0.45;
pub const BACKGROUND: f64 = 0.15;

/// Synthetic short-axis slice with exactly known ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct Phantom {
    pub image: GrayImage,
    /// Blood pool disk.
    pub endo: BinaryMask,
    /// Full disk bounded by the epicardium (contains `endo`).
    pub epi: BinaryMask,
}

/// Center of the phantom disks for a `size x size` grid.
pub fn phantom_center(size: usize) -> f64 {
    (size as f64 - 1.0) / 2.0
}

/// Concentric three-intensity phantom plus seeded Gaussian noise, clamped
/// to `[0, 1]`.
pub fn make_phantom(
    size: usize,
    r_inner: f64,
    r_outer: f64,
    noise_sigma: f64,
    seed: u64,
) -> Result<Phantom> {
    if !(r_inner > 0.0 && r_inner < r_outer && r_outer < size as f64 / 2.0) {
        return invalid(format!(
            "phantom radii must satisfy 0 < r_inner < r_outer < size/2, got {r_inner}, {r_outer}, size {size}"
        ));
    }
    if !(noise_sigma >= 0.0 && noise_sigma.is_finite()) {
        return invalid(format!("noise sigma must be >= 0, got {noise_sigma}"));
    }
    let c = phantom_center(size);
    let radius = |x: usize, y: usize| (x as f64 - c).hypot(y as f64 - c);
    let endo = BinaryMask::from_fn(size, size, |x, y| radius(x, y) <= r_inner)?;
    let epi = BinaryMask::from_fn(size, size, |x, y| radius(x, y) <= r_outer)?;

    let noise =
        Normal::new(0.0, noise_sigma).map_err(|e| crate::Error::InvalidArgument(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let image = GrayImage::from_fn(size, size, |x, y| {
        let base = if endo.get(x, y) {
            BLOOD_POOL
        } else if epi.get(x, y) {
            MYOCARDIUM
        } else {
            BACKGROUND
        };
        if noise_sigma == 0.0 {
            base
        } else {
            (base + noise.sample(&mut rng)).clamp(0.0, 1.0)
        }
    })?;
    Ok(Phantom { image, endo, epi })
}
