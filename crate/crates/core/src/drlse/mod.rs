//! Level-set engine: edge indicator, distance-regularized evolution and its
//! energy, a reinitialization-based baseline, and contour/mask extraction.
//!
//! Sign convention throughout: `phi < 0` inside the segmented region,
//! `phi >= 0` outside.

mod contour;
mod evolve;
mod reinit;
mod terms;

pub use contour::{extract_zero_contour, Contour, Point};
pub use evolve::{baseline_lsf_step, drlse_step, energy, EnergyTerms};
pub use reinit::reinitialize;
pub use terms::{dirac, dp_ratio, edge_indicator, heaviside, potential};

use crate::error::{invalid, Result};
use crate::imgrid::{central_gradient, BinaryMask, GrayImage};

/// Default magnitude of the binary-step initialization.
pub const DEFAULT_C0: f64 = 2.0;

/// Level-set function sampled on the image grid.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelSetField(GrayImage);

impl LevelSetField {
    pub fn new(grid: GrayImage) -> Self {
        Self(grid)
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        f: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self> {
        GrayImage::from_fn(width, height, f).map(Self)
    }

    #[inline]
    pub fn as_image(&self) -> &GrayImage {
        &self.0
    }

    pub fn into_image(self) -> GrayImage {
        self.0
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.0.width()
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.0.height()
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        self.0.dims()
    }

    #[inline]
    pub fn phi(&self) -> &[f64] {
        self.0.data()
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.0.get(x, y)
    }
}

/// Coefficients of one distance-regularized evolution run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DrlseParams {
    /// Distance-regularization weight.
    pub mu: f64,
    /// Weighted-length weight.
    pub lambda: f64,
    /// Weighted-area weight; negative expands the region, positive shrinks it.
    pub alpha: f64,
    /// Half-width of the smoothed Dirac/Heaviside, pixels.
    pub epsilon: f64,
    /// Gaussian pre-smoothing of the edge indicator.
    pub sigma: f64,
    pub timestep: f64,
    pub iters: usize,
    /// Iterations between smoothing passes over `phi`.
    pub smooth_every: usize,
}

impl Default for DrlseParams {
    fn default() -> Self {
        Self {
            mu: 0.2,
            lambda: 5.0,
            alpha: -3.0,
            epsilon: 1.5,
            sigma: 1.5,
            timestep: 1.0,
            iters: 85,
            smooth_every: 10,
        }
    }
}

fn check_finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        invalid(format!("{name} must be finite, got {v}"))
    }
}

impl DrlseParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("mu", self.mu),
            ("lambda", self.lambda),
            ("alpha", self.alpha),
            ("epsilon", self.epsilon),
            ("sigma", self.sigma),
            ("timestep", self.timestep),
        ] {
            check_finite(name, v)?;
        }
        if self.mu <= 0.0 {
            return invalid(format!("mu must be positive, got {}", self.mu));
        }
        if self.lambda < 0.0 {
            return invalid(format!("lambda must be >= 0, got {}", self.lambda));
        }
        if self.epsilon <= 0.0 || self.sigma <= 0.0 || self.timestep <= 0.0 {
            return invalid("epsilon, sigma and timestep must be positive");
        }
        if self.mu * self.timestep >= 0.25 {
            return invalid(format!(
                "mu * timestep = {} violates the stability bound 0.25",
                self.mu * self.timestep
            ));
        }
        if self.smooth_every < 1 {
            return invalid("smooth_every must be >= 1");
        }
        Ok(())
    }
}

/// Coefficients of the reinitialization-stabilized baseline: the same
/// external forcing as [`DrlseParams`], no distance regularization, and a
/// relaxation toward the signed distance every `reinit_every` steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaselineParams {
    /// Relaxation weight toward the redistanced field, in `[0, 1]`.
    pub gamma: f64,
    pub reinit_every: usize,
    pub lambda: f64,
    pub alpha: f64,
    pub epsilon: f64,
    pub sigma: f64,
    pub timestep: f64,
    pub iters: usize,
    pub smooth_every: usize,
}

impl Default for BaselineParams {
    fn default() -> Self {
        Self::matching(&DrlseParams::default(), 1.0, 10)
    }
}

impl BaselineParams {
    /// Baseline sharing every external coefficient with `p`.
    pub fn matching(p: &DrlseParams, gamma: f64, reinit_every: usize) -> Self {
        Self {
            gamma,
            reinit_every,
            lambda: p.lambda,
            alpha: p.alpha,
            epsilon: p.epsilon,
            sigma: p.sigma,
            timestep: p.timestep,
            iters: p.iters,
            smooth_every: p.smooth_every,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("gamma", self.gamma),
            ("lambda", self.lambda),
            ("alpha", self.alpha),
            ("epsilon", self.epsilon),
            ("sigma", self.sigma),
            ("timestep", self.timestep),
        ] {
            check_finite(name, v)?;
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return invalid(format!("gamma must lie in [0, 1], got {}", self.gamma));
        }
        if self.reinit_every < 1 || self.smooth_every < 1 {
            return invalid("reinit_every and smooth_every must be >= 1");
        }
        if self.lambda < 0.0 {
            return invalid(format!("lambda must be >= 0, got {}", self.lambda));
        }
        if self.epsilon <= 0.0 || self.sigma <= 0.0 || self.timestep <= 0.0 {
            return invalid("epsilon, sigma and timestep must be positive");
        }
        Ok(())
    }
}

/// Binary-step initialization: `-c0` inside the mask, `+c0` outside.
pub fn init_phi(mask: &BinaryMask, c0: f64) -> Result<LevelSetField> {
    if !(c0 > 0.0 && c0.is_finite()) {
        return invalid(format!("c0 must be positive, got {c0}"));
    }
    if mask.is_empty() || mask.is_full() {
        return invalid("initial mask must be neither empty nor full");
    }
    let data = mask
        .bits()
        .iter()
        .map(|&b| if b { -c0 } else { c0 })
        .collect();
    GrayImage::new(mask.width(), mask.height(), data).map(LevelSetField)
}

/// Foreground wherever `phi < 0`.
pub fn mask_from_phi(phi: &LevelSetField) -> BinaryMask {
    BinaryMask::new(
        phi.width(),
        phi.height(),
        phi.phi().iter().map(|&v| v < 0.0).collect(),
    )
    .expect("level-set dimensions are valid mask dimensions")
}

/// Mean of `||grad phi| - 1|` over interior pixels with `|phi| < half_width`.
/// `None` when the band is empty.
pub fn band_gradient_deviation(phi: &LevelSetField, half_width: f64) -> Option<f64> {
    let (w, h) = phi.dims();
    let grad = central_gradient(phi.as_image());
    let (mut total, mut n) = (0.0, 0usize);
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            if phi.get(x, y).abs() < half_width {
                let (gx, gy) = grad.get(x, y);
                total += (gx.hypot(gy) - 1.0).abs();
                n += 1;
            }
        }
    }
    (n > 0).then(|| total / n as f64)
}
