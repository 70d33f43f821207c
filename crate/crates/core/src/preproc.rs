//! Image enhancement applied before evolution: bilateral filter, local
//! adaptive Wiener filter and Sobel gradient enhancement.

use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};
use crate::imgrid::GrayImage;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BilateralParams {
    /// Window is `(2 * half_window + 1)^2` pixels.
    pub half_window: usize,
    /// Spatial falloff, pixels.
    pub sigma_s: f64,
    /// Range falloff, normalized intensity units.
    pub sigma_r: f64,
}

impl Default for BilateralParams {
    fn default() -> Self {
        Self {
            half_window: 3,
            sigma_s: 2.0,
            sigma_r: 0.1,
        }
    }
}

impl BilateralParams {
    pub fn validate(&self) -> Result<()> {
        if self.half_window < 1 {
            return invalid("bilateral half_window must be >= 1");
        }
        if !(self.sigma_s > 0.0 && self.sigma_s.is_finite()) {
            return invalid(format!(
                "bilateral sigma_s must be positive, got {}",
                self.sigma_s
            ));
        }
        if !(self.sigma_r > 0.0 && self.sigma_r.is_finite()) {
            return invalid(format!(
                "bilateral sigma_r must be positive, got {}",
                self.sigma_r
            ));
        }
        Ok(())
    }
}

/// Noise power used by the Wiener filter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseVariance {
    Known(f64),
    /// Mean of the local variances over the image.
    Estimate,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WienerParams {
    pub half_window: usize,
    pub noise_variance: NoiseVariance,
}

impl Default for WienerParams {
    fn default() -> Self {
        Self {
            half_window: 1,
            noise_variance: NoiseVariance::Estimate,
        }
    }
}

impl WienerParams {
    pub fn validate(&self) -> Result<()> {
        if self.half_window < 1 {
            return invalid("wiener half_window must be >= 1");
        }
        if let NoiseVariance::Known(v) = self.noise_variance {
            if !(v >= 0.0 && v.is_finite()) {
                return invalid(format!("wiener noise_variance must be >= 0, got {v}"));
            }
        }
        Ok(())
    }
}

/// Edge-preserving smoothing. Each output pixel is the weighted mean of its
/// window with weight `exp(-d^2 / 2 sigma_s^2) * exp(-dI^2 / 2 sigma_r^2)`;
/// the window is clipped at the image border.
pub fn bilateral_filter(img: &GrayImage, p: &BilateralParams) -> Result<GrayImage> {
    p.validate()?;
    let (w, h) = img.dims();
    let n = p.half_window as isize;
    let side = 2 * p.half_window + 1;
    let ss = 2.0 * p.sigma_s * p.sigma_s;
    let sr = 2.0 * p.sigma_r * p.sigma_r;

    let mut spatial = Vec::with_capacity(side * side);
    for dy in -n..=n {
        for dx in -n..=n {
            spatial.push((-((dx * dx + dy * dy) as f64) / ss).exp());
        }
    }

    let mut out = Vec::with_capacity(w * h);
    for y in 0..h as isize {
        for x in 0..w as isize {
            let center = img.get(x as usize, y as usize);
            let (mut num, mut den) = (0.0, 0.0);
            for dy in -n..=n {
                let yy = y + dy;
                if yy < 0 || yy >= h as isize {
                    continue;
                }
                for dx in -n..=n {
                    let xx = x + dx;
                    if xx < 0 || xx >= w as isize {
                        continue;
                    }
                    let v = img.get(xx as usize, yy as usize);
                    let diff = v - center;
                    let wgt = spatial[((dy + n) as usize) * side + (dx + n) as usize]
                        * (-(diff * diff) / sr).exp();
                    num += wgt * v;
                    den += wgt;
                }
            }
            out.push(num / den);
        }
    }
    GrayImage::new(w, h, out)
}

/// Local mean and (population) variance over a border-clipped window.
fn local_stats(img: &GrayImage, half: usize) -> (Vec<f64>, Vec<f64>) {
    let (w, h) = img.dims();
    let n = half as isize;
    let mut means = Vec::with_capacity(w * h);
    let mut vars = Vec::with_capacity(w * h);
    let mut window = Vec::with_capacity((2 * half + 1).pow(2));
    for y in 0..h as isize {
        for x in 0..w as isize {
            window.clear();
            for yy in (y - n).max(0)..=(y + n).min(h as isize - 1) {
                for xx in (x - n).max(0)..=(x + n).min(w as isize - 1) {
                    window.push(img.get(xx as usize, yy as usize));
                }
            }
            let k = window.len() as f64;
            let m = window.iter().sum::<f64>() / k;
            let v = window.iter().map(|a| (a - m) * (a - m)).sum::<f64>() / k;
            means.push(m);
            vars.push(v);
        }
    }
    (means, vars)
}

/// Local adaptive (Lee-style) Wiener filter:
/// `m + max(v - noise, 0) / v * (I - m)` per pixel.
pub fn wiener_filter(img: &GrayImage, p: &WienerParams) -> Result<GrayImage> {
    p.validate()?;
    let (means, vars) = local_stats(img, p.half_window);
    let noise = match p.noise_variance {
        NoiseVariance::Known(v) => v,
        NoiseVariance::Estimate => vars.iter().sum::<f64>() / vars.len() as f64,
    };
    // Written as I - (share of variance attributed to noise) * (I - m) so
    // that a zero noise power returns the input bit-for-bit.
    let out = img
        .data()
        .iter()
        .zip(means.iter().zip(&vars))
        .map(|(&i, (&m, &v))| i - noise.min(v) / v.max(f64::MIN_POSITIVE) * (i - m))
        .collect();
    GrayImage::new(img.width(), img.height(), out)
}

/// Sobel gradient magnitude rescaled so the strongest response is 1.
/// Borders use edge replication. A flat image maps to all zeros.
pub fn gradient_enhance(img: &GrayImage) -> Result<GrayImage> {
    let (w, h) = img.dims();
    let mut mag = Vec::with_capacity(w * h);
    for y in 0..h as isize {
        for x in 0..w as isize {
            let p = |dx: isize, dy: isize| img.get_clamped(x + dx, y + dy);
            let gx = (p(1, -1) + 2.0 * p(1, 0) + p(1, 1)) - (p(-1, -1) + 2.0 * p(-1, 0) + p(-1, 1));
            let gy = (p(-1, 1) + 2.0 * p(0, 1) + p(1, 1)) - (p(-1, -1) + 2.0 * p(0, -1) + p(1, -1));
            mag.push(gx.hypot(gy));
        }
    }
    let peak = mag.iter().copied().fold(0.0, f64::max);
    if peak > 0.0 {
        mag.iter_mut().for_each(|m| *m /= peak);
    }
    GrayImage::new(w, h, mag)
}

/// Enhancement chain selected for a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Preproc {
    BilateralGradient,
    WienerGradient,
    Bilateral,
    Wiener,
    Gradient,
    None,
}

impl Preproc {
    /// All chains, in the order the ablation reports them.
    pub const ALL: [Preproc; 6] = [
        Preproc::BilateralGradient,
        Preproc::WienerGradient,
        Preproc::Bilateral,
        Preproc::Wiener,
        Preproc::Gradient,
        Preproc::None,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Preproc::BilateralGradient => "bilateral+gradient",
            Preproc::WienerGradient => "wiener+gradient",
            Preproc::Bilateral => "bilateral",
            Preproc::Wiener => "wiener",
            Preproc::Gradient => "gradient",
            Preproc::None => "none",
        }
    }

    pub fn apply(
        &self,
        img: &GrayImage,
        bilateral: &BilateralParams,
        wiener: &WienerParams,
    ) -> Result<GrayImage> {
        match self {
            Preproc::BilateralGradient => gradient_enhance(&bilateral_filter(img, bilateral)?),
            Preproc::WienerGradient => gradient_enhance(&wiener_filter(img, wiener)?),
            Preproc::Bilateral => bilateral_filter(img, bilateral),
            Preproc::Wiener => wiener_filter(img, wiener),
            Preproc::Gradient => gradient_enhance(img),
            Preproc::None => Ok(img.clone()),
        }
    }
}

impl fmt::Display for Preproc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Preproc {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preproc::ALL
            .into_iter()
            .find(|p| p.as_str() == s.trim())
            .ok_or_else(|| Error::InvalidArgument(format!("unknown preprocessing chain '{s}'")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn noisy(w: usize, h: usize, seed: u64) -> GrayImage {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        GrayImage::from_fn(w, h, |_, _| rng.random()).unwrap()
    }

    #[test]
    fn bilateral_constant_fixed_point() {
        let img = GrayImage::constant(8, 6, 0.4).unwrap();
        let out = bilateral_filter(&img, &BilateralParams::default()).unwrap();
        for v in out.data() {
            assert!((v - 0.4).abs() < 1e-15);
        }
    }

    #[test]
    fn bilateral_huge_range_sigma_is_gaussian_smoothing() {
        let img = noisy(9, 7, 2);
        let p = BilateralParams {
            half_window: 2,
            sigma_s: 1.3,
            sigma_r: 1e6,
        };
        let out = bilateral_filter(&img, &p).unwrap();
        for y in 0..7i64 {
            for x in 0..9i64 {
                let (mut num, mut den) = (0.0, 0.0);
                for j in (y - 2).max(0)..=(y + 2).min(6) {
                    for i in (x - 2).max(0)..=(x + 2).min(8) {
                        let d2 = ((i - x).pow(2) + (j - y).pow(2)) as f64;
                        let wgt = (-d2 / (2.0 * 1.3 * 1.3)).exp();
                        num += wgt * img.get(i as usize, j as usize);
                        den += wgt;
                    }
                }
                assert!((out.get(x as usize, y as usize) - num / den).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn bilateral_preserves_step_edge() {
        let img = GrayImage::from_fn(12, 8, |x, _| if x < 6 { 0.0 } else { 1.0 }).unwrap();
        let p = BilateralParams {
            half_window: 3,
            sigma_s: 2.0,
            sigma_r: 0.05,
        };
        let out = bilateral_filter(&img, &p).unwrap();
        for y in 0..8 {
            assert!((out.get(5, y) - 0.0).abs() < 0.01);
            assert!((out.get(6, y) - 1.0).abs() < 0.01);
        }
    }

    #[test]
    fn bilateral_output_within_input_range() {
        let img = noisy(10, 10, 9);
        let out = bilateral_filter(&img, &BilateralParams::default()).unwrap();
        let (lo, hi) = (img.min(), img.max());
        assert!(out
            .data()
            .iter()
            .all(|&v| v >= lo - 1e-12 && v <= hi + 1e-12));
    }

    #[test]
    fn bilateral_rejects_bad_params() {
        let img = noisy(5, 5, 1);
        let bad = BilateralParams {
            half_window: 0,
            ..Default::default()
        };
        assert!(bilateral_filter(&img, &bad).is_err());
        let bad = BilateralParams {
            sigma_r: 0.0,
            ..Default::default()
        };
        assert!(bilateral_filter(&img, &bad).is_err());
    }

    #[test]
    fn wiener_constant_unchanged() {
        let img = GrayImage::constant(6, 6, 0.3).unwrap();
        for noise in [NoiseVariance::Known(0.01), NoiseVariance::Estimate] {
            let out = wiener_filter(
                &img,
                &WienerParams {
                    half_window: 1,
                    noise_variance: noise,
                },
            )
            .unwrap();
            assert_eq!(out, img);
        }
    }

    #[test]
    fn wiener_zero_noise_is_identity() {
        let img = noisy(8, 8, 4);
        let p = WienerParams {
            half_window: 2,
            noise_variance: NoiseVariance::Known(0.0),
        };
        assert_eq!(wiener_filter(&img, &p).unwrap(), img);
    }

    #[test]
    fn wiener_matches_local_statistics_oracle() {
        let img = noisy(7, 7, 8);
        let noise = 0.01;
        let p = WienerParams {
            half_window: 1,
            noise_variance: NoiseVariance::Known(noise),
        };
        let out = wiener_filter(&img, &p).unwrap();
        for y in 0..7i64 {
            for x in 0..7i64 {
                let mut vals = Vec::new();
                for j in (y - 1).max(0)..=(y + 1).min(6) {
                    for i in (x - 1).max(0)..=(x + 1).min(6) {
                        vals.push(img.get(i as usize, j as usize));
                    }
                }
                let n = vals.len() as f64;
                let m = vals.iter().sum::<f64>() / n;
                let sq = vals.iter().map(|v| v * v).sum::<f64>() / n;
                let v = sq - m * m;
                let gain = if v > noise { (v - noise) / v } else { 0.0 };
                let want = m + gain * (img.get(x as usize, y as usize) - m);
                assert!((out.get(x as usize, y as usize) - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn gradient_enhance_constant_is_zero() {
        let out = gradient_enhance(&GrayImage::constant(5, 5, 0.9).unwrap()).unwrap();
        assert!(out.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn gradient_enhance_step_peaks_straddling_edge() {
        let img = GrayImage::from_fn(10, 6, |x, _| if x < 5 { 0.2 } else { 0.7 }).unwrap();
        let out = gradient_enhance(&img).unwrap();
        for y in 0..6 {
            assert_eq!(out.get(4, y), 1.0);
            assert_eq!(out.get(5, y), 1.0);
            for x in (0..10).filter(|&x| x != 4 && x != 5) {
                assert_eq!(out.get(x, y), 0.0);
            }
        }
    }

    #[test]
    fn gradient_enhance_ramp_constant_interior() {
        let w = 9;
        let img = GrayImage::from_fn(w, 7, |x, _| x as f64 / w as f64).unwrap();
        let out = gradient_enhance(&img).unwrap();
        for y in 0..7 {
            for x in 1..w - 1 {
                assert!((out.get(x, y) - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn preproc_names_round_trip() {
        for p in Preproc::ALL {
            assert_eq!(p.as_str().parse::<Preproc>().unwrap(), p);
        }
        assert!("median".parse::<Preproc>().is_err());
    }
}
