//! Two-stage segmentation: preprocessing, ellipse-seeded endocardium
//! evolution, then epicardium evolution grown outward from the endocardium.

mod phantom;

pub use phantom::{make_phantom, phantom_center, Phantom, BACKGROUND, BLOOD_POOL, MYOCARDIUM};

use std::fmt;
use std::time::Instant;

use crate::drlse::{
    baseline_lsf_step, drlse_step, edge_indicator, energy, extract_zero_contour, init_phi,
    mask_from_phi, BaselineParams, Contour, DrlseParams, LevelSetField, DEFAULT_C0,
};
use crate::error::{invalid, Error, Result};
use crate::imgrid::{convolve2d, rasterize_ellipse, BinaryMask, EllipseSpec, GrayImage, Kernel2D};
use crate::metrics::{report, MetricsReport};
use crate::preproc::{BilateralParams, Preproc, WienerParams};

/// Which evolution drives a stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Drlse,
    /// External forcing only, stabilized by periodic redistancing.
    Baseline,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Drlse => "drlse",
            Method::Baseline => "lsf",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stage {
    Endocardium,
    Epicardium,
}

impl Stage {
    pub fn as_str(&self) -> &'static str {
        match self {
            Stage::Endocardium => "endo",
            Stage::Epicardium => "epi",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Settings of the reinitialization baseline that have no DRLSE analogue.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaselineSettings {
    pub gamma: f64,
    pub reinit_every: usize,
}

impl Default for BaselineSettings {
    fn default() -> Self {
        Self {
            gamma: 1.0,
            reinit_every: 10,
        }
    }
}

/// Everything needed to segment one image.
#[derive(Debug, Clone, PartialEq)]
pub struct CaseConfig {
    pub preproc: Preproc,
    pub bilateral: BilateralParams,
    pub wiener: WienerParams,
    pub ellipse: EllipseSpec,
    pub endo: DrlseParams,
    pub epi: DrlseParams,
    pub epi_dilate_px: usize,
    /// Iterations between recorded contour snapshots; 0 disables them.
    pub snapshot_every: usize,
    /// Magnitude of the binary-step initialization.
    pub c0: f64,
    /// Factor applied to normalized intensities before the edge indicator
    /// is computed. Larger values make `g` stop the contour at weaker
    /// edges, and at noise.
    pub edge_scale: f64,
    pub baseline: BaselineSettings,
}

impl Default for CaseConfig {
    fn default() -> Self {
        let c = phantom_center(128);
        Self {
            preproc: Preproc::Bilateral,
            bilateral: BilateralParams::default(),
            wiener: WienerParams::default(),
            ellipse: EllipseSpec::circle(c, c, 15.0),
            endo: DrlseParams::default(),
            epi: DrlseParams::default(),
            epi_dilate_px: 6,
            snapshot_every: 0,
            c0: DEFAULT_C0,
            edge_scale: 100.0,
            baseline: BaselineSettings::default(),
        }
    }
}

impl CaseConfig {
    pub fn validate(&self, width: usize, height: usize) -> Result<()> {
        self.bilateral.validate()?;
        self.wiener.validate()?;
        self.ellipse.validate(width, height)?;
        self.endo.validate()?;
        self.epi.validate()?;
        if self.epi.alpha > 0.0 {
            return invalid(format!(
                "epi.alpha must be <= 0 so the epicardium expands, got {}",
                self.epi.alpha
            ));
        }
        if !(self.c0 > 0.0 && self.c0.is_finite()) {
            return invalid(format!("c0 must be positive, got {}", self.c0));
        }
        if !(self.edge_scale > 0.0 && self.edge_scale.is_finite()) {
            return invalid(format!(
                "edge_scale must be positive, got {}",
                self.edge_scale
            ));
        }
        self.baseline_params(&self.endo).validate()
    }

    pub fn baseline_params(&self, p: &DrlseParams) -> BaselineParams {
        BaselineParams::matching(p, self.baseline.gamma, self.baseline.reinit_every)
    }
}

/// Contour state recorded mid-evolution.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub stage: Stage,
    /// Number of steps taken when the frame was recorded.
    pub iteration: usize,
    pub contours: Vec<Contour>,
}

#[derive(Debug, Clone)]
pub struct StageResult {
    pub mask: BinaryMask,
    pub contours: Vec<Contour>,
    pub phi: LevelSetField,
    pub iterations_run: usize,
    /// Energy before the first step and after every step.
    pub energy_trace: Vec<f64>,
    pub snapshots: Vec<Snapshot>,
    /// Wall-clock time of the stage, milliseconds. Not deterministic.
    pub wall_ms: f64,
}

#[derive(Debug, Clone)]
pub struct CaseResult {
    pub endo: StageResult,
    pub epi: StageResult,
    /// `(endo, epi)` reports when labels were supplied.
    pub metrics: Option<(MetricsReport, MetricsReport)>,
}

/// Preprocessed image plus the edge indicator of each stage.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub filtered: GrayImage,
    pub endo_edges: GrayImage,
    pub epi_edges: GrayImage,
}

/// Applies the configured enhancement chain and builds the edge maps from
/// the filtered image.
pub fn prepare(img: &GrayImage, cfg: &CaseConfig) -> Result<Prepared> {
    let filtered = cfg.preproc.apply(img, &cfg.bilateral, &cfg.wiener)?;
    let scaled = filtered.map(|v| v * cfg.edge_scale)?;
    let endo_edges = edge_indicator(&scaled, cfg.endo.sigma)?;
    let epi_edges = if cfg.epi.sigma == cfg.endo.sigma {
        endo_edges.clone()
    } else {
        edge_indicator(&scaled, cfg.epi.sigma)?
    };
    Ok(Prepared {
        filtered,
        endo_edges,
        epi_edges,
    })
}

/// Light 3x3 Gaussian (sigma 0.5) applied to `phi` on the smoothing cadence.
fn smooth_phi(phi: &LevelSetField) -> Result<LevelSetField> {
    let k = Kernel2D::gaussian_with_radius(0.5, 1)?;
    convolve2d(phi.as_image(), &k).map(LevelSetField::new)
}

fn evolve(
    stage: Stage,
    start: LevelSetField,
    g: &GrayImage,
    p: &DrlseParams,
    method: Method,
    cfg: &CaseConfig,
) -> Result<StageResult> {
    let clock = Instant::now();
    let baseline = cfg.baseline_params(p);
    let mut phi = start;
    let mut trace = Vec::with_capacity(p.iters + 1);
    trace.push(energy(&phi, g, p)?.total);
    let mut snapshots = Vec::new();
    for k in 0..p.iters {
        if cfg.snapshot_every > 0 && k % cfg.snapshot_every == 0 {
            snapshots.push(Snapshot {
                stage,
                iteration: k,
                contours: extract_zero_contour(&phi),
            });
        }
        phi = match method {
            Method::Drlse => drlse_step(&phi, g, p)?,
            Method::Baseline => baseline_lsf_step(&phi, g, &baseline, k)?,
        };
        if (k + 1) % p.smooth_every == 0 {
            phi = smooth_phi(&phi)?;
        }
        trace.push(energy(&phi, g, p)?.total);
    }
    Ok(StageResult {
        mask: mask_from_phi(&phi),
        contours: extract_zero_contour(&phi),
        phi,
        iterations_run: p.iters,
        energy_trace: trace,
        snapshots,
        wall_ms: clock.elapsed().as_secs_f64() * 1e3,
    })
}

/// Endocardium stage on an already prepared image.
pub fn segment_endocardium_prepared(
    prep: &Prepared,
    cfg: &CaseConfig,
    method: Method,
) -> Result<StageResult> {
    let (w, h) = prep.filtered.dims();
    cfg.validate(w, h)?;
    let seed = rasterize_ellipse((w, h), &cfg.ellipse)?;
    let phi = init_phi(&seed, cfg.c0)?;
    evolve(
        Stage::Endocardium,
        phi,
        &prep.endo_edges,
        &cfg.endo,
        method,
        cfg,
    )
}

/// Epicardium stage on an already prepared image, seeded from `endo`.
pub fn segment_epicardium_prepared(
    prep: &Prepared,
    endo: &BinaryMask,
    cfg: &CaseConfig,
    method: Method,
) -> Result<StageResult> {
    let (w, h) = prep.filtered.dims();
    cfg.validate(w, h)?;
    endo.check_same_dims(&BinaryMask::empty(w, h)?)?;
    if endo.is_empty() {
        return invalid("epicardium stage needs a non-empty endocardium mask");
    }
    let seed = endo.dilate4(cfg.epi_dilate_px);
    let phi = init_phi(&seed, cfg.c0)?;
    let result = evolve(
        Stage::Epicardium,
        phi,
        &prep.epi_edges,
        &cfg.epi,
        method,
        cfg,
    )?;
    let missing = result.mask.count_missing(endo)?;
    if missing > 0 {
        return Err(Error::ContainmentFailure { missing });
    }
    Ok(result)
}

pub fn segment_endocardium(img: &GrayImage, cfg: &CaseConfig) -> Result<StageResult> {
    cfg.validate(img.width(), img.height())?;
    segment_endocardium_prepared(&prepare(img, cfg)?, cfg, Method::Drlse)
}

pub fn segment_epicardium(
    img: &GrayImage,
    endo: &BinaryMask,
    cfg: &CaseConfig,
) -> Result<StageResult> {
    cfg.validate(img.width(), img.height())?;
    segment_epicardium_prepared(&prepare(img, cfg)?, endo, cfg, Method::Drlse)
}

/// Runs both stages with the chosen method and scores them against
/// `(endo, epi)` labels when given.
pub fn run_case_with(
    img: &GrayImage,
    labels: Option<(&BinaryMask, &BinaryMask)>,
    cfg: &CaseConfig,
    method: Method,
) -> Result<CaseResult> {
    let (w, h) = img.dims();
    cfg.validate(w, h)?;
    if let Some((le, lp)) = labels {
        let reference = BinaryMask::empty(w, h)?;
        le.check_same_dims(&reference)?;
        lp.check_same_dims(&reference)?;
    }
    let prep = prepare(img, cfg)?;
    let endo = segment_endocardium_prepared(&prep, cfg, method)?;
    let epi = segment_epicardium_prepared(&prep, &endo.mask, cfg, method)?;
    let metrics = match labels {
        Some((le, lp)) => Some((report(&endo.mask, le)?, report(&epi.mask, lp)?)),
        None => None,
    };
    Ok(CaseResult { endo, epi, metrics })
}

pub fn run_case(
    img: &GrayImage,
    labels: Option<(&BinaryMask, &BinaryMask)>,
    cfg: &CaseConfig,
) -> Result<CaseResult> {
    run_case_with(img, labels, cfg, Method::Drlse)
}
