//! Run modes and their output files.

use std::fs;
use std::path::{Path, PathBuf};
use std::thread;

use lvseg_core::imgrid::{BinaryMask, GrayImage};
use lvseg_core::metrics::report;
use lvseg_core::pipeline::{
    make_phantom, prepare, segment_endocardium_prepared, segment_epicardium_prepared, CaseConfig,
    Method, Stage, StageResult,
};
use lvseg_core::preproc::Preproc;

use crate::config::{default_seed_radius, load_config, Settings};
use crate::error::{CliError, Result};
use crate::pnm::{self, RgbImage, ENDO_COLOR};
use crate::report::{render_csv, MetricsRow};

pub const METRICS_FILE: &str = "metrics.csv";
pub const ERROR_FILE: &str = "error.json";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhantomSpec {
    pub size: usize,
    pub seed: u64,
    pub noise: f64,
    pub r_inner: f64,
    pub r_outer: f64,
}

impl Default for PhantomSpec {
    fn default() -> Self {
        Self {
            size: 128,
            seed: 0,
            noise: 0.05,
            r_inner: 30.0,
            r_outer: 45.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Mode {
    /// Both stages with DRLSE; masks, overlay and (with labels) metrics.
    Segment,
    /// Endocardium under each preprocessing chain at a shared budget.
    AblatePreproc,
    /// Both stages under the baseline and under DRLSE.
    CompareBaseline,
    /// Generates a labelled phantom and segments it.
    Phantom(PhantomSpec),
}

/// Everything one invocation needs.
#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub mode: Mode,
    /// Input image; unused in phantom mode.
    pub image: Option<PathBuf>,
    pub label_endo: Option<PathBuf>,
    pub label_epi: Option<PathBuf>,
    pub config: Option<PathBuf>,
    pub out: PathBuf,
    /// Overrides the config's `snapshot_every`.
    pub snapshot_every: Option<usize>,
}

impl RunManifest {
    pub fn validate(&self) -> Result<()> {
        let usage = |m: &str| Err(CliError::Usage(m.to_string()));
        match (&self.mode, &self.image) {
            (Mode::Phantom(_), Some(_)) => return usage("phantom mode does not take --image"),
            (Mode::Phantom(_), None) => {
                if self.label_endo.is_some() || self.label_epi.is_some() {
                    return usage("phantom mode generates its own labels");
                }
            }
            (_, None) => return usage("--image is required"),
            (_, Some(_)) => {}
        }
        if self.label_endo.is_some() != self.label_epi.is_some() {
            return usage("--label-endo and --label-epi must be given together");
        }
        let inputs = [&self.image, &self.label_endo, &self.label_epi, &self.config];
        for path in inputs.into_iter().flatten() {
            if !path.is_file() {
                return Err(CliError::Missing(path.clone()));
            }
        }
        Ok(())
    }
}

/// Outcome of a successful run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub rows: Vec<MetricsRow>,
    /// Files written, relative to the output directory, in write order.
    pub files: Vec<PathBuf>,
}

/// Writes confined to one directory; names are always relative.
struct OutDir {
    root: PathBuf,
    written: Vec<PathBuf>,
}

impl OutDir {
    fn create(root: &Path) -> Result<Self> {
        fs::create_dir_all(root).map_err(|source| CliError::Write {
            path: root.to_path_buf(),
            source,
        })?;
        let stale = root.join(ERROR_FILE);
        if stale.is_file() {
            fs::remove_file(&stale).map_err(|source| CliError::Write {
                path: stale,
                source,
            })?;
        }
        Ok(Self {
            root: root.to_path_buf(),
            written: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let rel = PathBuf::from(name);
        debug_assert!(rel.is_relative() && !name.contains(".."));
        let path = self.root.join(&rel);
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).map_err(|source| CliError::Write {
                path: dir.to_path_buf(),
                source,
            })?;
        }
        pnm::write_file(&path, bytes)?;
        self.written.push(rel);
        Ok(())
    }
}

struct Case {
    name: String,
    image: GrayImage,
    labels: Option<(BinaryMask, BinaryMask)>,
    cfg: CaseConfig,
}

fn case_name(path: &Path) -> String {
    path.file_stem()
        .map_or_else(|| "image".to_string(), |s| s.to_string_lossy().into_owned())
}

fn load_settings(m: &RunManifest) -> Result<Settings> {
    let mut s = match &m.config {
        Some(p) => load_config(p)?,
        None => Settings::default(),
    };
    if let Some(n) = m.snapshot_every {
        s.case.snapshot_every = n;
    }
    Ok(s)
}

fn load_case(m: &RunManifest, image: &Path, settings: &Settings) -> Result<Case> {
    let img = pnm::load_gray(image)?;
    let (w, h) = img.dims();
    let labels = match (&m.label_endo, &m.label_epi) {
        (Some(e), Some(p)) => {
            let (endo, epi) = (pnm::load_mask(e)?, pnm::load_mask(p)?);
            let reference = BinaryMask::empty(w, h)?;
            reference.check_same_dims(&endo)?;
            reference.check_same_dims(&epi)?;
            Some((endo, epi))
        }
        _ => None,
    };
    let cfg = settings.resolve(w, h, default_seed_radius(w, h));
    cfg.validate(w, h)?;
    Ok(Case {
        name: case_name(image),
        image: img,
        labels,
        cfg,
    })
}

fn stage_row(
    case: &Case,
    stage: Stage,
    preproc: Preproc,
    method: Method,
    r: &StageResult,
) -> Result<MetricsRow> {
    let metrics = match &case.labels {
        Some((endo, epi)) => {
            let label = if stage == Stage::Endocardium {
                endo
            } else {
                epi
            };
            Some(report(&r.mask, label)?)
        }
        None => None,
    };
    Ok(MetricsRow {
        case: case.name.clone(),
        stage,
        preproc,
        method,
        metrics,
        iterations: r.iterations_run,
        wall_ms: r.wall_ms,
    })
}

fn write_snapshots(
    out: &mut OutDir,
    img: &GrayImage,
    endo: &StageResult,
    epi: &StageResult,
) -> Result<()> {
    for s in &endo.snapshots {
        let mut rgb = RgbImage::from_gray(img);
        s.contours
            .iter()
            .for_each(|c| rgb.draw_contour(c, ENDO_COLOR));
        out.write(
            &format!("snapshots/endo_{:04}.ppm", s.iteration),
            &rgb.encode(),
        )?;
    }
    for s in &epi.snapshots {
        let rgb = pnm::render_overlay(img, &endo.contours, &s.contours);
        out.write(
            &format!("snapshots/epi_{:04}.ppm", s.iteration),
            &rgb.encode(),
        )?;
    }
    Ok(())
}

/// Both stages with DRLSE, writing masks, overlay, snapshots and metrics.
fn segment_case(case: &Case, out: &mut OutDir, always_csv: bool) -> Result<Vec<MetricsRow>> {
    let prep = prepare(&case.image, &case.cfg)?;
    let endo = segment_endocardium_prepared(&prep, &case.cfg, Method::Drlse)?;
    let epi = segment_epicardium_prepared(&prep, &endo.mask, &case.cfg, Method::Drlse)?;
    out.write("endo_mask.pgm", &pnm::encode_mask(&endo.mask))?;
    out.write("epi_mask.pgm", &pnm::encode_mask(&epi.mask))?;
    out.write(
        "overlay.ppm",
        &pnm::render_overlay(&case.image, &endo.contours, &epi.contours).encode(),
    )?;
    write_snapshots(out, &case.image, &endo, &epi)?;
    let pre = case.cfg.preproc;
    let rows = vec![
        stage_row(case, Stage::Endocardium, pre, Method::Drlse, &endo)?,
        stage_row(case, Stage::Epicardium, pre, Method::Drlse, &epi)?,
    ];
    if always_csv || case.labels.is_some() {
        out.write(METRICS_FILE, render_csv(&rows).as_bytes())?;
    }
    Ok(rows)
}

fn ablate(case: &Case, out: &mut OutDir) -> Result<Vec<MetricsRow>> {
    // Arms share only read-only inputs; results are gathered in the fixed
    // enumeration order regardless of completion order.
    let results: Vec<Result<(Preproc, StageResult)>> = thread::scope(|scope| {
        let handles: Vec<_> = Preproc::ALL
            .into_iter()
            .map(|arm| {
                scope.spawn(move || -> Result<(Preproc, StageResult)> {
                    let cfg = CaseConfig {
                        preproc: arm,
                        ..case.cfg.clone()
                    };
                    let prep = prepare(&case.image, &cfg)?;
                    Ok((
                        arm,
                        segment_endocardium_prepared(&prep, &cfg, Method::Drlse)?,
                    ))
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("ablation arm panicked"))
            .collect()
    });
    let mut rows = Vec::with_capacity(results.len());
    for r in results {
        let (arm, endo) = r?;
        out.write(
            &format!("endo_mask_{}.pgm", arm.as_str()),
            &pnm::encode_mask(&endo.mask),
        )?;
        rows.push(stage_row(
            case,
            Stage::Endocardium,
            arm,
            Method::Drlse,
            &endo,
        )?);
    }
    out.write(METRICS_FILE, render_csv(&rows).as_bytes())?;
    Ok(rows)
}

fn compare(case: &Case, out: &mut OutDir) -> Result<Vec<MetricsRow>> {
    let prep = prepare(&case.image, &case.cfg)?;
    let pre = case.cfg.preproc;
    let mut endo_rows = Vec::new();
    let mut epi_rows = Vec::new();
    for method in [Method::Baseline, Method::Drlse] {
        let endo = segment_endocardium_prepared(&prep, &case.cfg, method)?;
        let epi = segment_epicardium_prepared(&prep, &endo.mask, &case.cfg, method)?;
        let tag = method.as_str();
        out.write(
            &format!("endo_mask_{tag}.pgm"),
            &pnm::encode_mask(&endo.mask),
        )?;
        out.write(&format!("epi_mask_{tag}.pgm"), &pnm::encode_mask(&epi.mask))?;
        out.write(
            &format!("overlay_{tag}.ppm"),
            &pnm::render_overlay(&case.image, &endo.contours, &epi.contours).encode(),
        )?;
        endo_rows.push(stage_row(case, Stage::Endocardium, pre, method, &endo)?);
        epi_rows.push(stage_row(case, Stage::Epicardium, pre, method, &epi)?);
    }
    let rows: Vec<_> = endo_rows.into_iter().chain(epi_rows).collect();
    out.write(METRICS_FILE, render_csv(&rows).as_bytes())?;
    Ok(rows)
}

fn phantom_case(spec: &PhantomSpec, settings: &Settings, out: &mut OutDir) -> Result<Case> {
    let ph = make_phantom(spec.size, spec.r_inner, spec.r_outer, spec.noise, spec.seed)?;
    let stored = pnm::encode_gray(&ph.image);
    out.write("phantom.pgm", &stored)?;
    out.write("label_endo.pgm", &pnm::encode_mask(&ph.endo))?;
    out.write("label_epi.pgm", &pnm::encode_mask(&ph.epi))?;
    // Segment exactly what was written, so rerunning segment mode on the
    // stored files reproduces this run.
    let img = ph.image.map(|v| (v * 255.0).round() / 255.0)?;
    let cfg = settings.resolve(spec.size, spec.size, spec.r_inner / 2.0);
    cfg.validate(spec.size, spec.size)?;
    Ok(Case {
        name: "phantom".into(),
        image: img,
        labels: Some((ph.endo, ph.epi)),
        cfg,
    })
}

/// Executes the manifest. On failure nothing further is written, except
/// that the caller may record the error with [`write_error_record`].
pub fn run(m: &RunManifest) -> Result<RunSummary> {
    m.validate()?;
    let settings = load_settings(m)?;
    let case = match (&m.mode, &m.image) {
        (Mode::Phantom(_), _) => None,
        (_, Some(image)) => Some(load_case(m, image, &settings)?),
        (_, None) => unreachable!("validated above"),
    };
    let mut out = OutDir::create(&m.out)?;
    let rows = match (&m.mode, case) {
        (Mode::Phantom(spec), _) => {
            let case = phantom_case(spec, &settings, &mut out)?;
            segment_case(&case, &mut out, true)?
        }
        (Mode::Segment, Some(case)) => segment_case(&case, &mut out, false)?,
        (Mode::AblatePreproc, Some(case)) => ablate(&case, &mut out)?,
        (Mode::CompareBaseline, Some(case)) => compare(&case, &mut out)?,
        (_, None) => unreachable!("validated above"),
    };
    Ok(RunSummary {
        rows,
        files: out.written,
    })
}

/// Best-effort `error.json` in the output directory.
pub fn write_error_record(out: &Path, err: &CliError) {
    if fs::create_dir_all(out).is_ok() {
        let _ = fs::write(out.join(ERROR_FILE), err.to_json() + "\n");
    }
}
