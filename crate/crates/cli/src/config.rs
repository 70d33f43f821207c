//! Flat `key = value` configuration files.
//!
//! One assignment per line; `#` starts a comment. Keys name a field of the
//! case configuration, e.g. `endo.alpha`, `bilateral.sigma_r`,
//! `ellipse.cx`. Unknown and repeated keys are errors. Ellipse fields left
//! unset are filled in from the image size when the run starts.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use lvseg_core::drlse::DrlseParams;
use lvseg_core::imgrid::EllipseSpec;
use lvseg_core::pipeline::CaseConfig;
use lvseg_core::preproc::NoiseVariance;

use crate::error::{CliError, Result};

/// Parsed configuration, with the ellipse still open.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Settings {
    pub case: CaseConfig,
    pub cx: Option<f64>,
    pub cy: Option<f64>,
    pub rx: Option<f64>,
    pub ry: Option<f64>,
}

impl Settings {
    /// Case configuration for a `width x height` image. Unset ellipse
    /// fields default to a circle of `default_radius` at the image center;
    /// a lone `rx` or `ry` is used for both axes.
    pub fn resolve(&self, width: usize, height: usize, default_radius: f64) -> CaseConfig {
        let rx = self.rx.or(self.ry).unwrap_or(default_radius);
        let ry = self.ry.unwrap_or(rx);
        let ellipse = EllipseSpec::new(
            self.cx.unwrap_or((width as f64 - 1.0) / 2.0),
            self.cy.unwrap_or((height as f64 - 1.0) / 2.0),
            rx,
            ry,
        );
        CaseConfig {
            ellipse,
            ..self.case.clone()
        }
    }
}

/// Seed radius used when a config leaves the ellipse size open.
pub fn default_seed_radius(width: usize, height: usize) -> f64 {
    width.min(height) as f64 / 8.0
}

fn real(v: &str) -> std::result::Result<f64, String> {
    match v.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => Err(format!("expected a finite number, got '{v}'")),
    }
}

fn count(v: &str) -> std::result::Result<usize, String> {
    v.parse()
        .map_err(|_| format!("expected a non-negative integer, got '{v}'"))
}

fn drlse_field(p: &mut DrlseParams, field: &str, v: &str) -> std::result::Result<(), String> {
    match field {
        "mu" => p.mu = real(v)?,
        "lambda" => p.lambda = real(v)?,
        "alpha" => p.alpha = real(v)?,
        "epsilon" => p.epsilon = real(v)?,
        "sigma" => p.sigma = real(v)?,
        "timestep" => p.timestep = real(v)?,
        "iters" => p.iters = count(v)?,
        "smooth_every" => p.smooth_every = count(v)?,
        _ => return Err(format!("unknown level-set parameter '{field}'")),
    }
    Ok(())
}

fn assign(s: &mut Settings, key: &str, v: &str) -> std::result::Result<(), String> {
    if let Some(field) = key.strip_prefix("endo.") {
        return drlse_field(&mut s.case.endo, field, v);
    }
    if let Some(field) = key.strip_prefix("epi.") {
        return drlse_field(&mut s.case.epi, field, v);
    }
    let c = &mut s.case;
    match key {
        "preproc" => c.preproc = v.parse().map_err(|e: lvseg_core::Error| e.to_string())?,
        "bilateral.half_window" => c.bilateral.half_window = count(v)?,
        "bilateral.sigma_s" => c.bilateral.sigma_s = real(v)?,
        "bilateral.sigma_r" => c.bilateral.sigma_r = real(v)?,
        "wiener.half_window" => c.wiener.half_window = count(v)?,
        "wiener.noise_variance" => {
            c.wiener.noise_variance = if v == "estimate" {
                NoiseVariance::Estimate
            } else {
                NoiseVariance::Known(real(v)?)
            }
        }
        "ellipse.cx" => s.cx = Some(real(v)?),
        "ellipse.cy" => s.cy = Some(real(v)?),
        "ellipse.rx" => s.rx = Some(real(v)?),
        "ellipse.ry" => s.ry = Some(real(v)?),
        "epi_dilate_px" => c.epi_dilate_px = count(v)?,
        "snapshot_every" => c.snapshot_every = count(v)?,
        "c0" => c.c0 = real(v)?,
        "edge_scale" => c.edge_scale = real(v)?,
        "baseline.gamma" => c.baseline.gamma = real(v)?,
        "baseline.reinit_every" => c.baseline.reinit_every = count(v)?,
        _ => return Err(format!("unknown key '{key}'")),
    }
    Ok(())
}

/// Parses config text; `path` is only used in error messages.
pub fn parse_config(text: &str, path: &Path) -> Result<Settings> {
    let mut settings = Settings::default();
    let mut seen = HashSet::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: String| CliError::Config {
            path: path.to_path_buf(),
            line: i + 1,
            msg,
        };
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err(format!("expected 'key = value', got '{line}'")))?;
        let (key, value) = (key.trim(), value.trim());
        if !seen.insert(key.to_string()) {
            return Err(err(format!("duplicate key '{key}'")));
        }
        assign(&mut settings, key, value).map_err(err)?;
    }
    Ok(settings)
}

pub fn load_config(path: &Path) -> Result<Settings> {
    let text = fs::read_to_string(path).map_err(|source| {
        if source.kind() == std::io::ErrorKind::NotFound {
            CliError::Missing(PathBuf::from(path))
        } else {
            CliError::Read {
                path: path.to_path_buf(),
                source,
            }
        }
    })?;
    parse_config(&text, path)
}
