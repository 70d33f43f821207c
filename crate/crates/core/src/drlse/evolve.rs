use super::terms::{dirac, dp_ratio, heaviside, potential};
use super::{reinitialize, BaselineParams, DrlseParams, LevelSetField};
use crate::error::{Error, Result};
use crate::imgrid::{central_gradient, divergence, laplacian, GrayImage, VectorField};

/// Floor applied to `|grad phi|` when normalizing the gradient.
const GRAD_FLOOR: f64 = 1e-10;

/// Gradient flow of the weighted length and area terms:
/// `lambda * delta(phi) * div(g grad phi / |grad phi|) + alpha * g * delta(phi)`.
fn external_force(
    phi: &LevelSetField,
    grad: &VectorField,
    g: &GrayImage,
    lambda: f64,
    alpha: f64,
    epsilon: f64,
) -> Vec<f64> {
    let (w, h) = phi.dims();
    let gd = g.data();
    let (gx, gy) = (grad.vx(), grad.vy());
    let mut nx = Vec::with_capacity(w * h);
    let mut ny = Vec::with_capacity(w * h);
    for i in 0..w * h {
        let s = gx[i].hypot(gy[i]).max(GRAD_FLOOR);
        nx.push(gd[i] * gx[i] / s);
        ny.push(gd[i] * gy[i] / s);
    }
    let curvature = divergence(&VectorField::from_raw(w, h, nx, ny));
    phi.phi()
        .iter()
        .zip(curvature.data())
        .zip(gd)
        .map(|((&p, &k), &gv)| {
            let d = dirac(p, epsilon);
            lambda * d * k + alpha * gv * d
        })
        .collect()
}

/// `div(d_p(|grad phi|) grad phi)`, evaluated as
/// `div((d_p - 1) grad phi) + laplacian(phi)` so the isotropic part uses the
/// compact five-point stencil.
fn distance_regularization(phi: &LevelSetField, grad: &VectorField) -> Vec<f64> {
    let (w, h) = phi.dims();
    let (gx, gy) = (grad.vx(), grad.vy());
    let mut fx = Vec::with_capacity(w * h);
    let mut fy = Vec::with_capacity(w * h);
    for i in 0..w * h {
        let r = dp_ratio(gx[i].hypot(gy[i])) - 1.0;
        fx.push(r * gx[i]);
        fy.push(r * gy[i]);
    }
    let div = divergence(&VectorField::from_raw(w, h, fx, fy));
    let lap = laplacian(phi.as_image());
    div.data()
        .iter()
        .zip(lap.data())
        .map(|(a, b)| a + b)
        .collect()
}

fn finish(phi: &LevelSetField, data: Vec<f64>) -> Result<LevelSetField> {
    if let Some(i) = data.iter().position(|v| !v.is_finite()) {
        let w = phi.width();
        return Err(Error::NumericFailure {
            x: i % w,
            y: i / w,
            value: data[i],
        });
    }
    Ok(LevelSetField::new(GrayImage::from_raw(
        phi.width(),
        phi.height(),
        data,
    )))
}

/// One explicit Euler step of distance-regularized evolution.
pub fn drlse_step(phi: &LevelSetField, g: &GrayImage, p: &DrlseParams) -> Result<LevelSetField> {
    g.check_same_dims(phi.width(), phi.height())?;
    p.validate()?;
    let grad = central_gradient(phi.as_image());
    let reg = distance_regularization(phi, &grad);
    let ext = external_force(phi, &grad, g, p.lambda, p.alpha, p.epsilon);
    let data = phi
        .phi()
        .iter()
        .zip(reg.iter().zip(&ext))
        .map(|(&v, (&r, &e))| v + p.timestep * (p.mu * r + e))
        .collect();
    finish(phi, data)
}

/// Energy broken down by term; `total` is the weighted sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyTerms {
    /// Unweighted sum of the double-well potential over pixels.
    pub regularization: f64,
    /// Unweighted `sum g * delta(phi) * |grad phi|`.
    pub length: f64,
    /// Unweighted `sum g * H(-phi)`.
    pub area: f64,
    pub total: f64,
}

/// Discrete energy `mu * R_p + lambda * L_g + alpha * A_g` summed over pixels.
pub fn energy(phi: &LevelSetField, g: &GrayImage, p: &DrlseParams) -> Result<EnergyTerms> {
    g.check_same_dims(phi.width(), phi.height())?;
    let grad = central_gradient(phi.as_image());
    let (mut reg, mut len, mut area) = (0.0, 0.0, 0.0);
    for (i, (&v, &gv)) in phi.phi().iter().zip(g.data()).enumerate() {
        let s = grad.vx()[i].hypot(grad.vy()[i]);
        reg += potential(s);
        len += gv * dirac(v, p.epsilon) * s;
        area += gv * heaviside(-v, p.epsilon);
    }
    Ok(EnergyTerms {
        regularization: reg,
        length: len,
        area,
        total: p.mu * reg + p.lambda * len + p.alpha * area,
    })
}

/// One step of the reinitialization-stabilized baseline.
///
/// Applies the external force alone (no distance regularization). When
/// `step_index + 1` is a multiple of `reinit_every`, the result is relaxed
/// toward its signed distance: `phi + gamma * (reinit(phi) - phi)`.
pub fn baseline_lsf_step(
    phi: &LevelSetField,
    g: &GrayImage,
    p: &BaselineParams,
    step_index: usize,
) -> Result<LevelSetField> {
    g.check_same_dims(phi.width(), phi.height())?;
    p.validate()?;
    let grad = central_gradient(phi.as_image());
    let ext = external_force(phi, &grad, g, p.lambda, p.alpha, p.epsilon);
    let data = phi
        .phi()
        .iter()
        .zip(&ext)
        .map(|(&v, &e)| v + p.timestep * e)
        .collect();
    let moved = finish(phi, data)?;
    if !(step_index + 1).is_multiple_of(p.reinit_every) || p.gamma == 0.0 {
        return Ok(moved);
    }
    let sd = reinitialize(&moved)?;
    let relaxed = moved
        .phi()
        .iter()
        .zip(sd.phi())
        .map(|(&a, &b)| a + p.gamma * (b - a))
        .collect();
    finish(&moved, relaxed)
}
