//! Redistancing by fast sweeping with closest-point propagation.
//!
//! Pixels adjacent to a sign change are seeded with their nearest point on
//! the interface reconstructed by linear interpolation along grid edges.
//! Gauss-Seidel sweeps in the four diagonal orderings then hand each pixel
//! the closest seed point known to its 4-neighbors, so distances are
//! Euclidean distances to actual interface points rather than a first-order
//! eikonal approximation.

use super::LevelSetField;
use crate::error::{invalid, Result};
use crate::imgrid::GrayImage;

const MAX_ROUNDS: usize = 8;

#[inline]
fn inside(v: f64) -> bool {
    v < 0.0
}

/// Distance from pixel `a` to the zero crossing toward `b`, in grid units.
#[inline]
fn crossing(a: f64, b: f64) -> f64 {
    a / (a - b)
}

#[derive(Clone, Copy)]
struct Foot {
    x: f64,
    y: f64,
}

fn dist(x: usize, y: usize, f: Foot) -> f64 {
    (x as f64 - f.x).hypot(y as f64 - f.y)
}

/// Nearest interface point for each pixel touching a sign change.
fn seed_interface(phi: &[f64], w: usize, h: usize) -> Vec<Option<Foot>> {
    let mut feet = vec![None; w * h];
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            let a = phi[i];
            let side = inside(a);
            // Signed offsets to the nearest crossing along each axis.
            let mut ox: Option<f64> = None;
            let mut oy: Option<f64> = None;
            let take = |slot: &mut Option<f64>, t: f64| {
                if slot.is_none_or(|s| t.abs() < s.abs()) {
                    *slot = Some(t);
                }
            };
            if x > 0 && inside(phi[i - 1]) != side {
                take(&mut ox, -crossing(a, phi[i - 1]));
            }
            if x + 1 < w && inside(phi[i + 1]) != side {
                take(&mut ox, crossing(a, phi[i + 1]));
            }
            if y > 0 && inside(phi[i - w]) != side {
                take(&mut oy, -crossing(a, phi[i - w]));
            }
            if y + 1 < h && inside(phi[i + w]) != side {
                take(&mut oy, crossing(a, phi[i + w]));
            }
            let (px, py) = (x as f64, y as f64);
            feet[i] = match (ox, oy) {
                (None, None) => None,
                (Some(tx), None) => Some(Foot { x: px + tx, y: py }),
                (None, Some(ty)) => Some(Foot { x: px, y: py + ty }),
                (Some(tx), Some(ty)) => {
                    if tx == 0.0 || ty == 0.0 {
                        Some(Foot { x: px, y: py })
                    } else {
                        // Foot of the perpendicular onto the line through
                        // both crossings.
                        let s = 1.0 / (tx * tx) + 1.0 / (ty * ty);
                        Some(Foot {
                            x: px + 1.0 / (tx * s),
                            y: py + 1.0 / (ty * s),
                        })
                    }
                }
            };
        }
    }
    feet
}

fn sweep(
    feet: &mut [Option<Foot>],
    d: &mut [f64],
    w: usize,
    h: usize,
    flip_x: bool,
    flip_y: bool,
) -> bool {
    let mut changed = false;
    for yy in 0..h {
        let y = if flip_y { h - 1 - yy } else { yy };
        for xx in 0..w {
            let x = if flip_x { w - 1 - xx } else { xx };
            let i = y * w + x;
            let neighbors = [
                (x > 0).then(|| i - 1),
                (x + 1 < w).then(|| i + 1),
                (y > 0).then(|| i - w),
                (y + 1 < h).then(|| i + w),
            ];
            for j in neighbors.into_iter().flatten() {
                let Some(f) = feet[j] else { continue };
                let cand = dist(x, y, f);
                if cand < d[i] {
                    d[i] = cand;
                    feet[i] = Some(f);
                    changed = true;
                }
            }
        }
    }
    changed
}

/// Signed distance to the zero level set of `phi`, with the sign of every
/// pixel preserved (so the segmented region is unchanged).
pub fn reinitialize(phi: &LevelSetField) -> Result<LevelSetField> {
    let (w, h) = phi.dims();
    let values = phi.phi();
    let n_inside = values.iter().filter(|&&v| inside(v)).count();
    if n_inside == 0 || n_inside == values.len() {
        return invalid("reinitialization needs both signs present in phi");
    }
    let mut feet = seed_interface(values, w, h);
    let mut d: Vec<f64> = feet
        .iter()
        .enumerate()
        .map(|(i, f)| f.map_or(f64::INFINITY, |f| dist(i % w, i / w, f)))
        .collect();
    for _ in 0..MAX_ROUNDS {
        let mut changed = false;
        for (fx, fy) in [(false, false), (true, false), (true, true), (false, true)] {
            changed |= sweep(&mut feet, &mut d, w, h, fx, fy);
        }
        if !changed {
            break;
        }
    }
    let signed = values
        .iter()
        .zip(&d)
        .map(|(&v, &dist)| if inside(v) { -dist } else { dist })
        .collect();
    Ok(LevelSetField::new(GrayImage::new(w, h, signed)?))
}
