//! Segmentation quality metrics: Dice, Hausdorff distance, pixel accuracy
//! and Matthews correlation coefficient.
//!
//! Foreground is the positive class. Hausdorff distance is measured between
//! foreground pixel centers with unit spacing.

use crate::error::{Error, Result};
use crate::imgrid::BinaryMask;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    pub fn_: u64,
}

impl ConfusionCounts {
    pub fn total(&self) -> u64 {
        self.tp + self.tn + self.fp + self.fn_
    }
}

/// Metric values for one prediction/label pair. `None` marks a metric that
/// is undefined for the inputs (e.g. MCC with a single class present).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsReport {
    pub dice: Option<f64>,
    pub hausdorff: Option<f64>,
    pub pa: f64,
    pub mcc: Option<f64>,
}

pub fn confusion(pred: &BinaryMask, label: &BinaryMask) -> Result<ConfusionCounts> {
    pred.check_same_dims(label)?;
    let mut c = ConfusionCounts::default();
    for (&p, &l) in pred.bits().iter().zip(label.bits()) {
        match (p, l) {
            (true, true) => c.tp += 1,
            (false, false) => c.tn += 1,
            (true, false) => c.fp += 1,
            (false, true) => c.fn_ += 1,
        }
    }
    Ok(c)
}

pub fn dice(pred: &BinaryMask, label: &BinaryMask) -> Result<f64> {
    let c = confusion(pred, label)?;
    let denom = (c.tp + c.fp) + (c.tp + c.fn_);
    if denom == 0 {
        return Err(Error::UndefinedMetric("dice of two empty masks"));
    }
    Ok(2.0 * c.tp as f64 / denom as f64)
}

pub fn pixel_accuracy(c: &ConfusionCounts) -> f64 {
    (c.tp + c.tn) as f64 / c.total() as f64
}

pub fn mcc(c: &ConfusionCounts) -> Result<f64> {
    let factors = [c.tp + c.fp, c.tp + c.fn_, c.tn + c.fp, c.tn + c.fn_];
    if factors.contains(&0) {
        return Err(Error::UndefinedMetric(
            "mcc with a degenerate confusion matrix",
        ));
    }
    let num = c.tp as f64 * c.tn as f64 - c.fp as f64 * c.fn_ as f64;
    let den = factors.iter().map(|&f| f as f64).product::<f64>().sqrt();
    Ok((num / den).clamp(-1.0, 1.0))
}

/// Squared Euclidean distance transform of a 1D sampled function
/// (lower envelope of parabolas). Infinite samples contribute nothing.
fn edt_1d(f: &[f64], out: &mut [f64], v: &mut [usize], z: &mut [f64]) {
    let mut finite = f
        .iter()
        .enumerate()
        .filter(|(_, x)| x.is_finite())
        .map(|(i, _)| i);
    let Some(first) = finite.next() else {
        out.fill(f64::INFINITY);
        return;
    };
    let mut k = 0usize;
    v[0] = first;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    for q in finite {
        loop {
            let p = v[k];
            let s =
                ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * (q as f64 - p as f64));
            if s <= z[k] && k > 0 {
                k -= 1;
            } else if s <= z[k] {
                v[0] = q;
                break;
            } else {
                k += 1;
                v[k] = q;
                z[k] = s;
                z[k + 1] = f64::INFINITY;
                break;
            }
        }
    }
    let mut k = 0;
    for (q, o) in out.iter_mut().enumerate() {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let d = q as f64 - v[k] as f64;
        *o = d * d + f[v[k]];
    }
}

/// Squared distance from every pixel center to the nearest foreground pixel
/// center of `mask` (exact, separable two-pass transform).
pub(crate) fn squared_distance_to(mask: &BinaryMask) -> Vec<f64> {
    let (w, h) = mask.dims();
    let n = w.max(h);
    let mut v = vec![0usize; n];
    let mut z = vec![0.0; n + 1];
    let mut col_in = vec![0.0; h];
    let mut col_out = vec![0.0; h];
    let mut grid = vec![0.0; w * h];
    for x in 0..w {
        for (y, c) in col_in.iter_mut().enumerate() {
            *c = if mask.get(x, y) { 0.0 } else { f64::INFINITY };
        }
        edt_1d(&col_in, &mut col_out, &mut v, &mut z);
        for y in 0..h {
            grid[y * w + x] = col_out[y];
        }
    }
    let mut row_out = vec![0.0; w];
    for y in 0..h {
        let row = &grid[y * w..(y + 1) * w];
        edt_1d(row, &mut row_out, &mut v, &mut z);
        grid[y * w..(y + 1) * w].copy_from_slice(&row_out);
    }
    grid
}

fn directed_hausdorff_sq(from: &BinaryMask, to_dist: &[f64]) -> f64 {
    from.bits()
        .iter()
        .zip(to_dist)
        .filter(|(&b, _)| b)
        .map(|(_, &d)| d)
        .fold(0.0, f64::max)
}

/// Symmetric Hausdorff distance between the foreground pixel sets.
pub fn hausdorff(pred: &BinaryMask, label: &BinaryMask) -> Result<f64> {
    pred.check_same_dims(label)?;
    if pred.is_empty() || label.is_empty() {
        return Err(Error::UndefinedMetric("hausdorff with an empty mask"));
    }
    let to_label = squared_distance_to(label);
    let to_pred = squared_distance_to(pred);
    let d2 = directed_hausdorff_sq(pred, &to_label).max(directed_hausdorff_sq(label, &to_pred));
    Ok(d2.sqrt())
}

fn defined(r: Result<f64>) -> Result<Option<f64>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::UndefinedMetric(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

pub fn report(pred: &BinaryMask, label: &BinaryMask) -> Result<MetricsReport> {
    let c = confusion(pred, label)?;
    Ok(MetricsReport {
        dice: defined(dice(pred, label))?,
        hausdorff: defined(hausdorff(pred, label))?,
        pa: pixel_accuracy(&c),
        mcc: defined(mcc(&c))?,
    })
}
