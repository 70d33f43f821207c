//! Metrics CSV: one row per (case, stage, preprocessing, method).

use lvseg_core::metrics::MetricsReport;
use lvseg_core::pipeline::{Method, Stage};
use lvseg_core::preproc::Preproc;

pub const CSV_HEADER: &str = "case,stage,preproc,method,dice,hausdorff,pa,mcc,iterations,wall_ms";

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub case: String,
    pub stage: Stage,
    pub preproc: Preproc,
    pub method: Method,
    /// Absent when the run had no labels.
    pub metrics: Option<MetricsReport>,
    pub iterations: usize,
    pub wall_ms: f64,
}

fn number(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| format!("{x:.6}"))
}

fn field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

impl MetricsRow {
    pub fn to_csv(&self) -> String {
        let m = self.metrics;
        [
            field(&self.case),
            self.stage.as_str().to_string(),
            self.preproc.as_str().to_string(),
            self.method.as_str().to_string(),
            number(m.and_then(|m| m.dice)),
            number(m.and_then(|m| m.hausdorff)),
            number(m.map(|m| m.pa)),
            number(m.and_then(|m| m.mcc)),
            self.iterations.to_string(),
            format!("{:.3}", self.wall_ms),
        ]
        .join(",")
    }
}

pub fn render_csv(rows: &[MetricsRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.to_csv());
        out.push('\n');
    }
    out
}
