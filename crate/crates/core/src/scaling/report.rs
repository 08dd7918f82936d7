//! Comma-separated metric tables with a header row.
//!
//! Floats are written in shortest round-trip form; an undefined value is
//! written as `undefined`.

use std::fmt::Write as _;

use super::depth::DepthComparison;
use crate::grid::GeneratorId;

pub const METRIC_HEADER: &str = "id,generator_id,d_E,d_grad";
pub const GAIN_HEADER: &str = "id,generator_id,gain_E,gain_grad";
pub const DEPTH_HEADER: &str = "depth_cm,mean_err_baseline,mean_err_model,gain";

#[derive(Debug, Clone, PartialEq)]
pub struct MetricRow {
    pub id: String,
    pub generator_id: GeneratorId,
    pub d_energy: f64,
    pub d_grad: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GainRow {
    pub id: String,
    pub generator_id: GeneratorId,
    pub gain_energy: Option<f64>,
    pub gain_grad: Option<f64>,
}

fn cell(v: Option<f64>) -> String {
    match v {
        Some(x) if x.is_finite() => format!("{x}"),
        _ => "undefined".to_string(),
    }
}

pub fn metric_table(rows: &[MetricRow]) -> String {
    let mut out = format!("{METRIC_HEADER}\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            r.id,
            r.generator_id,
            cell(Some(r.d_energy)),
            cell(Some(r.d_grad))
        );
    }
    out
}

pub fn gain_table(rows: &[GainRow]) -> String {
    let mut out = format!("{GAIN_HEADER}\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            r.id,
            r.generator_id,
            cell(r.gain_energy),
            cell(r.gain_grad)
        );
    }
    out
}

pub fn depth_table(c: &DepthComparison) -> String {
    let mut out = format!("{DEPTH_HEADER}\n");
    for i in 0..c.depths.len() {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            cell(Some(c.depths[i])),
            cell(Some(c.baseline[i])),
            cell(Some(c.model[i])),
            cell(Some(c.gain[i]))
        );
    }
    out
}
