//! Metric report rows and their CSV/TSV emission.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use crate::Result;

/// One evaluated scene x variant x side.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricRow {
    pub scene: String,
    pub variant: String,
    pub side: char,
    pub azimuth_deg: f64,
    pub snr_db: f64,
    pub snri_db: f64,
    pub snri_capped: bool,
    /// Mean defined per-channel LCC.
    pub lcc_mean: Option<f64>,
    pub lcc_undefined: usize,
    /// Mean defined per-channel EIC (side-independent; repeated per row).
    pub eic_mean: Option<f64>,
    pub eic_undefined: usize,
    pub seed: u64,
}

/// A full evaluation report.
#[derive(Debug, Clone, Default)]
pub struct MetricReport {
    pub rows: Vec<MetricRow>,
}

fn fmt_opt(v: Option<f64>) -> String {
    match v {
        Some(x) => format!("{x:.9e}"),
        None => "undefined".to_string(),
    }
}

/// Writes rows as CSV with a fixed header; deterministic byte output.
pub fn write_metric_csv(path: impl AsRef<Path>, report: &MetricReport) -> Result<()> {
    let mut text = String::from(
        "scene,variant,side,azimuth_deg,snr_db,snri_db,snri_capped,lcc_mean,lcc_undefined,eic_mean,eic_undefined,seed\n",
    );
    for r in &report.rows {
        writeln!(
            text,
            "{},{},{},{:.9e},{:.9e},{:.9e},{},{},{},{},{},{}",
            r.scene,
            r.variant,
            r.side,
            r.azimuth_deg,
            r.snr_db,
            r.snri_db,
            r.snri_capped,
            fmt_opt(r.lcc_mean),
            r.lcc_undefined,
            fmt_opt(r.eic_mean),
            r.eic_undefined,
            r.seed
        )
        .expect("string write");
    }
    let mut file = std::fs::File::create(path.as_ref())?;
    file.write_all(text.as_bytes())?;
    Ok(())
}

/// One aggregated plot-data point.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub x: f64,
    pub mean: f64,
    pub q1: f64,
    pub q3: f64,
    pub count: usize,
}

/// Aggregates values grouped by an x key into (mean, quartile) rows,
/// sorted by x.
pub fn summarize(groups: &[(f64, Vec<f64>)]) -> Vec<SummaryRow> {
    let mut rows: Vec<SummaryRow> = groups
        .iter()
        .filter(|(_, vs)| !vs.is_empty())
        .map(|(x, vs)| {
            let mut sorted = vs.clone();
            sorted.sort_by(f64::total_cmp);
            SummaryRow {
                x: *x,
                mean: sorted.iter().sum::<f64>() / sorted.len() as f64,
                q1: quantile(&sorted, 0.25),
                q3: quantile(&sorted, 0.75),
                count: sorted.len(),
            }
        })
        .collect();
    rows.sort_by(|a, b| a.x.total_cmp(&b.x));
    rows
}

/// Linear-interpolation quantile of a sorted slice.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = q * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

/// Writes plot data as tab-separated `x mean q1 q3 count` lines.
pub fn write_summary_tsv(path: impl AsRef<Path>, rows: &[SummaryRow]) -> Result<()> {
    let mut text = String::from("x\tmean\tq1\tq3\tcount\n");
    for r in rows {
        writeln!(
            text,
            "{:.9e}\t{:.9e}\t{:.9e}\t{:.9e}\t{}",
            r.x, r.mean, r.q1, r.q3, r.count
        )
        .expect("string write");
    }
    let mut file = std::fs::File::create(path.as_ref())?;
    file.write_all(text.as_bytes())?;
    Ok(())
}
