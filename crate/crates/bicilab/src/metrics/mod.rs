//! Electrodogram-domain evaluation: SNR improvement, channel-wise and
//! azimuth-averaged linear cross-correlation, and electric interaural
//! coherence.
//!
//! All quantities are time-pooled, so they are invariant to any frame
//! reordering applied identically to every operand. Zero-variance channels
//! yield an explicit undefined marker rather than NaN; averages skip them
//! and report how many were skipped.

mod report;

pub use report::{
    summarize, write_metric_csv, write_summary_tsv, MetricReport, MetricRow, SummaryRow,
};

use crate::ace::Electrodogram;
use crate::{Error, Result};

/// SNRi saturates at +/- this bound when a residual is effectively zero.
pub const SNRI_CAP_DB: f64 = 60.0;
const RESIDUAL_FLOOR: f64 = 1e-12;

/// SNR improvement with cap bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SnrImprovement {
    Db(f64),
    /// Denoised residual was ~zero: +60 dB, flagged.
    CappedHigh,
    /// Noisy residual was ~zero with a real denoised residual: -60 dB,
    /// flagged.
    CappedLow,
}

impl SnrImprovement {
    /// Numeric value with caps applied.
    pub fn db(self) -> f64 {
        match self {
            SnrImprovement::Db(v) => v,
            SnrImprovement::CappedHigh => SNRI_CAP_DB,
            SnrImprovement::CappedLow => -SNRI_CAP_DB,
        }
    }

    pub fn capped(self) -> bool {
        !matches!(self, SnrImprovement::Db(_))
    }
}

fn check_same_shape(op: &'static str, a: &Electrodogram, b: &Electrodogram) -> Result<()> {
    if a.channels() != b.channels() || a.frames() != b.frames() {
        return Err(Error::shape(
            op,
            format!(
                "{}x{} vs {}x{}",
                a.channels(),
                a.frames(),
                b.channels(),
                b.frames()
            ),
        ));
    }
    Ok(())
}

/// SNR improvement of a denoised electrodogram over the noisy one, both
/// referenced to clean: `10 log10(sum ||p_n - p_c||^2 / sum ||p_d - p_c||^2)`.
pub fn snri(
    noisy: &Electrodogram,
    clean: &Electrodogram,
    denoised: &Electrodogram,
) -> Result<SnrImprovement> {
    check_same_shape("snri", noisy, clean)?;
    check_same_shape("snri", denoised, clean)?;
    let residual = |x: &Electrodogram| -> f64 {
        x.as_slice()
            .iter()
            .zip(clean.as_slice())
            .map(|(a, c)| (a - c) * (a - c))
            .sum()
    };
    let numerator = residual(noisy);
    let denominator = residual(denoised);
    if denominator < RESIDUAL_FLOOR {
        return Ok(SnrImprovement::CappedHigh);
    }
    if numerator < RESIDUAL_FLOOR {
        return Ok(SnrImprovement::CappedLow);
    }
    Ok(SnrImprovement::Db(10.0 * (numerator / denominator).log10()))
}

/// Pearson correlation coefficient with population normalization.
///
/// `None` marks the undefined case (zero variance on either side); callers
/// exclude those from averages.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<Option<f64>> {
    if x.len() != y.len() {
        return Err(Error::shape(
            "pearson",
            format!("lengths {} vs {}", x.len(), y.len()),
        ));
    }
    if x.len() < 2 {
        return Err(Error::param(format!(
            "pearson needs at least 2 samples, got {}",
            x.len()
        )));
    }
    let n = x.len() as f64;
    let mean_x = x.iter().sum::<f64>() / n;
    let mean_y = y.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var_x = 0.0;
    let mut var_y = 0.0;
    for (a, b) in x.iter().zip(y) {
        let dx = a - mean_x;
        let dy = b - mean_y;
        cov += dx * dy;
        var_x += dx * dx;
        var_y += dy * dy;
    }
    if var_x == 0.0 || var_y == 0.0 {
        return Ok(None);
    }
    Ok(Some(cov / (var_x.sqrt() * var_y.sqrt())))
}

/// Per-channel linear cross-correlation between clean and denoised
/// electrodograms.
pub fn lcc_channels(
    clean: &Electrodogram,
    denoised: &Electrodogram,
) -> Result<Vec<Option<f64>>> {
    check_same_shape("lcc_channels", clean, denoised)?;
    (0..clean.channels())
        .map(|k| pearson(clean.channel(k), denoised.channel(k)))
        .collect()
}

/// Per-channel electric interaural coherence: LCC of (right, left).
pub fn eic_channels(
    right: &Electrodogram,
    left: &Electrodogram,
) -> Result<Vec<Option<f64>>> {
    check_same_shape("eic_channels", right, left)?;
    (0..right.channels())
        .map(|k| pearson(right.channel(k), left.channel(k)))
        .collect()
}

/// Mean of the defined coefficients plus the count of undefined channels.
pub fn mean_defined(coefficients: &[Option<f64>]) -> (Option<f64>, usize) {
    let defined: Vec<f64> = coefficients.iter().filter_map(|&c| c).collect();
    let undefined = coefficients.len() - defined.len();
    if defined.is_empty() {
        (None, undefined)
    } else {
        (Some(defined.iter().sum::<f64>() / defined.len() as f64), undefined)
    }
}

/// Electrode-averaged LCC per azimuth grid point: for each azimuth, the
/// mean of the defined per-channel coefficients.
pub fn lcc_azimuth(
    sweep: &[(f64, Electrodogram, Electrodogram)],
) -> Result<Vec<(f64, Option<f64>)>> {
    sweep
        .iter()
        .map(|(azimuth, clean, denoised)| {
            let (mean, _) = mean_defined(&lcc_channels(clean, denoised)?);
            Ok((*azimuth, mean))
        })
        .collect()
}

/// Electrode-averaged EIC per azimuth grid point.
pub fn eic_azimuth(
    sweep: &[(f64, Electrodogram, Electrodogram)],
) -> Result<Vec<(f64, Option<f64>)>> {
    sweep
        .iter()
        .map(|(azimuth, right, left)| {
            let (mean, _) = mean_defined(&eic_channels(right, left)?);
            Ok((*azimuth, mean))
        })
        .collect()
}
