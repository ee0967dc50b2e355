//! Line-oriented scene manifest parsing.
//!
//! One scene per line:
//!
//! ```text
//! scene <target.wav> <noise.wav> az_t=<deg> az_n=<deg> snr=<dB> renderer=<parametric|brir:PATH>
//! ```
//!
//! Blank lines and lines starting with `#` are skipped.

use std::path::PathBuf;

use crate::{Error, Result};

/// Renderer selection as written in a manifest (paths not yet loaded).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RendererSpec {
    Parametric,
    Brir(PathBuf),
}

/// One parsed manifest line.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifestEntry {
    pub target_path: PathBuf,
    pub noise_path: PathBuf,
    pub target_azimuth: f64,
    pub noise_azimuth: f64,
    pub snr_db: f64,
    pub renderer: RendererSpec,
}

fn parse_err(line_no: usize, detail: impl std::fmt::Display) -> Error {
    Error::Parse {
        what: "scene manifest",
        detail: format!("line {line_no}: {detail}"),
    }
}

/// Parses a single `scene ...` line (1-based `line_no` only labels errors).
pub fn parse_manifest_line(line: &str, line_no: usize) -> Result<ManifestEntry> {
    let mut fields = line.split_whitespace();
    if fields.next() != Some("scene") {
        return Err(parse_err(line_no, "expected 'scene' keyword"));
    }
    let target_path = PathBuf::from(
        fields
            .next()
            .ok_or_else(|| parse_err(line_no, "missing target path"))?,
    );
    let noise_path = PathBuf::from(
        fields
            .next()
            .ok_or_else(|| parse_err(line_no, "missing noise path"))?,
    );

    let mut az_t = None;
    let mut az_n = None;
    let mut snr = None;
    let mut renderer = None;
    for field in fields {
        let (key, value) = field
            .split_once('=')
            .ok_or_else(|| parse_err(line_no, format!("malformed field '{field}'")))?;
        match key {
            "az_t" => az_t = Some(value.parse::<f64>().map_err(|e| parse_err(line_no, e))?),
            "az_n" => az_n = Some(value.parse::<f64>().map_err(|e| parse_err(line_no, e))?),
            "snr" => snr = Some(value.parse::<f64>().map_err(|e| parse_err(line_no, e))?),
            "renderer" => {
                renderer = Some(match value {
                    "parametric" => RendererSpec::Parametric,
                    v => match v.split_once(':') {
                        Some(("brir", path)) if !path.is_empty() => {
                            RendererSpec::Brir(PathBuf::from(path))
                        }
                        _ => {
                            return Err(parse_err(
                                line_no,
                                format!("renderer must be 'parametric' or 'brir:PATH', got '{v}'"),
                            ))
                        }
                    },
                })
            }
            _ => return Err(parse_err(line_no, format!("unknown key '{key}'"))),
        }
    }
    match (az_t, az_n, snr) {
        (Some(target_azimuth), Some(noise_azimuth), Some(snr_db)) => Ok(ManifestEntry {
            target_path,
            noise_path,
            target_azimuth,
            noise_azimuth,
            snr_db,
            renderer: renderer.unwrap_or(RendererSpec::Parametric),
        }),
        _ => Err(parse_err(line_no, "az_t, az_n, and snr are all required")),
    }
}

/// Parses a whole manifest document.
pub fn parse_manifest(text: &str) -> Result<Vec<ManifestEntry>> {
    let mut entries = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        entries.push(parse_manifest_line(trimmed, i + 1)?);
    }
    Ok(entries)
}
