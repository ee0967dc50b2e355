//! Shared corpus ingestion and scene construction for train/eval.

use std::path::{Path, PathBuf};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use bicilab::dsp::{resample, wav::read_wav, SampleBuffer, CANONICAL_RATE};
use bicilab::scene::{Renderer, RendererSpec, SceneSpec};

use crate::config::ExperimentConfig;
use crate::errors::CliError;

/// Sorted WAV listing of a corpus directory.
pub fn list_wavs(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let mut paths = Vec::new();
    let entries = std::fs::read_dir(dir)
        .map_err(|e| CliError::usage(format!("corpus dir {}: {e}", dir.display())))?;
    for entry in entries {
        let path = entry
            .map_err(|e| CliError::data(format!("{}: {e}", dir.display())))?
            .path();
        if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("wav")) {
            paths.push(path);
        }
    }
    paths.sort();
    Ok(paths)
}

/// Loads a WAV as mono 16 kHz.
pub fn load_mono_16k(path: &Path) -> Result<SampleBuffer, CliError> {
    let buf = read_wav(path).map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
    Ok(resample(&buf.to_mono(), CANONICAL_RATE)?)
}

/// Cuts a buffer into non-overlapping segments of `seconds`; a final
/// shorter remainder is dropped. A file shorter than one segment yields
/// itself.
pub fn segment(buf: &SampleBuffer, seconds: f64) -> Vec<SampleBuffer> {
    let seg_len = (seconds * buf.rate() as f64) as usize;
    let samples = buf.channel(0);
    if samples.len() <= seg_len {
        return vec![buf.clone()];
    }
    samples
        .chunks_exact(seg_len)
        .map(|chunk| SampleBuffer::mono(chunk.to_vec(), buf.rate()).expect("finite segment"))
        .collect()
}

/// Resolves the configured renderer, loading a BRIR when requested.
pub fn resolve_renderer(config: &ExperimentConfig) -> Result<Renderer, CliError> {
    renderer_from_spec(&parse_renderer_field(&config.scene.renderer)?)
}

pub fn parse_renderer_field(field: &str) -> Result<RendererSpec, CliError> {
    match field {
        "parametric" => Ok(RendererSpec::Parametric),
        other => match other.split_once(':') {
            Some(("brir", path)) if !path.is_empty() => {
                Ok(RendererSpec::Brir(PathBuf::from(path)))
            }
            _ => Err(CliError::usage(format!(
                "renderer must be 'parametric' or 'brir:PATH', got '{other}'"
            ))),
        },
    }
}

pub fn renderer_from_spec(spec: &RendererSpec) -> Result<Renderer, CliError> {
    match spec {
        RendererSpec::Parametric => Ok(Renderer::Parametric),
        RendererSpec::Brir(path) => {
            let ir = read_wav(path)
                .map_err(|e| CliError::data(format!("BRIR {}: {e}", path.display())))?;
            Ok(Renderer::Brir(ir))
        }
    }
}

/// A prepared (target, noise) pairing with draw metadata.
pub struct ScenePlan {
    pub label: String,
    pub spec: SceneSpec,
}

/// Builds the training scene plans: every target segment paired with a
/// noise segment (round-robin), seeded SNR draw from the configured range
/// and a seeded azimuth draw from the grid.
pub fn training_plans(config: &ExperimentConfig) -> Result<Vec<ScenePlan>, CliError> {
    let corpus = &config.corpus;
    let (Some(target_dir), Some(noise_dir)) = (&corpus.target_dir, &corpus.noise_dir) else {
        return Err(CliError::usage(
            "training requires [corpus] target_dir and noise_dir",
        ));
    };
    let target_files = list_wavs(target_dir)?;
    let noise_files = list_wavs(noise_dir)?;
    if target_files.is_empty() {
        return Err(CliError::usage(format!(
            "no WAV files in target corpus {}",
            target_dir.display()
        )));
    }
    if noise_files.is_empty() {
        return Err(CliError::usage(format!(
            "no WAV files in noise corpus {}",
            noise_dir.display()
        )));
    }

    let mut target_segments = Vec::new();
    for path in &target_files {
        for seg in segment(&load_mono_16k(path)?, config.scene.segment_seconds) {
            target_segments.push(seg);
        }
    }
    let mut noise_segments = Vec::new();
    for path in &noise_files {
        for seg in segment(&load_mono_16k(path)?, config.scene.segment_seconds) {
            noise_segments.push(seg);
        }
    }

    let renderer_spec = parse_renderer_field(&config.scene.renderer)?;
    let azimuths = config.scene.azimuth_grid.points();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let count = target_segments.len().min(config.scene.max_pairs.max(1));
    let mut plans = Vec::with_capacity(count);
    for (i, target) in target_segments.into_iter().take(count).enumerate() {
        let noise = noise_segments[i % noise_segments.len()].clone();
        let snr_db = rng.random_range(config.scene.snr_range[0]..=config.scene.snr_range[1]);
        let azimuth = azimuths[rng.random_range(0..azimuths.len())];
        let spec = SceneSpec::new(
            target,
            noise,
            config.scene.target_azimuth,
            azimuth,
            snr_db,
            renderer_from_spec(&renderer_spec)?,
        )?;
        plans.push(ScenePlan {
            label: format!("train{i:04}"),
            spec,
        });
    }
    Ok(plans)
}
