//! `bicilab synth <manifest>` — renders scene manifest lines into stereo
//! noisy WAVs plus clean EGF pairs.

use std::path::Path;

use rayon::prelude::*;

use bicilab::ace::write_egf;
use bicilab::dsp::{wav::write_wav, wav::WavFormat, SampleBuffer};
use bicilab::scene::{build_scene, parse_manifest, ManifestEntry, SceneSpec};

use super::scenes::{load_mono_16k, renderer_from_spec};
use crate::config::ExperimentConfig;
use crate::errors::CliError;

fn render_entry(
    config: &ExperimentConfig,
    entry: &ManifestEntry,
    index: usize,
) -> Result<(), CliError> {
    let target = load_mono_16k(&entry.target_path)?;
    let noise = load_mono_16k(&entry.noise_path)?;
    let spec = SceneSpec::new(
        target,
        noise,
        entry.target_azimuth,
        entry.noise_azimuth,
        entry.snr_db,
        renderer_from_spec(&entry.renderer)?,
    )?;
    let scene = build_scene(&spec, &config.patient_map()?, &config.lgf_params()?)?;

    let stem = format!("scene{index:04}");
    let noisy = SampleBuffer::stereo(
        scene.pair.left.channel(0).to_vec(),
        scene.pair.right.channel(0).to_vec(),
        scene.pair.left.rate(),
    )?;
    write_wav(
        config.out_dir.join(format!("{stem}_noisy.wav")),
        &noisy,
        WavFormat::Float32,
    )?;
    write_egf(
        config.out_dir.join(format!("{stem}_clean_l.egf")),
        &scene.clean_egram_left.electrodogram,
    )?;
    write_egf(
        config.out_dir.join(format!("{stem}_clean_r.egf")),
        &scene.clean_egram_right.electrodogram,
    )?;
    Ok(())
}

pub fn run(config: &ExperimentConfig, manifest_path: &Path) -> Result<(), CliError> {
    let text = std::fs::read_to_string(manifest_path)
        .map_err(|e| CliError::data(format!("{}: {e}", manifest_path.display())))?;
    let entries = parse_manifest(&text)?;
    if entries.is_empty() {
        return Err(CliError::usage(format!(
            "manifest {} holds no scene lines",
            manifest_path.display()
        )));
    }
    std::fs::create_dir_all(&config.out_dir)
        .map_err(|e| CliError::data(format!("{}: {e}", config.out_dir.display())))?;

    let results: Vec<Result<(), CliError>> = entries
        .par_iter()
        .enumerate()
        .map(|(i, entry)| render_entry(config, entry, i))
        .collect();

    let mut failures = 0usize;
    for (i, result) in results.iter().enumerate() {
        if let Err(e) = result {
            failures += 1;
            log::error!("scene {i}: {e} (skipped)");
        }
    }
    println!(
        "synthesized {} scene(s), {failures} skipped, outputs in {}",
        entries.len() - failures,
        config.out_dir.display()
    );
    if failures == entries.len() {
        return Err(CliError::data("every scene in the manifest failed"));
    }
    Ok(())
}
