//! `bicilab eval` — metric CSVs and plot data over the SNR x azimuth grid
//! for the unprocessed ACE baseline plus any supplied model weights.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use bicilab::ace::{ace_encode, AceOutput, Electrodogram, LgfParams, PatientMap, Side};
use bicilab::deep_ace::{forward_bilateral, BoundModel, ModelParams, Variant};
use bicilab::metrics::{
    eic_channels, lcc_channels, mean_defined, snri, summarize, write_metric_csv,
    write_summary_tsv, MetricReport, MetricRow,
};
use bicilab::scene::{build_scene, Scene, SceneSpec};

use super::scenes::{list_wavs, load_mono_16k, resolve_renderer, segment};
use crate::config::ExperimentConfig;
use crate::errors::CliError;

struct GridPoint {
    scene_label: String,
    azimuth: f64,
    snr_db: f64,
    spec: SceneSpec,
}

struct EvaluatedScene {
    rows: Vec<MetricRow>,
}

/// Per-variant evaluator: maps the noisy scene onto a denoised
/// electrodogram pair.
enum Evaluator {
    Unprocessed,
    Model(Box<ModelParams>),
}

impl Evaluator {
    fn name(&self) -> String {
        match self {
            Evaluator::Unprocessed => "ace".to_string(),
            Evaluator::Model(p) => p.variant.name().to_string(),
        }
    }

    fn denoise(
        &self,
        scene: &Scene,
        noisy_left: &AceOutput,
        noisy_right: &AceOutput,
        map: &PatientMap,
    ) -> Result<(Electrodogram, Electrodogram), CliError> {
        match self {
            Evaluator::Unprocessed => Ok((
                noisy_left.electrodogram.clone(),
                noisy_right.electrodogram.clone(),
            )),
            Evaluator::Model(params) => {
                let bound = BoundModel::bind(params, false)?;
                let (out_l, out_r) = forward_bilateral(
                    &bound,
                    scene.pair.left.channel(0),
                    scene.pair.right.channel(0),
                )?;
                let frames = out_l.p.shape()[1];
                let left = Electrodogram::new(
                    out_l.p.values().to_vec(),
                    params.config.m_channels,
                    frames,
                    map.csr,
                    Side::Left,
                )?;
                let right = Electrodogram::new(
                    out_r.p.values().to_vec(),
                    params.config.m_channels,
                    frames,
                    map.csr,
                    Side::Right,
                )?;
                Ok((left, right))
            }
        }
    }
}

fn evaluate_point(
    point: &GridPoint,
    evaluators: &[Evaluator],
    map: &PatientMap,
    lgf: &LgfParams,
    seed: u64,
) -> Result<EvaluatedScene, CliError> {
    let scene = build_scene(&point.spec, map, lgf)?;
    let noisy_left = ace_encode(&scene.pair.left, map, lgf, Side::Left)?;
    let noisy_right = ace_encode(&scene.pair.right, map, lgf, Side::Right)?;

    let mut rows = Vec::new();
    for evaluator in evaluators {
        let (den_l, den_r) = evaluator.denoise(&scene, &noisy_left, &noisy_right, map)?;
        // Align every operand to the shortest frame count (the deep
        // decoder emits one frame fewer than the ACE chain).
        let frames = den_l
            .frames()
            .min(noisy_left.electrodogram.frames())
            .min(scene.clean_egram_left.electrodogram.frames());
        let clean_l = scene.clean_egram_left.electrodogram.truncated(frames);
        let clean_r = scene.clean_egram_right.electrodogram.truncated(frames);
        let noisy_l = noisy_left.electrodogram.truncated(frames);
        let noisy_r = noisy_right.electrodogram.truncated(frames);
        let den_l = den_l.truncated(frames);
        let den_r = den_r.truncated(frames);

        let (eic_mean, eic_undefined) = mean_defined(&eic_channels(&den_r, &den_l)?);
        for (side, clean, noisy, denoised) in [
            ('l', &clean_l, &noisy_l, &den_l),
            ('r', &clean_r, &noisy_r, &den_r),
        ] {
            let improvement = snri(noisy, clean, denoised)?;
            let (lcc_mean, lcc_undefined) = mean_defined(&lcc_channels(clean, denoised)?);
            rows.push(MetricRow {
                scene: point.scene_label.clone(),
                variant: evaluator.name(),
                side,
                azimuth_deg: point.azimuth,
                snr_db: point.snr_db,
                snri_db: improvement.db(),
                snri_capped: improvement.capped(),
                lcc_mean,
                lcc_undefined,
                eic_mean,
                eic_undefined,
                seed,
            });
        }
    }
    Ok(EvaluatedScene { rows })
}

pub fn run(
    config: &ExperimentConfig,
    weights: &[PathBuf],
    variants_filter: Option<&str>,
) -> Result<(), CliError> {
    let map = config.patient_map()?;
    let lgf = config.lgf_params()?;

    let mut evaluators = vec![Evaluator::Unprocessed];
    for path in weights {
        let params = ModelParams::load(path)?;
        if params.variant == Variant::Monaural {
            return Err(CliError::usage(format!(
                "{}: monaural weights cannot drive a bilateral evaluation",
                path.display()
            )));
        }
        if params.config.m_channels != map.m_channels {
            return Err(CliError::usage(format!(
                "{}: weights expect {} channels, patient map has {}",
                path.display(),
                params.config.m_channels,
                map.m_channels
            )));
        }
        if 16_000 % params.config.stride as u32 != 0
            || 16_000 / params.config.stride as u32 != map.csr
        {
            return Err(CliError::usage(format!(
                "{}: stride {} mismatches the {} pps CSR",
                path.display(),
                params.config.stride,
                map.csr
            )));
        }
        evaluators.push(Evaluator::Model(Box::new(params)));
    }
    if let Some(filter) = variants_filter {
        let wanted: Vec<&str> = filter.split(',').map(str::trim).collect();
        for name in &wanted {
            if !["ace", "bilateral", "fused"].contains(name) {
                return Err(CliError::usage(format!("unknown variant '{name}'")));
            }
        }
        evaluators.retain(|e| wanted.contains(&e.name().as_str()));
        if evaluators.is_empty() {
            return Err(CliError::usage("variant filter removed every evaluator"));
        }
    }

    // Corpus pairs for the grid.
    let corpus = &config.corpus;
    let (Some(target_dir), Some(noise_dir)) = (&corpus.target_dir, &corpus.noise_dir) else {
        return Err(CliError::usage(
            "eval requires [corpus] target_dir and noise_dir",
        ));
    };
    let targets = load_segments(target_dir, config)?;
    let noises = load_segments(noise_dir, config)?;
    let pairs: Vec<(usize, &bicilab::dsp::SampleBuffer, &bicilab::dsp::SampleBuffer)> = targets
        .iter()
        .take(config.scene.max_pairs)
        .enumerate()
        .map(|(i, t)| (i, t, &noises[i % noises.len()]))
        .collect();

    let renderer = resolve_renderer(config)?;
    let mut grid = Vec::new();
    for azimuth in config.scene.azimuth_grid.points() {
        for &snr_db in &config.scene.snr_grid {
            for (i, target, noise) in &pairs {
                grid.push(GridPoint {
                    scene_label: format!("pair{i:03}"),
                    azimuth,
                    snr_db,
                    spec: SceneSpec::new(
                        (*target).clone(),
                        (*noise).clone(),
                        config.scene.target_azimuth,
                        azimuth,
                        snr_db,
                        renderer.clone(),
                    )?,
                });
            }
        }
    }
    log::info!(
        "evaluating {} grid points x {} variants",
        grid.len(),
        evaluators.len()
    );

    let results: Vec<Result<EvaluatedScene, CliError>> = grid
        .par_iter()
        .map(|point| evaluate_point(point, &evaluators, &map, &lgf, config.seed))
        .collect();

    std::fs::create_dir_all(&config.out_dir)
        .map_err(|e| CliError::data(format!("{}: {e}", config.out_dir.display())))?;
    let mut by_variant: BTreeMap<String, MetricReport> = BTreeMap::new();
    for result in results {
        let evaluated = result?;
        for row in evaluated.rows {
            by_variant.entry(row.variant.clone()).or_default().rows.push(row);
        }
    }

    for (variant, report) in &by_variant {
        write_metric_csv(
            config.out_dir.join(format!("metrics_{variant}.csv")),
            report,
        )?;
        emit_plots(config, variant, report)?;
    }
    println!(
        "evaluated {} variant(s) over {} grid points; outputs in {}",
        by_variant.len(),
        grid.len(),
        config.out_dir.display()
    );
    Ok(())
}

fn load_segments(
    dir: &Path,
    config: &ExperimentConfig,
) -> Result<Vec<bicilab::dsp::SampleBuffer>, CliError> {
    let files = list_wavs(dir)?;
    if files.is_empty() {
        return Err(CliError::usage(format!(
            "no WAV files in corpus dir {}",
            dir.display()
        )));
    }
    let mut segments = Vec::new();
    for path in &files {
        segments.extend(segment(&load_mono_16k(path)?, config.scene.segment_seconds));
    }
    Ok(segments)
}

/// Tab-separated (x, mean, q1, q3) plot data per figure analog.
fn emit_plots(
    config: &ExperimentConfig,
    variant: &str,
    report: &MetricReport,
) -> Result<(), CliError> {
    let group_by = |key: fn(&MetricRow) -> f64,
                    value: fn(&MetricRow) -> Option<f64>|
     -> Vec<(f64, Vec<f64>)> {
        let mut groups: BTreeMap<i64, (f64, Vec<f64>)> = BTreeMap::new();
        for row in &report.rows {
            if let Some(v) = value(row) {
                let k = key(row);
                let entry = groups.entry((k * 1000.0).round() as i64).or_insert((k, Vec::new()));
                entry.1.push(v);
            }
        }
        groups.into_values().collect()
    };

    let snri_by_snr = group_by(|r| r.snr_db, |r| Some(r.snri_db));
    write_summary_tsv(
        config.out_dir.join(format!("plot_snri_vs_snr_{variant}.tsv")),
        &summarize(&snri_by_snr),
    )?;
    let lcc_by_azimuth = group_by(|r| r.azimuth_deg, |r| r.lcc_mean);
    write_summary_tsv(
        config.out_dir.join(format!("plot_lcc_vs_azimuth_{variant}.tsv")),
        &summarize(&lcc_by_azimuth),
    )?;
    let eic_by_azimuth = group_by(|r| r.azimuth_deg, |r| r.eic_mean);
    write_summary_tsv(
        config.out_dir.join(format!("plot_eic_vs_azimuth_{variant}.tsv")),
        &summarize(&eic_by_azimuth),
    )?;
    Ok(())
}
