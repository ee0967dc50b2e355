//! Declarative experiment configuration: a TOML file of `key = value`
//! lines under named sections, every field defaulted so a missing file
//! means "laboratory defaults".

use std::path::{Path, PathBuf};

use serde::Deserialize;

use bicilab::ace::{LgfParams, PatientMap};
use bicilab::deep_ace::{ModelConfig, TrainConfig, Variant};

use crate::errors::CliError;

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct CorpusSection {
    pub target_dir: Option<PathBuf>,
    pub noise_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AzimuthGrid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Default for AzimuthGrid {
    fn default() -> Self {
        AzimuthGrid {
            start: -90.0,
            stop: 90.0,
            step: 5.0,
        }
    }
}

impl AzimuthGrid {
    pub fn points(&self) -> Vec<f64> {
        let mut points = Vec::new();
        let mut az = self.start;
        while az <= self.stop + 1e-9 {
            points.push(az);
            az += self.step;
        }
        points
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SceneSection {
    /// "parametric" or "brir:PATH".
    pub renderer: String,
    pub target_azimuth: f64,
    pub azimuth_grid: AzimuthGrid,
    /// Fixed SNRs of the evaluation grid.
    pub snr_grid: Vec<f64>,
    /// Uniform draw range for training scenes.
    pub snr_range: [f64; 2],
    pub segment_seconds: f64,
    /// Cap on target/noise pairs per grid point (and training segments).
    pub max_pairs: usize,
}

impl Default for SceneSection {
    fn default() -> Self {
        SceneSection {
            renderer: "parametric".to_string(),
            target_azimuth: 0.0,
            azimuth_grid: AzimuthGrid::default(),
            snr_grid: vec![-5.0, 0.0, 5.0, 10.0],
            snr_range: [-5.0, 10.0],
            segment_seconds: 4.0,
            max_pairs: 4,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PatientSection {
    pub n_select: usize,
    pub m_channels: usize,
    pub csr: u32,
    pub threshold: u32,
    pub comfort: u32,
}

impl Default for PatientSection {
    fn default() -> Self {
        PatientSection {
            n_select: 8,
            m_channels: 22,
            csr: 1000,
            threshold: 100,
            comfort: 200,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LgfSection {
    pub rho: f64,
    pub base_level: f64,
    pub saturation_level: f64,
}

impl Default for LgfSection {
    fn default() -> Self {
        let d = LgfParams::default();
        LgfSection {
            rho: d.rho,
            base_level: d.base_level,
            saturation_level: d.saturation_level,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSection {
    pub variant: String,
    pub encoder_filters: usize,
    pub filter_len: usize,
    pub bottleneck: usize,
    pub hidden: usize,
    pub skip: usize,
    pub kernel: usize,
    pub blocks_per_repeat: usize,
    pub repeats: usize,
    /// Hidden DED widths; the electrode count is appended automatically.
    pub ded_hidden: Vec<usize>,
    pub stride: usize,
}

impl Default for ModelSection {
    fn default() -> Self {
        let d = ModelConfig::default();
        ModelSection {
            variant: "fused".to_string(),
            encoder_filters: d.encoder_filters,
            filter_len: d.filter_len,
            bottleneck: d.bottleneck,
            hidden: d.hidden,
            skip: d.skip,
            kernel: d.kernel,
            blocks_per_repeat: d.blocks_per_repeat,
            repeats: d.repeats,
            ded_hidden: vec![128, 64],
            stride: d.stride,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainSection {
    pub max_epochs: usize,
    pub batch_size: usize,
    pub initial_lr: f64,
    pub lr_halve_patience: usize,
    pub early_stop_patience: usize,
    pub alpha_bce: f64,
    pub validation_fraction: f64,
    pub max_steps: Option<usize>,
}

impl Default for TrainSection {
    fn default() -> Self {
        let d = TrainConfig::default();
        TrainSection {
            max_epochs: d.max_epochs,
            batch_size: d.batch_size,
            initial_lr: d.initial_lr,
            lr_halve_patience: d.lr_halve_patience,
            early_stop_patience: d.early_stop_patience,
            alpha_bce: d.alpha_bce,
            validation_fraction: 0.2,
            max_steps: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
struct RawConfig {
    seed: u64,
    corpus: CorpusSection,
    scene: SceneSection,
    patient: PatientSection,
    lgf: LgfSection,
    model: ModelSection,
    train: TrainSection,
    output: OutputSection,
}

/// Fully resolved experiment configuration.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub corpus: CorpusSection,
    pub scene: SceneSection,
    pub patient: PatientSection,
    pub lgf: LgfSection,
    pub model: ModelSection,
    pub train: TrainSection,
    pub out_dir: PathBuf,
}

impl ExperimentConfig {
    /// Loads (or defaults) the config and applies CLI overrides.
    pub fn load(
        path: Option<&Path>,
        seed_override: Option<u64>,
        out_override: Option<PathBuf>,
    ) -> Result<ExperimentConfig, CliError> {
        let raw: RawConfig = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| {
                    CliError::usage(format!("cannot read config {}: {e}", p.display()))
                })?;
                toml::from_str(&text)
                    .map_err(|e| CliError::usage(format!("config {}: {e}", p.display())))?
            }
            None => RawConfig::default(),
        };

        let config = ExperimentConfig {
            seed: seed_override.unwrap_or(raw.seed),
            corpus: raw.corpus,
            scene: raw.scene,
            patient: raw.patient,
            lgf: raw.lgf,
            model: raw.model,
            train: raw.train,
            out_dir: out_override
                .or(raw.output.dir)
                .unwrap_or_else(|| PathBuf::from("out")),
        };
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<(), CliError> {
        if self.scene.azimuth_grid.step <= 0.0 || self.scene.azimuth_grid.points().is_empty() {
            return Err(CliError::usage("azimuth grid must be non-empty".to_string()));
        }
        if self.scene.snr_grid.is_empty() {
            return Err(CliError::usage("snr grid must be non-empty"));
        }
        if self.scene.snr_range[0] > self.scene.snr_range[1] {
            return Err(CliError::usage("snr range must satisfy lo <= hi"));
        }
        if self.scene.segment_seconds <= 0.0 || self.scene.max_pairs == 0 {
            return Err(CliError::usage("segment_seconds and max_pairs must be positive"));
        }
        if !(0.0..1.0).contains(&self.train.validation_fraction) {
            return Err(CliError::usage("validation_fraction must be in [0, 1)"));
        }
        self.patient_map()?;
        self.model_config()?;
        self.variant()?;
        Ok(())
    }

    pub fn patient_map(&self) -> Result<PatientMap, CliError> {
        let p = &self.patient;
        PatientMap::new(
            vec![p.threshold; p.m_channels],
            vec![p.comfort; p.m_channels],
            p.n_select,
            p.m_channels,
            p.csr,
        )
        .map_err(|e| CliError::usage(e.to_string()))
    }

    pub fn lgf_params(&self) -> Result<LgfParams, CliError> {
        LgfParams::new(self.lgf.base_level, self.lgf.saturation_level, self.lgf.rho)
            .map_err(|e| CliError::usage(e.to_string()))
    }

    pub fn model_config(&self) -> Result<ModelConfig, CliError> {
        let m = &self.model;
        let mut ded_channels = m.ded_hidden.clone();
        ded_channels.push(self.patient.m_channels);
        let config = ModelConfig {
            encoder_filters: m.encoder_filters,
            filter_len: m.filter_len,
            bottleneck: m.bottleneck,
            hidden: m.hidden,
            skip: m.skip,
            kernel: m.kernel,
            blocks_per_repeat: m.blocks_per_repeat,
            repeats: m.repeats,
            ded_channels,
            m_channels: self.patient.m_channels,
            stride: m.stride,
        };
        config
            .validate()
            .map_err(|e| CliError::usage(e.to_string()))?;
        Ok(config)
    }

    pub fn variant(&self) -> Result<Variant, CliError> {
        Variant::from_name(&self.model.variant).ok_or_else(|| {
            CliError::usage(format!(
                "model variant must be monaural/bilateral/fused, got '{}'",
                self.model.variant
            ))
        })
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            max_epochs: self.train.max_epochs,
            batch_size: self.train.batch_size,
            initial_lr: self.train.initial_lr,
            lr_halve_patience: self.train.lr_halve_patience,
            early_stop_patience: self.train.early_stop_patience,
            alpha_bce: self.train.alpha_bce,
            seed: self.seed,
            max_steps: self.train.max_steps,
        }
    }
}
