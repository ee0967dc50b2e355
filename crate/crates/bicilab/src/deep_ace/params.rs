//! Named parameter storage, initialization, and weight-file persistence.

use std::collections::HashMap;
use std::path::Path;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use super::ModelConfig;
use crate::nn::{read_dwt, write_dwt, WeightRecord};
use crate::{Error, Result};

/// Model wiring selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    Monaural,
    Bilateral,
    Fused,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Monaural => "monaural",
            Variant::Bilateral => "bilateral",
            Variant::Fused => "fused",
        }
    }

    pub fn from_name(s: &str) -> Option<Variant> {
        match s {
            "monaural" => Some(Variant::Monaural),
            "bilateral" => Some(Variant::Bilateral),
            "fused" => Some(Variant::Fused),
            _ => None,
        }
    }

    fn side_prefixes(self) -> &'static [&'static str] {
        match self {
            Variant::Monaural => &["mono"],
            Variant::Bilateral | Variant::Fused => &["left", "right"],
        }
    }
}

/// All trainable weights of one model instance, in a fixed order with
/// unique names derivable from the configuration alone.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub config: ModelConfig,
    pub variant: Variant,
    pub(crate) entries: Vec<WeightRecord>,
    pub(crate) index: HashMap<String, usize>,
}

impl ModelParams {
    /// Seeded initialization: uniform Glorot bounds for weights, zero
    /// biases, 0.25 PReLU slopes, unit norm scales.
    pub fn init(config: &ModelConfig, variant: Variant, seed: u64) -> Result<ModelParams> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut entries = Vec::new();

        for side in variant.side_prefixes() {
            build_side(&mut entries, config, side, &mut rng);
        }

        let mut index = HashMap::new();
        for (i, e) in entries.iter().enumerate() {
            if index.insert(e.name.clone(), i).is_some() {
                return Err(Error::param(format!("duplicate parameter name {}", e.name)));
            }
        }
        Ok(ModelParams {
            config: config.clone(),
            variant,
            entries,
            index,
        })
    }

    pub fn records(&self) -> &[WeightRecord] {
        &self.entries
    }

    pub fn record(&self, name: &str) -> Option<&WeightRecord> {
        self.index.get(name).map(|&i| &self.entries[i])
    }

    pub fn record_mut(&mut self, name: &str) -> Option<&mut WeightRecord> {
        let i = *self.index.get(name)?;
        Some(&mut self.entries[i])
    }

    /// Total trainable scalar count.
    pub fn scalar_count(&self) -> usize {
        self.entries.iter().map(|e| e.values.len()).sum()
    }

    /// Copies the right-side parameter values onto the left side (or the
    /// reverse), producing mirrored weights for symmetry probes.
    pub fn mirror_left_to_right(&mut self) {
        let pairs: Vec<(usize, String)> = self
            .entries
            .iter()
            .enumerate()
            .filter_map(|(i, e)| {
                e.name
                    .strip_prefix("left.")
                    .map(|tail| (i, format!("right.{tail}")))
            })
            .collect();
        for (left_idx, right_name) in pairs {
            let values = self.entries[left_idx].values.clone();
            let right_idx = self.index[&right_name];
            self.entries[right_idx].values = values;
        }
    }

    /// Writes the weights (DWT v1) plus a sidecar `<path>.manifest`
    /// recording the configuration and variant.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        write_dwt(path, &self.entries)?;
        let c = &self.config;
        let ded: Vec<String> = c.ded_channels.iter().map(ToString::to_string).collect();
        let manifest = format!(
            "variant = {}\nencoder_filters = {}\nfilter_len = {}\nbottleneck = {}\n\
             hidden = {}\nskip = {}\nkernel = {}\nblocks_per_repeat = {}\nrepeats = {}\n\
             ded_channels = {}\nm_channels = {}\nstride = {}\n",
            self.variant.name(),
            c.encoder_filters,
            c.filter_len,
            c.bottleneck,
            c.hidden,
            c.skip,
            c.kernel,
            c.blocks_per_repeat,
            c.repeats,
            ded.join(","),
            c.m_channels,
            c.stride,
        );
        std::fs::write(manifest_path(path), manifest)?;
        Ok(())
    }

    /// Loads weights and sidecar manifest written by [`ModelParams::save`].
    pub fn load(path: impl AsRef<Path>) -> Result<ModelParams> {
        let path = path.as_ref();
        let entries = read_dwt(path)?;
        let text = std::fs::read_to_string(manifest_path(path))?;

        let mut fields: HashMap<&str, &str> = HashMap::new();
        for line in text.lines() {
            if let Some((k, v)) = line.split_once('=') {
                fields.insert(k.trim(), v.trim());
            }
        }
        let get = |key: &str| -> Result<&str> {
            fields.get(key).copied().ok_or_else(|| Error::Parse {
                what: "model manifest",
                detail: format!("missing key '{key}'"),
            })
        };
        let parse_usize = |key: &str| -> Result<usize> {
            get(key)?.parse().map_err(|e| Error::Parse {
                what: "model manifest",
                detail: format!("{key}: {e}"),
            })
        };
        let variant = Variant::from_name(get("variant")?).ok_or_else(|| Error::Parse {
            what: "model manifest",
            detail: format!("unknown variant '{}'", get("variant").unwrap_or("?")),
        })?;
        let ded_channels: std::result::Result<Vec<usize>, _> = get("ded_channels")?
            .split(',')
            .map(|s| s.trim().parse())
            .collect();
        let config = ModelConfig {
            encoder_filters: parse_usize("encoder_filters")?,
            filter_len: parse_usize("filter_len")?,
            bottleneck: parse_usize("bottleneck")?,
            hidden: parse_usize("hidden")?,
            skip: parse_usize("skip")?,
            kernel: parse_usize("kernel")?,
            blocks_per_repeat: parse_usize("blocks_per_repeat")?,
            repeats: parse_usize("repeats")?,
            ded_channels: ded_channels.map_err(|e| Error::Parse {
                what: "model manifest",
                detail: format!("ded_channels: {e}"),
            })?,
            m_channels: parse_usize("m_channels")?,
            stride: parse_usize("stride")?,
        };
        config.validate()?;

        // Cross-check against a freshly derived shape inventory.
        let expected = ModelParams::init(&config, variant, 0)?;
        if expected.entries.len() != entries.len() {
            return Err(Error::Parse {
                what: "model weights",
                detail: format!(
                    "{} parameters on disk, {} expected for this configuration",
                    entries.len(),
                    expected.entries.len()
                ),
            });
        }
        let mut index = HashMap::new();
        for (i, (got, want)) in entries.iter().zip(&expected.entries).enumerate() {
            if got.name != want.name || got.shape != want.shape {
                return Err(Error::Parse {
                    what: "model weights",
                    detail: format!(
                        "parameter {i}: found '{}' {:?}, expected '{}' {:?}",
                        got.name, got.shape, want.name, want.shape
                    ),
                });
            }
            index.insert(got.name.clone(), i);
        }
        Ok(ModelParams {
            config,
            variant,
            entries,
            index,
        })
    }
}

fn manifest_path(path: &Path) -> std::path::PathBuf {
    let mut os = path.as_os_str().to_owned();
    os.push(".manifest");
    std::path::PathBuf::from(os)
}

fn glorot(rng: &mut ChaCha8Rng, shape: &[usize], fan_in: usize, fan_out: usize) -> WeightRecord {
    let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
    let numel: usize = shape.iter().product();
    let values = (0..numel).map(|_| rng.random_range(-bound..bound)).collect();
    WeightRecord {
        name: String::new(),
        shape: shape.to_vec(),
        values,
    }
}

fn push(entries: &mut Vec<WeightRecord>, name: String, mut rec: WeightRecord) {
    rec.name = name;
    entries.push(rec);
}

fn constant(shape: &[usize], value: f64) -> WeightRecord {
    WeightRecord {
        name: String::new(),
        shape: shape.to_vec(),
        values: vec![value; shape.iter().product()],
    }
}

/// Appends one side's parameter inventory in forward order.
fn build_side(
    entries: &mut Vec<WeightRecord>,
    c: &ModelConfig,
    side: &str,
    rng: &mut ChaCha8Rng,
) {
    let f = c.encoder_filters;
    let l = c.filter_len;
    let (b, h, s, p, m) = (c.bottleneck, c.hidden, c.skip, c.kernel, c.m_channels);

    push(entries, format!("{side}.encoder.weight"), glorot(rng, &[f, 1, l], l, f * l));

    // Antirectifier projection back from the doubled channel count.
    push(
        entries,
        format!("{side}.antirect.proj.weight"),
        glorot(rng, &[f, 2 * f, 1], 2 * f, f),
    );
    push(entries, format!("{side}.antirect.proj.bias"), constant(&[f, 1], 0.0));

    let mut prev = f;
    for (i, &ch) in c.ded_channels.iter().enumerate() {
        push(
            entries,
            format!("{side}.ded.conv{i}.weight"),
            glorot(rng, &[ch, prev, p], prev * p, ch * p),
        );
        push(entries, format!("{side}.ded.conv{i}.bias"), constant(&[ch, 1], 0.0));
        if i + 1 < c.ded_channels.len() {
            push(entries, format!("{side}.ded.prelu{i}.alpha"), constant(&[1], 0.25));
        }
        prev = ch;
    }

    push(
        entries,
        format!("{side}.bottleneck.weight"),
        glorot(rng, &[b, f, 1], f, b),
    );
    push(entries, format!("{side}.bottleneck.bias"), constant(&[b, 1], 0.0));

    for r in 0..c.repeats {
        for x in 0..c.blocks_per_repeat {
            let pre = format!("{side}.tcn.r{r}.b{x}");
            push(entries, format!("{pre}.conv_in.weight"), glorot(rng, &[h, b, 1], b, h));
            push(entries, format!("{pre}.conv_in.bias"), constant(&[h, 1], 0.0));
            push(entries, format!("{pre}.prelu1.alpha"), constant(&[1], 0.25));
            push(entries, format!("{pre}.norm1.gamma"), constant(&[h, 1], 1.0));
            push(entries, format!("{pre}.norm1.beta"), constant(&[h, 1], 0.0));
            push(
                entries,
                format!("{pre}.depthwise.weight"),
                glorot(rng, &[h, 1, p], p, p),
            );
            push(entries, format!("{pre}.depthwise.bias"), constant(&[h, 1], 0.0));
            push(entries, format!("{pre}.prelu2.alpha"), constant(&[1], 0.25));
            push(entries, format!("{pre}.norm2.gamma"), constant(&[h, 1], 1.0));
            push(entries, format!("{pre}.norm2.beta"), constant(&[h, 1], 0.0));
            push(entries, format!("{pre}.res.weight"), glorot(rng, &[b, h, 1], h, b));
            push(entries, format!("{pre}.res.bias"), constant(&[b, 1], 0.0));
            push(entries, format!("{pre}.skip.weight"), glorot(rng, &[s, h, 1], h, s));
            push(entries, format!("{pre}.skip.bias"), constant(&[s, 1], 0.0));
        }
    }

    push(entries, format!("{side}.masker.weight"), glorot(rng, &[m, s, 1], s, m));
    push(entries, format!("{side}.masker.bias"), constant(&[m, 1], 0.0));

    // Decoder kernel lives in transposed layout [C_in, C_out, K].
    push(entries, format!("{side}.decoder.weight"), glorot(rng, &[m, m, 1], m, m));
    push(entries, format!("{side}.decoder.bias"), constant(&[m, 1], 0.0));
}
