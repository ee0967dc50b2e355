//! Training loop: seeded batching, Adam, plateau-halved learning rate,
//! early stopping, best-checkpoint retention.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use super::loss::{model_loss, LossTargets};
use super::model::{forward_bilateral, BoundModel};
use super::params::{ModelParams, Variant};
use super::ModelConfig;
use crate::nn::{adam_step, backward, AdamState};
use crate::scene::Scene;
use crate::{Error, Result};

/// One training item: the noisy ear signals plus clean references.
#[derive(Debug, Clone)]
pub struct TrainExample {
    pub x_left: Vec<f64>,
    pub x_right: Vec<f64>,
    pub targets_left: LossTargets,
    pub targets_right: LossTargets,
}

impl TrainExample {
    pub fn from_scene(scene: &Scene) -> TrainExample {
        TrainExample {
            x_left: scene.pair.left.channel(0).to_vec(),
            x_right: scene.pair.right.channel(0).to_vec(),
            targets_left: LossTargets::from_ace(&scene.clean_egram_left),
            targets_right: LossTargets::from_ace(&scene.clean_egram_right),
        }
    }
}

/// Optimization schedule knobs.
#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub max_epochs: usize,
    /// Audio segments per batch.
    pub batch_size: usize,
    pub initial_lr: f64,
    /// Consecutive non-improving validation epochs before the learning
    /// rate halves.
    pub lr_halve_patience: usize,
    /// Consecutive non-improving validation epochs before training stops.
    pub early_stop_patience: usize,
    /// Selection-loss weight.
    pub alpha_bce: f64,
    pub seed: u64,
    /// Optional hard cap on optimizer steps (desk-scale runs).
    pub max_steps: Option<usize>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            max_epochs: 100,
            batch_size: 2,
            initial_lr: 1e-3,
            lr_halve_patience: 3,
            early_stop_patience: 5,
            alpha_bce: 1.0,
            seed: 0,
            max_steps: None,
        }
    }
}

/// What the plateau tracker decided after one validation value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScheduleDecision {
    pub improved: bool,
    pub halve_lr: bool,
    pub stop: bool,
}

/// Plateau tracker: strict-improvement bookkeeping over validation losses.
///
/// The learning rate halves after every `lr_patience` consecutive
/// non-improving epochs and training stops after `stop_patience` of them.
#[derive(Debug, Clone)]
pub struct TrainSchedule {
    best: f64,
    stagnant: usize,
    lr_patience: usize,
    stop_patience: usize,
}

impl TrainSchedule {
    pub fn new(lr_patience: usize, stop_patience: usize) -> TrainSchedule {
        TrainSchedule {
            best: f64::INFINITY,
            stagnant: 0,
            lr_patience: lr_patience.max(1),
            stop_patience: stop_patience.max(1),
        }
    }

    pub fn observe(&mut self, val_loss: f64) -> ScheduleDecision {
        if val_loss < self.best {
            self.best = val_loss;
            self.stagnant = 0;
            return ScheduleDecision {
                improved: true,
                halve_lr: false,
                stop: false,
            };
        }
        self.stagnant += 1;
        ScheduleDecision {
            improved: false,
            halve_lr: self.stagnant % self.lr_patience == 0,
            stop: self.stagnant >= self.stop_patience,
        }
    }

    pub fn best(&self) -> f64 {
        self.best
    }
}

/// Why the loop ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    EarlyStopped { epoch: usize },
    MaxEpochs,
    StepCap,
    /// Non-finite loss; the returned parameters are the last finite
    /// checkpoint.
    Diverged { epoch: usize },
}

/// One history row.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochStats {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
    pub lr: f64,
}

/// Training outcome: best-validation parameters plus the full history.
#[derive(Debug, Clone)]
pub struct FitOutcome {
    pub params: ModelParams,
    pub history: Vec<EpochStats>,
    pub stop: StopReason,
}

fn batch_loss<'p>(
    params: &'p ModelParams,
    batch: &[&TrainExample],
    alpha: f64,
    trainable: bool,
) -> Result<(Option<BoundModel<'p>>, f64)> {
    let bound = BoundModel::bind(params, trainable)?;
    let mut total: Option<crate::nn::Tensor> = None;
    for ex in batch {
        let (out_l, out_r) = forward_bilateral(&bound, &ex.x_left, &ex.x_right)?;
        let (loss, _) = model_loss(&out_l, &out_r, &ex.targets_left, &ex.targets_right, alpha)?;
        total = Some(match total {
            Some(acc) => acc.add(&loss)?,
            None => loss,
        });
    }
    let total = total
        .ok_or_else(|| Error::param("empty batch".to_string()))?
        .scale(1.0 / batch.len() as f64)?;
    let value = total.item()?;
    if trainable {
        backward(&total)?;
        Ok((Some(bound), value))
    } else {
        Ok((None, value))
    }
}

fn mean_loss(params: &ModelParams, set: &[TrainExample], alpha: f64) -> Result<f64> {
    let mut sum = 0.0;
    for ex in set {
        let refs = [ex];
        let (_, v) = batch_loss(params, &refs, alpha, false)?;
        sum += v;
    }
    Ok(sum / set.len() as f64)
}

/// Trains a two-sided model (bilateral or fused wiring).
///
/// Deterministic given the seed. Each epoch shuffles the training set,
/// averages the loss over `batch_size` segments per step, and updates with
/// Adam. Validation runs after every epoch; the best-validation weights
/// are retained and returned. A non-finite loss aborts with the last
/// finite checkpoint.
pub fn fit(
    config: &ModelConfig,
    variant: Variant,
    train: &[TrainExample],
    val: &[TrainExample],
    tcfg: &TrainConfig,
) -> Result<FitOutcome> {
    fit_with_init(config, variant, None, train, val, tcfg)
}

/// [`fit`] with optional initial weights (checkpoint resume). Optimizer
/// moments restart from zero.
pub fn fit_with_init(
    config: &ModelConfig,
    variant: Variant,
    init: Option<ModelParams>,
    train: &[TrainExample],
    val: &[TrainExample],
    tcfg: &TrainConfig,
) -> Result<FitOutcome> {
    if variant == Variant::Monaural {
        return Err(Error::param(
            "fit trains two-sided variants; monaural training is out of scope".to_string(),
        ));
    }
    if train.is_empty() || val.is_empty() {
        return Err(Error::param(format!(
            "training needs non-empty scene sets, got {} train / {} val",
            train.len(),
            val.len()
        )));
    }
    config.validate()?;

    let mut params = match init {
        Some(p) => {
            if p.config != *config || p.variant != variant {
                return Err(Error::param(
                    "initial weights do not match the requested configuration".to_string(),
                ));
            }
            p
        }
        None => ModelParams::init(config, variant, tcfg.seed)?,
    };
    let sizes: Vec<usize> = params.entries.iter().map(|e| e.values.len()).collect();
    let mut adam = AdamState::new(&sizes, tcfg.initial_lr);
    let mut schedule = TrainSchedule::new(tcfg.lr_halve_patience, tcfg.early_stop_patience);
    let mut rng = ChaCha8Rng::seed_from_u64(tcfg.seed.wrapping_add(0x5ce7e5));

    let mut best_params = params.clone();
    let mut history = Vec::new();
    let mut steps_taken = 0usize;
    let mut stop = StopReason::MaxEpochs;

    'epochs: for epoch in 1..=tcfg.max_epochs {
        let mut order: Vec<usize> = (0..train.len()).collect();
        order.shuffle(&mut rng);

        let mut epoch_loss_sum = 0.0;
        let mut epoch_batches = 0usize;
        for chunk in order.chunks(tcfg.batch_size.max(1)) {
            let batch: Vec<&TrainExample> = chunk.iter().map(|&i| &train[i]).collect();
            let (bound, value) = batch_loss(&params, &batch, tcfg.alpha_bce, true)?;
            if !value.is_finite() {
                log::error!("training diverged at epoch {epoch}: loss {value}");
                return Ok(FitOutcome {
                    params: best_params,
                    history,
                    stop: StopReason::Diverged { epoch },
                });
            }
            let bound = bound.expect("trainable batch returns bindings");
            let grads: Vec<Vec<f64>> = bound
                .leaves()
                .iter()
                .map(|l| l.grad().unwrap_or_else(|| vec![0.0; l.numel()]))
                .collect();
            let mut values: Vec<Vec<f64>> =
                params.entries.iter().map(|e| e.values.clone()).collect();
            adam_step(&mut values, &grads, &mut adam)?;
            for (entry, v) in params.entries.iter_mut().zip(values) {
                entry.values = v;
            }
            epoch_loss_sum += value;
            epoch_batches += 1;
            steps_taken += 1;
            if let Some(cap) = tcfg.max_steps {
                if steps_taken >= cap {
                    let val_loss = mean_loss(&params, val, tcfg.alpha_bce)?;
                    let decision = schedule.observe(val_loss);
                    if decision.improved {
                        best_params = params.clone();
                    }
                    history.push(EpochStats {
                        epoch,
                        train_loss: epoch_loss_sum / epoch_batches as f64,
                        val_loss,
                        lr: adam.lr,
                    });
                    stop = StopReason::StepCap;
                    break 'epochs;
                }
            }
        }

        let train_loss = epoch_loss_sum / epoch_batches as f64;
        let val_loss = mean_loss(&params, val, tcfg.alpha_bce)?;
        if !val_loss.is_finite() {
            log::error!("validation diverged at epoch {epoch}: loss {val_loss}");
            return Ok(FitOutcome {
                params: best_params,
                history,
                stop: StopReason::Diverged { epoch },
            });
        }
        history.push(EpochStats {
            epoch,
            train_loss,
            val_loss,
            lr: adam.lr,
        });

        let decision = schedule.observe(val_loss);
        if decision.improved {
            best_params = params.clone();
        }
        if decision.halve_lr {
            adam.lr *= 0.5;
            log::info!("epoch {epoch}: halving learning rate to {}", adam.lr);
        }
        if decision.stop {
            stop = StopReason::EarlyStopped { epoch };
            break;
        }
    }

    Ok(FitOutcome {
        params: best_params,
        history,
        stop,
    })
}
