//! `bicilab train` — corpus ingestion, scene construction, model fitting,
//! weight/history persistence.

use std::fmt::Write as _;

use rayon::prelude::*;

use bicilab::deep_ace::{fit_with_init, FitOutcome, ModelParams, StopReason, TrainExample};
use bicilab::scene::build_scene;

use super::scenes::training_plans;
use crate::config::ExperimentConfig;
use crate::errors::CliError;

pub fn run(config: &ExperimentConfig, resume: bool) -> Result<(), CliError> {
    let model_config = config.model_config()?;
    let variant = config.variant()?;
    let map = config.patient_map()?;
    let lgf = config.lgf_params()?;

    // The model emits frames at rate/stride; the clean references must
    // arrive at the same rate.
    if 16_000 % model_config.stride as u32 != 0
        || 16_000 / model_config.stride as u32 != map.csr
    {
        return Err(CliError::usage(format!(
            "model stride {} yields {} frames/s but the patient CSR is {}",
            model_config.stride,
            16_000 / model_config.stride,
            map.csr
        )));
    }

    let plans = training_plans(config)?;
    if plans.is_empty() {
        return Err(CliError::usage("no training scenes could be built"));
    }
    log::info!("building {} training scenes", plans.len());
    let examples: Vec<TrainExample> = plans
        .par_iter()
        .map(|plan| {
            build_scene(&plan.spec, &map, &lgf)
                .map(|scene| TrainExample::from_scene(&scene))
                .map_err(|e| CliError::data(format!("{}: {e}", plan.label)))
        })
        .collect::<Result<_, _>>()?;

    let val_count = ((examples.len() as f64 * config.train.validation_fraction).round()
        as usize)
        .clamp(1, examples.len().saturating_sub(1).max(1));
    let split = examples.len() - val_count.min(examples.len() - 1).max(1);
    let (train_set, val_set) = if examples.len() == 1 {
        (examples.as_slice(), examples.as_slice())
    } else {
        (&examples[..split], &examples[split..])
    };
    log::info!(
        "{} training / {} validation scenes",
        train_set.len(),
        val_set.len()
    );

    std::fs::create_dir_all(&config.out_dir)
        .map_err(|e| CliError::data(format!("{}: {e}", config.out_dir.display())))?;
    let checkpoint_path = config.out_dir.join("checkpoint.dwt");
    let init = if resume {
        if !checkpoint_path.exists() {
            return Err(CliError::usage(format!(
                "--resume requested but {} does not exist",
                checkpoint_path.display()
            )));
        }
        let params = ModelParams::load(&checkpoint_path)?;
        if params.config != model_config || params.variant != variant {
            return Err(CliError::usage(
                "checkpoint configuration does not match the experiment config",
            ));
        }
        Some(params)
    } else {
        None
    };

    let outcome = fit_with_init(
        &model_config,
        variant,
        init,
        train_set,
        val_set,
        &config.train_config(),
    )?;
    persist(config, &outcome)?;

    match outcome.stop {
        StopReason::Diverged { epoch } => Err(CliError::Numerical(format!(
            "training diverged at epoch {epoch}; last finite checkpoint kept in {}",
            checkpoint_path.display()
        ))),
        stop => {
            println!(
                "trained {} ({} epochs, stop: {stop:?}); weights and history in {}",
                variant.name(),
                outcome.history.len(),
                config.out_dir.display()
            );
            Ok(())
        }
    }
}

fn persist(config: &ExperimentConfig, outcome: &FitOutcome) -> Result<(), CliError> {
    outcome.params.save(config.out_dir.join("weights.dwt"))?;
    outcome.params.save(config.out_dir.join("checkpoint.dwt"))?;

    let mut csv = String::from("epoch,train_loss,val_loss,lr\n");
    for row in &outcome.history {
        writeln!(
            csv,
            "{},{:.9e},{:.9e},{:.9e}",
            row.epoch, row.train_loss, row.val_loss, row.lr
        )
        .expect("string write");
    }
    std::fs::write(config.out_dir.join("history.csv"), csv)
        .map_err(|e| CliError::data(format!("history.csv: {e}")))?;
    Ok(())
}
