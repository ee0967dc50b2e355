//! `bicilab encode <in.wav> <out.egf>`

use std::path::Path;

use bicilab::ace::{ace_encode, write_egf, Side};
use bicilab::dsp::{resample, wav::read_wav, CANONICAL_RATE};

use crate::config::ExperimentConfig;
use crate::errors::CliError;

pub fn run(config: &ExperimentConfig, input: &Path, output: &Path) -> Result<(), CliError> {
    let map = config.patient_map()?;
    let lgf = config.lgf_params()?;

    let buf = read_wav(input)
        .map_err(|e| CliError::data(format!("{}: {e}", input.display())))?;
    let mono = buf.to_mono();
    let mono = resample(&mono, CANONICAL_RATE)?;

    let out = ace_encode(&mono, &map, &lgf, Side::Mono)?;
    if let Some(parent) = output.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)
            .map_err(|e| CliError::data(format!("{}: {e}", parent.display())))?;
    }
    write_egf(output, &out.electrodogram)
        .map_err(|e| CliError::data(format!("{}: {e}", output.display())))?;

    // Histogram over the number of stimulated channels per frame.
    let mut histogram = vec![0usize; map.n_select + 1];
    for frame in &out.current_frames {
        histogram[frame.active_set.len()] += 1;
    }
    let cells: Vec<String> = histogram
        .iter()
        .enumerate()
        .filter(|(_, &count)| count > 0)
        .map(|(n, count)| format!("{n}:{count}"))
        .collect();
    println!(
        "encoded {} -> {}: frames={} csr={} active-channel histogram [{}]",
        input.display(),
        output.display(),
        out.electrodogram.frames(),
        out.electrodogram.csr(),
        cells.join(" ")
    );
    Ok(())
}
