//! `bicilab report` — aggregates metric CSVs into an azimuth-keyed
//! summary CSV plus per-metric plot data.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use bicilab::metrics::{summarize, write_summary_tsv};

use crate::config::ExperimentConfig;
use crate::errors::CliError;

#[derive(Debug)]
struct ParsedRow {
    variant: String,
    azimuth_deg: f64,
    snri_db: f64,
    lcc_mean: Option<f64>,
    eic_mean: Option<f64>,
}

fn parse_metric_csv(path: &Path) -> Result<Vec<ParsedRow>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| CliError::data(format!("{}: empty file", path.display())))?;
    let columns: Vec<&str> = header.split(',').collect();
    let col = |name: &str| -> Result<usize, CliError> {
        columns.iter().position(|c| *c == name).ok_or_else(|| {
            CliError::data(format!("{}: missing column '{name}'", path.display()))
        })
    };
    let (c_variant, c_azimuth, c_snri, c_lcc, c_eic) = (
        col("variant")?,
        col("azimuth_deg")?,
        col("snri_db")?,
        col("lcc_mean")?,
        col("eic_mean")?,
    );

    let parse_opt = |field: &str| -> Option<f64> {
        if field == "undefined" {
            None
        } else {
            field.parse().ok()
        }
    };
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != columns.len() {
            return Err(CliError::data(format!(
                "{}: row {} has {} fields, header has {}",
                path.display(),
                i + 2,
                fields.len(),
                columns.len()
            )));
        }
        rows.push(ParsedRow {
            variant: fields[c_variant].to_string(),
            azimuth_deg: fields[c_azimuth].parse().map_err(|e| {
                CliError::data(format!("{}: row {}: azimuth: {e}", path.display(), i + 2))
            })?,
            snri_db: fields[c_snri].parse().map_err(|e| {
                CliError::data(format!("{}: row {}: snri: {e}", path.display(), i + 2))
            })?,
            lcc_mean: parse_opt(fields[c_lcc]),
            eic_mean: parse_opt(fields[c_eic]),
        });
    }
    Ok(rows)
}

pub fn run(config: &ExperimentConfig, inputs: &[PathBuf]) -> Result<(), CliError> {
    if inputs.is_empty() {
        return Err(CliError::usage("report needs at least one metrics CSV"));
    }
    let mut rows = Vec::new();
    for path in inputs {
        rows.extend(parse_metric_csv(path)?);
    }

    // Group by (variant, azimuth); aggregate each metric.
    let mut groups: BTreeMap<(String, i64), (f64, Vec<f64>, Vec<f64>, Vec<f64>)> =
        BTreeMap::new();
    for row in &rows {
        let key = (row.variant.clone(), (row.azimuth_deg * 1000.0).round() as i64);
        let entry = groups
            .entry(key)
            .or_insert((row.azimuth_deg, Vec::new(), Vec::new(), Vec::new()));
        entry.1.push(row.snri_db);
        if let Some(v) = row.lcc_mean {
            entry.2.push(v);
        }
        if let Some(v) = row.eic_mean {
            entry.3.push(v);
        }
    }

    std::fs::create_dir_all(&config.out_dir)
        .map_err(|e| CliError::data(format!("{}: {e}", config.out_dir.display())))?;
    let mut summary =
        String::from("variant,azimuth_deg,snri_mean_db,lcc_mean,eic_mean,rows\n");
    let mean = |v: &[f64]| -> Option<f64> {
        if v.is_empty() {
            None
        } else {
            Some(v.iter().sum::<f64>() / v.len() as f64)
        }
    };
    let fmt_opt = |v: Option<f64>| -> String {
        v.map_or_else(|| "undefined".to_string(), |x| format!("{x:.9e}"))
    };
    for ((variant, _), (azimuth, snris, lccs, eics)) in &groups {
        writeln!(
            summary,
            "{variant},{azimuth:.9e},{},{},{},{}",
            fmt_opt(mean(snris)),
            fmt_opt(mean(lccs)),
            fmt_opt(mean(eics)),
            snris.len()
        )
        .expect("string write");
    }
    let summary_path = config.out_dir.join("summary_by_azimuth.csv");
    std::fs::write(&summary_path, summary)
        .map_err(|e| CliError::data(format!("{}: {e}", summary_path.display())))?;

    // Plot data per variant over azimuth.
    let variants: std::collections::BTreeSet<String> =
        rows.iter().map(|r| r.variant.clone()).collect();
    for variant in &variants {
        let collect = |value: fn(&ParsedRow) -> Option<f64>| -> Vec<(f64, Vec<f64>)> {
            let mut m: BTreeMap<i64, (f64, Vec<f64>)> = BTreeMap::new();
            for row in rows.iter().filter(|r| &r.variant == variant) {
                if let Some(v) = value(row) {
                    m.entry((row.azimuth_deg * 1000.0).round() as i64)
                        .or_insert((row.azimuth_deg, Vec::new()))
                        .1
                        .push(v);
                }
            }
            m.into_values().collect()
        };
        write_summary_tsv(
            config.out_dir.join(format!("report_snri_{variant}.tsv")),
            &summarize(&collect(|r| Some(r.snri_db))),
        )?;
        write_summary_tsv(
            config.out_dir.join(format!("report_lcc_{variant}.tsv")),
            &summarize(&collect(|r| r.lcc_mean)),
        )?;
        write_summary_tsv(
            config.out_dir.join(format!("report_eic_{variant}.tsv")),
            &summarize(&collect(|r| r.eic_mean)),
        )?;
    }
    println!(
        "aggregated {} rows into {} and per-variant TSVs",
        rows.len(),
        summary_path.display()
    );
    Ok(())
}
