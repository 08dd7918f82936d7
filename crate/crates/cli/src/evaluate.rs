use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use tissuelight_core::dataset::{load_dataset, read_fields, ManifestEntry};
use tissuelight_core::scaling::report::{depth_table, gain_table, metric_table, GainRow, MetricRow};
use tissuelight_core::scaling::{
    depth_profile, median, normalized_errors, relative_gain, scaled_abs_error, sobolev_sample_loss, DepthComparison,
    DepthOptions, DepthProfile, LossConfig, NormalizedError, Prediction,
};
use tissuelight_core::{GeneratorId, ScalarField, SigmaParams, SobolevSample};

use crate::config::RunConfig;
use crate::CliError;

pub const PREDICTION_EXTENSION: &str = "dlfd";

fn load_predictions(dir: &Path, entries: &[&ManifestEntry]) -> Result<Vec<Prediction>, CliError> {
    entries
        .iter()
        .map(|e| {
            let path = dir.join(format!("{}.{PREDICTION_EXTENSION}", e.id()));
            if !path.is_file() {
                return Err(CliError::Io(format!(
                    "no prediction for sample '{}' (expected {})",
                    e.id(),
                    path.display()
                )));
            }
            Ok(read_fields(&path)?.to_prediction()?)
        })
        .collect()
}

fn profile(
    samples: &[&SobolevSample],
    predictions: &[Prediction],
    truth: impl Fn(&SobolevSample) -> &ScalarField,
    pred: impl Fn(&Prediction) -> &ScalarField,
    sigma: &SigmaParams,
) -> Result<DepthProfile, CliError> {
    let errors = samples
        .iter()
        .zip(predictions)
        .map(|(s, p)| scaled_abs_error(truth(s), pred(p), sigma))
        .collect::<Result<Vec<_>, _>>()?;
    let optical: Vec<_> = samples.iter().map(|s| &s.optical).collect();
    let refs: Vec<&ScalarField> = errors.iter().collect();
    Ok(depth_profile(&optical, &refs, &DepthOptions::default())?)
}

fn write(out: &Path, name: &str, text: &str) -> Result<PathBuf, CliError> {
    let path = out.join(name);
    std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
    Ok(path)
}

fn mean_loss(samples: &[&SobolevSample], predictions: &[Prediction], loss: &LossConfig) -> Result<f64, CliError> {
    let mut sum = 0.0;
    for (s, p) in samples.iter().zip(predictions) {
        sum += sobolev_sample_loss(s, &p.energy, &p.energy_jvp, loss)?.total;
    }
    Ok(sum / samples.len() as f64)
}

pub fn run(cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    let e = &cfg.evaluate;
    let need = |p: &Option<PathBuf>, flag: &str| {
        p.clone()
            .ok_or_else(|| CliError::Config(format!("evaluate needs --{flag}")))
    };
    let (dataset, baseline_dir, model_dir) = (need(&e.dataset, "dataset")?, need(&e.baseline, "baseline")?, need(&e.model, "model")?);
    let (manifest, all) = load_dataset(&dataset)?;
    let split = match &e.split {
        Some(s) => Some(s.as_str()),
        None if manifest.splits().contains(&"test") => Some("test"),
        None => None,
    };
    let selected: Vec<&(ManifestEntry, SobolevSample)> = all
        .iter()
        .filter(|(entry, _)| split.map_or(true, |s| entry.split == s))
        .collect();
    if selected.is_empty() {
        return Err(CliError::Config(format!("split '{}' has no samples", split.unwrap_or(""))));
    }
    let entries: Vec<&ManifestEntry> = selected.iter().map(|(e, _)| e).collect();
    let samples: Vec<&SobolevSample> = selected.iter().map(|(_, s)| s).collect();
    let owned: Vec<SobolevSample> = samples.iter().map(|s| (*s).clone()).collect();
    let baseline = load_predictions(&baseline_dir, &entries)?;
    let model = load_predictions(&model_dir, &entries)?;
    let d_base = normalized_errors(&owned, &baseline, &cfg.loss)?;
    let d_model = normalized_errors(&owned, &model, &cfg.loss)?;

    let rows = |d: &[NormalizedError]| -> Vec<MetricRow> {
        entries
            .iter()
            .zip(d)
            .map(|(e, d)| MetricRow {
                id: e.id().to_string(),
                generator_id: e.generator_id,
                d_energy: d.d_energy,
                d_grad: d.d_grad,
            })
            .collect()
    };
    write(out, "metrics_baseline.csv", &metric_table(&rows(&d_base)))?;
    write(out, "metrics_model.csv", &metric_table(&rows(&d_model)))?;

    let gains: Vec<GainRow> = entries
        .iter()
        .zip(d_base.iter().zip(&d_model))
        .map(|(e, (b, m))| GainRow {
            id: e.id().to_string(),
            generator_id: e.generator_id,
            gain_energy: relative_gain(b.d_energy, m.d_energy).ok(),
            gain_grad: relative_gain(b.d_grad, m.d_grad).ok(),
        })
        .collect();
    write(out, "gains.csv", &gain_table(&gains))?;

    let depth_e = DepthComparison::new(
        &profile(&samples, &baseline, |s| &s.energy, |p| &p.energy, &cfg.loss.sigma_energy)?,
        &profile(&samples, &model, |s| &s.energy, |p| &p.energy, &cfg.loss.sigma_energy)?,
    )?;
    let depth_g = DepthComparison::new(
        &profile(&samples, &baseline, |s| &s.energy_jvp, |p| &p.energy_jvp, &cfg.loss.sigma_grad)?,
        &profile(&samples, &model, |s| &s.energy_jvp, |p| &p.energy_jvp, &cfg.loss.sigma_grad)?,
    )?;
    write(out, "depth_E.csv", &depth_table(&depth_e))?;
    write(out, "depth_grad.csv", &depth_table(&depth_g))?;

    let mut summary = String::from("generator_id,samples,median_gain_E,median_gain_grad\n");
    let mut by_generator: BTreeMap<GeneratorId, Vec<&GainRow>> = BTreeMap::new();
    for g in &gains {
        by_generator.entry(g.generator_id).or_default().push(g);
    }
    let fmt = |v: Option<f64>| v.map_or("undefined".to_string(), |x| x.to_string());
    for (id, rows) in &by_generator {
        let ge: Vec<f64> = rows.iter().filter_map(|r| r.gain_energy).collect();
        let gg: Vec<f64> = rows.iter().filter_map(|r| r.gain_grad).collect();
        let _ = writeln!(summary, "{id},{},{},{}", rows.len(), fmt(median(&ge)), fmt(median(&gg)));
    }
    write(out, "summary.csv", &summary)?;
    print!("{summary}");
    println!(
        "mean loss (alpha={}): baseline {} model {}",
        cfg.loss.alpha,
        mean_loss(&samples, &baseline, &cfg.loss)?,
        mean_loss(&samples, &model, &cfg.loss)?
    );
    Ok(())
}
