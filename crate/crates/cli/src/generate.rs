use std::path::Path;

use tissuelight_core::dataset::{generate_dataset, DatasetPlan, SplitPlan};

use crate::config::RunConfig;
use crate::CliError;

fn plan(cfg: &RunConfig) -> Result<DatasetPlan, CliError> {
    let s = &cfg.generate;
    match (s.per_generator, s.generator) {
        (None, None) => Ok(DatasetPlan::reference()),
        (None, Some(_)) => Err(CliError::Config("--generator needs --per-generator".into())),
        (Some(n), None) => Ok(DatasetPlan::per_generator(n)),
        (Some(n), Some(g)) => Ok(DatasetPlan {
            splits: vec![SplitPlan {
                name: String::new(),
                counts: [(g, n)].into_iter().collect(),
            }],
        }),
    }
}

pub fn run(cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    let plan = plan(cfg)?;
    let total = plan.total();
    log::info!("generating {total} samples into {}", out.display());
    let mut done = 0usize;
    let mut rel_stderr = Vec::with_capacity(total);
    let manifest = generate_dataset(out, &cfg.generation(), &plan, cfg.seed, |entry, g| {
        done += 1;
        let e = g.sample.energy.values();
        let rms = (e.iter().map(|v| v * v).sum::<f64>() / e.len() as f64).sqrt();
        let rel = g.energy_stderr.map(|se| se / rms);
        if let Some(r) = rel {
            rel_stderr.push(r);
        }
        log::info!(
            "[{done}/{total}] {} seed={} escaped={:.4} rel_stderr={}",
            entry.path,
            entry.seed,
            g.escaped_fraction,
            rel.map_or("n/a".to_string(), |r| format!("{r:.3e}"))
        );
    })?;
    let mean_rel = if rel_stderr.is_empty() {
        f64::NAN
    } else {
        rel_stderr.iter().sum::<f64>() / rel_stderr.len() as f64
    };
    println!("samples: {}", manifest.sample_count);
    for (g, n) in &manifest.generator_counts {
        println!("  {g}: {n}");
    }
    println!("mean relative RMS standard error of E: {mean_rel:.3e}");
    Ok(())
}
