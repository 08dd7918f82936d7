use std::path::Path;

use tissuelight_core::dataset::{read_sample, write_fields, FieldBundle};
use tissuelight_core::phantom::{sample_inputs, transport_seed};
use tissuelight_core::{simulate_with_jvp, DirectionPair};

use crate::config::{DirectionSource, RunConfig};
use crate::CliError;

pub const OUTPUT_FILE: &str = "simulation.dlfd";

pub fn run(cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    let s = &cfg.simulate;
    let (optical, stored_direction) = match &s.phantom {
        Some(path) => {
            let sample = read_sample(path)?;
            (sample.optical, Some(sample.direction))
        }
        None => {
            let (phantom, direction) = sample_inputs(s.generator, &cfg.grid, &cfg.ranges, cfg.seed)?;
            (phantom.optical, Some(direction))
        }
    };
    let grid = *optical.grid();
    let direction = match s.direction {
        DirectionSource::Zero => DirectionPair::zeros(grid),
        DirectionSource::File if s.phantom.is_none() => {
            return Err(CliError::Config("--direction file needs --phantom".into()));
        }
        DirectionSource::File => stored_direction.expect("read from file"),
        DirectionSource::Sample if s.phantom.is_some() => {
            sample_inputs(s.generator, &grid, &cfg.ranges, cfg.seed)?.1
        }
        DirectionSource::Sample => stored_direction.expect("generated with the phantom"),
    };
    let sim = cfg.sim.with_seed(transport_seed(cfg.seed));
    log::info!(
        "simulating {} photons on {}x{} pixels",
        sim.photon_count,
        grid.nx,
        grid.nz
    );
    let result = simulate_with_jvp(&optical, &direction, &sim)?;

    let k = cfg.incident_energy;
    let scaled = |v: &[f64]| v.iter().map(|x| x * k).collect::<Vec<_>>();
    let mut bundle = FieldBundle::new(grid).with("E", scaled(result.energy.values()))?;
    if let Some(se) = &result.energy_stderr {
        bundle = bundle.with("E_stderr", scaled(se.values()))?;
    }
    bundle = bundle.with("dE", scaled(result.energy_jvp.as_ref().expect("requested").values()))?;
    if let Some(se) = &result.jvp_stderr {
        bundle = bundle.with("dE_stderr", scaled(se.values()))?;
    }
    let rms_stderr = result.rms_energy_stderr().map(|x| x * k);
    bundle.meta.insert("photon_count".into(), sim.photon_count.to_string());
    bundle.meta.insert("incident_energy".into(), k.to_string());
    bundle.meta.insert("escaped_fraction".into(), result.escaped_fraction.to_string());
    if let Some(se) = rms_stderr {
        bundle.meta.insert("rms_energy_stderr".into(), se.to_string());
    }
    write_fields(&out.join(OUTPUT_FILE), &bundle)?;

    println!("escaped_fraction: {}", result.escaped_fraction);
    println!("absorbed_fraction: {}", result.energy.sum());
    match rms_stderr {
        Some(se) => println!("rms_energy_stderr: {se}"),
        None => println!("rms_energy_stderr: undefined (needs at least two partitions)"),
    }
    println!("collisions_per_photon: {}", result.stats.collisions as f64 / sim.photon_count as f64);
    Ok(())
}
