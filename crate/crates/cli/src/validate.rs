use std::fmt::Write as _;
use std::path::Path;

use tissuelight_core::phantom::{sample_inputs, transport_seed};
use tissuelight_core::transport::{coefficient_relative_direction, masked_relative_l2};
use tissuelight_core::{finite_difference_jvp, simulate_with_jvp, DirectionPair};

use crate::config::{DirectionSource, RunConfig};
use crate::CliError;

pub const REPORT_FILE: &str = "jvp_report.csv";

pub fn run(cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    let v = &cfg.validate_jvp;
    let (phantom, raw) = sample_inputs(v.generator, &v.grid, &cfg.ranges, cfg.seed)?;
    let optical = phantom.optical;
    let direction = match v.direction {
        DirectionSource::Zero => DirectionPair::zeros(v.grid),
        DirectionSource::Sample => coefficient_relative_direction(&optical, &raw)?,
        DirectionSource::File => {
            return Err(CliError::Config("validate-jvp draws its own phantom; use sample or zero".into()));
        }
    };
    if !(v.epsilon > 0.0 && v.epsilon < 1.0) {
        return Err(CliError::Config(format!(
            "epsilon {} would drive coefficients negative; the relative step must lie in (0, 1)",
            v.epsilon
        )));
    }
    let sim = cfg
        .sim
        .with_photons(v.photons)
        .with_seed(transport_seed(cfg.seed));
    log::info!("derivative run, {} photons", sim.photon_count);
    let jvp = simulate_with_jvp(&optical, &direction, &sim)?
        .energy_jvp
        .expect("requested");

    let mut report = String::from("epsilon,rel_l2\n");
    let mut errors = Vec::new();
    for eps in [v.epsilon, 0.5 * v.epsilon] {
        log::info!("finite differences at epsilon {eps}");
        let fd = finite_difference_jvp(&optical, &direction, &sim, eps)?;
        let err = masked_relative_l2(&jvp, &fd, v.significance)?;
        let _ = writeln!(report, "{eps},{err}");
        errors.push(err);
    }
    let passed = errors[0] <= v.tolerance;
    let verdict = if passed { "PASS" } else { "FAIL" };
    let _ = writeln!(report, "# {verdict}: rel_l2 {} at epsilon {} (tolerance {})", errors[0], v.epsilon, v.tolerance);
    let path = out.join(REPORT_FILE);
    std::fs::write(&path, &report).map_err(|e| CliError::io(&path, e))?;
    print!("{report}");
    if passed {
        Ok(())
    } else {
        Err(CliError::Validation(format!(
            "relative L2 {} exceeds tolerance {}",
            errors[0], v.tolerance
        )))
    }
}
