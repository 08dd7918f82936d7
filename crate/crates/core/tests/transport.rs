use rand::{Rng, SeedableRng};
use tissuelight_core::phantom::generate_id_phantom;
use tissuelight_core::transport::{henyey_greenstein_cos_density, sample_henyey_greenstein};
use tissuelight_core::{
    simulate, simulate_with_jvp, DirectionPair, GridSpec, OpticalImage, SimConfig,
    SourceSpec, TissueRanges,
};

fn grid16() -> GridSpec {
    GridSpec::square(16, 0.05).unwrap()
}

fn id_phantom(seed: u64) -> OpticalImage {
    generate_id_phantom(&grid16(), &TissueRanges::default(), seed).unwrap().optical
}

/// Deterministic, sign-changing direction with no structure shared with the phantom.
fn wave_direction(grid: &GridSpec, k: f64) -> DirectionPair {
    let n = grid.len();
    let v_a = (0..n).map(|i| 0.3 * (k * i as f64).sin()).collect();
    let v_s = (0..n).map(|i| 2.0 * (0.5 * k * i as f64 + 1.0).cos()).collect();
    DirectionPair::new(*grid, v_a, v_s).unwrap()
}

#[test]
fn non_absorbing_medium_deposits_nothing() {
    let optical = OpticalImage::homogeneous(grid16(), 0.0, 10.0, 0.9).unwrap();
    let r = simulate(&optical, &SimConfig::default().with_photons(5_000)).unwrap();
    assert!(r.energy.values().iter().all(|&e| e == 0.0));
    assert_eq!(r.escaped_fraction, 1.0);
}

#[test]
fn transparent_medium_is_crossed_ballistically() {
    let optical = OpticalImage::homogeneous(grid16(), 0.0, 0.0, 0.0).unwrap();
    let r = simulate(&optical, &SimConfig::default().with_photons(1_000)).unwrap();
    assert_eq!(r.stats.collisions, 0);
    assert_eq!(r.escaped_fraction, 1.0);
}

#[test]
fn weight_is_conserved_without_roulette() {
    for seed in 0..3 {
        let optical = id_phantom(seed);
        let cfg = SimConfig::default().with_photons(20_000).with_seed(seed).without_roulette();
        let r = simulate(&optical, &cfg).unwrap();
        let total = r.energy.sum() + r.escaped_fraction;
        assert!((total - 1.0).abs() < 1e-6, "seed {seed}: deposited + escaped = {total}");
        assert_eq!(r.stats.roulette_terminated, 0);
    }
}

#[test]
fn capped_photons_are_booked_as_escaped() {
    let optical = OpticalImage::homogeneous(grid16(), 0.1, 20.0, 0.9).unwrap();
    let mut cfg = SimConfig::default().with_photons(2_000).without_roulette();
    cfg.max_events = 3;
    let r = simulate(&optical, &cfg).unwrap();
    assert!(r.stats.capped > 0);
    assert!((r.energy.sum() + r.escaped_fraction - 1.0).abs() < 1e-6);
}

#[test]
fn weight_is_conserved_in_expectation_with_roulette() {
    let optical = id_phantom(11);
    let totals: Vec<f64> = (0..20)
        .map(|seed| {
            let r = simulate(&optical, &SimConfig::default().with_photons(5_000).with_seed(seed)).unwrap();
            r.energy.sum() + r.escaped_fraction
        })
        .collect();
    let n = totals.len() as f64;
    let mean = totals.iter().sum::<f64>() / n;
    let sd = (totals.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    let se = sd / n.sqrt();
    assert!((mean - 1.0).abs() <= 3.0 * se.max(1e-12), "mean {mean}, se {se}");
}

#[test]
fn energy_is_nonnegative_and_jvp_takes_both_signs() {
    let optical = id_phantom(3);
    let dir = wave_direction(optical.grid(), 0.37);
    let r = simulate_with_jvp(&optical, &dir, &SimConfig::default().with_photons(20_000)).unwrap();
    assert!(r.energy.values().iter().all(|&e| e >= 0.0));
    let jvp = r.energy_jvp.unwrap();
    assert!(jvp.values().iter().any(|&d| d > 0.0));
    assert!(jvp.values().iter().any(|&d| d < 0.0));
}

#[test]
fn energy_matches_between_simulate_and_simulate_with_jvp() {
    let optical = id_phantom(5);
    let cfg = SimConfig::default().with_photons(10_000).with_seed(9);
    let plain = simulate(&optical, &cfg).unwrap();
    let with = simulate_with_jvp(&optical, &wave_direction(optical.grid(), 0.2), &cfg).unwrap();
    assert_eq!(plain.energy.values(), with.energy.values());
    assert_eq!(plain.escaped_fraction.to_bits(), with.escaped_fraction.to_bits());
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let optical = id_phantom(6);
    let dir = wave_direction(optical.grid(), 0.5);
    let cfg = SimConfig::default().with_photons(10_000).with_seed(4);
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| simulate_with_jvp(&optical, &dir, &cfg).unwrap())
    };
    let (a, b) = (run(1), run(4));
    assert_eq!(a.energy.values(), b.energy.values());
    assert_eq!(a.energy_jvp.unwrap().values(), b.energy_jvp.unwrap().values());
    assert_eq!(a.energy_stderr.unwrap().values(), b.energy_stderr.unwrap().values());
}

#[test]
fn seed_changes_the_estimate() {
    let optical = id_phantom(6);
    let a = simulate(&optical, &SimConfig::default().with_photons(2_000).with_seed(1)).unwrap();
    let b = simulate(&optical, &SimConfig::default().with_photons(2_000).with_seed(2)).unwrap();
    assert_ne!(a.energy.values(), b.energy.values());
}

#[test]
fn zero_direction_gives_exactly_zero_jvp() {
    let optical = id_phantom(7);
    let r = simulate_with_jvp(
        &optical,
        &DirectionPair::zeros(*optical.grid()),
        &SimConfig::default().with_photons(5_000),
    )
    .unwrap();
    assert!(r.energy_jvp.unwrap().values().iter().all(|&d| d == 0.0));
}

#[test]
fn jvp_is_linear_in_the_direction() {
    let optical = id_phantom(8);
    let v = wave_direction(optical.grid(), 0.41);
    let cfg = SimConfig::default().with_photons(10_000).with_seed(3);
    let base = simulate_with_jvp(&optical, &v, &cfg).unwrap().energy_jvp.unwrap();
    for factor in [2.0, -1.0, 0.5] {
        let scaled = simulate_with_jvp(&optical, &v.scaled(factor), &cfg).unwrap().energy_jvp.unwrap();
        for (s, b) in scaled.values().iter().zip(base.values()) {
            assert_eq!(*s, factor * b, "factor {factor}");
        }
    }
}

#[test]
fn jvp_is_additive_in_the_direction() {
    let optical = id_phantom(9);
    let v = wave_direction(optical.grid(), 0.41);
    let w = wave_direction(optical.grid(), 1.3);
    let cfg = SimConfig::default().with_photons(10_000).with_seed(5);
    let jvp = |d: &DirectionPair| simulate_with_jvp(&optical, d, &cfg).unwrap().energy_jvp.unwrap();
    let (dv, dw, dvw) = (jvp(&v), jvp(&w), jvp(&v.sum(&w).unwrap()));
    let scale = dv.max_abs().max(dw.max_abs());
    for ((a, b), c) in dv.values().iter().zip(dw.values()).zip(dvw.values()) {
        assert!((a + b - c).abs() <= 1e-10 * scale, "{a} + {b} vs {c}");
    }
}

/// Mean squared z-score of mirrored pixel pairs; about 1 for a symmetric field.
fn mirror_statistic(optical: &OpticalImage, photons: u64) -> f64 {
    let r = simulate(optical, &SimConfig::default().with_photons(photons)).unwrap();
    let (e, se) = (&r.energy, r.energy_stderr.as_ref().unwrap());
    let g = *optical.grid();
    let mut stats = Vec::new();
    for iz in 0..g.nz {
        for ix in 0..g.nx / 2 {
            let jx = g.nx - 1 - ix;
            let var = se.get(ix, iz).powi(2) + se.get(jx, iz).powi(2);
            if var > 0.0 {
                stats.push((e.get(ix, iz) - e.get(jx, iz)).powi(2) / var);
            }
        }
    }
    stats.iter().sum::<f64>() / stats.len() as f64
}

#[test]
fn centered_beam_on_symmetric_phantom_gives_symmetric_energy() {
    let g = grid16();
    // Laterally symmetric but depth-varying layers.
    let mu_a: Vec<f64> = (0..g.len()).map(|i| 0.2 + 0.3 * ((i / g.nx) % 3) as f64).collect();
    let mu_s: Vec<f64> = (0..g.len()).map(|i| 8.0 + (i / g.nx) as f64).collect();
    let sym = OpticalImage::new(g, mu_a.clone(), mu_s.clone(), vec![0.9; g.len()]).unwrap();
    let stat = mirror_statistic(&sym, 100_000);
    // Student-t with 15 degrees of freedom has variance 15/13.
    assert!(stat < 1.6, "symmetric phantom: mean z² = {stat}");

    // The statistic has power: a one-sided absorber breaks it.
    let mut lopsided = mu_a;
    for iz in 0..g.nz {
        for ix in 0..4 {
            lopsided[g.index(ix, iz)] = 5.0;
        }
    }
    let asym = OpticalImage::new(g, lopsided, mu_s, vec![0.9; g.len()]).unwrap();
    assert!(mirror_statistic(&asym, 100_000) > 5.0);
}

#[test]
fn pencil_beam_follows_beer_lambert() {
    let mu = 1.5;
    let g = GridSpec::new(5, 30, 0.1, 0.1, 1, 1.0).unwrap();
    let optical = OpticalImage::homogeneous(g, mu, 0.0, 0.0).unwrap();
    let mut cfg = SimConfig::default().with_photons(100_000);
    cfg.source = SourceSpec::pencil();
    let n = cfg.photon_count as f64;
    let r = simulate(&optical, &cfg).unwrap();
    for (iz, row) in r.energy.row_sums().iter().enumerate() {
        let (z0, z1) = (iz as f64 * g.dz, (iz + 1) as f64 * g.dz);
        let p = (-mu * z0).exp() - (-mu * z1).exp();
        let se = (p * (1.0 - p) / n).sqrt();
        assert!((row - p).abs() <= 3.0 * se, "row {iz}: {row} vs {p} ± {se}");
    }
}

#[test]
fn standard_error_shrinks_as_inverse_root_of_photon_count() {
    let optical = OpticalImage::homogeneous(grid16(), 0.5, 10.0, 0.9).unwrap();
    let rms = |photons| {
        simulate(&optical, &SimConfig::default().with_photons(photons).with_seed(2))
            .unwrap()
            .rms_energy_stderr()
            .unwrap()
    };
    let ratio = rms(20_000) / rms(320_000);
    assert!((ratio - 4.0).abs() <= 0.2 * 4.0, "16x photons shrank the error by {ratio}");
}

#[test]
fn henyey_greenstein_mean_cosine_matches_quadrature() {
    for g in [0.0, 0.3, 0.9] {
        // Midpoint quadrature of ∫ μ p(μ) dμ; the density is sharply peaked at g = 0.9.
        let steps = 2_000_000;
        let h = 2.0 / steps as f64;
        let (mut mass, mut first) = (0.0, 0.0);
        for k in 0..steps {
            let mu = -1.0 + (k as f64 + 0.5) * h;
            let p = henyey_greenstein_cos_density(g, mu);
            mass += p * h;
            first += mu * p * h;
        }
        assert!((mass - 1.0).abs() < 1e-6);
        assert!((first - g).abs() < 1e-6, "g = {g}: quadrature mean {first}");

        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let draws = 200_000;
        let samples: Vec<f64> = (0..draws)
            .map(|_| sample_henyey_greenstein(g, (rng.random(), rng.random())).cos_theta)
            .collect();
        let mean = samples.iter().sum::<f64>() / draws as f64;
        let var = samples.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (draws - 1) as f64;
        assert!((mean - first).abs() <= 3.0 * (var / draws as f64).sqrt(), "g = {g}: mean {mean}");
    }
}

#[test]
fn invalid_configurations_are_rejected() {
    let optical = id_phantom(1);
    assert!(simulate(&optical, &SimConfig::default().with_photons(0)).is_err());
    let mut cfg = SimConfig::default();
    cfg.roulette_threshold = 1.0;
    assert!(simulate(&optical, &cfg).is_err());
    let other = DirectionPair::zeros(GridSpec::square(8, 0.05).unwrap());
    assert!(simulate_with_jvp(&optical, &other, &SimConfig::default()).is_err());
}
