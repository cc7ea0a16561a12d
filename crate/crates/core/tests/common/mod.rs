#![allow(dead_code)]

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tpg_core::dispersion::CrystalDispersion;
use tpg_core::phase_matching::{linearize, ProcessSpec};
use tpg_core::tpg_model::{CouplingInputs, Regime};
use tpg_core::units::Quantity;

pub fn anchor() -> ProcessSpec {
    ProcessSpec::degenerate(
        Arc::new(CrystalDispersion::ktp()),
        Quantity::nanometers(532.0),
        Quantity::nanometers(1491.0),
        Quantity::degrees(90.0),
    )
    .unwrap()
}

/// Laboratory intensities (26 µJ pump, 21 µJ stimulation) at the given δ.
pub fn lab_inputs(delta: f64) -> CouplingInputs {
    CouplingInputs::from_si(anchor(), 1.54e14, 3.72e13, 7.8e-22, delta, 0.01).unwrap()
}

/// Seeded (ω, inputs) pairs spanning both coupling regimes: phases within
/// ±8π of the mismatch zero and stimulation intensities up to the point
/// where √C·L reaches about 15.
pub fn oracle_grid(n: usize, seed: u64) -> Vec<(f64, CouplingInputs)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base = lab_inputs(1.0);
    let b = linearize(base.anchor(), None, 201).unwrap();
    let zero = -b.a / b.b;
    (0..n)
        .map(|_| {
            let delta: f64 = rng.random_range(0.3..1.0);
            let phase: f64 =
                rng.random_range(-8.0 * std::f64::consts::PI..8.0 * std::f64::consts::PI);
            let omega = zero + phase / (delta * b.b * base.length());
            let log_i1: f64 = rng.random_range(12.0..18.5);
            let inp = base
                .clone()
                .with_delta(delta)
                .unwrap()
                .with_stim_intensity(10f64.powf(log_i1))
                .unwrap();
            (omega, inp)
        })
        .collect()
}

pub fn count_regime(points: &[(f64, CouplingInputs)], regime: Regime) -> usize {
    points
        .iter()
        .filter(|(w, inp)| {
            tpg_core::tpg_model::flux_density(Quantity::rad_per_second(*w), inp)
                .unwrap()
                .regime
                == regime
        })
        .count()
}
