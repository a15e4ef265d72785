#![allow(dead_code)]

use nalgebra::Matrix5;
use nirgas::atomsys::{CMatrix5, DensityMatrix, SystemConfig};
use num_complex::Complex64 as C64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Positive trace-one matrix AA†/tr(AA†) from 50 real entries.
pub fn density_from_entries(v: &[f64]) -> DensityMatrix {
    let a = Matrix5::from_fn(|j, k| C64::new(v[2 * (5 * j + k)], v[2 * (5 * j + k) + 1]));
    let m: CMatrix5 = a * a.adjoint();
    let t = m.trace();
    let mut rho = DensityMatrix::from_matrix(m / t);
    rho.hermitize();
    rho
}

pub fn random_density(seed: u64) -> DensityMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v: Vec<f64> = (0..50).map(|_| rng.gen_range(-1.0..1.0)).collect();
    density_from_entries(&v)
}

pub fn density_strategy() -> impl Strategy<Value = DensityMatrix> {
    prop::collection::vec(-1.0f64..1.0, 50).prop_map(|v| density_from_entries(&v))
}

/// Configuration with every coupling, decay and probe switched off.
pub fn bare_config() -> SystemConfig {
    let mut cfg = SystemConfig::default();
    cfg.drives.omega31 = C64::new(0.0, 0.0);
    cfg.drives.omega42 = C64::new(0.0, 0.0);
    cfg.drives.effective_gap = -cfg.levels.gap;
    cfg.drives.delta31 = 0.0;
    cfg.decay.rates = [[0.0; 5]; 5];
    cfg.decay.collisional = 0.0;
    cfg.medium.density = 0.0;
    cfg.probe.w_b = 0.0;
    cfg
}

/// Driven 4-5 pair with Rabi frequency `omega`, detuning `delta`, decay
/// `gamma` from 5 to 4 and levels 1-3 fed into 4 so the steady state is
/// unique.
pub fn two_level_config(omega: f64, delta: f64, gamma: f64, dephasing: f64) -> SystemConfig {
    let mut cfg = bare_config();
    // A small gap keeps the explicit stepper's ceiling moderate.
    cfg.levels.gap = 1.0;
    cfg.drives.effective_gap = omega / 2.0 - cfg.levels.gap;
    cfg.drives.delta54 = delta;
    cfg.decay.rates[4][3] = gamma;
    for j in 0..3 {
        cfg.decay.rates[j][3] = 1.0;
    }
    cfg.decay.collisional = dephasing;
    cfg
}

pub fn max_abs(m: &CMatrix5) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}
