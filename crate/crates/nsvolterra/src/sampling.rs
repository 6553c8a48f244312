//! Seeded random inputs for the verification harnesses and tests.
//!
//! All generators take an explicit seed and use a counter-based ChaCha
//! stream, so every harness run is reproducible from the seed recorded
//! in its report.

use crate::fields::{DomainSpec, SpaceTimeField, SpectralField, SpectralVectorField, TimeGrid, TimeSeries};
use crate::projection::leray_project;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Smooth random real scalar field: independent coefficients on a
/// conjugate-symmetric half-space with a Gaussian spectral envelope, so
/// realizations are well resolved at the cutoff.
pub fn random_field(domain: DomainSpec, seed: u64) -> SpectralField {
    let mut rng = rng_for(seed);
    let n = domain.cutoff() as i64;
    let width = (domain.cutoff() as f64 / 2.0).max(1.0);
    let mut f = SpectralField::zero(domain);
    for k1 in 0..=n {
        for k2 in -n..=n {
            for k3 in -n..=n {
                if k1 == 0 && (k2 < 0 || (k2 == 0 && k3 < 0)) {
                    continue;
                }
                let ksq = (k1 * k1 + k2 * k2 + k3 * k3) as f64;
                let env = (-0.5 * ksq / (width * width)).exp();
                let c = Complex64::new(
                    env * rng.gen_range(-1.0..1.0),
                    env * rng.gen_range(-1.0..1.0),
                );
                f.add_real_mode([k1, k2, k3], c);
            }
        }
    }
    f
}

pub fn random_vector_field(domain: DomainSpec, seed: u64) -> SpectralVectorField {
    SpectralVectorField::new([
        random_field(domain, seed.wrapping_mul(3).wrapping_add(101)),
        random_field(domain, seed.wrapping_mul(3).wrapping_add(102)),
        random_field(domain, seed.wrapping_mul(3).wrapping_add(103)),
    ])
}

/// Random divergence-free vector field (Leray projection of a random
/// field).
pub fn random_divfree_field(domain: DomainSpec, seed: u64) -> SpectralVectorField {
    leray_project(&random_vector_field(domain, seed))
}

/// Random space-time field that is smooth in time: a small sum of
/// random spatial fields modulated by low-frequency trigonometric
/// envelopes.
pub fn random_space_time_field(
    domain: DomainSpec,
    grid: TimeGrid,
    seed: u64,
) -> SpaceTimeField {
    let mut rng = rng_for(seed.wrapping_add(0x5eed));
    let terms: Vec<(SpectralVectorField, f64, f64)> = (0..3)
        .map(|j| {
            let a = random_vector_field(domain, seed.wrapping_mul(7).wrapping_add(j));
            let omega = rng.gen_range(0.5..3.0) * std::f64::consts::PI / grid.horizon();
            let phase = rng.gen_range(0.0..std::f64::consts::TAU);
            (a, omega, phase)
        })
        .collect();
    SpaceTimeField::from_fn(domain, grid, |_, t| {
        let mut s = SpectralVectorField::zero(domain);
        for (a, omega, phase) in &terms {
            s = s.add(&a.scaled((omega * t + phase).cos()));
        }
        s
    })
}

/// Smooth random scalar time series (low-order trigonometric sum).
pub fn random_series(grid: TimeGrid, seed: u64) -> TimeSeries {
    let mut rng = rng_for(seed.wrapping_add(0x7137));
    let terms: Vec<(f64, f64, f64)> = (1..=4)
        .map(|j| {
            (
                rng.gen_range(-1.0..1.0) / j as f64,
                j as f64 * std::f64::consts::PI / grid.horizon(),
                rng.gen_range(0.0..std::f64::consts::TAU),
            )
        })
        .collect();
    TimeSeries::from_fn(grid, |t| {
        terms
            .iter()
            .map(|(a, omega, phase)| a * (omega * t + phase).cos())
            .sum()
    })
}
