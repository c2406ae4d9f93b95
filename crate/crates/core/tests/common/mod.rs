#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use varest::{Population, PopulationMoments, ThetaMode};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Positive, skewed `y` with `x` built from the same latent normal, so that
/// `rho` controls the dependence on the log scale.
pub fn lognormal_population<R: Rng>(rng: &mut R, size: usize, rho: f64, sigma: f64) -> Population {
    let z = Normal::new(0.0, 1.0).unwrap();
    let mut y = Vec::with_capacity(size);
    let mut x = Vec::with_capacity(size);
    for _ in 0..size {
        let (z1, z2): (f64, f64) = (z.sample(rng), z.sample(rng));
        let zx = rho * z1 + (1.0 - rho * rho).sqrt() * z2;
        y.push(10.0 * (sigma * z1).exp());
        x.push(20.0 * (sigma * zx).exp());
    }
    Population::new(y, x).unwrap()
}

pub fn random_population<R: Rng>(rng: &mut R, size: usize) -> Population {
    let rho = rng.random_range(0.3..0.95);
    let sigma = rng.random_range(0.2..1.0);
    lognormal_population(rng, size, rho, sigma)
}

/// Moments with valid kurtosis and cross-kurtosis values: `lambda22_star`
/// stays inside the Cauchy-Schwarz bound.
pub fn random_moments<R: Rng>(rng: &mut R) -> PopulationMoments {
    let n = rng.random_range(5..60);
    let s2_y = 10f64.powf(rng.random_range(-1.0..4.0));
    let s2_x = 10f64.powf(rng.random_range(-1.0..6.0));
    let by: f64 = rng.random_range(0.2..20.0);
    let bx = rng.random_range(0.2..20.0);
    let bound = (by * bx).sqrt();
    let l22_star = rng.random_range(-0.95..0.95) * bound;
    let mut pm = PopulationMoments::from_parts(
        None,
        n,
        ThetaMode::NoFpc,
        s2_y,
        s2_x,
        by + 1.0,
        bx + 1.0,
        l22_star + 1.0,
    )
    .unwrap();
    pm.cv_x = Some(rng.random_range(0.1..2.5));
    pm
}

pub fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}
