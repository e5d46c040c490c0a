//! Shared fixtures for the integration tests.
#![allow(dead_code)]

use advlim::{validate, End, PiecewiseProfile, Potential, ProblemSpec1D, RobinSide};
use rand::Rng;

pub fn random_side<R: Rng>(rng: &mut R, end: End) -> RobinSide {
    match rng.gen_range(0..3) {
        0 => RobinSide::dirichlet(end),
        1 => RobinSide::neumann(end),
        _ => RobinSide::new(end, rng.gen_range(0.2..2.0), rng.gen_range(-2.0..2.0)),
    }
}

/// Knots `0 = x₀ < … < x_k = 1` with gaps of at least 0.1.
pub fn random_knots<R: Rng>(rng: &mut R, pieces: usize) -> Vec<f64> {
    loop {
        let mut inner: Vec<f64> = (0..pieces - 1).map(|_| rng.gen_range(0.1..0.9)).collect();
        inner.sort_by(f64::total_cmp);
        let mut knots = vec![0.0];
        knots.extend(inner);
        knots.push(1.0);
        if knots.windows(2).all(|w| w[1] - w[0] >= 0.1) {
            return knots;
        }
    }
}

/// Piecewise-cubic `m` with 2 to 4 pieces, continuous piecewise-linear `V`
/// and random valid sides; resampled until it validates.
pub fn random_spec<R: Rng>(rng: &mut R) -> ProblemSpec1D {
    loop {
        let pieces = rng.gen_range(2..=4);
        let knots = random_knots(rng, pieces);
        let curvature: Vec<f64> = knots.iter().map(|_| rng.gen_range(-20.0..20.0)).collect();
        let Ok(m) = PiecewiseProfile::from_curvature(&knots, &curvature, 0.0, rng.gen_range(-3.0..3.0)) else {
            continue;
        };
        let vpieces = rng.gen_range(1..=4);
        let vk = random_knots(rng, vpieces);
        let vals: Vec<f64> = vk.iter().map(|_| rng.gen_range(-5.0..5.0)).collect();
        let Ok(v) = piecewise_linear(&vk, &vals) else {
            continue;
        };
        let spec = ProblemSpec1D::new(m, v, random_side(rng, End::Left), random_side(rng, End::Right));
        if validate(&spec).is_valid() {
            return spec;
        }
    }
}

pub fn piecewise_linear(knots: &[f64], values: &[f64]) -> advlim::Result<Potential> {
    let pieces = knots
        .windows(2)
        .zip(values.windows(2))
        .map(|(x, y)| advlim::Poly::new(vec![y[0], (y[1] - y[0]) / (x[1] - x[0])]))
        .collect();
    Potential::new(knots.to_vec(), pieces)
}

pub fn neumann_pair() -> (RobinSide, RobinSide) {
    (RobinSide::neumann(End::Left), RobinSide::neumann(End::Right))
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + b.abs())
}
