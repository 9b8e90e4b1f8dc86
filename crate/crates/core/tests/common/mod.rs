#![allow(dead_code)]

use akns_lab::spectral::{Bump, Field, Grid, Sign};
use akns_lab::C64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn grid(length: f64, points: usize) -> Grid {
    Grid::new(length, points).unwrap()
}

pub fn gaussian(grid: &Grid, a: f64) -> Field {
    Field::from_fn(grid.clone(), Sign::Defocusing, |x| C64::new(a * (-x * x).exp(), 0.0))
}

pub fn constant(grid: &Grid, a: C64, sign: Sign) -> Field {
    Field::from_fn(grid.clone(), sign, |_| a)
}

pub fn mode(grid: &Grid, a: C64, xi0: f64, sign: Sign) -> Field {
    Field::from_fn(grid.clone(), sign, |x| a * C64::from_polar(1.0, xi0 * x))
}

/// Sums of one to three modulated Gaussians with `||q||_{H^{-1/4}}` in `[0.05, max_norm]`.
pub fn random_fields(grid: &Grid, sign: Sign, count: usize, max_norm: f64, seed: u64) -> Vec<Field> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let bumps: Vec<Bump> = (0..rng.gen_range(1..=3))
                .map(|_| Bump {
                    center: rng.gen_range(-3.0..3.0),
                    width: rng.gen_range(0.7..1.5),
                    amplitude: C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                    frequency: rng.gen_range(-1.0..1.0),
                })
                .collect();
            let target = rng.gen_range(0.05..max_norm);
            Field::from_bumps(grid.clone(), sign, &bumps).normalized(-0.25, 1.0, target).unwrap()
        })
        .collect()
}

pub fn bump_strategy() -> impl Strategy<Value = Bump> {
    (-3.0..3.0f64, 0.7..1.5f64, 0.2..1.0f64, -3.2..3.2f64, -1.0..1.0f64).prop_map(|(c, w, m, phase, f)| Bump {
        center: c,
        width: w,
        amplitude: C64::from_polar(m, phase),
        frequency: f,
    })
}

/// Small Schwartz fields on `grid` with `||q||_{H^{-1/4}} = norm`.
pub fn field_strategy(grid: Grid, max_norm: f64) -> impl Strategy<Value = Field> {
    (prop::collection::vec(bump_strategy(), 1..=3), 0.02..max_norm, prop::bool::ANY).prop_map(move |(bumps, norm, focusing)| {
        let sign = if focusing { Sign::Focusing } else { Sign::Defocusing };
        Field::from_bumps(grid.clone(), sign, &bumps).normalized(-0.25, 1.0, norm).unwrap()
    })
}

pub fn diff(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn l2(grid: &Grid, v: &[C64]) -> f64 {
    grid.l2_norm(v)
}
