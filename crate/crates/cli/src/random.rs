//! Seeded random parameter tuples and profiles for property-style checks.

use std::f64::consts::PI;
use std::sync::Arc;

use loghardy_core::{Grid, ParamSet, Profile};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// An admissible tuple with `p` in `[1.5, 4]` and `alpha1 - p + 1` in `[0.5, 3]`.
pub fn random_params(rng: &mut StdRng) -> ParamSet {
    let p: f64 = rng.gen_range(1.5..4.0);
    let gap = rng.gen_range(0.5..3.0);
    let alpha1 = p - 1.0 + gap;
    let floor = (alpha1 - p).max(0.0);
    let alpha0 = floor + rng.gen_range(0.0..2.0);
    let theta = floor + rng.gen_range(0.1..4.0);
    ParamSet::new(p, alpha0, alpha1, theta).expect("sampled inside the admissible region")
}

/// A random combination of smooth shapes vanishing at `r = 1`, with
/// amplitudes spread over about three decades and mixed signs.
pub fn random_profile(rng: &mut StdRng, grid: &Arc<Grid>) -> Profile {
    let terms = rng.gen_range(1..=3);
    let mut shapes: Vec<Box<dyn Fn(f64) -> f64>> = Vec::with_capacity(terms);
    for _ in 0..terms {
        let c: f64 = rng.gen_range(-1.0..2.0);
        let shape: Box<dyn Fn(f64) -> f64> = match rng.gen_range(0..4) {
            0 => {
                let q = rng.gen_range(1.0..3.0);
                Box::new(move |r: f64| c * (1.0 - r).powf(q))
            }
            1 => {
                let q = rng.gen_range(0.5..3.0);
                Box::new(move |r: f64| c * (1.0 - r.powf(q)))
            }
            2 => {
                let eps = 10f64.powf(rng.gen_range(-3.0..-0.5));
                let k = rng.gen_range(0.25..1.0);
                let f = move |r: f64| (1.0 + (r / eps).powi(2)).powf(-k);
                let edge = f(1.0);
                Box::new(move |r: f64| c * (f(r) - edge))
            }
            _ => {
                let j = rng.gen_range(1..=5) as f64;
                Box::new(move |r: f64| c * ((j - 0.5) * PI * r).cos())
            }
        };
        shapes.push(shape);
    }
    let amp = 10f64.powf(rng.gen_range(-2.0..1.3));
    Profile::from_fn(grid.clone(), |r| {
        amp * shapes.iter().map(|f| f(r)).sum::<f64>()
    })
    .expect("grid-sized values")
    .with_zero_boundary()
}

pub fn random_profiles(seed: u64, count: usize, grid: &Arc<Grid>) -> Vec<Profile> {
    let mut rng = rng(seed);
    (0..count).map(|_| random_profile(&mut rng, grid)).collect()
}
