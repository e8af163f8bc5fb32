//! Random instances for the benchmarks.

use bsls_core::Instance;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Uniform customers on a 1000 x 1000 square with the depot at the center.
pub fn random_instance(n: usize, capacity: u32, seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coords = vec![(500.0, 500.0)];
    let mut demands = vec![0];
    for _ in 0..n {
        coords.push((rng.gen_range(0..1000) as f64, rng.gen_range(0..1000) as f64));
        demands.push(rng.gen_range(1..=10));
    }
    Instance::from_coords(format!("rand-{n}-{seed}"), capacity, coords, demands).expect("valid instance")
}

/// A random visiting order of customers `1..=m`.
pub fn random_route(m: usize, seed: u64) -> Vec<usize> {
    use rand::seq::SliceRandom;
    let mut v: Vec<usize> = (1..=m).collect();
    v.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    v
}
