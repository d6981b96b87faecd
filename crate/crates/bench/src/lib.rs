//! Seeded fixtures shared by the benchmarks.

use drsub::harness::SyntheticRatings;
use drsub::objectives::{coverage_from_sets, facility_location, Average, Coverage, UserFacility};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Random coverage family: `n` sets over a universe of `universe` elements, each of size `set_size`.
pub fn random_coverage(n: usize, universe: usize, set_size: usize, seed: u64) -> Coverage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sets = (0..n).map(|_| (0..set_size).map(|_| rng.gen_range(0..universe)).collect()).collect();
    coverage_from_sets(sets, universe).expect("elements are in range")
}

pub fn synthetic_facility(users: usize, items: usize, seed: u64) -> Average<UserFacility> {
    let params = SyntheticRatings { users, items, ..Default::default() };
    facility_location(&params.generate(seed).expect("valid parameters"))
}

/// Point in `[0,1]^n` with i.i.d. uniform coordinates.
pub fn random_point(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.gen()).collect()
}
