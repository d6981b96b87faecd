//! Random instance generators shared by the integration suites.
#![allow(dead_code)]

use drsub::objectives::{
    concave_over_modular, coverage_from_sets, facility_location, Coverage, Modular, RatingsMatrix, SetFunction,
};
use rand::Rng;

pub type DynSet = Box<dyn SetFunction>;

pub fn random_coverage(rng: &mut impl Rng, n: usize, universe: usize) -> Coverage {
    let sets = (0..n)
        .map(|_| {
            let size = rng.gen_range(1..=universe.min(5));
            (0..size).map(|_| rng.gen_range(0..universe)).collect()
        })
        .collect();
    coverage_from_sets(sets, universe).unwrap()
}

/// Sparse ratings with at least one rating per user.
pub fn random_ratings(rng: &mut impl Rng, users: usize, items: usize, density: f64) -> RatingsMatrix {
    let mut entries = Vec::new();
    for u in 0..users {
        entries.push((u, rng.gen_range(0..items), rng.gen_range(1..=5) as f64));
        for i in 0..items {
            if rng.gen::<f64>() < density {
                entries.push((u, i, rng.gen_range(1..=5) as f64));
            }
        }
    }
    RatingsMatrix::new(users, items, entries).unwrap()
}

pub const KINDS: [&str; 4] = ["coverage", "facility", "concave", "modular"];

/// One of [`KINDS`], chosen uniformly.
pub fn random_submodular(rng: &mut impl Rng, n: usize) -> (String, DynSet) {
    let kind = rng.gen_range(0..KINDS.len());
    random_of_kind(rng, kind, n)
}

pub fn random_of_kind(rng: &mut impl Rng, kind: usize, n: usize) -> (String, DynSet) {
    match kind {
        0 => {
            let universe = rng.gen_range(n.max(2)..=2 * n + 2);
            ("coverage".into(), Box::new(random_coverage(rng, n, universe)))
        }
        1 => {
            let users = rng.gen_range(2..=8);
            ("facility".into(), Box::new(facility_location(&random_ratings(rng, users, n, 0.4))))
        }
        2 => {
            let users = rng.gen_range(2..=6);
            let power = rng.gen_range(0.2..=1.0);
            ("concave".into(), Box::new(concave_over_modular(&random_ratings(rng, users, n, 0.4), power).unwrap()))
        }
        _ => {
            let w = (0..n).map(|_| rng.gen_range(0.0..3.0)).collect();
            ("modular".into(), Box::new(Modular::new(w).unwrap()))
        }
    }
}

pub fn random_point(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen()).collect()
}

/// Comparable pair `x <= y` in the unit box.
pub fn random_pair(rng: &mut impl Rng, n: usize) -> (Vec<f64>, Vec<f64>) {
    let x = random_point(rng, n);
    let y = x.iter().map(|&xi| xi + (1.0 - xi) * rng.gen::<f64>()).collect();
    (x, y)
}
