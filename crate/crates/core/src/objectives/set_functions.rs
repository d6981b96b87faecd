use std::sync::Arc;

use super::{RatingsMatrix, Subset};
use crate::{Error, Result};

/// Oracle for a non-negative set function `f: 2^V -> R+` over `V = {0, .., n-1}`.
pub trait SetFunction: Send + Sync {
    fn ground_size(&self) -> usize;

    fn eval(&self, set: &Subset) -> f64;

    /// Writes `f(S ∪ {i}) - f(S \ {i})` for every `i` into `out`.
    ///
    /// The default costs `n + 1` evaluations; implementors with cheap incremental
    /// structure override it.
    fn marginals(&self, set: &Subset, out: &mut [f64]) {
        let base = self.eval(set);
        let mut scratch = set.clone();
        for (i, o) in out.iter_mut().enumerate() {
            if set.contains(i) {
                scratch.remove(i);
                *o = base - self.eval(&scratch);
                scratch.insert(i);
            } else {
                scratch.insert(i);
                *o = self.eval(&scratch) - base;
                scratch.remove(i);
            }
        }
    }

    /// Closed-form multilinear extension, when the function admits one.
    fn multilinear_value(&self, _x: &[f64]) -> Option<f64> {
        None
    }
}

impl<T: SetFunction + ?Sized> SetFunction for &T {
    fn ground_size(&self) -> usize {
        (**self).ground_size()
    }
    fn eval(&self, set: &Subset) -> f64 {
        (**self).eval(set)
    }
    fn marginals(&self, set: &Subset, out: &mut [f64]) {
        (**self).marginals(set, out)
    }
    fn multilinear_value(&self, x: &[f64]) -> Option<f64> {
        (**self).multilinear_value(x)
    }
}

impl<T: SetFunction + ?Sized> SetFunction for Arc<T> {
    fn ground_size(&self) -> usize {
        (**self).ground_size()
    }
    fn eval(&self, set: &Subset) -> f64 {
        (**self).eval(set)
    }
    fn marginals(&self, set: &Subset, out: &mut [f64]) {
        (**self).marginals(set, out)
    }
    fn multilinear_value(&self, x: &[f64]) -> Option<f64> {
        (**self).multilinear_value(x)
    }
}

impl<T: SetFunction + ?Sized> SetFunction for Box<T> {
    fn ground_size(&self) -> usize {
        (**self).ground_size()
    }
    fn eval(&self, set: &Subset) -> f64 {
        (**self).eval(set)
    }
    fn marginals(&self, set: &Subset, out: &mut [f64]) {
        (**self).marginals(set, out)
    }
    fn multilinear_value(&self, x: &[f64]) -> Option<f64> {
        (**self).multilinear_value(x)
    }
}

/// `f(S) = Σ_{i∈S} w_i` with non-negative weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Modular {
    weights: Vec<f64>,
}

impl Modular {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::input("modular function needs at least one weight"));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::input("modular weights must be finite and non-negative"));
        }
        Ok(Modular { weights })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

impl SetFunction for Modular {
    fn ground_size(&self) -> usize {
        self.weights.len()
    }

    fn eval(&self, set: &Subset) -> f64 {
        set.iter().map(|i| self.weights[i]).sum()
    }

    fn marginals(&self, _set: &Subset, out: &mut [f64]) {
        out.copy_from_slice(&self.weights);
    }

    fn multilinear_value(&self, x: &[f64]) -> Option<f64> {
        Some(self.weights.iter().zip(x).map(|(w, xi)| w * xi).sum())
    }
}

/// Weighted coverage `f(A) = |∪_{i∈A} S_i|`.
#[derive(Debug, Clone)]
pub struct Coverage {
    universe: usize,
    sets: Vec<Vec<usize>>,
    /// For each universe element, the sets covering it.
    covered_by: Vec<Vec<usize>>,
}

/// Builds `f(A) = |∪_{i∈A} S_i|` over 0-based universe elements `{0, .., universe-1}`.
pub fn coverage_from_sets(subsets: Vec<Vec<usize>>, universe_size: usize) -> Result<Coverage> {
    if subsets.is_empty() {
        return Err(Error::input("coverage function needs at least one subset"));
    }
    let mut covered_by = vec![Vec::new(); universe_size];
    let mut sets = Vec::with_capacity(subsets.len());
    for (i, mut s) in subsets.into_iter().enumerate() {
        s.sort_unstable();
        s.dedup();
        if let Some(&e) = s.iter().find(|&&e| e >= universe_size) {
            return Err(Error::input(format!(
                "subset {i} contains element {e} outside universe of size {universe_size}"
            )));
        }
        for &e in &s {
            covered_by[e].push(i);
        }
        sets.push(s);
    }
    Ok(Coverage { universe: universe_size, sets, covered_by })
}

impl Coverage {
    pub fn universe_size(&self) -> usize {
        self.universe
    }

    pub fn sets(&self) -> &[Vec<usize>] {
        &self.sets
    }

    fn cover_counts(&self, set: &Subset) -> Vec<u32> {
        let mut counts = vec![0u32; self.universe];
        for i in set.iter() {
            for &e in &self.sets[i] {
                counts[e] += 1;
            }
        }
        counts
    }
}

impl SetFunction for Coverage {
    fn ground_size(&self) -> usize {
        self.sets.len()
    }

    fn eval(&self, set: &Subset) -> f64 {
        let mut seen = vec![false; self.universe];
        let mut count = 0usize;
        for i in set.iter() {
            for &e in &self.sets[i] {
                if !seen[e] {
                    seen[e] = true;
                    count += 1;
                }
            }
        }
        count as f64
    }

    fn marginals(&self, set: &Subset, out: &mut [f64]) {
        let counts = self.cover_counts(set);
        for (i, o) in out.iter_mut().enumerate() {
            // inside S an element is lost only if i is its sole cover
            let target = if set.contains(i) { 1 } else { 0 };
            *o = self.sets[i].iter().filter(|&&e| counts[e] == target).count() as f64;
        }
    }

    fn multilinear_value(&self, x: &[f64]) -> Option<f64> {
        Some(self.covered_by.iter().map(|cov| 1.0 - cov.iter().map(|&i| 1.0 - x[i]).product::<f64>()).sum())
    }
}

/// One user's facility-location utility `max_{j∈S} r_j` (0 on the empty set).
#[derive(Debug, Clone)]
pub struct UserFacility {
    n: usize,
    /// Rated items by decreasing rating, ties by item index.
    sorted: Vec<(usize, f64)>,
}

impl UserFacility {
    pub fn new(n_items: usize, row: &[(usize, f64)]) -> Self {
        let mut sorted: Vec<(usize, f64)> = row.iter().copied().filter(|&(_, r)| r > 0.0).collect();
        sorted.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        UserFacility { n: n_items, sorted }
    }
}

impl SetFunction for UserFacility {
    fn ground_size(&self) -> usize {
        self.n
    }

    fn eval(&self, set: &Subset) -> f64 {
        self.sorted.iter().find(|(j, _)| set.contains(*j)).map_or(0.0, |&(_, r)| r)
    }

    fn marginals(&self, set: &Subset, out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        let mut chosen = self.sorted.iter().filter(|(j, _)| set.contains(*j));
        let best = chosen.next().copied();
        let second = chosen.next().map_or(0.0, |&(_, r)| r);
        let best_r = best.map_or(0.0, |b| b.1);
        for &(j, r) in &self.sorted {
            if !set.contains(j) {
                out[j] = (r - best_r).max(0.0);
            }
        }
        if let Some((j, r)) = best {
            out[j] = r - second;
        }
    }

    fn multilinear_value(&self, x: &[f64]) -> Option<f64> {
        // P(max = r_k) = x_k Π_{l<k} (1 - x_l) over the sorted row
        let mut none_yet = 1.0;
        let mut v = 0.0;
        for &(j, r) in &self.sorted {
            v += r * x[j] * none_yet;
            none_yet *= 1.0 - x[j];
        }
        Some(v)
    }
}

/// One user's concave-over-modular utility `(Σ_{j∈S} r_j)^p`.
#[derive(Debug, Clone)]
pub struct UserConcave {
    n: usize,
    row: Vec<(usize, f64)>,
    power: f64,
}

impl UserConcave {
    pub fn new(n_items: usize, row: &[(usize, f64)], power: f64) -> Result<Self> {
        check_power(power)?;
        let row = row.iter().copied().filter(|&(_, r)| r > 0.0).collect();
        Ok(UserConcave { n: n_items, row, power })
    }

    fn mass(&self, set: &Subset) -> f64 {
        self.row.iter().filter(|(j, _)| set.contains(*j)).map(|&(_, r)| r).sum()
    }
}

fn check_power(power: f64) -> Result<()> {
    if !(power > 0.0 && power <= 1.0) {
        return Err(Error::input(format!("concave power {power} must lie in (0, 1]")));
    }
    Ok(())
}

impl SetFunction for UserConcave {
    fn ground_size(&self) -> usize {
        self.n
    }

    fn eval(&self, set: &Subset) -> f64 {
        self.mass(set).powf(self.power)
    }

    fn marginals(&self, set: &Subset, out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        let s = self.mass(set);
        let base = s.powf(self.power);
        for &(j, r) in &self.row {
            out[j] = if set.contains(j) {
                base - (s - r).max(0.0).powf(self.power)
            } else {
                (s + r).powf(self.power) - base
            };
        }
    }
}

/// Uniform average `(1/m) Σ f_i` of set functions over a common ground set.
#[derive(Debug, Clone)]
pub struct Average<F> {
    n: usize,
    parts: Vec<F>,
}

impl<F: SetFunction> Average<F> {
    pub fn new(parts: Vec<F>) -> Result<Self> {
        let n = parts.first().ok_or_else(|| Error::input("average of zero functions"))?.ground_size();
        if parts.iter().any(|p| p.ground_size() != n) {
            return Err(Error::input("averaged set functions disagree on ground-set size"));
        }
        Ok(Average { n, parts })
    }

    pub fn parts(&self) -> &[F] {
        &self.parts
    }

    pub fn into_parts(self) -> Vec<F> {
        self.parts
    }
}

impl<F: SetFunction> SetFunction for Average<F> {
    fn ground_size(&self) -> usize {
        self.n
    }

    fn eval(&self, set: &Subset) -> f64 {
        self.parts.iter().map(|p| p.eval(set)).sum::<f64>() / self.parts.len() as f64
    }

    fn marginals(&self, set: &Subset, out: &mut [f64]) {
        let mut scratch = vec![0.0; self.n];
        out.iter_mut().for_each(|o| *o = 0.0);
        for p in &self.parts {
            p.marginals(set, &mut scratch);
            out.iter_mut().zip(&scratch).for_each(|(o, s)| *o += s);
        }
        let m = self.parts.len() as f64;
        out.iter_mut().for_each(|o| *o /= m);
    }

    fn multilinear_value(&self, x: &[f64]) -> Option<f64> {
        let mut total = 0.0;
        for p in &self.parts {
            total += p.multilinear_value(x)?;
        }
        Some(total / self.parts.len() as f64)
    }
}

/// `f(S) = (1/n_users) Σ_u max_{j∈S} r_{u,j}`.
pub fn facility_location(ratings: &RatingsMatrix) -> Average<UserFacility> {
    let parts = ratings.rows().iter().map(|row| UserFacility::new(ratings.n_items(), row)).collect();
    Average::new(parts).expect("ratings matrices are non-empty")
}

/// `f(S) = (1/n_users) Σ_u (Σ_{j∈S} r_{u,j})^power`.
pub fn concave_over_modular(ratings: &RatingsMatrix, power: f64) -> Result<Average<UserConcave>> {
    check_power(power)?;
    let parts =
        ratings.rows().iter().map(|row| UserConcave::new(ratings.n_items(), row, power)).collect::<Result<Vec<_>>>()?;
    Average::new(parts)
}

/// Set function backed by a closure; handy for hand-built test functions.
pub struct FnSetFunction<G> {
    n: usize,
    f: G,
}

impl<G: Fn(&Subset) -> f64 + Send + Sync> FnSetFunction<G> {
    pub fn new(n: usize, f: G) -> Self {
        FnSetFunction { n, f }
    }
}

impl<G: Fn(&Subset) -> f64 + Send + Sync> SetFunction for FnSetFunction<G> {
    fn ground_size(&self) -> usize {
        self.n
    }

    fn eval(&self, set: &Subset) -> f64 {
        (self.f)(set)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn set(n: usize, idx: &[usize]) -> Subset {
        Subset::from_indices(n, idx.iter().copied())
    }

    /// The k = 2 coverage family, 0-based.
    fn k2_family() -> Coverage {
        coverage_from_sets(vec![vec![0, 4], vec![1, 4], vec![2], vec![3], vec![0, 1, 4]], 5).unwrap()
    }

    #[test]
    fn coverage_examples() {
        let f = k2_family();
        assert_eq!(f.eval(&set(5, &[0])), 2.0);
        assert_eq!(f.eval(&Subset::empty(5)), 0.0);
        assert_eq!(f.eval(&Subset::full(5)), 5.0);
    }

    #[test]
    fn coverage_rejects_out_of_universe() {
        let err = coverage_from_sets(vec![vec![0, 7]], 5).unwrap_err();
        assert!(matches!(err, Error::Input(_)));
    }

    #[test]
    fn facility_location_examples() {
        let one = RatingsMatrix::from_dense(&[vec![5.0, 3.0]]).unwrap();
        assert_eq!(facility_location(&one).eval(&set(2, &[1])), 3.0);
        let two = RatingsMatrix::from_dense(&[vec![5.0, 0.0], vec![0.0, 4.0]]).unwrap();
        let f = facility_location(&two);
        assert_eq!(f.eval(&set(2, &[0, 1])), 4.5);
        assert_eq!(f.eval(&Subset::empty(2)), 0.0);
    }

    #[test]
    fn concave_over_modular_examples() {
        let r = RatingsMatrix::from_dense(&[vec![4.0, 9.0]]).unwrap();
        let f = concave_over_modular(&r, 0.5).unwrap();
        assert!((f.eval(&set(2, &[0, 1])) - 13f64.sqrt()).abs() < 1e-15);
        assert_eq!(f.eval(&Subset::empty(2)), 0.0);
        let r = RatingsMatrix::from_dense(&[vec![1.0, 2.0, 3.0], vec![0.0, 5.0, 1.0]]).unwrap();
        let lin = concave_over_modular(&r, 1.0).unwrap();
        assert_eq!(lin.eval(&set(3, &[1, 2])), (5.0 + 6.0) / 2.0);
        assert!(concave_over_modular(&r, 0.0).is_err());
        assert!(concave_over_modular(&r, 1.5).is_err());
    }

    fn check_marginals_against_default<F: SetFunction>(f: &F, seed: u64) {
        let n = f.ground_size();
        let mut rng = crate::rng::stream(seed);
        let mut fast = vec![0.0; n];
        for _ in 0..50 {
            let mask: u64 = rng.gen::<u64>() & ((1 << n) - 1);
            let s = Subset::from_mask(n, mask);
            f.marginals(&s, &mut fast);
            let slow = FnSetFunction::new(n, |t: &Subset| f.eval(t));
            let mut reference = vec![0.0; n];
            slow.marginals(&s, &mut reference);
            for (a, b) in fast.iter().zip(&reference) {
                assert!((a - b).abs() < 1e-12, "{fast:?} vs {reference:?}");
            }
        }
    }

    #[test]
    fn fast_marginals_match_definition() {
        check_marginals_against_default(&k2_family(), 1);
        let r = RatingsMatrix::from_dense(&[
            vec![5.0, 3.0, 3.0, 0.0, 1.0, 2.0],
            vec![0.0, 4.0, 1.0, 4.0, 0.0, 2.0],
            vec![2.0, 2.0, 2.0, 2.0, 2.0, 2.0],
        ])
        .unwrap();
        check_marginals_against_default(&facility_location(&r), 2);
        check_marginals_against_default(&concave_over_modular(&r, 0.5).unwrap(), 3);
        check_marginals_against_default(&Modular::new(vec![1.0, 0.0, 2.5]).unwrap(), 4);
    }
}
