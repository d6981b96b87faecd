//! Two hard instances with known ground truth.
//!
//! [`tight_stationary_instance`] is a coverage function whose multilinear extension has
//! a local maximum at exactly `OPT/2 + OPT/(4k)` on `{Σx = k}`. [`frank_wolfe_trap`] is a
//! family of linear functions on which Frank-Wolfe with single-sample gradients never
//! touches the best coordinate.

use crate::discrete::max_subset_bruteforce;
use crate::geometry::ConstraintSet;
use crate::objectives::{coverage_from_sets, stochastic_objective, Coverage, Modular, StochasticObjective};
use crate::{Error, Result};

/// Coverage instance on `n = 2k + 1` elements with a non-global local maximum.
///
/// Element `i < k` covers `{i, 2k}`, element `k <= i < 2k` covers `{i}`, and the
/// last element covers `{0, .., k-1, 2k}` (all 0-based).
#[derive(Debug, Clone)]
pub struct TightStationaryInstance {
    pub k: usize,
    pub f: Coverage,
    pub body: ConstraintSet,
    /// Ones on the first `k` coordinates.
    pub x_loc: Vec<f64>,
}

pub fn tight_stationary_instance(k: usize) -> Result<TightStationaryInstance> {
    if k == 0 {
        return Err(Error::input("k must be at least 1"));
    }
    let n = 2 * k + 1;
    let last = 2 * k;
    let mut sets: Vec<Vec<usize>> = (0..k).map(|i| vec![i, last]).collect();
    sets.extend((k..2 * k).map(|i| vec![i]));
    sets.push((0..k).chain([last]).collect());
    let f = coverage_from_sets(sets, n)?;
    let body = ConstraintSet::scaled_simplex(n, k as f64)?;
    let x_loc = (0..n).map(|i| if i < k { 1.0 } else { 0.0 }).collect();
    Ok(TightStationaryInstance { k, f, body, x_loc })
}

impl TightStationaryInstance {
    pub fn dim(&self) -> usize {
        2 * self.k + 1
    }

    /// `F(x) = k + 1 - (1 - x_last) Π_{i<k} (1 - x_i) - (1 - x_last)(k - Σ_{i<k} x_i) + Σ_{k<=i<2k} x_i`.
    pub fn closed_form(&self, x: &[f64]) -> f64 {
        let k = self.k;
        let tail = 1.0 - x[2 * k];
        let head = &x[..k];
        let prod: f64 = head.iter().map(|v| 1.0 - v).product();
        let head_sum: f64 = head.iter().sum();
        let mid: f64 = x[k..2 * k].iter().sum();
        (k + 1) as f64 - tail * prod - tail * (k as f64 - head_sum) + mid
    }

    /// `max_K F` by enumerating the integral vertices of `{Σx = k}`.
    ///
    /// `F` is convex along every `e_i - e_j`, so its maximum over the body is attained
    /// at a vertex.
    pub fn opt(&self) -> Result<f64> {
        Ok(max_subset_bruteforce(&self.f, self.k)?.1)
    }

    /// `(k + 1) / 2k = 1/2 + 1/(2k)`.
    pub fn predicted_ratio(&self) -> f64 {
        0.5 + 0.5 / self.k as f64
    }

    /// Point `(1 - ε_0, .., 1 - ε_{k-1}, ε_k, .., ε_{2k})` with `Σ_{i<k} ε_i = Σ_{i>=k} ε_i`.
    pub fn perturbation(&self, eps: &[f64]) -> Result<Vec<f64>> {
        let k = self.k;
        if eps.len() != self.dim() || eps.iter().any(|e| !(0.0..=1.0).contains(e)) {
            return Err(Error::input("perturbation needs 2k+1 entries in [0, 1]"));
        }
        let lo: f64 = eps[..k].iter().sum();
        let hi: f64 = eps[k..].iter().sum();
        if (lo - hi).abs() > 1e-12 {
            return Err(Error::input("perturbation must move equal mass in and out"));
        }
        Ok(eps.iter().enumerate().map(|(i, e)| if i < k { 1.0 - e } else { *e }).collect())
    }
}

/// Linear family `F_i(x) = x_i + x_n / 2`, `i = 1..n-1`, averaged uniformly, on `Σx <= 1`.
pub struct FrankWolfeTrap {
    pub n: usize,
    pub objective: StochasticObjective<Modular>,
    pub body: ConstraintSet,
    /// `e_n`, the maximizer.
    pub x_star: Vec<f64>,
    /// Where Frank-Wolfe with one-sample gradients converges.
    pub x_inf: Vec<f64>,
}

pub fn frank_wolfe_trap(n: usize) -> Result<FrankWolfeTrap> {
    if n < 3 {
        return Err(Error::input("n must be at least 3"));
    }
    let parts = (0..n - 1)
        .map(|i| {
            let mut w = vec![0.0; n];
            w[i] = 1.0;
            w[n - 1] = 0.5;
            Modular::new(w)
        })
        .collect::<Result<Vec<_>>>()?;
    let objective = stochastic_objective(parts, None)?;
    let body = ConstraintSet::cardinality(n, 1.0)?;
    let mut x_star = vec![0.0; n];
    x_star[n - 1] = 1.0;
    let mut x_inf = vec![1.0 / (n - 1) as f64; n];
    x_inf[n - 1] = 0.0;
    Ok(FrankWolfeTrap { n, objective, body, x_star, x_inf })
}

impl FrankWolfeTrap {
    /// `F(x*) = 1/2`.
    pub fn opt(&self) -> f64 {
        0.5
    }

    /// `F(x_∞)/F(x*) = 2/(n-1)`.
    pub fn predicted_ratio(&self) -> f64 {
        2.0 / (self.n - 1) as f64
    }
}
