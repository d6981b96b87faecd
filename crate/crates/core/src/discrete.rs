//! Discrete baselines and rounding: forward greedy, randomized pipage rounding and
//! sample-average set objectives.

use std::sync::atomic::{AtomicU64, Ordering};

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, RngCore};

use crate::objectives::{SetFunction, Subset, EXACT_CAP};
use crate::{Error, Result};

/// Coordinates within this distance of 0 or 1 count as integral.
const INTEGRAL_TOL: f64 = 1e-12;

/// Sample average `f̂(S) = (1/B) Σ_j f_j(S)` that counts single-function evaluations.
#[derive(Debug)]
pub struct EmpiricalSetObjective<F> {
    n: usize,
    parts: Vec<F>,
    evals: AtomicU64,
}

impl<F: SetFunction> EmpiricalSetObjective<F> {
    pub fn new(parts: Vec<F>) -> Result<Self> {
        let n =
            parts.first().ok_or_else(|| Error::input("empirical objective needs at least one sample"))?.ground_size();
        if parts.iter().any(|f| f.ground_size() != n) {
            return Err(Error::input("sampled functions disagree on ground set size"));
        }
        Ok(EmpiricalSetObjective { n, parts, evals: AtomicU64::new(0) })
    }

    /// Draws `batch` components i.i.d. from `family` (uniformly, or by `weights`).
    pub fn sample(family: &[F], weights: Option<&[f64]>, batch: usize, rng: &mut dyn RngCore) -> Result<Self>
    where
        F: Clone,
    {
        if family.is_empty() || batch == 0 {
            return Err(Error::input("need a non-empty family and batch >= 1"));
        }
        let picks: Vec<usize> = match weights {
            None => (0..batch).map(|_| rng.gen_range(0..family.len())).collect(),
            Some(w) => {
                if w.len() != family.len() {
                    return Err(Error::input(format!("{} weights for {} functions", w.len(), family.len())));
                }
                let dist = WeightedIndex::new(w).map_err(|e| Error::input(e.to_string()))?;
                (0..batch).map(|_| dist.sample(rng)).collect()
            }
        };
        Self::new(picks.into_iter().map(|i| family[i].clone()).collect())
    }

    pub fn batch(&self) -> usize {
        self.parts.len()
    }

    pub fn parts(&self) -> &[F] {
        &self.parts
    }

    /// Single-function evaluations so far.
    pub fn evals(&self) -> u64 {
        self.evals.load(Ordering::Relaxed)
    }

    pub fn reset_evals(&self) {
        self.evals.store(0, Ordering::Relaxed);
    }
}

impl<F: SetFunction> SetFunction for EmpiricalSetObjective<F> {
    fn ground_size(&self) -> usize {
        self.n
    }

    fn eval(&self, set: &Subset) -> f64 {
        self.evals.fetch_add(self.parts.len() as u64, Ordering::Relaxed);
        self.parts.iter().map(|f| f.eval(set)).sum::<f64>() / self.parts.len() as f64
    }
}

/// Forward greedy: `k` rounds, each adding the element maximizing `f(S ∪ {e})`,
/// ties to the lowest index.
///
/// Round `r` evaluates `f` exactly `n - r` times, so a run costs
/// `n + (n-1) + .. + (n-k+1)` evaluations.
pub fn greedy<F: SetFunction + ?Sized>(f: &F, k: usize) -> Result<Subset> {
    let n = f.ground_size();
    if k > n {
        return Err(Error::input(format!("budget k = {k} exceeds ground set size {n}")));
    }
    let mut set = Subset::empty(n);
    for _ in 0..k {
        let mut best: Option<(usize, f64)> = None;
        for e in 0..n {
            if set.contains(e) {
                continue;
            }
            set.insert(e);
            let v = f.eval(&set);
            set.remove(e);
            if best.is_none_or(|(_, b)| v > b) {
                best = Some((e, v));
            }
        }
        // k <= n guarantees a free element each round
        set.insert(best.expect("free element").0);
    }
    Ok(set)
}

/// Randomized pipage rounding of `x ∈ [0,1]^n` with integral `Σ x_i = k` to a set of size `k`.
///
/// Each round takes the two lowest-indexed fractional coordinates `(i, j)` and moves
/// along `e_i - e_j` by `+δ₊ = min(1 - x_i, x_j)` with probability `δ₋/(δ₊ + δ₋)`, else
/// by `-δ₋ = -min(x_i, 1 - x_j)`. Expectations of every coordinate are preserved.
pub fn pipage_round(x: &[f64], rng: &mut dyn RngCore) -> Result<Subset> {
    if x.iter().any(|v| !(0.0..=1.0).contains(v)) {
        return Err(Error::input("pipage rounding needs a point in the unit box"));
    }
    let sum: f64 = x.iter().sum();
    let k = sum.round();
    if (sum - k).abs() > 1e-9 {
        return Err(Error::input(format!("coordinate sum {sum} is not integral")));
    }
    let mut y = x.to_vec();
    for v in y.iter_mut() {
        snap(v);
    }
    let fractional = |v: f64| v > 0.0 && v < 1.0;
    let mut next = 0;
    while let Some(i) = (next..y.len()).find(|&i| fractional(y[i])) {
        let Some(j) = (i + 1..y.len()).find(|&j| fractional(y[j])) else {
            // the sum is integral, so a lone fractional coordinate is rounding noise
            y[i] = y[i].round();
            break;
        };
        let up = (1.0 - y[i]).min(y[j]);
        let down = y[i].min(1.0 - y[j]);
        if rng.gen::<f64>() * (up + down) < down {
            if up == 1.0 - y[i] {
                y[j] -= up;
                y[i] = 1.0;
            } else {
                y[i] += up;
                y[j] = 0.0;
            }
        } else if down == y[i] {
            y[j] += down;
            y[i] = 0.0;
        } else {
            y[i] -= down;
            y[j] = 1.0;
        }
        snap(&mut y[i]);
        snap(&mut y[j]);
        next = i;
    }
    let set = Subset::from_indices(y.len(), (0..y.len()).filter(|&i| y[i] > 0.5));
    debug_assert_eq!(set.len() as f64, k);
    Ok(set)
}

fn snap(v: &mut f64) {
    if *v < INTEGRAL_TOL {
        *v = 0.0;
    } else if *v > 1.0 - INTEGRAL_TOL {
        *v = 1.0;
    }
}

/// Pads `x ∈ P_k` up to `Σ x = k` by raising coordinates to 1 in index order, then
/// pipage-rounds. For monotone `f` padding never lowers `F`.
pub fn lift_and_round(x: &[f64], k: usize, rng: &mut dyn RngCore) -> Result<Subset> {
    let n = x.len();
    if k > n {
        return Err(Error::input(format!("budget k = {k} exceeds dimension {n}")));
    }
    let sum: f64 = x.iter().sum();
    if x.iter().any(|v| !(-1e-9..=1.0 + 1e-9).contains(v)) || sum > k as f64 + 1e-9 {
        return Err(Error::input("point is outside the cardinality polytope"));
    }
    let mut y: Vec<f64> = x.iter().map(|v| v.clamp(0.0, 1.0)).collect();
    let mut deficit = k as f64 - y.iter().sum::<f64>();
    for v in y.iter_mut() {
        if deficit <= 0.0 {
            break;
        }
        let add = (1.0 - *v).min(deficit);
        *v += add;
        deficit -= add;
    }
    pipage_round(&y, rng)
}

/// Exhaustive `max_{|S| <= k} f(S)`, ties to the smallest mask.
pub fn max_subset_bruteforce<F: SetFunction + ?Sized>(f: &F, k: usize) -> Result<(Subset, f64)> {
    let n = f.ground_size();
    if n > EXACT_CAP {
        return Err(Error::capability(format!("exhaustive search is capped at n = {EXACT_CAP} (got {n})")));
    }
    let mut best = (0u64, f.eval(&Subset::empty(n)));
    for mask in 1..1u64 << n {
        if mask.count_ones() as usize > k {
            continue;
        }
        let v = f.eval(&Subset::from_mask(n, mask));
        if v > best.1 {
            best = (mask, v);
        }
    }
    Ok((Subset::from_mask(n, best.0), best.1))
}
