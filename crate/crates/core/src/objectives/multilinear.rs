//! Multilinear extension `F(x) = Σ_S f(S) Π_{i∈S} x_i Π_{j∉S} (1 - x_j)`.
//!
//! Exact oracles enumerate subsets and are capped at [`EXACT_CAP`] elements. The
//! sampled oracles draw `S` with independent inclusions `P(i ∈ S) = x_i`; the
//! gradient estimator reuses one sampled set for all coordinates, using
//! `f(S ∪ {i}) - f(S \ {i})` as the `i`-th partial.

use rand::RngCore;

use super::{SetFunction, Subset};
use crate::{Error, Result};

/// Largest ground set handled by exact enumeration.
pub const EXACT_CAP: usize = 25;

fn check_point(n: usize, x: &[f64]) -> Result<()> {
    if x.len() != n {
        return Err(Error::input(format!("point has dimension {}, expected {n}", x.len())));
    }
    if x.iter().any(|v| !(0.0..=1.0).contains(v)) {
        return Err(Error::input("point must lie in the unit box"));
    }
    Ok(())
}

fn check_cap(n: usize) -> Result<()> {
    if n > EXACT_CAP {
        return Err(Error::capability(format!(
            "exact multilinear enumeration is capped at n = {EXACT_CAP} (got {n}); use multilinear_eval_sampled"
        )));
    }
    Ok(())
}

/// Exact `F(x)` by enumerating all subsets with non-zero probability.
pub fn multilinear_eval_exact<F: SetFunction + ?Sized>(f: &F, x: &[f64]) -> Result<f64> {
    let n = f.ground_size();
    check_cap(n)?;
    check_point(n, x)?;
    Ok(enumerate(f, x))
}

fn enumerate<F: SetFunction + ?Sized>(f: &F, x: &[f64]) -> f64 {
    fn rec<F: SetFunction + ?Sized>(f: &F, x: &[f64], i: usize, prob: f64, set: &mut Subset) -> f64 {
        if i == x.len() {
            return prob * f.eval(set);
        }
        let mut acc = 0.0;
        if x[i] < 1.0 {
            acc += rec(f, x, i + 1, prob * (1.0 - x[i]), set);
        }
        if x[i] > 0.0 {
            set.insert(i);
            acc += rec(f, x, i + 1, prob * x[i], set);
            set.remove(i);
        }
        acc
    }
    rec(f, x, 0, 1.0, &mut Subset::empty(x.len()))
}

/// Exact gradient: `∂_i F(x) = F(x; x_i <- 1) - F(x; x_i <- 0)`.
pub fn multilinear_grad_exact<F: SetFunction + ?Sized>(f: &F, x: &[f64]) -> Result<Vec<f64>> {
    let n = f.ground_size();
    check_cap(n)?;
    check_point(n, x)?;
    Ok(partials_by_pinning(x, |y| enumerate(f, y)))
}

/// Applies `F(x; x_i <- 1) - F(x; x_i <- 0)` coordinate-wise with any value oracle.
pub(crate) fn partials_by_pinning(x: &[f64], mut value: impl FnMut(&[f64]) -> f64) -> Vec<f64> {
    let mut y = x.to_vec();
    (0..x.len())
        .map(|i| {
            y[i] = 1.0;
            let hi = value(&y);
            y[i] = 0.0;
            let lo = value(&y);
            y[i] = x[i];
            hi - lo
        })
        .collect()
}

/// Mean of `f(S)` over `batch` independent draws `S ~ x`.
pub fn multilinear_eval_sampled<F: SetFunction + ?Sized>(
    f: &F,
    x: &[f64],
    batch: usize,
    rng: &mut dyn RngCore,
) -> Result<f64> {
    if batch == 0 {
        return Err(Error::input("batch size must be at least 1"));
    }
    check_point(f.ground_size(), x)?;
    let mut set = Subset::empty(x.len());
    let mut acc = 0.0;
    for _ in 0..batch {
        set.resample(x, rng);
        acc += f.eval(&set);
    }
    Ok(acc / batch as f64)
}

/// Unbiased gradient estimate averaged over `batch` sampled sets.
///
/// Each draw costs `n` set-function computations.
pub fn multilinear_grad_estimate<F: SetFunction + ?Sized>(
    f: &F,
    x: &[f64],
    batch: usize,
    rng: &mut dyn RngCore,
) -> Result<Vec<f64>> {
    if batch == 0 {
        return Err(Error::input("batch size must be at least 1"));
    }
    let n = f.ground_size();
    check_point(n, x)?;
    let mut set = Subset::empty(n);
    let mut draw = vec![0.0; n];
    let mut acc = vec![0.0; n];
    for _ in 0..batch {
        set.resample(x, rng);
        f.marginals(&set, &mut draw);
        acc.iter_mut().zip(&draw).for_each(|(a, d)| *a += d);
    }
    acc.iter_mut().for_each(|a| *a /= batch as f64);
    Ok(acc)
}

/// Precomputed `f` over all `2^n` subsets; evaluates `F` by collapsing one
/// coordinate at a time in `O(2^n)`.
#[derive(Debug, Clone)]
pub struct ValueTable {
    n: usize,
    values: Vec<f64>,
}

/// Largest ground set for which [`ValueTable`] is built (8 MiB of values).
pub const TABLE_CAP: usize = 20;

impl ValueTable {
    pub fn build<F: SetFunction + ?Sized>(f: &F) -> Result<Self> {
        let n = f.ground_size();
        if n > TABLE_CAP {
            return Err(Error::capability(format!("value table is capped at n = {TABLE_CAP}")));
        }
        let values = (0..1u64 << n).map(|m| f.eval(&Subset::from_mask(n, m))).collect();
        Ok(ValueTable { n, values })
    }

    pub fn get(&self, mask: u64) -> f64 {
        self.values[mask as usize]
    }

    pub fn ground_size(&self) -> usize {
        self.n
    }

    pub fn multilinear(&self, x: &[f64]) -> f64 {
        let n = self.n;
        if n == 0 {
            return self.values[0];
        }
        let half = 1usize << (n - 1);
        let xi = x[n - 1];
        let mut buf: Vec<f64> = (0..half).map(|m| (1.0 - xi) * self.values[m] + xi * self.values[m + half]).collect();
        for i in (0..n - 1).rev() {
            let h = 1usize << i;
            let xi = x[i];
            for m in 0..h {
                buf[m] = (1.0 - xi) * buf[m] + xi * buf[m + h];
            }
        }
        buf[0]
    }
}
