//! Constraint bodies inside `[0,1]^n` and their oracles.
//!
//! All bodies are a box intersected with at most one sum constraint, so both
//! projections reduce to a one-dimensional threshold search: Euclidean
//! projection shifts by a threshold and clamps, KL projection rescales and caps.

use crate::{Error, Result};

/// Feasibility slack used throughout.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConstraintSet {
    /// `[0,1]^n`.
    Box { n: usize },
    /// `{x ∈ [0,1]^n : Σx <= k}`.
    Cardinality { n: usize, k: f64 },
    /// `{x ∈ [0,1]^n : Σx = k}`.
    ScaledSimplex { n: usize, k: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MirrorMap {
    /// `Φ(x) = ½‖x‖²`.
    HalfSquaredEuclidean,
    /// `Φ(x) = k Σ x_i log x_i` on the positive orthant.
    ScaledEntropy { k: f64 },
}

fn check_budget(n: usize, k: f64) -> Result<()> {
    if n == 0 {
        return Err(Error::input("constraint dimension must be positive"));
    }
    if !(k > 0.0 && k <= n as f64) {
        return Err(Error::input(format!("budget k = {k} must lie in (0, n = {n}]")));
    }
    Ok(())
}

impl ConstraintSet {
    pub fn unit_box(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::input("constraint dimension must be positive"));
        }
        Ok(ConstraintSet::Box { n })
    }

    pub fn cardinality(n: usize, k: f64) -> Result<Self> {
        check_budget(n, k)?;
        Ok(ConstraintSet::Cardinality { n, k })
    }

    pub fn scaled_simplex(n: usize, k: f64) -> Result<Self> {
        check_budget(n, k)?;
        Ok(ConstraintSet::ScaledSimplex { n, k })
    }

    pub fn dim(&self) -> usize {
        match *self {
            ConstraintSet::Box { n }
            | ConstraintSet::Cardinality { n, .. }
            | ConstraintSet::ScaledSimplex { n, .. } => n,
        }
    }

    /// Sum budget, `n` for the box.
    pub fn budget(&self) -> f64 {
        match *self {
            ConstraintSet::Box { n } => n as f64,
            ConstraintSet::Cardinality { k, .. } | ConstraintSet::ScaledSimplex { k, .. } => k,
        }
    }

    pub fn contains_origin(&self) -> bool {
        !matches!(self, ConstraintSet::ScaledSimplex { .. })
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        if x.len() != self.dim() || x.iter().any(|&v| !(-MEMBERSHIP_TOL..=1.0 + MEMBERSHIP_TOL).contains(&v)) {
            return false;
        }
        let s: f64 = x.iter().sum();
        match *self {
            ConstraintSet::Box { .. } => true,
            ConstraintSet::Cardinality { k, .. } => s <= k + MEMBERSHIP_TOL,
            ConstraintSet::ScaledSimplex { k, .. } => (s - k).abs() <= MEMBERSHIP_TOL,
        }
    }

    pub(crate) fn check_member(&self, x: &[f64], what: &str) -> Result<()> {
        if !self.contains(x) {
            return Err(Error::input(format!("{what} is not feasible for {self:?}")));
        }
        Ok(())
    }

    fn check_dim(&self, y: &[f64]) -> Result<()> {
        if y.len() != self.dim() {
            return Err(Error::input(format!("vector has dimension {}, expected {}", y.len(), self.dim())));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::input("vector must be finite"));
        }
        Ok(())
    }

    /// `argmin_{x∈K} ‖x - y‖₂` via `x_i = clamp(y_i - λ, 0, 1)`.
    pub fn project_euclidean(&self, y: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(y)?;
        let clamp = |l: f64| y.iter().map(|&v| (v - l).clamp(0.0, 1.0)).collect::<Vec<_>>();
        Ok(match *self {
            ConstraintSet::Box { .. } => clamp(0.0),
            ConstraintSet::Cardinality { k, .. } => {
                let s0: f64 = y.iter().map(|v| v.clamp(0.0, 1.0)).sum();
                if s0 <= k {
                    clamp(0.0)
                } else {
                    clamp(shift_threshold(y, k))
                }
            }
            ConstraintSet::ScaledSimplex { k, .. } => clamp(shift_threshold(y, k)),
        })
    }

    /// `argmin_{x∈K} KL(x, y)` with `KL(x, y) = Σ x log(x/y) - x + y`, for `y > 0`.
    pub fn project_kl(&self, y: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(y)?;
        if y.iter().any(|&v| v <= 0.0) {
            return Err(Error::input("KL projection needs a strictly positive point"));
        }
        Ok(match *self {
            ConstraintSet::Box { .. } => y.iter().map(|v| v.min(1.0)).collect(),
            ConstraintSet::Cardinality { k, .. } => {
                let s0: f64 = y.iter().map(|v| v.min(1.0)).sum();
                if s0 <= k {
                    y.iter().map(|v| v.min(1.0)).collect()
                } else {
                    capped_rescale(y, k)
                }
            }
            ConstraintSet::ScaledSimplex { k, .. } => capped_rescale(y, k),
        })
    }

    /// A maximizer of `⟨g, v⟩` over the body; ties go to the lowest index.
    pub fn linear_maximize(&self, g: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(g)?;
        let n = self.dim();
        let mut v = vec![0.0; n];
        let (k, only_positive) = match *self {
            ConstraintSet::Box { .. } => {
                for (vi, gi) in v.iter_mut().zip(g) {
                    if *gi > 0.0 {
                        *vi = 1.0;
                    }
                }
                return Ok(v);
            }
            ConstraintSet::Cardinality { k, .. } => (k, true),
            ConstraintSet::ScaledSimplex { k, .. } => (k, false),
        };
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| g[b].total_cmp(&g[a]).then(a.cmp(&b)));
        let mut remaining = k;
        for i in order {
            if remaining <= 0.0 || (only_positive && g[i] <= 0.0) {
                break;
            }
            v[i] = remaining.min(1.0);
            remaining -= v[i];
        }
        Ok(v)
    }

    /// Squared diameter `R²` under a mirror map.
    ///
    /// Euclidean: `sup ½‖x - y‖²`. Entropy on the scaled simplex: `k log n`.
    pub fn diameter(&self, map: MirrorMap) -> Result<f64> {
        let n = self.dim() as f64;
        match (map, *self) {
            (MirrorMap::HalfSquaredEuclidean, ConstraintSet::Box { .. }) => Ok(n / 2.0),
            (MirrorMap::HalfSquaredEuclidean, ConstraintSet::Cardinality { k, .. }) => Ok(0.5 * (2.0 * k).min(n)),
            // two vertices of size k differ in at most 2 min(k, n - k) coordinates
            (MirrorMap::HalfSquaredEuclidean, ConstraintSet::ScaledSimplex { k, .. }) => Ok(k.min(n - k)),
            (MirrorMap::ScaledEntropy { k: mk }, ConstraintSet::ScaledSimplex { k, .. }) if mk == k => Ok(k * n.ln()),
            (map, body) => Err(Error::input(format!("mirror map {map:?} is not paired with {body:?}"))),
        }
    }

    /// Whether `map` may drive mirror ascent on this body.
    pub fn compatible(&self, map: MirrorMap) -> bool {
        match map {
            MirrorMap::HalfSquaredEuclidean => true,
            MirrorMap::ScaledEntropy { k } => matches!(*self, ConstraintSet::ScaledSimplex { k: bk, .. } if bk == k),
        }
    }

    /// Vertices for small bodies, used by exhaustive checks.
    ///
    /// Vertices have at most one fractional coordinate, which carries the
    /// fractional part of `k`.
    pub fn vertices(&self) -> Result<Vec<Vec<f64>>> {
        let n = self.dim();
        if n > 16 {
            return Err(Error::capability("vertex enumeration is capped at n = 16"));
        }
        let masks = 0..1u64 << n;
        let ind = |m: u64| (0..n).map(|i| (m >> i & 1) as f64).collect::<Vec<_>>();
        let mut out = Vec::new();
        let with_fraction = |k: f64, out: &mut Vec<Vec<f64>>| {
            let whole = k.floor();
            let frac = k - whole;
            for m in 0..1u64 << n {
                if m.count_ones() as f64 != whole {
                    continue;
                }
                if frac == 0.0 {
                    out.push(ind(m));
                } else {
                    for j in (0..n).filter(|j| m >> j & 1 == 0) {
                        let mut v = ind(m);
                        v[j] = frac;
                        out.push(v);
                    }
                }
            }
        };
        match *self {
            ConstraintSet::Box { .. } => out.extend(masks.map(ind)),
            ConstraintSet::Cardinality { k, .. } => {
                out.extend(masks.filter(|m| m.count_ones() as f64 <= k).map(ind));
                if k.fract() != 0.0 {
                    with_fraction(k, &mut out);
                }
            }
            ConstraintSet::ScaledSimplex { k, .. } => with_fraction(k, &mut out),
        }
        Ok(out)
    }
}

/// Solves `Σ clamp(y_i - λ, 0, 1) = k` for `λ`.
///
/// The sum is piecewise linear and non-increasing in `λ` with breakpoints at
/// `y_i - 1` and `y_i`. Sort-based, `O(n log n)`.
fn shift_threshold(y: &[f64], k: f64) -> f64 {
    let n = y.len();
    let sum_at = |l: f64| y.iter().map(|&v| (v - l).clamp(0.0, 1.0)).sum::<f64>();
    let mut bps: Vec<f64> = y.iter().flat_map(|&v| [v - 1.0, v]).collect();
    bps.sort_by(f64::total_cmp);
    bps.dedup();
    if k >= n as f64 {
        return bps[0];
    }
    // smallest breakpoint whose sum is <= k; the root lies in the segment before it
    let hi = bps.partition_point(|&b| sum_at(b) > k);
    debug_assert!(hi > 0 && hi < bps.len());
    let (lo_b, hi_b) = (bps[hi - 1], bps[hi]);
    if sum_at(hi_b) == k {
        return hi_b;
    }
    // inside (lo_b, hi_b) each coordinate is capped, free, or zero
    let mid = 0.5 * (lo_b + hi_b);
    let mut capped = 0.0;
    let mut free_sum = 0.0;
    let mut free = 0usize;
    for &v in y {
        if v - mid >= 1.0 {
            capped += 1.0;
        } else if v - mid > 0.0 {
            free_sum += v;
            free += 1;
        }
    }
    if free == 0 {
        return hi_b;
    }
    ((capped + free_sum - k) / free as f64).clamp(lo_b, hi_b)
}

/// Solves `Σ min(1, c y_i) = k` for `c > 0` by water-filling on the largest entries.
fn capped_rescale(y: &[f64], k: f64) -> Vec<f64> {
    let n = y.len();
    if k >= n as f64 {
        return vec![1.0; n];
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| y[b].total_cmp(&y[a]).then(a.cmp(&b)));
    // suffix sums of the sorted values
    let mut tail = vec![0.0; n + 1];
    for r in (0..n).rev() {
        tail[r] = tail[r + 1] + y[order[r]];
    }
    let mut x = vec![0.0; n];
    for m in 0..n {
        if m as f64 > k {
            break;
        }
        let c = (k - m as f64) / tail[m];
        let top_free = y[order[m]];
        let last_capped_ok = m == 0 || c * y[order[m - 1]] >= 1.0 - 1e-12;
        if c * top_free <= 1.0 + 1e-12 && last_capped_ok {
            for (r, &i) in order.iter().enumerate() {
                x[i] = if r < m { 1.0 } else { (c * y[i]).min(1.0) };
            }
            return x;
        }
    }
    unreachable!("water-filling always finds a level for 0 < k < n")
}

impl MirrorMap {
    pub fn potential(&self, x: &[f64]) -> f64 {
        match *self {
            MirrorMap::HalfSquaredEuclidean => 0.5 * x.iter().map(|v| v * v).sum::<f64>(),
            MirrorMap::ScaledEntropy { k } => {
                k * x.iter().map(|&v| if v > 0.0 { v * v.ln() } else { 0.0 }).sum::<f64>()
            }
        }
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        match *self {
            MirrorMap::HalfSquaredEuclidean => x.to_vec(),
            MirrorMap::ScaledEntropy { k } => x.iter().map(|&v| k * (1.0 + v.ln())).collect(),
        }
    }

    /// `D_Φ(x, y) = Φ(x) - Φ(y) - ⟨∇Φ(y), x - y⟩`.
    pub fn bregman(&self, x: &[f64], y: &[f64]) -> f64 {
        let gy = self.gradient(y);
        let inner: f64 = gy.iter().zip(x.iter().zip(y)).map(|(g, (a, b))| g * (a - b)).sum();
        self.potential(x) - self.potential(y) - inner
    }

    /// `argmin_{x∈K} Φ(x)`: the origin (or uniform `k/n` on the simplex) for the
    /// Euclidean map, uniform `k/n` for entropy on the scaled simplex.
    pub fn start_point(&self, body: &ConstraintSet) -> Result<Vec<f64>> {
        if !body.compatible(*self) {
            return Err(Error::input(format!("mirror map {self:?} is not paired with {body:?}")));
        }
        let n = body.dim();
        Ok(match *body {
            ConstraintSet::ScaledSimplex { k, .. } => vec![k / n as f64; n],
            _ => vec![0.0; n],
        })
    }
}

/// `KL(x, y) = Σ x log(x/y) - x + y` with `0 log 0 = 0`.
pub fn kl_divergence(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(&a, &b)| if a > 0.0 { a * (a / b).ln() - a + b } else { b }).sum()
}
