use rand::RngCore;

use super::{StepRecord, StepSchedule, Trajectory};
use crate::geometry::{ConstraintSet, MirrorMap};
use crate::objectives::{ContinuousObjective, Norm};
use crate::rng;
use crate::{Error, Result};

/// Floor applied to iterate coordinates before an entropy update.
pub const ENTROPY_FLOOR: f64 = 1e-12;

/// Source of `g_t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GradientMode {
    Exact,
    /// Mean of `batch` independent `grad_sample` draws.
    Sampled {
        batch: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct AscentOptions {
    pub iterations: usize,
    pub schedule: StepSchedule,
    pub gradient: GradientMode,
    pub seed: u64,
    /// Record `F(x_t)` per step when an exact value is available.
    pub track_value: bool,
}

impl AscentOptions {
    pub fn new(iterations: usize, schedule: StepSchedule, gradient: GradientMode, seed: u64) -> Self {
        AscentOptions { iterations, schedule, gradient, seed, track_value: false }
    }
}

/// Writes `g_t` into `out` and returns the single-function evaluations spent.
pub fn gradient_into(
    f: &dyn ContinuousObjective,
    x: &[f64],
    mode: GradientMode,
    rng: &mut dyn RngCore,
    out: &mut [f64],
) -> Result<u64> {
    match mode {
        GradientMode::Exact => {
            out.copy_from_slice(&f.grad_exact(x)?);
            Ok(0)
        }
        GradientMode::Sampled { batch } => {
            if batch == 0 {
                return Err(Error::input("batch size must be at least 1"));
            }
            let mut draw = vec![0.0; out.len()];
            out.iter_mut().for_each(|o| *o = 0.0);
            for _ in 0..batch {
                f.grad_sample(x, rng, &mut draw);
                out.iter_mut().zip(&draw).for_each(|(o, d)| *o += d);
            }
            let b = batch as f64;
            out.iter_mut().for_each(|o| *o /= b);
            Ok(f.sample_cost() * batch as u64)
        }
    }
}

fn check_run(f: &dyn ContinuousObjective, body: &ConstraintSet, iterations: usize) -> Result<()> {
    if f.dim() != body.dim() {
        return Err(Error::input(format!("objective dimension {} != constraint dimension {}", f.dim(), body.dim())));
    }
    if iterations == 0 {
        return Err(Error::input("need at least one iteration"));
    }
    Ok(())
}

/// Shared driver: `x_{t+1} = update(x_t, g_t, μ_t)`.
fn ascend(
    solver: &'static str,
    f: &dyn ContinuousObjective,
    opts: &AscentOptions,
    x1: Vec<f64>,
    mut update: impl FnMut(&[f64], &[f64], f64) -> Result<Vec<f64>>,
) -> Result<Trajectory> {
    let mut rng = rng::named_stream(opts.seed, "ascent");
    let n = x1.len();
    let mut iterates = Vec::with_capacity(opts.iterations + 1);
    let mut steps = Vec::with_capacity(opts.iterations);
    let mut g = vec![0.0; n];
    let mut evals = 0u64;
    iterates.push(x1);
    for t in 1..=opts.iterations {
        let x = &iterates[t - 1];
        let value = if opts.track_value { f.value(x).ok() } else { None };
        evals += gradient_into(f, x, opts.gradient, &mut rng, &mut g)?;
        let mu = opts.schedule.step(t);
        let next = update(x, &g, mu)?;
        steps.push(StepRecord { t, step: mu, grad_norm: norm2(&g), value, evals });
        iterates.push(next);
    }
    Ok(Trajectory { solver, seed: opts.seed, iterates, steps })
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

fn euclidean_step(body: &ConstraintSet, x: &[f64], g: &[f64], mu: f64) -> Result<Vec<f64>> {
    let y: Vec<f64> = x.iter().zip(g).map(|(xi, gi)| xi + mu * gi).collect();
    body.project_euclidean(&y)
}

/// Projected (stochastic) gradient ascent: `x_{t+1} = P_K(x_t + μ_t g_t)`.
pub fn sga(f: &dyn ContinuousObjective, body: &ConstraintSet, opts: &AscentOptions, x1: &[f64]) -> Result<Trajectory> {
    check_run(f, body, opts.iterations)?;
    body.check_member(x1, "start point")?;
    ascend("sg", f, opts, x1.to_vec(), |x, g, mu| euclidean_step(body, x, g, mu))
}

/// (Stochastic) mirror ascent.
///
/// The entropy map takes multiplicative steps `y_i = x_i exp(μ_t g_i / k)` followed
/// by a KL projection; the half-squared Euclidean map reproduces [`sga`] exactly.
/// `x1 = None` starts from `argmin_K Φ`.
pub fn sma(
    f: &dyn ContinuousObjective,
    body: &ConstraintSet,
    opts: &AscentOptions,
    map: MirrorMap,
    x1: Option<&[f64]>,
) -> Result<Trajectory> {
    check_run(f, body, opts.iterations)?;
    let start = match x1 {
        Some(x) => {
            if !body.compatible(map) {
                return Err(Error::input(format!("mirror map {map:?} is not paired with {body:?}")));
            }
            x.to_vec()
        }
        None => map.start_point(body)?,
    };
    body.check_member(&start, "start point")?;
    match map {
        MirrorMap::HalfSquaredEuclidean => ascend("sm", f, opts, start, |x, g, mu| euclidean_step(body, x, g, mu)),
        MirrorMap::ScaledEntropy { k } => ascend("sm", f, opts, start, |x, g, mu| {
            let logs: Vec<f64> = x.iter().zip(g).map(|(xi, gi)| xi.max(ENTROPY_FLOOR).ln() + mu * gi / k).collect();
            // the capped KL projection onto Σx = k is invariant to rescaling y
            let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let y: Vec<f64> = logs.iter().map(|l| (l - top).exp().max(f64::MIN_POSITIVE)).collect();
            body.project_kl(&y)
        }),
    }
}

/// Stochastic Frank-Wolfe from the origin: `x_{t+1} = x_t + (1/T) argmax_{v∈K} ⟨v, ĝ_t⟩`.
pub fn frank_wolfe(
    f: &dyn ContinuousObjective,
    body: &ConstraintSet,
    iterations: usize,
    gradient: GradientMode,
    seed: u64,
) -> Result<Trajectory> {
    check_run(f, body, iterations)?;
    if !body.contains_origin() {
        return Err(Error::capability(format!("Frank-Wolfe must start from the origin, which is not in {body:?}")));
    }
    let mut rng = rng::named_stream(seed, "frank-wolfe");
    let n = body.dim();
    let step = 1.0 / iterations as f64;
    let mut iterates = Vec::with_capacity(iterations + 1);
    let mut steps = Vec::with_capacity(iterations);
    let mut g = vec![0.0; n];
    let mut evals = 0u64;
    iterates.push(vec![0.0; n]);
    for t in 1..=iterations {
        let x = &iterates[t - 1];
        evals += gradient_into(f, x, gradient, &mut rng, &mut g)?;
        let v = body.linear_maximize(&g)?;
        let next: Vec<f64> = x.iter().zip(&v).map(|(xi, vi)| xi + step * vi).collect();
        steps.push(StepRecord { t, step, grad_norm: norm2(&g), value: None, evals });
        iterates.push(next);
    }
    Ok(Trajectory { solver: "fw", seed, iterates, steps })
}

/// Empirical `σ`: root mean squared deviation of `draws` batch estimates at `x`
/// around the exact gradient, or around their sample mean when no exact
/// gradient exists.
pub fn estimate_sigma(
    f: &dyn ContinuousObjective,
    x: &[f64],
    batch: usize,
    draws: usize,
    rng: &mut dyn RngCore,
) -> Result<f64> {
    if draws < 2 {
        return Err(Error::input("need at least two pilot draws"));
    }
    let n = f.dim();
    let mut samples = Vec::with_capacity(draws);
    for _ in 0..draws {
        let mut g = vec![0.0; n];
        gradient_into(f, x, GradientMode::Sampled { batch }, rng, &mut g)?;
        samples.push(g);
    }
    let (center, dof) = match f.grad_exact(x) {
        Ok(g) => (g, draws as f64),
        Err(_) => {
            let mut m = vec![0.0; n];
            for s in &samples {
                m.iter_mut().zip(s).for_each(|(a, b)| *a += b / draws as f64);
            }
            (m, (draws - 1) as f64)
        }
    };
    let ss: f64 = samples.iter().map(|s| s.iter().zip(&center).map(|(a, b)| (a - b).powi(2)).sum::<f64>()).sum();
    Ok((ss / dof).sqrt())
}

/// Default theoretical schedule for a run.
///
/// `L` is `m_f` for the entropy map and `n m_f` (an ℓ2 bound) for the Euclidean
/// map; `σ` comes from 100 pilot draws at `x1` (0 for exact gradients) and `R`
/// from the body's diameter under `map`.
pub fn default_theoretical_schedule(
    f: &dyn ContinuousObjective,
    body: &ConstraintSet,
    map: MirrorMap,
    gradient: GradientMode,
    x1: &[f64],
    seed: u64,
) -> Result<StepSchedule> {
    let smooth = f
        .smoothness()
        .ok_or_else(|| Error::input("objective has no smoothness constant; pass an explicit schedule"))?;
    let n = f.dim() as f64;
    let l = match (map, smooth.norm) {
        (MirrorMap::ScaledEntropy { .. }, _) | (MirrorMap::HalfSquaredEuclidean, Norm::L2) => smooth.constant,
        // entries of the Hessian are bounded by m_f, so its spectral norm is at most n m_f
        (MirrorMap::HalfSquaredEuclidean, Norm::L1) => n * smooth.constant,
    };
    let sigma = match gradient {
        GradientMode::Exact => 0.0,
        GradientMode::Sampled { batch } => {
            let mut rng = rng::named_stream(seed, "pilot");
            estimate_sigma(f, x1, batch, 100, &mut rng)?
        }
    };
    let r = body.diameter(map)?.sqrt();
    StepSchedule::theoretical(l, sigma, r)
}

/// Deterministic projected gradient ascent with a constant step, stopped once
/// `‖x_{t+1} - x_t‖_∞ <= tol`. Returns the final point and the number of steps.
pub fn gradient_ascent_fixed_point(
    f: &dyn ContinuousObjective,
    body: &ConstraintSet,
    step: f64,
    x1: &[f64],
    tol: f64,
    max_iterations: usize,
) -> Result<(Vec<f64>, usize)> {
    body.check_member(x1, "start point")?;
    let mut x = x1.to_vec();
    for t in 1..=max_iterations {
        let g = f.grad_exact(&x)?;
        let next = euclidean_step(body, &x, &g, step)?;
        let moved = next.iter().zip(&x).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        x = next;
        if moved <= tol {
            return Ok((x, t));
        }
    }
    Ok((x, max_iterations))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objectives::{Modular, MultilinearExtension};

    fn modular(w: &[f64]) -> MultilinearExtension<Modular> {
        MultilinearExtension::new(Modular::new(w.to_vec()).unwrap())
    }

    #[test]
    fn large_first_step_lands_on_top_k_vertex() {
        let f = modular(&[0.5, 3.0, 0.1, 2.0, 1.0]);
        let body = ConstraintSet::cardinality(5, 2.0).unwrap();
        let opts = AscentOptions::new(5, StepSchedule::constant(10.0).unwrap(), GradientMode::Exact, 0);
        let tr = sga(&f, &body, &opts, &[0.0; 5]).unwrap();
        let top = body.linear_maximize(&[0.5, 3.0, 0.1, 2.0, 1.0]).unwrap();
        for x in &tr.iterates[1..] {
            assert_eq!(x, &top);
        }
        assert_eq!(tr.iterates.len(), 6);
    }

    #[test]
    fn single_unrolled_update() {
        let f = modular(&[1.0, 2.0, 0.5]);
        let body = ConstraintSet::cardinality(3, 1.0).unwrap();
        let sched = StepSchedule::theoretical(4.0, 0.0, 1.0).unwrap();
        let x1 = [0.2, 0.1, 0.3];
        let tr = sga(&f, &body, &AscentOptions::new(1, sched, GradientMode::Exact, 0), &x1).unwrap();
        let g = f.grad_exact(&x1).unwrap();
        let y: Vec<f64> = x1.iter().zip(&g).map(|(x, g)| x + 0.25 * g).collect();
        assert_eq!(tr.iterate(2), body.project_euclidean(&y).unwrap().as_slice());
    }

    #[test]
    fn infeasible_start_is_rejected() {
        let f = modular(&[1.0, 1.0]);
        let body = ConstraintSet::cardinality(2, 1.0).unwrap();
        let opts = AscentOptions::new(1, StepSchedule::constant(1.0).unwrap(), GradientMode::Exact, 0);
        assert!(matches!(sga(&f, &body, &opts, &[0.8, 0.8]), Err(Error::Input(_))));
    }

    #[test]
    fn entropy_step_is_a_softmax() {
        let w = [0.3, 1.2];
        let f = modular(&w);
        let body = ConstraintSet::scaled_simplex(2, 1.0).unwrap();
        let opts = AscentOptions::new(1, StepSchedule::constant(1.0).unwrap(), GradientMode::Exact, 0);
        let tr = sma(&f, &body, &opts, MirrorMap::ScaledEntropy { k: 1.0 }, None).unwrap();
        let z = w[0].exp() + w[1].exp();
        let x2 = tr.iterate(2);
        assert!((x2[0] - w[0].exp() / z).abs() < 1e-15 && (x2[1] - w[1].exp() / z).abs() < 1e-15);
    }

    #[test]
    fn zero_gradient_keeps_entropy_iterates_fixed() {
        let f = modular(&[0.0, 0.0, 0.0]);
        let body = ConstraintSet::scaled_simplex(3, 2.0).unwrap();
        let opts = AscentOptions::new(4, StepSchedule::constant(3.0).unwrap(), GradientMode::Sampled { batch: 2 }, 5);
        let tr = sma(&f, &body, &opts, MirrorMap::ScaledEntropy { k: 2.0 }, None).unwrap();
        for x in &tr.iterates {
            for v in x {
                assert!((v - 2.0 / 3.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn euclidean_mirror_map_is_sga() {
        let f = MultilinearExtension::new(
            crate::objectives::coverage_from_sets(vec![vec![0, 1], vec![1, 2], vec![2, 3], vec![0, 3]], 4).unwrap(),
        );
        let body = ConstraintSet::cardinality(4, 2.0).unwrap();
        let opts =
            AscentOptions::new(30, StepSchedule::inverse_sqrt(0.3).unwrap(), GradientMode::Sampled { batch: 3 }, 77);
        let x1 = [0.1, 0.2, 0.3, 0.4];
        let a = sga(&f, &body, &opts, &x1).unwrap();
        let b = sma(&f, &body, &opts, MirrorMap::HalfSquaredEuclidean, Some(&x1)).unwrap();
        assert_eq!(a.iterates, b.iterates);
    }

    #[test]
    fn frank_wolfe_needs_origin_and_hits_vertex() {
        let f = modular(&[0.5, 3.0, 0.1, 2.0]);
        let simplex = ConstraintSet::scaled_simplex(4, 2.0).unwrap();
        assert!(matches!(frank_wolfe(&f, &simplex, 10, GradientMode::Exact, 0), Err(Error::Capability(_))));
        let body = ConstraintSet::cardinality(4, 2.0).unwrap();
        let tr = frank_wolfe(&f, &body, 8, GradientMode::Exact, 0).unwrap();
        let last = tr.last();
        for (a, b) in last.iter().zip([0.0, 1.0, 0.0, 1.0]) {
            assert!((a - b).abs() < 1e-12);
        }
        let one = frank_wolfe(&f, &body, 1, GradientMode::Exact, 0).unwrap();
        assert_eq!(one.last(), &[0.0, 1.0, 0.0, 1.0]);
    }

    #[test]
    fn runs_are_deterministic_per_seed() {
        let f = MultilinearExtension::new(
            crate::objectives::coverage_from_sets(vec![vec![0, 1], vec![1, 2], vec![2], vec![0, 2]], 3).unwrap(),
        );
        let body = ConstraintSet::cardinality(4, 2.0).unwrap();
        let opts =
            AscentOptions::new(40, StepSchedule::inverse_sqrt(0.5).unwrap(), GradientMode::Sampled { batch: 2 }, 9);
        let a = sga(&f, &body, &opts, &[0.0; 4]).unwrap();
        let b = sga(&f, &body, &opts, &[0.0; 4]).unwrap();
        assert_eq!(a, b);
        let c = sga(&f, &body, &AscentOptions { seed: 10, ..opts }, &[0.0; 4]).unwrap();
        assert_ne!(a.iterates, c.iterates);
        assert_eq!(a.total_evals(), 40 * 2 * 4);
    }

    #[test]
    fn sigma_of_deterministic_oracle_is_zero() {
        let f = modular(&[1.0, 2.0]);
        let mut rng = crate::rng::stream(0);
        assert_eq!(estimate_sigma(&f, &[0.5, 0.5], 4, 10, &mut rng).unwrap(), 0.0);
    }
}
