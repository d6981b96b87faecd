use std::sync::OnceLock;

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, RngCore};

use super::multilinear::{self, partials_by_pinning, ValueTable, EXACT_CAP, TABLE_CAP};
use super::{SetFunction, Subset};
use crate::{Error, Result};

/// Norm in which a smoothness constant is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Norm {
    L1,
    L2,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Smoothness {
    pub constant: f64,
    pub norm: Norm,
}

/// A continuous objective `F` on `[0,1]^n` with value and gradient oracles.
pub trait ContinuousObjective: Send + Sync {
    fn dim(&self) -> usize;

    /// Exact value; a capability error when only sampling is feasible.
    fn value(&self, x: &[f64]) -> Result<f64>;

    /// Unbiased single-draw estimate of `F(x)`.
    fn value_sample(&self, x: &[f64], rng: &mut dyn RngCore) -> f64;

    fn grad_exact(&self, x: &[f64]) -> Result<Vec<f64>>;

    /// One unbiased gradient draw written into `out`.
    fn grad_sample(&self, x: &[f64], rng: &mut dyn RngCore, out: &mut [f64]);

    /// Single-function computations spent by one `grad_sample` call.
    fn sample_cost(&self) -> u64 {
        self.dim() as u64
    }

    /// Bound on `E‖g - ∇F‖²` for a single draw, if known.
    fn sigma_bound(&self) -> Option<f64> {
        None
    }

    fn smoothness(&self) -> Option<Smoothness> {
        None
    }

    /// Exact value when available, otherwise the mean of `samples` draws.
    fn value_or_estimate(&self, x: &[f64], samples: usize, rng: &mut dyn RngCore) -> f64 {
        match self.value(x) {
            Ok(v) => v,
            Err(_) => {
                let samples = samples.max(1);
                (0..samples).map(|_| self.value_sample(x, rng)).sum::<f64>() / samples as f64
            }
        }
    }
}

impl<T: ContinuousObjective + ?Sized> ContinuousObjective for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn value(&self, x: &[f64]) -> Result<f64> {
        (**self).value(x)
    }
    fn value_sample(&self, x: &[f64], rng: &mut dyn RngCore) -> f64 {
        (**self).value_sample(x, rng)
    }
    fn grad_exact(&self, x: &[f64]) -> Result<Vec<f64>> {
        (**self).grad_exact(x)
    }
    fn grad_sample(&self, x: &[f64], rng: &mut dyn RngCore, out: &mut [f64]) {
        (**self).grad_sample(x, rng, out)
    }
    fn sample_cost(&self) -> u64 {
        (**self).sample_cost()
    }
    fn sigma_bound(&self) -> Option<f64> {
        (**self).sigma_bound()
    }
    fn smoothness(&self) -> Option<Smoothness> {
        (**self).smoothness()
    }
}

impl<T: ContinuousObjective + ?Sized> ContinuousObjective for Box<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn value(&self, x: &[f64]) -> Result<f64> {
        (**self).value(x)
    }
    fn value_sample(&self, x: &[f64], rng: &mut dyn RngCore) -> f64 {
        (**self).value_sample(x, rng)
    }
    fn grad_exact(&self, x: &[f64]) -> Result<Vec<f64>> {
        (**self).grad_exact(x)
    }
    fn grad_sample(&self, x: &[f64], rng: &mut dyn RngCore, out: &mut [f64]) {
        (**self).grad_sample(x, rng, out)
    }
    fn sample_cost(&self) -> u64 {
        (**self).sample_cost()
    }
    fn sigma_bound(&self) -> Option<f64> {
        (**self).sigma_bound()
    }
    fn smoothness(&self) -> Option<Smoothness> {
        (**self).smoothness()
    }
}

/// Exact multilinear value through the cheapest available route: a closed form,
/// a cached value table (n <= 20), or direct enumeration (n <= 25).
struct ExactRoute {
    table: OnceLock<Option<ValueTable>>,
}

impl ExactRoute {
    fn new() -> Self {
        ExactRoute { table: OnceLock::new() }
    }

    fn available<F: SetFunction + ?Sized>(f: &F) -> bool {
        let n = f.ground_size();
        n <= EXACT_CAP || f.multilinear_value(&vec![0.0; n]).is_some()
    }

    fn value<F: SetFunction + ?Sized>(&self, f: &F, x: &[f64]) -> Result<f64> {
        if let Some(v) = f.multilinear_value(x) {
            return Ok(v);
        }
        let n = f.ground_size();
        if n <= TABLE_CAP {
            let table = self.table.get_or_init(|| ValueTable::build(f).ok());
            if let Some(t) = table {
                return Ok(t.multilinear(x));
            }
        }
        multilinear::multilinear_eval_exact(f, x)
    }
}

/// The multilinear extension of a set function as a continuous objective.
pub struct MultilinearExtension<F> {
    f: F,
    exact: ExactRoute,
}

impl<F: SetFunction> MultilinearExtension<F> {
    pub fn new(f: F) -> Self {
        MultilinearExtension { f, exact: ExactRoute::new() }
    }

    pub fn set_function(&self) -> &F {
        &self.f
    }
}

fn check_dim(n: usize, x: &[f64]) -> Result<()> {
    if x.len() != n {
        return Err(Error::input(format!("point has dimension {}, expected {n}", x.len())));
    }
    Ok(())
}

fn exact_unavailable(n: usize) -> Error {
    Error::capability(format!(
        "no closed form and n = {n} exceeds the enumeration cap of {EXACT_CAP}; use sampled oracles"
    ))
}

impl<F: SetFunction> ContinuousObjective for MultilinearExtension<F> {
    fn dim(&self) -> usize {
        self.f.ground_size()
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim(), x)?;
        if !ExactRoute::available(&self.f) {
            return Err(exact_unavailable(self.dim()));
        }
        self.exact.value(&self.f, x)
    }

    fn value_sample(&self, x: &[f64], rng: &mut dyn RngCore) -> f64 {
        self.f.eval(&Subset::sample(x, rng))
    }

    fn grad_exact(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim(), x)?;
        if !ExactRoute::available(&self.f) {
            return Err(exact_unavailable(self.dim()));
        }
        // the route has been checked, so pinned evaluations cannot fail
        Ok(partials_by_pinning(x, |y| self.exact.value(&self.f, y).unwrap_or(f64::NAN)))
    }

    fn grad_sample(&self, x: &[f64], rng: &mut dyn RngCore, out: &mut [f64]) {
        let s = Subset::sample(x, rng);
        self.f.marginals(&s, out);
    }

    fn smoothness(&self) -> Option<Smoothness> {
        Some(Smoothness { constant: super::smoothness_bound_l1(&self.f), norm: Norm::L1 })
    }
}

/// `F(x) = E_{i~w}[F_i(x)]` over multilinear extensions of a family of set functions.
///
/// A gradient draw samples a component `i ~ w` and a set `S ~ x`, then returns the
/// marginals of `f_i` at `S`.
pub struct StochasticObjective<F> {
    n: usize,
    parts: Vec<F>,
    weights: Vec<f64>,
    sampler: Option<WeightedIndex<f64>>,
    exact: Vec<ExactRoute>,
}

/// Builds the expectation objective; `weights = None` means uniform.
pub fn stochastic_objective<F: SetFunction>(fs: Vec<F>, weights: Option<Vec<f64>>) -> Result<StochasticObjective<F>> {
    let n = fs.first().ok_or_else(|| Error::input("stochastic objective needs at least one function"))?.ground_size();
    if fs.iter().any(|f| f.ground_size() != n) {
        return Err(Error::input("component functions disagree on dimension"));
    }
    let m = fs.len();
    let (weights, sampler) = match weights {
        None => (vec![1.0 / m as f64; m], None),
        Some(w) => {
            if w.len() != m {
                return Err(Error::input(format!("{} weights for {m} functions", w.len())));
            }
            if w.iter().any(|v| !v.is_finite() || *v < 0.0) || (w.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
                return Err(Error::input("weights must be a probability distribution"));
            }
            let sampler = WeightedIndex::new(&w).map_err(|e| Error::input(e.to_string()))?;
            (w, Some(sampler))
        }
    };
    let exact = (0..m).map(|_| ExactRoute::new()).collect();
    Ok(StochasticObjective { n, parts: fs, weights, sampler, exact })
}

impl<F: SetFunction> StochasticObjective<F> {
    pub fn parts(&self) -> &[F] {
        &self.parts
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    fn draw_component(&self, rng: &mut dyn RngCore) -> usize {
        match &self.sampler {
            Some(s) => s.sample(rng),
            None => rng.gen_range(0..self.parts.len()),
        }
    }

    fn exact_available(&self) -> bool {
        self.parts.iter().all(ExactRoute::available)
    }

    fn exact_value(&self, x: &[f64]) -> Result<f64> {
        let mut v = 0.0;
        for ((f, w), route) in self.parts.iter().zip(&self.weights).zip(&self.exact) {
            v += w * route.value(f, x)?;
        }
        Ok(v)
    }
}

impl<F: SetFunction> ContinuousObjective for StochasticObjective<F> {
    fn dim(&self) -> usize {
        self.n
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.n, x)?;
        if !self.exact_available() {
            return Err(exact_unavailable(self.n));
        }
        self.exact_value(x)
    }

    fn value_sample(&self, x: &[f64], rng: &mut dyn RngCore) -> f64 {
        let i = self.draw_component(rng);
        self.parts[i].eval(&Subset::sample(x, rng))
    }

    fn grad_exact(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.n, x)?;
        if !self.exact_available() {
            return Err(exact_unavailable(self.n));
        }
        Ok(partials_by_pinning(x, |y| self.exact_value(y).unwrap_or(f64::NAN)))
    }

    fn grad_sample(&self, x: &[f64], rng: &mut dyn RngCore, out: &mut [f64]) {
        let i = self.draw_component(rng);
        let s = Subset::sample(x, rng);
        self.parts[i].marginals(&s, out);
    }

    fn smoothness(&self) -> Option<Smoothness> {
        // m_f of the mean: max_j Σ_i w_i f_i({j})
        let l = (0..self.n)
            .map(|j| {
                let single = Subset::from_indices(self.n, [j]);
                self.parts.iter().zip(&self.weights).map(|(f, w)| w * f.eval(&single)).sum::<f64>()
            })
            .fold(0.0, f64::max);
        Some(Smoothness { constant: l, norm: Norm::L1 })
    }
}

type ValueFn = Box<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type GradFn = Box<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// Deterministic objective from value and gradient closures; gradient draws are exact.
pub struct FnObjective {
    n: usize,
    value: ValueFn,
    grad: GradFn,
    smoothness: Option<Smoothness>,
}

impl FnObjective {
    pub fn new(
        n: usize,
        value: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        grad: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        FnObjective { n, value: Box::new(value), grad: Box::new(grad), smoothness: None }
    }

    pub fn with_smoothness(mut self, s: Smoothness) -> Self {
        self.smoothness = Some(s);
        self
    }
}

impl ContinuousObjective for FnObjective {
    fn dim(&self) -> usize {
        self.n
    }
    fn value(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.n, x)?;
        Ok((self.value)(x))
    }
    fn value_sample(&self, x: &[f64], _rng: &mut dyn RngCore) -> f64 {
        (self.value)(x)
    }
    fn grad_exact(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.n, x)?;
        Ok((self.grad)(x))
    }
    fn grad_sample(&self, x: &[f64], _rng: &mut dyn RngCore, out: &mut [f64]) {
        out.copy_from_slice(&(self.grad)(x));
    }
    fn sample_cost(&self) -> u64 {
        1
    }
    fn sigma_bound(&self) -> Option<f64> {
        Some(0.0)
    }
    fn smoothness(&self) -> Option<Smoothness> {
        self.smoothness
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objectives::{coverage_from_sets, multilinear_grad_exact, Modular};
    use rand::Rng;

    fn random_point(n: usize, rng: &mut impl Rng) -> Vec<f64> {
        (0..n).map(|_| rng.gen()).collect()
    }

    #[test]
    fn single_function_matches_extension() {
        let f = coverage_from_sets(vec![vec![0, 1], vec![1, 2], vec![3], vec![0, 3, 4]], 5).unwrap();
        let ext = MultilinearExtension::new(f.clone());
        let st = stochastic_objective(vec![f.clone()], None).unwrap();
        let twice = stochastic_objective(vec![f.clone(), f.clone()], None).unwrap();
        let mut rng = crate::rng::stream(4);
        for _ in 0..10 {
            let x = random_point(4, &mut rng);
            let v = ext.value(&x).unwrap();
            assert!((st.value(&x).unwrap() - v).abs() < 1e-12);
            assert!((twice.value(&x).unwrap() - v).abs() < 1e-12);
            let g = multilinear_grad_exact(&f, &x).unwrap();
            for (a, b) in st.grad_exact(&x).unwrap().iter().zip(&g) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn averaged_linear_family_gradient() {
        // n - 1 linear functions e_i + e_n / 2
        let n = 5;
        let fs: Vec<Modular> = (0..n - 1)
            .map(|i| {
                let mut w = vec![0.0; n];
                w[i] = 1.0;
                w[n - 1] = 0.5;
                Modular::new(w).unwrap()
            })
            .collect();
        let obj = stochastic_objective(fs, None).unwrap();
        let g = obj.grad_exact(&vec![0.0; n]).unwrap();
        for gi in &g[..n - 1] {
            assert!((gi - 0.25).abs() < 1e-15);
        }
        assert!((g[n - 1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn dimension_and_weight_errors() {
        let a = Modular::new(vec![1.0, 2.0]).unwrap();
        let b = Modular::new(vec![1.0]).unwrap();
        assert!(stochastic_objective(vec![a.clone(), b], None).is_err());
        assert!(stochastic_objective(vec![a.clone(), a.clone()], Some(vec![0.5, 0.6])).is_err());
        assert!(stochastic_objective(vec![a.clone()], Some(vec![0.5, 0.5])).is_err());
        let ok = stochastic_objective(vec![a.clone(), a], Some(vec![0.25, 0.75])).unwrap();
        assert!(ok.value(&[1.0, 1.0]).unwrap() - 3.0 < 1e-15);
    }

    #[test]
    fn weighted_sampling_is_unbiased() {
        let a = Modular::new(vec![4.0, 0.0]).unwrap();
        let b = Modular::new(vec![0.0, 8.0]).unwrap();
        let obj = stochastic_objective(vec![a, b], Some(vec![0.75, 0.25])).unwrap();
        let mut rng = crate::rng::stream(8);
        let mut acc = [0.0; 2];
        let mut out = [0.0; 2];
        let draws = 40_000;
        for _ in 0..draws {
            obj.grad_sample(&[0.5, 0.5], &mut rng, &mut out);
            acc[0] += out[0];
            acc[1] += out[1];
        }
        assert!((acc[0] / draws as f64 - 3.0).abs() < 0.05);
        assert!((acc[1] / draws as f64 - 2.0).abs() < 0.05);
    }

    #[test]
    fn large_ground_set_without_closed_form_needs_sampling() {
        let f = crate::objectives::FnSetFunction::new(30, |s: &Subset| (s.len() as f64).sqrt());
        let ext = MultilinearExtension::new(f);
        assert!(matches!(ext.value(&[0.5; 30]), Err(Error::Capability(_))));
        let mut rng = crate::rng::stream(1);
        let est = ext.value_or_estimate(&[1.0; 30], 3, &mut rng);
        assert!((est - 30f64.sqrt()).abs() < 1e-12);
    }
}
