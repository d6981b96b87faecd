//! Verifiers for the structural definitions: set submodularity, the DR property
//! via cross second derivatives, the weak-DR ratio γ, and the ℓ1 smoothness bound.

use rand::{Rng, RngCore};

use super::{ContinuousObjective, SetFunction, Subset};
use crate::{Error, Result};

/// Largest ground set for exhaustive submodularity checks.
pub const BRUTE_FORCE_CAP: usize = 12;

fn slack(values: &[f64]) -> f64 {
    1e-9 * (1.0 + values.iter().fold(0.0f64, |m, v| m.max(v.abs())))
}

/// Exhaustive check of `f(A) + f(B) >= f(A ∪ B) + f(A ∩ B)`, optionally with monotonicity.
///
/// Uses the equivalent local form `f(S+i) + f(S+j) >= f(S+i+j) + f(S)` over all `S`
/// and `i, j ∉ S`, which needs `O(2^n n^2)` evaluations instead of `4^n`.
pub fn check_submodular_bruteforce<F: SetFunction + ?Sized>(f: &F, check_monotone: bool) -> Result<bool> {
    let n = f.ground_size();
    if n > BRUTE_FORCE_CAP {
        return Err(Error::capability(format!(
            "exhaustive submodularity check is capped at n = {BRUTE_FORCE_CAP}; use check_submodular_sampled"
        )));
    }
    let values: Vec<f64> = (0..1u64 << n).map(|m| f.eval(&Subset::from_mask(n, m))).collect();
    let tol = slack(&values);
    for s in 0..1usize << n {
        for i in (0..n).filter(|i| s >> i & 1 == 0) {
            let si = s | 1 << i;
            if check_monotone && values[si] < values[s] - tol {
                return Ok(false);
            }
            for j in (i + 1..n).filter(|j| s >> j & 1 == 0) {
                let sj = s | 1 << j;
                if values[si] + values[sj] < values[si | sj] + values[s] - tol {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Randomized fallback: `samples` random pairs `(A, B)` with fair-coin membership.
pub fn check_submodular_sampled<F: SetFunction + ?Sized>(
    f: &F,
    samples: usize,
    check_monotone: bool,
    rng: &mut dyn RngCore,
) -> bool {
    let n = f.ground_size();
    let half = vec![0.5; n];
    (0..samples).all(|_| {
        let a = Subset::sample(&half, rng);
        let b = Subset::sample(&half, rng);
        let (u, i) = (a.union(&b), a.intersection(&b));
        let vals = [f.eval(&a), f.eval(&b), f.eval(&u), f.eval(&i)];
        let tol = slack(&vals);
        let sub = vals[0] + vals[1] >= vals[2] + vals[3] - tol;
        let mono = !check_monotone || (vals[3] <= vals[0] + tol && vals[0] <= vals[2] + tol);
        sub && mono
    })
}

/// Checks that every finite-difference second derivative `∂²F/∂x_i∂x_j` is
/// non-positive up to `1e-6 + 10 h²`.
pub fn check_dr_crossderiv(f: &dyn ContinuousObjective, x: &[f64], h: f64) -> Result<bool> {
    let n = f.dim();
    if x.len() != n {
        return Err(Error::input("point dimension mismatch"));
    }
    if h.is_nan() || h <= 0.0 || x.iter().any(|&v| v - h < 0.0 || v + h > 1.0) {
        return Err(Error::input(format!("point must keep a margin of h = {h} inside the box")));
    }
    let tol = 1e-6 + 10.0 * h * h;
    let mut y = x.to_vec();
    let f0 = f.value(x)?;
    for i in 0..n {
        y[i] = x[i] + h;
        let plus = f.value(&y)?;
        y[i] = x[i] - h;
        let minus = f.value(&y)?;
        y[i] = x[i];
        if (plus - 2.0 * f0 + minus) / (h * h) > tol {
            return Ok(false);
        }
        for j in i + 1..n {
            let mut corner = |si: f64, sj: f64| -> Result<f64> {
                y[i] = x[i] + si * h;
                y[j] = x[j] + sj * h;
                let v = f.value(&y);
                y[i] = x[i];
                y[j] = x[j];
                v
            };
            let d = (corner(1.0, 1.0)? - corner(1.0, -1.0)? - corner(-1.0, 1.0)? + corner(-1.0, -1.0)?) / (4.0 * h * h);
            if d > tol {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Empirical weak-DR parameter: the minimum over sampled comparable pairs
/// `x <= y` and coordinates of `∇F(x)_i / ∇F(y)_i`, clamped to `[0, 1]`.
///
/// The extreme pair `(0, 1)` is always included; coordinates with
/// `∇F(y)_i <= 1e-12` are skipped.
pub fn estimate_gamma(f: &dyn ContinuousObjective, num_pairs: usize, rng: &mut dyn RngCore) -> Result<f64> {
    let n = f.dim();
    let mut best = f64::INFINITY;
    let mut visit = |x: &[f64], y: &[f64]| -> Result<()> {
        let gx = f.grad_exact(x)?;
        let gy = f.grad_exact(y)?;
        for (a, b) in gx.iter().zip(&gy) {
            if *b > 1e-12 {
                best = best.min(a / b);
            }
        }
        Ok(())
    };
    visit(&vec![0.0; n], &vec![1.0; n])?;
    for _ in 0..num_pairs {
        let x: Vec<f64> = (0..n).map(|_| rng.gen::<f64>().powi(2)).collect();
        let y: Vec<f64> = x.iter().map(|&xi| xi + (1.0 - xi) * (1.0 - rng.gen::<f64>().powi(2))).collect();
        visit(&x, &y)?;
    }
    if !best.is_finite() {
        return Err(Error::Diagnostic("no coordinate with a positive gradient at the upper points".into()));
    }
    Ok(best.clamp(0.0, 1.0))
}

/// `m_f = max_j f({j})`, an ℓ1 smoothness constant of the multilinear extension
/// of a monotone submodular `f`.
pub fn smoothness_bound_l1<F: SetFunction + ?Sized>(f: &F) -> f64 {
    let n = f.ground_size();
    (0..n).map(|j| f.eval(&Subset::from_indices(n, [j]))).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objectives::{
        coverage_from_sets, facility_location, FnObjective, FnSetFunction, Modular, MultilinearExtension, RatingsMatrix,
    };

    fn k2_family() -> crate::objectives::Coverage {
        coverage_from_sets(vec![vec![0, 4], vec![1, 4], vec![2], vec![3], vec![0, 1, 4]], 5).unwrap()
    }

    #[test]
    fn submodularity_brute_force() {
        assert!(check_submodular_bruteforce(&k2_family(), true).unwrap());
        let sq = FnSetFunction::new(3, |s: &Subset| (s.len() * s.len()) as f64);
        assert!(!check_submodular_bruteforce(&sq, false).unwrap());
        let w = Modular::new(vec![1.0, 2.0, 0.5]).unwrap();
        assert!(check_submodular_bruteforce(&w, true).unwrap());
        // submodular but decreasing
        let dec = FnSetFunction::new(3, |s: &Subset| 3.0 - s.len() as f64);
        assert!(check_submodular_bruteforce(&dec, false).unwrap());
        assert!(!check_submodular_bruteforce(&dec, true).unwrap());
    }

    #[test]
    fn brute_force_cap_and_sampled_fallback() {
        let big = Modular::new(vec![1.0; 13]).unwrap();
        assert!(matches!(check_submodular_bruteforce(&big, false), Err(Error::Capability(_))));
        let mut rng = crate::rng::stream(2);
        assert!(check_submodular_sampled(&big, 200, true, &mut rng));
        let sq = FnSetFunction::new(13, |s: &Subset| (s.len() * s.len()) as f64);
        assert!(!check_submodular_sampled(&sq, 200, false, &mut rng));
    }

    #[test]
    fn dr_cross_derivatives() {
        let ext = MultilinearExtension::new(k2_family());
        let mut rng = crate::rng::stream(6);
        for _ in 0..10 {
            let x: Vec<f64> = (0..5).map(|_| rng.gen_range(0.05..0.95)).collect();
            assert!(check_dr_crossderiv(&ext, &x, 1e-3).unwrap());
        }
        let sq = FnObjective::new(2, |x| (x[0] + x[1]).powi(2), |x| vec![2.0 * (x[0] + x[1]); 2]);
        assert!(!check_dr_crossderiv(&sq, &[0.5, 0.5], 1e-3).unwrap());
        let lin = MultilinearExtension::new(Modular::new(vec![1.0, 3.0]).unwrap());
        assert!(check_dr_crossderiv(&lin, &[0.5, 0.5], 1e-3).unwrap());
        assert!(check_dr_crossderiv(&lin, &[0.0005, 0.5], 1e-3).is_err());
    }

    #[test]
    fn gamma_estimates() {
        let mut rng = crate::rng::stream(7);
        let ext = MultilinearExtension::new(k2_family());
        let g = estimate_gamma(&ext, 200, &mut rng).unwrap();
        assert!((0.0..=1.0).contains(&g));
        let lin = MultilinearExtension::new(Modular::new(vec![1.0, 3.0]).unwrap());
        assert!((estimate_gamma(&lin, 50, &mut rng).unwrap() - 1.0).abs() < 1e-12);
        // F(x) = x_1 + x_1²/2: the derivative doubles from 0 to 1, so γ = 1/2
        let weak = FnObjective::new(1, |x| x[0] + x[0] * x[0] / 2.0, |x| vec![1.0 + x[0]]);
        assert!((estimate_gamma(&weak, 1000, &mut rng).unwrap() - 0.5).abs() < 1e-12);
        let flat = FnObjective::new(1, |_| 0.0, |_| vec![0.0]);
        assert!(matches!(estimate_gamma(&flat, 10, &mut rng), Err(Error::Diagnostic(_))));
    }

    #[test]
    fn singleton_bounds() {
        assert_eq!(smoothness_bound_l1(&k2_family()), 3.0);
        assert_eq!(smoothness_bound_l1(&Modular::new(vec![0.5, 4.0, 2.0]).unwrap()), 4.0);
        let r = RatingsMatrix::from_dense(&[vec![5.0, 1.0, 0.0], vec![2.0, 4.0, 3.0]]).unwrap();
        assert!(smoothness_bound_l1(&facility_location(&r)) <= 5.0);
    }
}
