use crate::geometry::ConstraintSet;
use crate::objectives::ContinuousObjective;
use crate::{Error, Result};

/// Relative tolerance for certifying a point as stationary.
pub const STATIONARY_TOL: f64 = 1e-6;

/// `max_{y∈K} ⟨∇F(x), y - x⟩`, with the exact gradient.
pub fn stationarity_gap(f: &dyn ContinuousObjective, body: &ConstraintSet, x: &[f64]) -> Result<f64> {
    body.check_member(x, "point")?;
    let g = f.grad_exact(x)?;
    gap_with_gradient(body, x, &g)
}

/// Same gap for a caller-supplied gradient (e.g. a large-batch estimate).
pub fn gap_with_gradient(body: &ConstraintSet, x: &[f64], g: &[f64]) -> Result<f64> {
    let v = body.linear_maximize(g)?;
    Ok(g.iter().zip(v.iter().zip(x)).map(|(gi, (vi, xi))| gi * (vi - xi)).sum())
}

/// Gap `<= 1e-6 (1 + ‖∇F(x)‖)`.
pub fn is_certified_stationary(f: &dyn ContinuousObjective, body: &ConstraintSet, x: &[f64]) -> Result<bool> {
    body.check_member(x, "point")?;
    let g = f.grad_exact(x)?;
    let gap = gap_with_gradient(body, x, &g)?;
    let norm = g.iter().map(|a| a * a).sum::<f64>().sqrt();
    Ok(gap <= STATIONARY_TOL * (1.0 + norm))
}

/// Guaranteed floor `γ²/(1+γ²) · opt` for `F` at any stationary point.
pub fn stationary_value_bound(gamma: f64, opt: f64) -> Result<f64> {
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::input(format!("gamma = {gamma} must lie in (0, 1]")));
    }
    if opt.is_nan() || opt < 0.0 {
        return Err(Error::input(format!("opt = {opt} must be non-negative")));
    }
    let g2 = gamma * gamma;
    Ok(g2 / (1.0 + g2) * opt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objectives::{Modular, MultilinearExtension};

    #[test]
    fn modular_gaps() {
        let f = MultilinearExtension::new(Modular::new(vec![1.0, 0.0]).unwrap());
        let body = ConstraintSet::scaled_simplex(2, 1.0).unwrap();
        assert_eq!(stationarity_gap(&f, &body, &[0.0, 1.0]).unwrap(), 1.0);
        assert_eq!(stationarity_gap(&f, &body, &[1.0, 0.0]).unwrap(), 0.0);
        assert!(is_certified_stationary(&f, &body, &[1.0, 0.0]).unwrap());
        assert!(!is_certified_stationary(&f, &body, &[0.5, 0.5]).unwrap());
        assert!(matches!(stationarity_gap(&f, &body, &[0.7, 0.7]), Err(Error::Input(_))));
    }

    #[test]
    fn value_bound() {
        assert_eq!(stationary_value_bound(1.0, 10.0).unwrap(), 5.0);
        assert!((stationary_value_bound(0.5, 10.0).unwrap() - 2.0).abs() < 1e-15);
        assert!(stationary_value_bound(1e-9, 10.0).unwrap() < 1e-16);
        assert!(stationary_value_bound(0.0, 1.0).is_err());
        assert!(stationary_value_bound(1.5, 1.0).is_err());
    }
}
