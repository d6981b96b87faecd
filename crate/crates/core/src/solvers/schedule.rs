use crate::{Error, Result};

/// Step sizes `μ_t`, `t = 1, 2, ..`; all variants are positive and non-increasing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepSchedule {
    /// `μ_t = 1 / (L + (σ/R) √t)`.
    Theoretical {
        l: f64,
        sigma: f64,
        r: f64,
    },
    /// `μ_t = c / √t`.
    InverseSqrt {
        c: f64,
    },
    Constant {
        step: f64,
    },
}

impl StepSchedule {
    pub fn theoretical(l: f64, sigma: f64, r: f64) -> Result<Self> {
        if !(l >= 0.0 && sigma >= 0.0 && r > 0.0) || !(l > 0.0 || sigma > 0.0) {
            return Err(Error::input(format!(
                "theoretical schedule needs L >= 0, σ >= 0, R > 0 and L + σ > 0 (got L = {l}, σ = {sigma}, R = {r})"
            )));
        }
        Ok(StepSchedule::Theoretical { l, sigma, r })
    }

    pub fn inverse_sqrt(c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::input(format!("step constant c = {c} must be positive")));
        }
        Ok(StepSchedule::InverseSqrt { c })
    }

    pub fn constant(step: f64) -> Result<Self> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::input(format!("step {step} must be positive")));
        }
        Ok(StepSchedule::Constant { step })
    }

    /// `μ_t` for `t >= 1`.
    pub fn step(&self, t: usize) -> f64 {
        let t = t.max(1) as f64;
        match *self {
            StepSchedule::Theoretical { l, sigma, r } => 1.0 / (l + sigma / r * t.sqrt()),
            StepSchedule::InverseSqrt { c } => c / t.sqrt(),
            StepSchedule::Constant { step } => step,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theoretical_reduces_to_inverse_l() {
        let s = StepSchedule::theoretical(4.0, 0.0, 2.0).unwrap();
        assert_eq!(s.step(1), 0.25);
        assert_eq!(s.step(1000), 0.25);
        let s = StepSchedule::theoretical(1.0, 2.0, 1.0).unwrap();
        assert!((s.step(4) - 1.0 / 5.0).abs() < 1e-15);
    }

    #[test]
    fn schedules_are_positive_and_non_increasing() {
        for s in [
            StepSchedule::theoretical(0.0, 1.0, 3.0).unwrap(),
            StepSchedule::inverse_sqrt(0.7).unwrap(),
            StepSchedule::constant(0.1).unwrap(),
        ] {
            let mut prev = f64::INFINITY;
            for t in 1..500 {
                let mu = s.step(t);
                assert!(mu > 0.0 && mu <= prev);
                prev = mu;
            }
        }
    }

    #[test]
    fn invalid_parameters() {
        assert!(StepSchedule::theoretical(0.0, 0.0, 1.0).is_err());
        assert!(StepSchedule::theoretical(1.0, 1.0, 0.0).is_err());
        assert!(StepSchedule::inverse_sqrt(-1.0).is_err());
        assert!(StepSchedule::constant(0.0).is_err());
    }
}
