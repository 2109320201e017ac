use crate::error::{check_non_negative, check_positive, Error, Result};
use crate::model::{paper_knots, ThresholdSpec};
use crate::numeric::bisect;

/// Stationary activity `1/(1+σ)` of the constant-threshold problem.
pub fn n_star(sigma: f64) -> Result<f64> {
    if !(sigma > 0.0 && sigma < 1.0) {
        return Err(Error::Domain {
            what: "sigma",
            value: sigma,
            expected: "0 < sigma < 1",
        });
    }
    Ok(1.0 / (1.0 + sigma))
}

/// Stationary density `A(s)` of the constant-threshold problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationaryProfile {
    pub sigma: f64,
    pub activity: f64,
}

impl StationaryProfile {
    pub fn eval(&self, s: f64) -> f64 {
        if s <= self.sigma {
            self.activity
        } else {
            self.activity * (self.sigma - s).exp()
        }
    }

    /// `∫_a^b A`.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        let flat = (b.min(self.sigma) - a).max(0.0) * self.activity;
        let lo = a.max(self.sigma);
        let tail = if b > lo {
            self.activity * ((self.sigma - lo).exp() - (self.sigma - b).exp())
        } else {
            0.0
        };
        flat + tail
    }
}

pub fn linear_stationary_profile(sigma: f64) -> Result<StationaryProfile> {
    Ok(StationaryProfile {
        sigma,
        activity: n_star(sigma)?,
    })
}

/// Solution of `N(1 + σ(J N)) = 1` by bisection on `[1/(1+σ⁺), 1/(1+σ⁻)]`.
pub fn steady_state_nonlinear(spec: &ThresholdSpec, connectivity: f64) -> Result<f64> {
    spec.validate()?;
    check_non_negative("J", connectivity)?;
    let lo = 1.0 / (1.0 + spec.sigma_plus());
    let hi = 1.0 / (1.0 + spec.sigma_minus());
    let h = |n: f64| n * (1.0 + spec.value(connectivity * n)) - 1.0;
    if hi - lo <= 0.0 {
        return Ok(lo);
    }
    // the bracket ends are roots for thresholds locked at σ⁺ or σ⁻
    for end in [lo, hi] {
        if h(end).abs() <= 1e-14 {
            return Ok(end);
        }
    }
    bisect(h, lo, hi, 1e-16)
}

/// `(N⁻, N⁺) = (1/(2e^α−1), e^α/(2e^α−1))`.
pub fn n_minus_plus(alpha: f64) -> Result<(f64, f64)> {
    check_positive("alpha", alpha)?;
    Ok(paper_knots(alpha))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn linear_values() {
        assert_abs_diff_eq!(n_star(0.5).unwrap(), 2.0 / 3.0, epsilon = 1e-15);
        assert!(n_star(1.0).is_err());
        let a = linear_stationary_profile(0.5).unwrap();
        assert_abs_diff_eq!(a.eval(0.5), 2.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(a.eval(1.5), (2.0 / 3.0) * (-1f64).exp(), epsilon = 1e-15);
        assert_abs_diff_eq!(a.integral(0.0, 200.0), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn nonlinear_steady_states() {
        let spec = ThresholdSpec::affine_clipped(0.5, 0.1, 0.4).unwrap();
        let exact = (1.5 - 1.85f64.sqrt()) / 0.2;
        let n = steady_state_nonlinear(&spec, 1.0).unwrap();
        assert_abs_diff_eq!(n, exact, epsilon = 1e-13);
        let c = ThresholdSpec::constant(0.5).unwrap();
        assert_abs_diff_eq!(
            steady_state_nonlinear(&c, 3.0).unwrap(),
            2.0 / 3.0,
            epsilon = 1e-14
        );
        let p = ThresholdSpec::paper(3.0).unwrap();
        assert_abs_diff_eq!(
            steady_state_nonlinear(&p, 0.0).unwrap(),
            1.0 / 7.0,
            epsilon = 1e-14
        );
        let (lo, hi) = n_minus_plus(1.0).unwrap();
        assert_abs_diff_eq!(hi / lo, 1f64.exp(), epsilon = 1e-14);
    }

    proptest! {
        #[test]
        fn steady_state_is_a_fixed_point(alpha in 0.05f64..4.0, j in 0.0f64..3.0) {
            let spec = ThresholdSpec::paper(alpha).unwrap();
            let n = steady_state_nonlinear(&spec, j).unwrap();
            prop_assert!((n - 1.0 / (1.0 + spec.value(j * n))).abs() <= 1e-12);
        }
    }
}
