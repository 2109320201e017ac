//! Threshold laws, initial densities and run configuration.

use std::fmt;
use std::sync::Arc;

use crate::error::{check_non_negative, check_positive, Error, Result};

/// Refractory threshold σ as a function of the (scaled) network input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThresholdSpec {
    Constant {
        sigma: f64,
    },
    /// `2α` below `N⁻`, `2α − ln x + ln N⁻` in between, `α` above `N⁺`.
    PaperPiecewise {
        alpha: f64,
    },
    /// `max(σ₀ − slope·x, floor)`.
    AffineClipped {
        sigma0: f64,
        slope: f64,
        floor: f64,
    },
}

/// Knots `(N⁻, N⁺)` of the piecewise threshold.
pub(crate) fn paper_knots(alpha: f64) -> (f64, f64) {
    let e = alpha.exp();
    let d = 2.0 * e - 1.0;
    (1.0 / d, e / d)
}

impl ThresholdSpec {
    pub fn constant(sigma: f64) -> Result<Self> {
        let s = ThresholdSpec::Constant { sigma };
        s.validate()?;
        Ok(s)
    }

    pub fn paper(alpha: f64) -> Result<Self> {
        let s = ThresholdSpec::PaperPiecewise { alpha };
        s.validate()?;
        Ok(s)
    }

    pub fn affine_clipped(sigma0: f64, slope: f64, floor: f64) -> Result<Self> {
        let s = ThresholdSpec::AffineClipped {
            sigma0,
            slope,
            floor,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            ThresholdSpec::Constant { sigma } => check_positive("sigma", sigma),
            ThresholdSpec::PaperPiecewise { alpha } => check_positive("alpha", alpha),
            ThresholdSpec::AffineClipped {
                sigma0,
                slope,
                floor,
            } => {
                check_positive("floor", floor)?;
                check_non_negative("slope", slope)?;
                check_positive("sigma0", sigma0)?;
                if floor > sigma0 {
                    return Err(Error::Domain {
                        what: "floor",
                        value: floor,
                        expected: "floor <= sigma0",
                    });
                }
                Ok(())
            }
        }
    }

    /// σ(x) for `x ≥ 0`; negative or NaN input is a domain error.
    pub fn eval(&self, x: f64) -> Result<f64> {
        if !(x >= 0.0) {
            return Err(Error::Domain {
                what: "threshold input",
                value: x,
                expected: ">= 0",
            });
        }
        Ok(self.value(x))
    }

    /// Unchecked σ(x); negative input is treated as 0.
    #[inline]
    pub fn value(&self, x: f64) -> f64 {
        let x = x.max(0.0);
        match *self {
            ThresholdSpec::Constant { sigma } => sigma,
            ThresholdSpec::PaperPiecewise { alpha } => {
                let (lo, hi) = paper_knots(alpha);
                if x <= lo {
                    2.0 * alpha
                } else if x >= hi {
                    alpha
                } else {
                    (2.0 * alpha - x.ln() + lo.ln()).clamp(alpha, 2.0 * alpha)
                }
            }
            ThresholdSpec::AffineClipped {
                sigma0,
                slope,
                floor,
            } => (sigma0 - slope * x).max(floor),
        }
    }

    /// Right derivative of σ at `x`.
    pub fn derivative(&self, x: f64) -> f64 {
        let x = x.max(0.0);
        match *self {
            ThresholdSpec::Constant { .. } => 0.0,
            ThresholdSpec::PaperPiecewise { alpha } => {
                let (lo, hi) = paper_knots(alpha);
                if x >= lo && x < hi {
                    -1.0 / x
                } else {
                    0.0
                }
            }
            ThresholdSpec::AffineClipped {
                sigma0,
                slope,
                floor,
            } => {
                if sigma0 - slope * x > floor {
                    -slope
                } else {
                    0.0
                }
            }
        }
    }

    /// Infimum of σ.
    pub fn sigma_minus(&self) -> f64 {
        match *self {
            ThresholdSpec::Constant { sigma } => sigma,
            ThresholdSpec::PaperPiecewise { alpha } => alpha,
            ThresholdSpec::AffineClipped { floor, .. } => floor,
        }
    }

    /// σ(0), the supremum of σ.
    pub fn sigma_plus(&self) -> f64 {
        match *self {
            ThresholdSpec::Constant { sigma } => sigma,
            ThresholdSpec::PaperPiecewise { alpha } => 2.0 * alpha,
            ThresholdSpec::AffineClipped { sigma0, .. } => sigma0,
        }
    }

    /// Lipschitz constant of σ.
    pub fn lipschitz(&self) -> f64 {
        match *self {
            ThresholdSpec::Constant { .. } => 0.0,
            ThresholdSpec::PaperPiecewise { alpha } => 2.0 * alpha.exp() - 1.0,
            ThresholdSpec::AffineClipped {
                sigma0,
                slope,
                floor,
            } => {
                if sigma0 > floor {
                    slope
                } else {
                    0.0
                }
            }
        }
    }
}

/// σ evaluated at `J·x`.
pub fn sigma_eval(spec: &ThresholdSpec, connectivity: f64, x: f64) -> Result<f64> {
    check_non_negative("J", connectivity)?;
    if !(x >= 0.0) {
        return Err(Error::Domain {
            what: "activity",
            value: x,
            expected: ">= 0",
        });
    }
    spec.eval(connectivity * x)
}

/// Whether a neuron of age `s` discharges under input `x`: `s > σ(J·x)`.
pub fn firing_indicator(spec: &ThresholdSpec, connectivity: f64, s: f64, x: f64) -> Result<bool> {
    check_non_negative("age", s)?;
    Ok(s > sigma_eval(spec, connectivity, x)?)
}

/// Initial age density; it is renormalized to unit mass on the grid.
#[derive(Clone)]
pub enum InitialDensity {
    /// Indicator of `[0, 1]`.
    UnitBlock,
    /// `e^{-s}`.
    Exponential,
    /// Stationary profile of the constant-threshold problem.
    LinearStationary {
        sigma: f64,
    },
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for InitialDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitialDensity::UnitBlock => write!(f, "UnitBlock"),
            InitialDensity::Exponential => write!(f, "Exponential"),
            InitialDensity::LinearStationary { sigma } => {
                write!(f, "LinearStationary {{ sigma: {sigma} }}")
            }
            InitialDensity::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

impl InitialDensity {
    pub fn custom<F: Fn(f64) -> f64 + Send + Sync + 'static>(f: F) -> Self {
        InitialDensity::Custom(Arc::new(f))
    }

    /// Exact integral over `[a, b]` (3-point Gauss for custom densities).
    fn integral(&self, a: f64, b: f64) -> f64 {
        match self {
            InitialDensity::UnitBlock => (b.min(1.0) - a.max(0.0)).max(0.0),
            InitialDensity::Exponential => (-a).exp() - (-b).exp(),
            InitialDensity::LinearStationary { sigma } => {
                let n = 1.0 / (1.0 + sigma);
                let flat = (b.min(*sigma) - a).max(0.0) * n;
                let lo = a.max(*sigma);
                let tail = if b > lo {
                    n * ((sigma - lo).exp() - (sigma - b).exp())
                } else {
                    0.0
                };
                flat + tail
            }
            InitialDensity::Custom(f) => {
                let c = 0.5 * (a + b);
                let h = 0.5 * (b - a);
                let d = h * (0.6f64).sqrt();
                h * (5.0 * f(c - d) + 8.0 * f(c) + 5.0 * f(c + d)) / 9.0
            }
        }
    }
}

/// Number of age cells for a domain `[0, s_max]` with spacing `ds`.
pub fn cell_count(s_max: f64, ds: f64) -> usize {
    (s_max / ds).round().max(1.0) as usize
}

/// Cell averages of `density` on the cells `[(i−1)Δs, iΔs]`, renormalized to
/// unit discrete mass. Values must lie in `[0, 1]`.
pub fn validate_initial(density: &InitialDensity, s_max: f64, ds: f64) -> Result<Vec<f64>> {
    check_positive("ds", ds)?;
    check_positive("smax", s_max)?;
    if let InitialDensity::LinearStationary { sigma } = density {
        if !(*sigma > 0.0 && *sigma < 1.0) {
            return Err(Error::Domain {
                what: "stationary sigma",
                value: *sigma,
                expected: "0 < sigma < 1",
            });
        }
    }
    let cells = cell_count(s_max, ds);
    let mut values = Vec::with_capacity(cells);
    for i in 0..cells {
        let a = i as f64 * ds;
        let b = (i + 1) as f64 * ds;
        let v = density.integral(a, b) / ds;
        if !v.is_finite() || !(-1e-12..=1.0 + 1e-12).contains(&v) {
            return Err(Error::InvalidInitial(format!(
                "cell average {v} on [{a}, {b}] is not in [0, 1]"
            )));
        }
        values.push(v.clamp(0.0, 1.0));
    }
    let total = ds * crate::numeric::stable_sum(&values);
    if total < 0.5 {
        return Err(Error::Truncation { captured: total });
    }
    let scale = 1.0 / total;
    for v in values.iter_mut() {
        *v *= scale;
        if *v > 1.0 + 1e-12 {
            return Err(Error::InvalidInitial(format!(
                "renormalized density reaches {v} > 1 (captured mass {total})"
            )));
        }
    }
    Ok(values)
}

/// Everything a simulation run needs.
#[derive(Debug, Clone)]
pub struct ModelConfig {
    pub threshold: ThresholdSpec,
    pub connectivity: f64,
    /// Delay of the input relaxation; 0 means the input is the previous activity.
    pub lambda: f64,
    pub ds: f64,
    /// Age truncation; `None` means σ⁺ + 20.
    pub s_max: Option<f64>,
    pub t_max: f64,
    pub initial: InitialDensity,
}

impl ModelConfig {
    pub fn new(threshold: ThresholdSpec, initial: InitialDensity) -> Self {
        ModelConfig {
            threshold,
            connectivity: 1.0,
            lambda: 0.0,
            ds: 1e-3,
            s_max: None,
            t_max: 20.0,
            initial,
        }
    }

    pub fn with_connectivity(mut self, j: f64) -> Self {
        self.connectivity = j;
        self
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn with_ds(mut self, ds: f64) -> Self {
        self.ds = ds;
        self
    }

    pub fn with_s_max(mut self, s_max: f64) -> Self {
        self.s_max = Some(s_max);
        self
    }

    pub fn with_t_max(mut self, t_max: f64) -> Self {
        self.t_max = t_max;
        self
    }

    pub fn s_max(&self) -> f64 {
        self.s_max.unwrap_or(self.threshold.sigma_plus() + 20.0)
    }

    /// Time step; the scheme runs on the diagonal `Δt = Δs`.
    pub fn dt(&self) -> f64 {
        self.ds
    }

    pub fn steps(&self) -> u64 {
        (self.t_max / self.dt() - 1e-9).ceil().max(0.0) as u64
    }

    pub fn validate(&self) -> Result<()> {
        self.threshold.validate()?;
        check_non_negative("J", self.connectivity)?;
        check_non_negative("lambda", self.lambda)?;
        check_positive("ds", self.ds)?;
        check_non_negative("tmax", self.t_max)?;
        let floor = self.threshold.sigma_plus() + 10.0;
        let s_max = self.s_max();
        if !(s_max.is_finite() && s_max >= floor) {
            return Err(Error::InvalidConfig(format!(
                "smax = {s_max} must be at least sigma+ + 10 = {floor}"
            )));
        }
        if self.ds > 0.1 * self.threshold.sigma_minus() {
            return Err(Error::InvalidConfig(format!(
                "ds = {} is too coarse to resolve the threshold (sigma- = {})",
                self.ds,
                self.threshold.sigma_minus()
            )));
        }
        if self.lambda > 0.0 && self.dt() > self.lambda {
            return Err(Error::InvalidConfig(format!(
                "dt = {} exceeds lambda = {}",
                self.dt(),
                self.lambda
            )));
        }
        Ok(())
    }
}
