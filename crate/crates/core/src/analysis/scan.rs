use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::model::ModelConfig;
use crate::numeric::linspace;
use crate::solver::run;

use super::regime::{classify_trace, ClassifyParams, Regime, RegimeReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanParam {
    Connectivity,
    Lambda,
}

impl ScanParam {
    pub fn name(&self) -> &'static str {
        match self {
            ScanParam::Connectivity => "J",
            ScanParam::Lambda => "lambda",
        }
    }

    pub fn apply(&self, base: &ModelConfig, value: f64) -> ModelConfig {
        match self {
            ScanParam::Connectivity => base.clone().with_connectivity(value),
            ScanParam::Lambda => base.clone().with_lambda(value),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanRow {
    pub value: f64,
    pub report: RegimeReport,
}

/// Bracket of the Converged/Periodic transition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Critical {
    pub lo: f64,
    pub hi: f64,
    /// Both ends were classified cleanly and the bracket reached the target
    /// width; otherwise the bracket is only an interval estimate.
    pub resolved: bool,
}

impl Critical {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanTable {
    pub param: ScanParam,
    /// Grid rows in increasing parameter order.
    pub rows: Vec<ScanRow>,
    /// Extra runs made while bisecting the transition.
    pub refinements: Vec<ScanRow>,
    pub critical: Option<Critical>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanSettings {
    pub classify: ClassifyParams,
    /// Target width of the transition bracket.
    pub width: f64,
    pub exec: Execution,
}

impl ScanSettings {
    pub fn new(classify: ClassifyParams) -> Self {
        ScanSettings {
            classify,
            width: 0.05,
            exec: Execution::default(),
        }
    }
}

fn classify_at(
    base: &ModelConfig,
    param: ScanParam,
    value: f64,
    settings: &ScanSettings,
) -> Result<ScanRow> {
    let config = param.apply(base, value);
    let trace = run(&config, &[])?;
    Ok(ScanRow {
        value,
        report: classify_trace(&trace, &settings.classify)?,
    })
}

fn is_boundary(a: Regime, b: Regime) -> bool {
    matches!(
        (a, b),
        (Regime::Converged, Regime::Periodic) | (Regime::Periodic, Regime::Converged)
    )
}

/// Classifies one run per value (in parallel if enabled), then bisects the
/// first Converged/Periodic boundary down to `settings.width`.
pub fn scan_parameter(
    base: &ModelConfig,
    param: ScanParam,
    values: &[f64],
    settings: &ScanSettings,
) -> Result<ScanTable> {
    let mut values = values.to_vec();
    values.sort_by(f64::total_cmp);
    values.dedup();
    let rows: Vec<ScanRow> = settings
        .exec
        .map(&values, |v| classify_at(base, param, *v, settings))
        .into_iter()
        .collect::<Result<_>>()?;

    let mut refinements = Vec::new();
    let mut critical = None;
    if let Some(w) = rows
        .windows(2)
        .find(|w| is_boundary(w[0].report.regime, w[1].report.regime))
    {
        let (mut lo, mut hi) = (w[0].clone(), w[1].clone());
        let mut resolved = true;
        while hi.value - lo.value > settings.width * (1.0 + 1e-9) {
            let mid = classify_at(base, param, 0.5 * (lo.value + hi.value), settings)?;
            refinements.push(mid.clone());
            if mid.report.regime == lo.report.regime {
                lo = mid;
            } else if mid.report.regime == hi.report.regime {
                hi = mid;
            } else {
                resolved = false;
                break;
            }
        }
        critical = Some(Critical {
            lo: lo.value,
            hi: hi.value,
            resolved,
        });
    } else if let Some(w) = rows.windows(2).find(|w| {
        w[0].report.regime != w[1].report.regime
            && (w[0].report.regime == Regime::Undetermined
                || w[1].report.regime == Regime::Undetermined)
    }) {
        critical = Some(Critical {
            lo: w[0].value,
            hi: w[1].value,
            resolved: false,
        });
    }
    Ok(ScanTable {
        param,
        rows,
        refinements,
        critical,
    })
}

/// `steps` equally spaced connectivities on `[j_min, j_max]`.
pub fn scan_connectivity(
    base: &ModelConfig,
    j_min: f64,
    j_max: f64,
    steps: usize,
    settings: &ScanSettings,
) -> Result<ScanTable> {
    if !(j_min >= 0.0 && j_max >= j_min) || steps == 0 {
        return Err(Error::Precondition(format!(
            "connectivity range [{j_min}, {j_max}] with {steps} steps"
        )));
    }
    let values = if j_min == j_max {
        vec![j_min]
    } else {
        linspace(j_min, j_max, steps)
    };
    scan_parameter(base, ScanParam::Connectivity, &values, settings)
}
