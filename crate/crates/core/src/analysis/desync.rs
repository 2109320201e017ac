use crate::analytic::steady_state_nonlinear;
use crate::error::{check_non_negative, Result};
use crate::model::ThresholdSpec;

/// Sufficient condition for relaxation to the steady state: with `m` the
/// Lipschitz constant of `x ↦ σ(J x)`, it holds when `m < 1` and
/// `σ⁺ < 1 − m·N̄`, and the activity then contracts by `σ⁺/(1 − m N̄)` per
/// window of length `σ⁺`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesyncCertificate {
    pub holds: bool,
    pub lipschitz: f64,
    pub sigma_plus: f64,
    pub limit: f64,
    pub factor: f64,
}

pub fn desync_certificate(spec: &ThresholdSpec, connectivity: f64) -> Result<DesyncCertificate> {
    check_non_negative("J", connectivity)?;
    let m = connectivity * spec.lipschitz();
    let limit = steady_state_nonlinear(spec, connectivity)?;
    let sigma_plus = spec.sigma_plus();
    let margin = 1.0 - m * limit;
    let holds = m < 1.0 && sigma_plus < margin;
    let factor = if margin > 0.0 {
        sigma_plus / margin
    } else {
        f64::INFINITY
    };
    Ok(DesyncCertificate {
        holds,
        lipschitz: m,
        sigma_plus,
        limit,
        factor,
    })
}
