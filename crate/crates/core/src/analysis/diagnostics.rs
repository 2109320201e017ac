use crate::analytic::PeriodicProfile;
use crate::error::{Error, Result};
use crate::model::ThresholdSpec;
use crate::solver::{ActivityTrace, DensitySnapshot};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossingReport {
    pub holds: bool,
    /// Longest stretch of `[t_from, t_to]` without a crossing of the level.
    pub longest_gap: f64,
}

/// Whether every window of length `width` inside `[t_from, t_to]` contains a
/// time where `N − level` changes sign or comes within `touch` of zero.
pub fn crossing_check(
    trace: &ActivityTrace,
    level: f64,
    width: f64,
    t_from: f64,
    t_to: f64,
    touch: f64,
) -> Result<CrossingReport> {
    if !(t_to > t_from && width > 0.0) {
        return Err(Error::Precondition(format!(
            "empty crossing range [{t_from}, {t_to}] or width {width}"
        )));
    }
    let a = trace.index_at(t_from);
    let b = trace.index_at(t_to).min(trace.len().saturating_sub(1));
    if b <= a {
        return Err(Error::Precondition(
            "crossing range outside the trace".into(),
        ));
    }
    let mut marks = vec![t_from];
    for k in a..=b {
        let d = trace.activity[k] - level;
        let crossed = k > a && (trace.activity[k - 1] - level).signum() != d.signum();
        if d.abs() <= touch || crossed {
            marks.push(trace.times[k]);
        }
    }
    marks.push(t_to);
    let longest_gap = marks.windows(2).fold(0.0f64, |g, w| g.max(w[1] - w[0]));
    Ok(CrossingReport {
        holds: longest_gap <= width + trace.dt + 1e-12,
        longest_gap,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContractionReport {
    /// `a_n = sup_{[t0 + nw, t0 + (n+1)w)} |N − limit|`.
    pub sups: Vec<f64>,
    /// `a_{n+1}/a_n`, up to the first window at round-off level.
    pub ratios: Vec<f64>,
    /// Least-squares rate of `log|N − limit|` over the trailing half of the
    /// trace; `None` when the distance is below `1e-12` throughout (saturated).
    pub fitted_rate: Option<f64>,
}

/// Window suprema of the distance to `limit` over consecutive windows of
/// length `width` starting at `t0`.
pub fn convergence_rate(
    trace: &ActivityTrace,
    limit: f64,
    width: f64,
    t0: f64,
) -> Result<ContractionReport> {
    if !(width > 0.0) {
        return Err(Error::Precondition(format!("window width {width}")));
    }
    let t_end = *trace
        .times
        .last()
        .ok_or_else(|| Error::Precondition("empty trace".into()))?;
    let mut sups = Vec::new();
    let mut n = 0usize;
    loop {
        let lo = t0 + n as f64 * width;
        let hi = lo + width;
        if hi > t_end + 1e-12 {
            break;
        }
        let (a, b) = (trace.index_at(lo), trace.index_at(hi));
        let sup = trace.activity[a..b]
            .iter()
            .fold(0.0f64, |m, v| m.max((v - limit).abs()));
        sups.push(sup);
        n += 1;
    }
    let mut ratios = Vec::new();
    for w in sups.windows(2) {
        if w[0] < 1e-12 || w[1] < 1e-12 {
            break;
        }
        ratios.push(w[1] / w[0]);
    }
    let half = trace.index_at(0.5 * (trace.times[0] + t_end));
    let fitted_rate = super::regime::log_distance_slope(trace, half, limit);
    Ok(ContractionReport {
        sups,
        ratios,
        fitted_rate,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxReport {
    pub samples: usize,
    /// `max |Ṅ(1 + σ̃'(N) n(σ̃(N))) + N − n(σ̃(N))|`.
    pub residual: f64,
    /// `max Ṅ·σ̃'(N)`, the speed at which the threshold moves towards age 0.
    pub threshold_velocity: f64,
}

/// Slack on the lock test; centred differences of a grid trace only resolve
/// the velocity to `O(Δt)`.
pub const LOCK_TOL: f64 = 1e-3;

impl FluxReport {
    /// Threshold moving as fast as the ages themselves: cohorts cannot cross.
    pub fn locked(&self) -> bool {
        self.threshold_velocity >= 1.0 - LOCK_TOL
    }
}

fn interpolate(snapshot: &DensitySnapshot, ds: f64, s: f64) -> f64 {
    let x = s / ds - 0.5;
    let i = x.floor();
    if i < 0.0 {
        return snapshot.values.first().copied().unwrap_or(0.0);
    }
    let i = i as usize;
    if i + 1 >= snapshot.values.len() {
        return snapshot.values.last().copied().unwrap_or(0.0);
    }
    let w = x - i as f64;
    (1.0 - w) * snapshot.values[i] + w * snapshot.values[i + 1]
}

/// Checks the flux identity at every snapshot of `trace` that sits on a smooth
/// stretch of `N`. `σ̃(x) = σ(J x)`.
pub fn flux_residual(
    trace: &ActivityTrace,
    spec: &ThresholdSpec,
    connectivity: f64,
    jump_tol: f64,
) -> FluxReport {
    let dt = trace.dt;
    let mut residual = 0.0f64;
    let mut velocity = f64::NEG_INFINITY;
    let mut samples = 0;
    for snap in &trace.snapshots {
        let k = trace.index_at(snap.time);
        if k == 0 || k + 1 >= trace.len() {
            continue;
        }
        let (prev, next) = (trace.activity[k - 1], trace.activity[k + 1]);
        if (next - prev).abs() > jump_tol {
            continue;
        }
        let n = trace.activity[k];
        let dn = (next - prev) / (2.0 * dt);
        let thr = spec.value(connectivity * n);
        let slope = connectivity * spec.derivative(connectivity * n);
        let at = interpolate(snap, dt, thr);
        residual = residual.max((dn * (1.0 + slope * at) + n - at).abs());
        velocity = velocity.max(dn * slope);
        samples += 1;
    }
    FluxReport {
        samples,
        residual,
        threshold_velocity: if samples == 0 { 0.0 } else { velocity },
    }
}

/// `d/dt σ(N(t))` for a periodic activity, by centred differences.
pub fn profile_threshold_velocity(
    profile: &PeriodicProfile,
    spec: &ThresholdSpec,
    t: f64,
    h: f64,
) -> f64 {
    (spec.value(profile.eval(t + h)) - spec.value(profile.eval(t - h))) / (2.0 * h)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn crossings_of_synthetic_traces() {
        let flat = ActivityTrace::from_samples(0.0, 1e-3, vec![0.7; 5000]);
        let r = crossing_check(&flat, 0.6, 0.5, 1.0, 4.0, 5e-3).unwrap();
        assert!(!r.holds);
        let at = ActivityTrace::from_samples(0.0, 1e-3, vec![0.6; 5000]);
        assert!(crossing_check(&at, 0.6, 0.5, 1.0, 4.0, 5e-3).unwrap().holds);
        let wave: Vec<f64> = (0..5000)
            .map(|k| 0.6 + 0.1 * (k as f64 * 1e-3 * 8.0).sin())
            .collect();
        let w = ActivityTrace::from_samples(0.0, 1e-3, wave);
        assert!(crossing_check(&w, 0.6, 0.5, 1.0, 4.0, 1e-6).unwrap().holds);
        assert!(!crossing_check(&w, 0.6, 0.3, 1.0, 4.0, 1e-6).unwrap().holds);
    }

    #[test]
    fn contraction_of_a_geometric_trace() {
        let v: Vec<f64> = (0..5000)
            .map(|k| 0.5 + 0.3 * (-(k as f64) * 1e-3).exp())
            .collect();
        let t = ActivityTrace::from_samples(0.0, 1e-3, v);
        let r = convergence_rate(&t, 0.5, 0.5, 0.0).unwrap();
        for ratio in &r.ratios {
            assert!((ratio - (-0.5f64).exp()).abs() < 1e-3);
        }
        assert!((r.fitted_rate.unwrap() - 1.0).abs() < 1e-6);
        let at = ActivityTrace::from_samples(0.0, 1e-3, vec![0.5; 5000]);
        assert_eq!(
            convergence_rate(&at, 0.5, 0.5, 0.0).unwrap().fitted_rate,
            None
        );
    }
}
