use crate::error::{Error, Result};
use crate::model::ThresholdSpec;
use crate::solver::ActivityTrace;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Converged,
    Periodic,
    Undetermined,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Regime::Converged => "Converged",
            Regime::Periodic => "Periodic",
            Regime::Undetermined => "Undetermined",
        };
        write!(f, "{s}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifyParams {
    /// Trailing window inspected for convergence.
    pub window: f64,
    /// Convergence tolerance on the oscillation amplitude; jumps are steps
    /// larger than `10·tol`.
    pub tol: f64,
    /// Initial stretch of the trace ignored entirely.
    pub transient: f64,
}

impl ClassifyParams {
    pub fn new(window: f64, tol: f64) -> Self {
        ClassifyParams {
            window,
            tol,
            transient: 5.0,
        }
    }

    /// Transient of `max(2σ⁺, 5)`.
    pub fn for_threshold(window: f64, tol: f64, spec: &ThresholdSpec) -> Self {
        ClassifyParams {
            window,
            tol,
            transient: (2.0 * spec.sigma_plus()).max(5.0),
        }
    }

    pub fn with_transient(mut self, transient: f64) -> Self {
        self.transient = transient;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegimeReport {
    pub regime: Regime,
    pub limit: Option<f64>,
    /// Exponential rate of approach to `limit`.
    pub rate: Option<f64>,
    pub period: Option<f64>,
    pub jumps_per_period: Option<usize>,
    /// Extremes of `N` over the trailing window.
    pub min: f64,
    pub max: f64,
    /// `max − min` over the trailing window.
    pub trailing_amplitude: f64,
}

/// A discontinuity of the activity, possibly smeared over a few steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jump {
    pub time: f64,
    pub amplitude: f64,
}

/// Steps more than `MERGE_STEPS` apart belong to different jumps.
const MERGE_STEPS: usize = 4;
/// Relative spread allowed between recurrence intervals.
const PERIOD_SPREAD: f64 = 0.02;
/// At most this many trailing recurrences are compared.
const MAX_INTERVALS: usize = 8;

pub fn detect_jumps(trace: &ActivityTrace, from: usize, threshold: f64) -> Vec<Jump> {
    let n = &trace.activity;
    let mut out: Vec<Jump> = Vec::new();
    let mut current: Option<(usize, usize, usize)> = None; // first step, last step, largest step
    let flush = |c: (usize, usize, usize), out: &mut Vec<Jump>| {
        let (a, b, big) = c;
        out.push(Jump {
            time: trace.times[big] + 0.5 * trace.dt,
            amplitude: n[b + 1] - n[a],
        });
    };
    for k in from..n.len().saturating_sub(1) {
        let d = n[k + 1] - n[k];
        if d.abs() <= threshold {
            continue;
        }
        current = match current {
            Some((a, b, big))
                if k - b <= MERGE_STEPS && (n[b + 1] - n[b]).signum() == d.signum() =>
            {
                let big = if d.abs() > (n[big + 1] - n[big]).abs() {
                    k
                } else {
                    big
                };
                Some((a, k, big))
            }
            Some(c) => {
                flush(c, &mut out);
                Some((k, k, k))
            }
            None => Some((k, k, k)),
        };
    }
    if let Some(c) = current {
        flush(c, &mut out);
    }
    out
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Smallest number of jumps `m` after which the jump pattern repeats, and the
/// median recurrence time.
fn jump_recurrence(jumps: &[Jump]) -> Option<(f64, usize)> {
    for m in 1..=4 {
        if jumps.len() < m + 3 {
            return None;
        }
        let count = (jumps.len() - m).min(MAX_INTERVALS.max(m + 2));
        let start = jumps.len() - m - count;
        let intervals: Vec<f64> = (start..start + count)
            .map(|i| jumps[i + m].time - jumps[i].time)
            .collect();
        let med = median(intervals.clone());
        let spread = intervals.iter().fold(0.0f64, |a, x| a.max((x - med).abs()));
        let amplitudes_repeat = (start..start + count).all(|i| {
            let (a, b) = (jumps[i].amplitude, jumps[i + m].amplitude);
            (a - b).abs() <= 0.2 * a.abs().max(b.abs())
        });
        if med > 0.0 && spread <= PERIOD_SPREAD * med && amplitudes_repeat {
            return Some((med, m));
        }
    }
    None
}

/// Lag in `[0.75P, 1.25P]` maximizing the autocorrelation of `x`.
fn autocorrelation_peak(x: &[f64], dt: f64, guess: f64) -> Option<f64> {
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    let centred: Vec<f64> = x.iter().map(|v| v - mean).collect();
    let corr = |lag: usize| -> f64 {
        let n = centred.len() - lag;
        let mut acc = 0.0;
        for i in 0..n {
            acc += centred[i] * centred[i + lag];
        }
        acc / n as f64
    };
    let lo = ((0.75 * guess / dt).floor() as usize).max(1);
    let hi = (1.25 * guess / dt).ceil() as usize;
    if hi + 2 >= centred.len() / 2 {
        return None;
    }
    let stride = ((guess / dt) / 500.0).floor().max(1.0) as usize;
    let mut best = (lo, f64::NEG_INFINITY);
    let mut lag = lo;
    while lag <= hi {
        let c = corr(lag);
        if c > best.1 {
            best = (lag, c);
        }
        lag += stride;
    }
    let (a, b) = (best.0.saturating_sub(stride).max(1), best.0 + stride);
    for lag in a..=b {
        let c = corr(lag);
        if c > best.1 {
            best = (lag, c);
        }
    }
    let l = best.0;
    let (c0, c1, c2) = (corr(l - 1), best.1, corr(l + 1));
    let denom = c0 - 2.0 * c1 + c2;
    let offset = if denom < 0.0 {
        0.5 * (c0 - c2) / denom
    } else {
        0.0
    };
    Some((l as f64 + offset.clamp(-0.5, 0.5)) * dt)
}

fn period_of(trace: &ActivityTrace, from: usize, params: &ClassifyParams) -> Option<(f64, usize)> {
    let jumps = detect_jumps(trace, from, 10.0 * params.tol);
    let (period, m) = jump_recurrence(&jumps)?;
    let ac = autocorrelation_peak(&trace.activity[from..], trace.dt, period)?;
    if (ac - period).abs() <= PERIOD_SPREAD * period {
        Some((period, m))
    } else {
        None
    }
}

/// Median recurrence time of the jump pattern, confirmed by the
/// autocorrelation peak.
pub fn estimate_period(trace: &ActivityTrace, params: &ClassifyParams) -> Result<f64> {
    let from = trace.index_at(trace.times.first().copied().unwrap_or(0.0) + params.transient);
    period_of(trace, from, params)
        .map(|(p, _)| p)
        .ok_or_else(|| Error::Precondition("no recurring jump pattern in the trace".into()))
}

/// Least-squares decay rate of `log|N − limit|` over the samples from `from`,
/// ignoring distances below `1e-12`; `None` if fewer than two remain.
pub fn log_distance_slope(trace: &ActivityTrace, from: usize, limit: f64) -> Option<f64> {
    let pts: Vec<(f64, f64)> = trace.times[from..]
        .iter()
        .zip(&trace.activity[from..])
        .filter_map(|(t, n)| {
            let d = (n - limit).abs();
            (d > 1e-12).then(|| (*t, d.ln()))
        })
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let m = pts.len() as f64;
    let (st, sy) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
    let (mt, my) = (st / m, sy / m);
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (t, y) in &pts {
        sxy += (t - mt) * (y - my);
        sxx += (t - mt) * (t - mt);
    }
    Some(if sxx == 0.0 { 0.0 } else { -sxy / sxx })
}

/// Converged if the trailing window oscillates by at most `tol`; Periodic if a
/// jump pattern recurs at least three times with consistent spacing and the
/// autocorrelation agrees; Undetermined otherwise.
pub fn classify_trace(trace: &ActivityTrace, params: &ClassifyParams) -> Result<RegimeReport> {
    if !(params.window > 0.0 && params.tol > 0.0) {
        return Err(Error::Precondition(
            "window and tol must be positive".into(),
        ));
    }
    if trace.len() < 2 || trace.duration() < 3.0 * params.window {
        return Err(Error::Precondition(format!(
            "trace of duration {} is shorter than three windows of {}",
            trace.duration(),
            params.window
        )));
    }
    let t0 = trace.times[0];
    let t_end = *trace.times.last().unwrap();
    let from = trace.index_at((t0 + params.transient).min(t_end - 2.0 * params.window));
    let tail = trace.index_at(t_end - params.window);
    let window = &trace.activity[tail..];
    let wmin = window.iter().copied().fold(f64::INFINITY, f64::min);
    let wmax = window.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let amplitude = wmax - wmin;

    let mut report = RegimeReport {
        regime: Regime::Undetermined,
        limit: None,
        rate: None,
        period: None,
        jumps_per_period: None,
        min: wmin,
        max: wmax,
        trailing_amplitude: amplitude,
    };
    if amplitude <= params.tol {
        let limit = crate::numeric::stable_sum(window) / window.len() as f64;
        report.regime = Regime::Converged;
        report.limit = Some(limit);
        let half = from + (trace.len() - from) / 2;
        report.rate = Some(log_distance_slope(trace, half, limit).unwrap_or(0.0));
    } else if let Some((period, m)) = period_of(trace, from, params) {
        report.regime = Regime::Periodic;
        report.period = Some(period);
        report.jumps_per_period = Some(m);
    }
    Ok(report)
}
