use crate::error::{Error, Result};
use crate::numeric::integrate_piecewise;

/// Closed form of the activity on one segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SegmentForm {
    Flat {
        value: f64,
    },
    /// `a·e^{c−t}`.
    Exp {
        amplitude: f64,
        shift: f64,
    },
    /// `a·e^{c−t}·(t + b)`.
    ExpAffine {
        amplitude: f64,
        shift: f64,
        offset: f64,
    },
}

impl SegmentForm {
    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            SegmentForm::Flat { value } => value,
            SegmentForm::Exp { amplitude, shift } => amplitude * (shift - t).exp(),
            SegmentForm::ExpAffine {
                amplitude,
                shift,
                offset,
            } => amplitude * (shift - t).exp() * (t + offset),
        }
    }

    /// Exact `∫_a^b` of the closed form.
    pub fn exact_integral(&self, a: f64, b: f64) -> f64 {
        match *self {
            SegmentForm::Flat { value } => value * (b - a),
            SegmentForm::Exp { amplitude, shift } => {
                amplitude * ((shift - a).exp() - (shift - b).exp())
            }
            SegmentForm::ExpAffine {
                amplitude,
                shift,
                offset,
            } => {
                let f = |t: f64| -amplitude * (shift - t).exp() * (t + offset + 1.0);
                f(b) - f(a)
            }
        }
    }

    fn scaled(&self, k: f64) -> Self {
        match *self {
            SegmentForm::Flat { value } => SegmentForm::Flat { value: k * value },
            SegmentForm::Exp { amplitude, shift } => SegmentForm::Exp {
                amplitude: k * amplitude,
                shift,
            },
            SegmentForm::ExpAffine {
                amplitude,
                shift,
                offset,
            } => SegmentForm::ExpAffine {
                amplitude: k * amplitude,
                shift,
                offset,
            },
        }
    }
}

/// The form applies on `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub start: f64,
    pub end: f64,
    pub form: SegmentForm,
}

/// Periodic activity `N(t)`, right-continuous at its jumps.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicProfile {
    period: f64,
    segments: Vec<Segment>,
    jumps: Vec<f64>,
}

const JUMP_TOL: f64 = 1e-10;

/// Value of the periodic extension of an (unchecked) segment list.
pub(crate) fn periodic_eval(segments: &[Segment], period: f64, t: f64) -> f64 {
    let mut tm = t.rem_euclid(period);
    if tm >= period {
        tm = 0.0;
    }
    let i = segments
        .partition_point(|s| s.start <= tm)
        .saturating_sub(1);
    segments[i].form.eval(tm)
}

/// `∫_a^b` of the periodic extension of a segment list, split at boundaries.
pub(crate) fn periodic_integral(segments: &[Segment], period: f64, a: f64, b: f64) -> f64 {
    if b < a {
        return -periodic_integral(segments, period, b, a);
    }
    let mut breaks = Vec::new();
    let k0 = (a / period).floor() as i64;
    let k1 = (b / period).floor() as i64;
    for k in k0..=k1 {
        for s in segments {
            breaks.push(k as f64 * period + s.start);
        }
    }
    integrate_piecewise(|t| periodic_eval(segments, period, t), a, b, &breaks, 1e-13).0
}

impl PeriodicProfile {
    /// Checks that the segments tile `[0, period)`, that `0 < N < 1`, and that
    /// the discontinuities are exactly the declared `jumps`.
    pub fn new(period: f64, segments: Vec<Segment>, jumps: Vec<f64>) -> Result<Self> {
        if !(period.is_finite() && period > 0.0) {
            return Err(Error::InvalidProfile(format!("period {period}")));
        }
        if segments.is_empty() {
            return Err(Error::InvalidProfile("no segments".into()));
        }
        let tiling = (segments[0].start == 0.0)
            && (segments.last().unwrap().end - period).abs() <= 1e-12 * period
            && segments.windows(2).all(|w| w[0].end == w[1].start)
            && segments.iter().all(|s| s.end > s.start);
        if !tiling {
            return Err(Error::InvalidProfile(
                "segments do not tile one period".into(),
            ));
        }
        for s in &segments {
            for j in 0..=64 {
                let t = s.start + (s.end - s.start) * j as f64 / 64.0;
                let v = s.form.eval(t);
                if !(v > 0.0 && v < 1.0) {
                    return Err(Error::InvalidProfile(format!(
                        "N({t}) = {v} is outside (0, 1)"
                    )));
                }
            }
        }
        let mut detected = Vec::new();
        let n = segments.len();
        for k in 0..n {
            let prev = &segments[(k + n - 1) % n];
            let left = prev.form.eval(prev.end);
            let right = segments[k].form.eval(segments[k].start);
            if (left - right).abs() > JUMP_TOL {
                detected.push(segments[k].start);
            }
        }
        let mut declared = jumps.clone();
        declared.sort_by(f64::total_cmp);
        if declared.len() != detected.len()
            || declared
                .iter()
                .zip(&detected)
                .any(|(a, b)| (a - b).abs() > 1e-12 * period.max(1.0))
        {
            return Err(Error::InvalidProfile(format!(
                "declared jumps {declared:?} but found discontinuities at {detected:?}"
            )));
        }
        Ok(PeriodicProfile {
            period,
            segments,
            jumps: declared,
        })
    }

    /// Constant profile (no jumps); `period` only sets the bookkeeping unit.
    pub fn constant(value: f64, period: f64) -> Result<Self> {
        Self::new(
            period,
            vec![Segment {
                start: 0.0,
                end: period,
                form: SegmentForm::Flat { value },
            }],
            Vec::new(),
        )
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// Jump times within `[0, period)`.
    pub fn jump_times(&self) -> &[f64] {
        &self.jumps
    }

    /// Reduces `t` into `[0, period)`.
    pub fn phase(&self, t: f64) -> f64 {
        let tm = t.rem_euclid(self.period);
        if tm >= self.period {
            0.0
        } else {
            tm
        }
    }

    fn segment_index(&self, tm: f64) -> usize {
        let i = self.segments.partition_point(|s| s.start <= tm);
        i.saturating_sub(1)
    }

    /// `N(t)`, taking the right limit at jumps.
    pub fn eval(&self, t: f64) -> f64 {
        periodic_eval(&self.segments, self.period, t)
    }

    /// `N(t⁻)`.
    pub fn left_limit(&self, t: f64) -> f64 {
        let tm = self.phase(t);
        let i = self.segment_index(tm);
        let s = &self.segments[i];
        if tm == s.start {
            let n = self.segments.len();
            let prev = &self.segments[(i + n - 1) % n];
            prev.form.eval(prev.end)
        } else {
            s.form.eval(tm)
        }
    }

    /// Segment boundaries (and jumps) of the periodic extension inside `[a, b]`.
    pub fn boundaries_in(&self, a: f64, b: f64) -> Vec<f64> {
        let mut out = Vec::new();
        if !(b >= a) {
            return out;
        }
        let k0 = (a / self.period).floor() as i64 - 1;
        let k1 = (b / self.period).floor() as i64 + 1;
        for k in k0..=k1 {
            let base = k as f64 * self.period;
            for s in &self.segments {
                let x = base + s.start;
                if x >= a && x <= b {
                    out.push(x);
                }
            }
        }
        out
    }

    /// `∫_a^b N` by adaptive quadrature split at segment boundaries.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        periodic_integral(&self.segments, self.period, a, b)
    }

    pub fn min_max(&self, samples: usize) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for s in &self.segments {
            for j in 0..=samples {
                let t = s.start + (s.end - s.start) * j as f64 / samples as f64;
                let v = s.form.eval(t);
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        (lo, hi)
    }

    /// `k·N`, for robustness checks of the verifiers.
    pub fn scaled(&self, k: f64) -> Result<Self> {
        let segments = self
            .segments
            .iter()
            .map(|s| Segment {
                form: s.form.scaled(k),
                ..*s
            })
            .collect();
        Self::new(self.period, segments, self.jumps.clone())
    }

    /// `N` sampled at `t0 + k·dt` for `k < count`.
    pub fn sample(&self, t0: f64, dt: f64, count: usize) -> Vec<f64> {
        (0..count).map(|k| self.eval(t0 + k as f64 * dt)).collect()
    }
}
