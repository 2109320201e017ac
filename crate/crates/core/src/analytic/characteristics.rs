//! Density reconstruction from a periodic activity along characteristics.
//!
//! A cohort born at `b` discharges at times `τ` where its age exceeds the
//! threshold, i.e. where `φ(τ) = τ − σ(N(τ)) > b`. Its density at time `t` is
//! `N(b)·exp(−|{τ ∈ [b, t] : φ(τ) > b}|)`. The measure is computed exactly on
//! the monotone pieces of `φ`, which are located by sampling every segment of
//! the profile with a step of at most `1e-4`.

use crate::exec::Execution;
use crate::model::ThresholdSpec;
use crate::numeric::{bisect, integrate_piecewise};

use super::profile::PeriodicProfile;

const SAMPLE_STEP: f64 = 1e-4;
const FLAT_TOL: f64 = 1e-12;
/// Ages beyond `σ⁺ + TAIL` are ignored.
pub const TAIL: f64 = 30.0;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Shape {
    Flat(f64),
    Rising,
    Falling,
}

#[derive(Debug, Clone, Copy)]
struct Piece {
    start: f64,
    end: f64,
    segment: usize,
    shape: Shape,
}

/// `φ(τ) = τ − σ(N(τ))` split into monotone pieces over one period.
#[derive(Debug, Clone)]
pub struct Characteristics<'a> {
    profile: &'a PeriodicProfile,
    spec: ThresholdSpec,
    pieces: Vec<Piece>,
}

impl<'a> Characteristics<'a> {
    pub fn new(profile: &'a PeriodicProfile, spec: &ThresholdSpec) -> Self {
        let mut pieces: Vec<Piece> = Vec::new();
        for (k, seg) in profile.segments().iter().enumerate() {
            let len = seg.end - seg.start;
            let n = (len / SAMPLE_STEP).ceil().max(1.0) as usize;
            let phi = |t: f64| t - spec.value(seg.form.eval(t));
            let mut prev_t = seg.start;
            let mut prev = phi(prev_t);
            for j in 1..=n {
                let t = if j == n {
                    seg.end
                } else {
                    seg.start + len * j as f64 / n as f64
                };
                let v = phi(t);
                let d = v - prev;
                let shape = if d > FLAT_TOL {
                    Shape::Rising
                } else if d < -FLAT_TOL {
                    Shape::Falling
                } else {
                    Shape::Flat(prev)
                };
                match pieces.last_mut() {
                    Some(last)
                        if last.segment == k
                            && std::mem::discriminant(&last.shape)
                                == std::mem::discriminant(&shape) =>
                    {
                        last.end = t;
                    }
                    _ => pieces.push(Piece {
                        start: prev_t,
                        end: t,
                        segment: k,
                        shape,
                    }),
                }
                prev_t = t;
                prev = v;
            }
        }
        for p in pieces.iter_mut() {
            if let Shape::Flat(_) = p.shape {
                let seg = &profile.segments()[p.segment];
                let mid = 0.5 * (p.start + p.end);
                p.shape = Shape::Flat(mid - spec.value(seg.form.eval(mid)));
            }
        }
        Characteristics {
            profile,
            spec: *spec,
            pieces,
        }
    }

    fn phi_on(&self, piece: &Piece, shift: f64, tau: f64) -> f64 {
        let seg = &self.profile.segments()[piece.segment];
        tau - self.spec.value(seg.form.eval(tau - shift))
    }

    /// `|{τ ∈ [lo, hi] : φ(τ) > level}|`.
    fn firing_measure(&self, lo: f64, hi: f64, level: f64) -> f64 {
        let period = self.profile.period();
        let k0 = (lo / period).floor() as i64;
        let k1 = (hi / period).floor() as i64;
        let mut total = 0.0;
        for k in k0..=k1 {
            let shift = k as f64 * period;
            for piece in &self.pieces {
                let a = (piece.start + shift).max(lo);
                let b = (piece.end + shift).min(hi);
                if !(b > a) {
                    continue;
                }
                total += match piece.shape {
                    Shape::Flat(c) => {
                        if c + shift > level {
                            b - a
                        } else {
                            0.0
                        }
                    }
                    Shape::Rising => {
                        let (fa, fb) = (self.phi_on(piece, shift, a), self.phi_on(piece, shift, b));
                        if fa > level {
                            b - a
                        } else if fb <= level {
                            0.0
                        } else {
                            let r = bisect(|x| self.phi_on(piece, shift, x) - level, a, b, 1e-15)
                                .unwrap_or(a);
                            b - r
                        }
                    }
                    Shape::Falling => {
                        let (fa, fb) = (self.phi_on(piece, shift, a), self.phi_on(piece, shift, b));
                        if fb > level {
                            b - a
                        } else if fa <= level {
                            0.0
                        } else {
                            let r = bisect(|x| self.phi_on(piece, shift, x) - level, a, b, 1e-15)
                                .unwrap_or(b);
                            r - a
                        }
                    }
                };
            }
        }
        total
    }

    /// Time spent discharging by the cohort of age `s` at time `t`.
    pub fn survival_exponent(&self, s: f64, t: f64) -> f64 {
        let lo_age = self.spec.sigma_minus();
        let hi_age = self.spec.sigma_plus();
        if s <= lo_age {
            return 0.0;
        }
        let birth = t - s;
        let mut e = (s - hi_age).max(0.0);
        let lo = birth + lo_age;
        let hi = t.min(birth + hi_age);
        if hi > lo {
            e += self.firing_measure(lo, hi, birth);
        }
        e
    }

    /// `n(s, t)`.
    pub fn density(&self, s: f64, t: f64) -> f64 {
        self.profile.eval(t - s) * (-self.survival_exponent(s, t)).exp()
    }

    /// Ages in `(a, b)` where `n(·, t)` or its derivative may jump.
    fn breakpoints(&self, t: f64, a: f64, b: f64) -> Vec<f64> {
        let period = self.profile.period();
        let (lo_age, hi_age) = (self.spec.sigma_minus(), self.spec.sigma_plus());
        let mut out = vec![lo_age, hi_age];
        // births at segment boundaries, and births whose threshold window
        // edges meet a segment boundary
        for off in [0.0, lo_age, hi_age] {
            for x in self.profile.boundaries_in(t - b - off, t - a - off) {
                out.push(t - x - off);
            }
        }
        // births at plateau levels of φ switch whole plateaus on or off
        let k0 = ((t - b) / period).floor() as i64 - 1;
        let k1 = ((t - a) / period).floor() as i64 + 1;
        for piece in &self.pieces {
            if let Shape::Flat(c) = piece.shape {
                for k in k0..=k1 {
                    out.push(t - (c + k as f64 * period));
                }
            }
        }
        out.retain(|s| *s > a && *s < b);
        out
    }

    /// `∫_a^b n(s, t) ds`.
    pub fn age_integral(&self, t: f64, a: f64, b: f64) -> f64 {
        let breaks = self.breakpoints(t, a, b);
        integrate_piecewise(|s| self.density(s, t), a, b, &breaks, 1e-11).0
    }

    /// Upper age limit used for the mass integrals.
    pub fn age_cutoff(&self) -> f64 {
        self.spec.sigma_plus() + TAIL
    }

    pub fn mass(&self, t: f64) -> f64 {
        self.age_integral(t, 0.0, self.age_cutoff())
    }

    /// `∫_{σ(N(t))} n(s, t) ds`, which must equal `N(t)`.
    pub fn discharge(&self, t: f64) -> f64 {
        let threshold = self.spec.value(self.profile.eval(t));
        self.age_integral(t, threshold, self.age_cutoff())
    }
}

/// `n(s, t)` for the periodic activity `profile`.
pub fn density_from_activity(
    profile: &PeriodicProfile,
    spec: &ThresholdSpec,
    s: f64,
    t: f64,
) -> f64 {
    Characteristics::new(profile, spec).density(s, t)
}

/// Sample times `(j + ½)T/n`, which avoid the jumps at multiples of `T/n`.
pub fn sample_times(profile: &PeriodicProfile, n_samples: usize) -> Vec<f64> {
    let period = profile.period();
    (0..n_samples)
        .map(|j| (j as f64 + 0.5) * period / n_samples as f64)
        .collect()
}

/// Residuals of the reconstructed density over one period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerificationReport {
    pub samples: usize,
    /// `max |∫ n − 1|`.
    pub mass: f64,
    /// `max |∫_{σ(N)} n − N|`.
    pub boundary: f64,
}

impl VerificationReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.mass <= tol && self.boundary <= tol
    }
}

pub fn verify_mass(
    profile: &PeriodicProfile,
    spec: &ThresholdSpec,
    n_samples: usize,
    exec: Execution,
) -> f64 {
    let ch = Characteristics::new(profile, spec);
    exec.map(&sample_times(profile, n_samples), |t| {
        (ch.mass(*t) - 1.0).abs()
    })
    .into_iter()
    .fold(0.0, f64::max)
}

pub fn verify_boundary(
    profile: &PeriodicProfile,
    spec: &ThresholdSpec,
    n_samples: usize,
    exec: Execution,
) -> f64 {
    let ch = Characteristics::new(profile, spec);
    exec.map(&sample_times(profile, n_samples), |t| {
        (ch.discharge(*t) - profile.eval(*t)).abs()
    })
    .into_iter()
    .fold(0.0, f64::max)
}

/// Mass and boundary residuals in one pass over the sample times.
pub fn verify(
    profile: &PeriodicProfile,
    spec: &ThresholdSpec,
    n_samples: usize,
    exec: Execution,
) -> VerificationReport {
    let ch = Characteristics::new(profile, spec);
    let rows = exec.map(&sample_times(profile, n_samples), |t| {
        (
            (ch.mass(*t) - 1.0).abs(),
            (ch.discharge(*t) - profile.eval(*t)).abs(),
        )
    });
    VerificationReport {
        samples: n_samples,
        mass: rows.iter().map(|r| r.0).fold(0.0, f64::max),
        boundary: rows.iter().map(|r| r.1).fold(0.0, f64::max),
    }
}
