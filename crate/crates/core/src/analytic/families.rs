//! The three families of periodic activities under the piecewise threshold:
//! the single-jump sawtooth, the two-jump solution, and the two-jump solution
//! with a flat plateau at `N⁻`.

use crate::error::{check_positive, Error, Result};
use crate::model::paper_knots;
use crate::numeric::{bisect, scan_sign_change};

use super::profile::{periodic_integral, PeriodicProfile, Segment, SegmentForm};

/// Probes used to bracket the period condition before giving up.
pub const BRACKET_PROBES: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    One,
    Two,
    Flat,
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Family::One => "one",
            Family::Two => "two",
            Family::Flat => "flat",
        };
        write!(f, "{name}")
    }
}

/// A constructed periodic activity and how it was obtained.
#[derive(Debug, Clone, PartialEq)]
pub struct Construction {
    pub family: Family,
    pub alpha: f64,
    pub p: Option<f64>,
    /// γ for the two-jump family, δ for the plateau family.
    pub root: Option<f64>,
    /// Mass-condition value at `root`.
    pub root_residual: f64,
    /// `e^{p−α}` for the plateau family.
    pub y: Option<f64>,
    pub profile: PeriodicProfile,
}

fn check_p(alpha: f64, p: f64) -> Result<()> {
    check_positive("alpha", alpha)?;
    if !(p > 0.0 && p < alpha) {
        return Err(Error::Domain {
            what: "p",
            value: p,
            expected: "0 < p < alpha",
        });
    }
    Ok(())
}

/// `N⁺e^{−t}` on `[0, α)`, one jump at 0.
pub fn build_class_one(alpha: f64) -> Result<Construction> {
    check_positive("alpha", alpha)?;
    let (_, hi) = paper_knots(alpha);
    let profile = PeriodicProfile::new(
        alpha,
        vec![Segment {
            start: 0.0,
            end: alpha,
            form: SegmentForm::Exp {
                amplitude: hi,
                shift: 0.0,
            },
        }],
        vec![0.0],
    )?;
    Ok(Construction {
        family: Family::One,
        alpha,
        p: None,
        root: None,
        root_residual: 0.0,
        y: None,
        profile,
    })
}

fn class_two_segments(alpha: f64, p: f64, gamma: f64) -> Vec<Segment> {
    let (lo, hi) = paper_knots(alpha);
    let mut segs = vec![
        Segment {
            start: 0.0,
            end: alpha,
            form: SegmentForm::Exp {
                amplitude: hi,
                shift: 0.0,
            },
        },
        Segment {
            start: alpha,
            end: alpha + p,
            form: SegmentForm::Exp {
                amplitude: p.exp() * lo,
                shift: alpha,
            },
        },
    ];
    if gamma > alpha + p {
        segs.push(Segment {
            start: alpha + p,
            end: gamma,
            form: SegmentForm::ExpAffine {
                amplitude: hi,
                shift: alpha,
                offset: (gamma - alpha).exp() - gamma,
            },
        });
    }
    segs
}

fn class_flat_segments(alpha: f64, p: f64, delta: f64) -> Vec<Segment> {
    let (lo, _) = paper_knots(alpha);
    let mut segs = class_two_segments(alpha, p, alpha + p);
    if delta > alpha + p {
        segs.push(Segment {
            start: alpha + p,
            end: delta,
            form: SegmentForm::Flat { value: lo },
        });
    }
    let two = class_two_segments(alpha, p, 2.0 * alpha);
    if delta < 2.0 * alpha {
        let mut tail = two[2];
        tail.start = delta;
        segs.push(tail);
    }
    segs
}

/// Mass condition of the two-jump family: the population at `t = γ` is the
/// newborn mass `N⁺` plus the cohorts born in the refractory window
/// `[γ−α, γ)`, and must add up to one.
pub fn class_two_condition(alpha: f64, p: f64, gamma: f64) -> f64 {
    let (_, hi) = paper_knots(alpha);
    let segs = class_two_segments(alpha, p, gamma);
    hi + periodic_integral(&segs, gamma, gamma - alpha, gamma) - 1.0
}

/// `(1/N⁺)∫_{α+p}^{γ} N + e^{p−α} − 1`, the period condition in the integral
/// form it is usually displayed in. Reported for comparison only.
pub fn class_two_displayed_condition(alpha: f64, p: f64, gamma: f64) -> f64 {
    let (_, hi) = paper_knots(alpha);
    let segs = class_two_segments(alpha, p, gamma);
    periodic_integral(&segs, gamma, alpha + p, gamma) / hi + (p - alpha).exp() - 1.0
}

/// `∫_α^{2α} N − (1 − N⁺)` for the plateau family ending its plateau at `δ`.
pub fn class_flat_condition(alpha: f64, p: f64, delta: f64) -> f64 {
    let (_, hi) = paper_knots(alpha);
    let segs = class_flat_segments(alpha, p, delta);
    periodic_integral(&segs, 2.0 * alpha, alpha, 2.0 * alpha) - (1.0 - hi)
}

/// Two-jump profile with an explicitly chosen period `γ ∈ (α+p, 2α]`.
pub fn class_two_profile(alpha: f64, p: f64, gamma: f64) -> Result<PeriodicProfile> {
    check_p(alpha, p)?;
    if !(gamma > alpha + p && gamma <= 2.0 * alpha) {
        return Err(Error::Domain {
            what: "gamma",
            value: gamma,
            expected: "alpha + p < gamma <= 2 alpha",
        });
    }
    PeriodicProfile::new(
        gamma,
        class_two_segments(alpha, p, gamma),
        vec![alpha, alpha + p],
    )
}

/// Plateau profile with an explicitly chosen plateau end `δ ∈ [α+p, 2α]`.
pub fn class_flat_profile(alpha: f64, p: f64, delta: f64) -> Result<PeriodicProfile> {
    check_p(alpha, p)?;
    if !(delta >= alpha + p && delta <= 2.0 * alpha) {
        return Err(Error::Domain {
            what: "delta",
            value: delta,
            expected: "alpha + p <= delta <= 2 alpha",
        });
    }
    let jumps = if delta < 2.0 * alpha {
        vec![alpha, delta]
    } else {
        vec![0.0, alpha]
    };
    PeriodicProfile::new(2.0 * alpha, class_flat_segments(alpha, p, delta), jumps)
}

/// Root of [`class_two_condition`] on `(α+p, 2α]`.
pub fn class_two_period(alpha: f64, p: f64) -> Result<f64> {
    check_p(alpha, p)?;
    find_root(
        |g| class_two_condition(alpha, p, g),
        alpha + p,
        2.0 * alpha,
        "the two-jump mass condition has no sign change on (alpha + p, 2 alpha]",
    )
}

/// Root of [`class_flat_condition`] on `[α+p, 2α]`.
pub fn class_flat_plateau_end(alpha: f64, p: f64) -> Result<f64> {
    check_p(alpha, p)?;
    find_root(
        |d| class_flat_condition(alpha, p, d),
        alpha + p,
        2.0 * alpha,
        "the plateau mass condition has no sign change on [alpha + p, 2 alpha]",
    )
}

fn find_root<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, reason: &str) -> Result<f64> {
    match scan_sign_change(&f, lo, hi, BRACKET_PROBES) {
        Ok((a, b)) if a == b => Ok(a),
        Ok((a, b)) => bisect(&f, a, b, 1e-14),
        Err(scan) => Err(Error::NoRoot {
            reason: reason.to_string(),
            scan,
        }),
    }
}

/// Smallest period for which the jump at `t = α` is reproduced by the
/// dynamics: the cohort discharging there must be born after the previous
/// cycle's second jump, i.e. `γ ≥ 2α − p`.
pub fn class_two_min_period(alpha: f64, p: f64) -> f64 {
    2.0 * alpha - p
}

pub fn build_class_two(alpha: f64, p: f64) -> Result<Construction> {
    let gamma = class_two_period(alpha, p)?;
    let min = class_two_min_period(alpha, p);
    if gamma < min - 1e-9 {
        return Err(Error::Inadmissible {
            root: gamma,
            reason: format!(
                "period {gamma:.9} is shorter than 2 alpha - p = {min:.9}, so the jump at t = alpha \
                 is not reproduced by the cohort crossing threshold"
            ),
        });
    }
    let profile = class_two_profile(alpha, p, gamma)?;
    Ok(Construction {
        family: Family::Two,
        alpha,
        p: Some(p),
        root: Some(gamma),
        root_residual: class_two_condition(alpha, p, gamma),
        y: None,
        profile,
    })
}

pub fn build_class_flat(alpha: f64, p: f64) -> Result<Construction> {
    let delta = class_flat_plateau_end(alpha, p)?;
    let profile = class_flat_profile(alpha, p, delta)?;
    Ok(Construction {
        family: Family::Flat,
        alpha,
        p: Some(p),
        root: Some(delta),
        root_residual: class_flat_condition(alpha, p, delta),
        y: Some((p - alpha).exp()),
        profile,
    })
}

pub fn build(family: Family, alpha: f64, p: Option<f64>) -> Result<Construction> {
    let need_p =
        || p.ok_or_else(|| Error::Precondition(format!("family {family} needs a value of p")));
    match family {
        Family::One => build_class_one(alpha),
        Family::Two => build_class_two(alpha, need_p()?),
        Family::Flat => build_class_flat(alpha, need_p()?),
    }
}

/// `g(γ)`, the closed-form period function of the two-jump family as usually
/// stated.
pub fn g_eval(alpha: f64, p: f64, gamma: f64) -> f64 {
    let ea = (-alpha).exp();
    ea * ((alpha - p).exp() - 1.0) * ((gamma - alpha).exp() - gamma + 1.0)
        + ea * (-2.0 * alpha + (alpha + p) * (alpha - p).exp())
        + (p - alpha).exp()
        - 1.0
}

/// `f(δ, y)`, the closed-form plateau function.
pub fn f_eval(alpha: f64, delta: f64, y: f64) -> f64 {
    alpha.exp()
        * ((-2.0 * alpha + 1.0 + alpha.exp() + delta) * (-delta).exp()
            - (-2.0 * alpha).exp()
            - (-alpha).exp())
        + (-alpha).exp() * (delta - y.ln() - 2.0 * alpha)
        + y
        - 1.0
}

/// Root-finding outcome for one family, with the closed-form functions
/// evaluated alongside.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyRoots {
    pub root: Option<f64>,
    pub condition_at_root: Option<f64>,
    /// `g(γ)` or `f(δ, e^{p−α})` at the root.
    pub closed_form_at_root: Option<f64>,
    /// Closed form at the bracket ends `α+p` and `2α`.
    pub closed_form_at_ends: (f64, f64),
    pub admissible: bool,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RootCrossCheck {
    pub alpha: f64,
    pub p: f64,
    pub two: FamilyRoots,
    /// Integral form of the two-jump period condition at the mass root and
    /// its own root, if any.
    pub two_displayed_at_root: Option<f64>,
    pub two_displayed_root: Option<f64>,
    pub flat: FamilyRoots,
}

/// Reconciles the mass conditions with the closed forms `g` and `f`.
/// Never fails: unresolved pieces are reported as `None` with a note.
pub fn cross_check_roots(alpha: f64, p: f64) -> Result<RootCrossCheck> {
    check_p(alpha, p)?;
    let ends = (alpha + p, 2.0 * alpha);

    let two = match class_two_period(alpha, p) {
        Ok(gamma) => {
            let min = class_two_min_period(alpha, p);
            let admissible = gamma >= min - 1e-9;
            let mut note = if admissible {
                String::from("two-jump period accepted")
            } else {
                format!("two-jump period {gamma:.9} < 2 alpha - p = {min:.9}: no solution in this family")
            };
            if gamma - alpha < 1e-3 * alpha || p < 1e-3 * alpha {
                note.push_str("; degenerates to the single-jump sawtooth (gamma -> alpha)");
            }
            FamilyRoots {
                root: Some(gamma),
                condition_at_root: Some(class_two_condition(alpha, p, gamma)),
                closed_form_at_root: Some(g_eval(alpha, p, gamma)),
                closed_form_at_ends: (g_eval(alpha, p, ends.0), g_eval(alpha, p, ends.1)),
                admissible,
                note,
            }
        }
        Err(e) => FamilyRoots {
            root: None,
            condition_at_root: None,
            closed_form_at_root: None,
            closed_form_at_ends: (g_eval(alpha, p, ends.0), g_eval(alpha, p, ends.1)),
            admissible: false,
            note: e.to_string(),
        },
    };
    let two_displayed_at_root = two.root.map(|g| class_two_displayed_condition(alpha, p, g));
    let two_displayed_root = find_root(
        |g| class_two_displayed_condition(alpha, p, g),
        ends.0,
        ends.1,
        "",
    )
    .ok();

    let y = (p - alpha).exp();
    let flat = match class_flat_plateau_end(alpha, p) {
        Ok(delta) => FamilyRoots {
            root: Some(delta),
            condition_at_root: Some(class_flat_condition(alpha, p, delta)),
            closed_form_at_root: Some(f_eval(alpha, delta, y)),
            closed_form_at_ends: (f_eval(alpha, ends.0, y), f_eval(alpha, ends.1, y)),
            admissible: true,
            note: String::from("plateau end accepted"),
        },
        Err(e) => FamilyRoots {
            root: None,
            condition_at_root: None,
            closed_form_at_root: None,
            closed_form_at_ends: (f_eval(alpha, ends.0, y), f_eval(alpha, ends.1, y)),
            admissible: false,
            note: e.to_string(),
        },
    };
    Ok(RootCrossCheck {
        alpha,
        p,
        two,
        two_displayed_at_root,
        two_displayed_root,
        flat,
    })
}
