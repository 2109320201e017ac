//! Small numerical kernels shared by the solver and the analytic checks.

use crate::error::{Error, Result, SignScan};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn kronrod15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let pair = f(c - dx) + f(c + dx);
        k += WGK[j] * pair;
        if j % 2 == 1 {
            g += WG[j / 2] * pair;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Adaptive Gauss–Kronrod (7/15) integration of `f` over `[a, b]`.
///
/// Returns the estimate and the accumulated error estimate. Subintervals are
/// bisected until their share of `abs_tol` is met or they become too narrow to
/// split further.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64) -> (f64, f64) {
    if !(b > a) {
        return (0.0, 0.0);
    }
    let width = b - a;
    let mut total = 0.0;
    let mut total_err = 0.0;
    let mut stack = vec![(a, b, 0u32)];
    while let Some((lo, hi, depth)) = stack.pop() {
        let (value, err) = kronrod15(&f, lo, hi);
        let share = abs_tol * (hi - lo) / width;
        let mid = 0.5 * (lo + hi);
        let splittable = depth < 60 && mid > lo && mid < hi;
        if err <= share.max(1e-15 * value.abs()) || !splittable {
            total += value;
            total_err += err;
        } else {
            stack.push((lo, mid, depth + 1));
            stack.push((mid, hi, depth + 1));
        }
    }
    (total, total_err)
}

/// Integrates over `[a, b]`, splitting at every interior breakpoint.
pub fn integrate_piecewise<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    abs_tol: f64,
) -> (f64, f64) {
    let mut knots: Vec<f64> = breaks
        .iter()
        .copied()
        .filter(|x| *x > a && *x < b)
        .collect();
    knots.push(a);
    knots.push(b);
    knots.sort_by(f64::total_cmp);
    knots.dedup_by(|x, y| (*x - *y).abs() <= 1e-14 * (1.0 + y.abs()));
    let pieces = (knots.len() - 1).max(1) as f64;
    let mut total = 0.0;
    let mut err = 0.0;
    for w in knots.windows(2) {
        let (v, e) = integrate(&f, w[0], w[1], abs_tol / pieces);
        total += v;
        err += e;
    }
    (total, err)
}

/// Bisection for a root of `f` on `[lo, hi]`; requires a sign change.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, x_tol: f64) -> Result<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if !(flo.signum() != fhi.signum()) || flo.is_nan() || fhi.is_nan() {
        return Err(Error::Precondition(format!(
            "bisection needs a sign change on [{lo}, {hi}], got {flo:e} and {fhi:e}"
        )));
    }
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= x_tol || mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Probes `f` at `probes + 1` uniform points of `[lo, hi]` and returns the
/// first bracketing pair, or a summary of what was seen.
pub fn scan_sign_change<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    probes: usize,
) -> std::result::Result<(f64, f64), SignScan> {
    let step = (hi - lo) / probes as f64;
    let first = f(lo);
    let mut prev = (lo, first);
    let mut min_value = first;
    let mut max_value = first;
    for j in 1..=probes {
        let x = if j == probes {
            hi
        } else {
            lo + step * j as f64
        };
        let fx = f(x);
        min_value = min_value.min(fx);
        max_value = max_value.max(fx);
        if prev.1 == 0.0 {
            return Ok((prev.0, prev.0));
        }
        if fx == 0.0 || fx.signum() != prev.1.signum() {
            return Ok((prev.0, x));
        }
        prev = (x, fx);
    }
    Err(SignScan {
        lower: lo,
        upper: hi,
        value_at_lower: first,
        value_at_upper: prev.1,
        min_value,
        max_value,
        probes,
    })
}

const CHUNK: usize = 256;
const LANES: usize = 8;

/// Plain sum over independent lanes (vectorizes; fixed order, so deterministic).
#[inline]
fn lane_sum(values: &[f64]) -> f64 {
    let mut lanes = [0.0f64; LANES];
    let mut blocks = values.chunks_exact(LANES);
    for block in &mut blocks {
        for (l, v) in lanes.iter_mut().zip(block) {
            *l += *v;
        }
    }
    let mut total = 0.0;
    for v in blocks.remainder() {
        total += *v;
    }
    let pairs = [
        lanes[0] + lanes[4],
        lanes[1] + lanes[5],
        lanes[2] + lanes[6],
        lanes[3] + lanes[7],
    ];
    total + ((pairs[0] + pairs[2]) + (pairs[1] + pairs[3]))
}

/// Sum of a slice with bounded rounding error: lane sums over short chunks,
/// compensated accumulation across chunks.
pub fn stable_sum(values: &[f64]) -> f64 {
    let mut acc = Neumaier::default();
    for chunk in values.chunks(CHUNK) {
        acc.add(lane_sum(chunk));
    }
    acc.value()
}

/// Compensated (Neumaier) accumulator.
#[derive(Debug, Default, Clone, Copy)]
pub struct Neumaier {
    sum: f64,
    carry: f64,
}

impl Neumaier {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// `n` points spread uniformly over `[a, b]`, endpoints included.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => {
            let h = (b - a) / (n - 1) as f64;
            (0..n)
                .map(|i| if i == n - 1 { b } else { a + h * i as f64 })
                .collect()
        }
    }
}
