//! Upwind solver on the characteristic diagonal `Δt = Δs`.
//!
//! Cell `i` (1-based) covers ages `[(i−1)Δs, iΔs]` and discharges when
//! `iΔs > σ(J·X)`. One step shifts every cell by one age slot, feeds the
//! activity back in at age 0, applies the implicit discharge factor
//! `1/(1+Δt)` to the firing cells and renormalizes the mass to one.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::model::{validate_initial, ModelConfig, ThresholdSpec};
use crate::numeric::{stable_sum, Neumaier};

/// Solver state at time `t^k = kΔt`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridState {
    ds: f64,
    cells: VecDeque<f64>,
    activity: f64,
    input: f64,
    step: u64,
    mass: f64,
}

impl GridState {
    pub fn ds(&self) -> f64 {
        self.ds
    }

    pub fn step_index(&self) -> u64 {
        self.step
    }

    pub fn time(&self) -> f64 {
        self.step as f64 * self.ds
    }

    /// `N^k`.
    pub fn activity(&self) -> f64 {
        self.activity
    }

    /// `X^k`.
    pub fn input(&self) -> f64 {
        self.input
    }

    /// `Δs·Σ n_i` after the last renormalization.
    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn cells(&self) -> impl Iterator<Item = f64> + '_ {
        self.cells.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }
}

/// Density sample: cell centres `(i−½)Δs` and cell values.
#[derive(Debug, Clone, PartialEq)]
pub struct DensitySnapshot {
    pub time: f64,
    pub ages: Vec<f64>,
    pub values: Vec<f64>,
}

impl DensitySnapshot {
    /// Piecewise-constant value at age `s`.
    pub fn value_at(&self, s: f64, ds: f64) -> f64 {
        let i = (s / ds).floor();
        if i < 0.0 || i as usize >= self.values.len() {
            0.0
        } else {
            self.values[i as usize]
        }
    }
}

pub fn snapshot_density(state: &GridState) -> DensitySnapshot {
    let ds = state.ds;
    DensitySnapshot {
        time: state.time(),
        ages: (0..state.len()).map(|i| (i as f64 + 0.5) * ds).collect(),
        values: state.cells.iter().copied().collect(),
    }
}

/// Per-step bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepReport {
    /// `Δs·Σñ − 1` before renormalization.
    pub drift: f64,
}

/// Time series produced by [`run`] (or built from samples for analysis).
#[derive(Debug, Clone, PartialEq)]
pub struct ActivityTrace {
    pub dt: f64,
    pub times: Vec<f64>,
    pub activity: Vec<f64>,
    pub input: Vec<f64>,
    pub mass: Vec<f64>,
    pub snapshots: Vec<DensitySnapshot>,
    /// Largest `|Δs·Σñ − 1|` over all steps.
    pub max_drift: f64,
}

impl ActivityTrace {
    /// Trace from uniformly spaced activity samples (input = activity, mass = 1).
    pub fn from_samples(t0: f64, dt: f64, activity: Vec<f64>) -> Self {
        let times = (0..activity.len()).map(|k| t0 + k as f64 * dt).collect();
        ActivityTrace {
            dt,
            times,
            input: activity.clone(),
            mass: vec![1.0; activity.len()],
            activity,
            snapshots: Vec::new(),
            max_drift: 0.0,
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn duration(&self) -> f64 {
        match (self.times.first(), self.times.last()) {
            (Some(a), Some(b)) => b - a,
            _ => 0.0,
        }
    }

    /// Index of the first sample at or after `t`.
    pub fn index_at(&self, t: f64) -> usize {
        self.times.partition_point(|x| *x < t - 1e-12)
    }
}

/// Precomputed constants of one run.
#[derive(Debug, Clone, Copy)]
struct Kernel {
    threshold: ThresholdSpec,
    connectivity: f64,
    lambda: f64,
    ds: f64,
    decay: f64,
}

impl Kernel {
    fn new(config: &ModelConfig) -> Self {
        Kernel {
            threshold: config.threshold,
            connectivity: config.connectivity,
            lambda: config.lambda,
            ds: config.ds,
            decay: 1.0 / (1.0 + config.dt()),
        }
    }

    /// 0-based index of the first discharging cell under input `x`.
    fn first_firing(&self, x: f64, cells: usize) -> usize {
        let thr = self.threshold.value(self.connectivity * x);
        let mut i = ((thr / self.ds).floor().max(0.0) as usize).saturating_add(1);
        while i > 1 && (i - 1) as f64 * self.ds > thr {
            i -= 1;
        }
        while (i as f64) * self.ds <= thr {
            i += 1;
        }
        (i - 1).min(cells)
    }
}

/// `(Σ_{i<split} n_i, Σ_{i≥split} n_i)`, each with bounded rounding error.
fn split_sums(cells: &VecDeque<f64>, split: usize) -> (f64, f64) {
    let (a, b) = cells.as_slices();
    let mut head = Neumaier::default();
    let mut tail = Neumaier::default();
    let cut = split.min(a.len());
    head.add(stable_sum(&a[..cut]));
    tail.add(stable_sum(&a[cut..]));
    let cut = split.saturating_sub(a.len()).min(b.len());
    head.add(stable_sum(&b[..cut]));
    tail.add(stable_sum(&b[cut..]));
    (head.value(), tail.value())
}

fn sum_from(cells: &VecDeque<f64>, start: usize) -> f64 {
    split_sums(cells, start).1
}

/// Multiplies cells before `split` by `head` and the rest by `tail`.
fn scale_split(cells: &mut VecDeque<f64>, split: usize, head: f64, tail: f64) {
    let (a, b) = cells.as_mut_slices();
    let cut = split.min(a.len());
    a[..cut].iter_mut().for_each(|v| *v *= head);
    a[cut..].iter_mut().for_each(|v| *v *= tail);
    let cut = split.saturating_sub(a.len()).min(b.len());
    b[..cut].iter_mut().for_each(|v| *v *= head);
    b[cut..].iter_mut().for_each(|v| *v *= tail);
}

/// Initial state: cell averages of the initial density, `N⁰` the least fixed
/// point of `N = Δs·Σ_{iΔs > σ(J N)} n_i`, and `X⁰ = N⁰`.
pub fn init_grid(config: &ModelConfig) -> Result<GridState> {
    config.validate()?;
    let values = validate_initial(&config.initial, config.s_max(), config.ds)?;
    let kernel = Kernel::new(config);
    let cells: VecDeque<f64> = values.into();
    let mass = config.ds * sum_from(&cells, 0);
    let mut n = 0.0;
    for _ in 0..=cells.len() + 1 {
        let next = config.ds * sum_from(&cells, kernel.first_firing(n, cells.len()));
        if next == n {
            break;
        }
        n = next;
    }
    Ok(GridState {
        ds: config.ds,
        cells,
        activity: n,
        input: n,
        step: 0,
        mass,
    })
}

fn advance(state: &mut GridState, kernel: &Kernel) -> Result<StepReport> {
    let len = state.cells.len();
    let n_old = state.activity;
    let x_old = state.input;
    let fire = kernel.first_firing(x_old, len);

    state.cells.pop_back();
    state.cells.push_front(n_old);
    let (head, tail) = split_sums(&state.cells, fire);
    let mut pre = Neumaier::default();
    pre.add(head);
    pre.add(kernel.decay * tail);
    let total = kernel.ds * pre.value();
    if !(total.is_finite() && total > 0.0) {
        return Err(Error::Numerical {
            step: state.step + 1,
            time: (state.step + 1) as f64 * kernel.ds,
            detail: format!("pre-correction mass {total}"),
        });
    }
    let scale = 1.0 / total;
    scale_split(&mut state.cells, fire, scale, kernel.decay * scale);

    let x_new = if kernel.lambda > 0.0 {
        let r = kernel.ds / kernel.lambda;
        x_old * (1.0 - r) + r * n_old
    } else {
        n_old
    };
    let fire_new = kernel.first_firing(x_new, len);
    let (rest, firing) = split_sums(&state.cells, fire_new);
    let n_new = kernel.ds * firing;
    let mut all = Neumaier::default();
    all.add(rest);
    all.add(firing);
    let mass = kernel.ds * all.value();

    state.step += 1;
    if !(n_new.is_finite() && x_new.is_finite() && mass.is_finite()) || n_new < 0.0 {
        return Err(Error::Numerical {
            step: state.step,
            time: state.time(),
            detail: format!("non-finite state: N = {n_new}, X = {x_new}, mass = {mass}"),
        });
    }
    state.activity = n_new;
    state.input = x_new;
    state.mass = mass;
    Ok(StepReport { drift: total - 1.0 })
}

/// Advances `state` by one time step in place.
pub fn step(state: &mut GridState, config: &ModelConfig) -> Result<StepReport> {
    advance(state, &Kernel::new(config))
}

/// Runs to `t_max`, recording `(t, N, X, mass)` at every step and density
/// snapshots at the steps nearest to `snapshot_times`.
pub fn run(config: &ModelConfig, snapshot_times: &[f64]) -> Result<ActivityTrace> {
    let mut state = init_grid(config)?;
    let kernel = Kernel::new(config);
    let steps = config.steps();
    let dt = config.dt();
    let mut wanted: Vec<(u64, usize)> = snapshot_times
        .iter()
        .enumerate()
        .map(|(j, t)| (((t / dt).round().max(0.0) as u64).min(steps), j))
        .collect();
    wanted.sort();
    let mut next_snap = 0;
    let mut snapshots: Vec<(usize, DensitySnapshot)> = Vec::with_capacity(wanted.len());

    let cap = steps as usize + 1;
    let mut trace = ActivityTrace {
        dt,
        times: Vec::with_capacity(cap),
        activity: Vec::with_capacity(cap),
        input: Vec::with_capacity(cap),
        mass: Vec::with_capacity(cap),
        snapshots: Vec::new(),
        max_drift: 0.0,
    };
    loop {
        trace.times.push(state.time());
        trace.activity.push(state.activity);
        trace.input.push(state.input);
        trace.mass.push(state.mass);
        while next_snap < wanted.len() && wanted[next_snap].0 == state.step {
            snapshots.push((wanted[next_snap].1, snapshot_density(&state)));
            next_snap += 1;
        }
        if state.step >= steps {
            break;
        }
        let report = advance(&mut state, &kernel)?;
        trace.max_drift = trace.max_drift.max(report.drift.abs());
    }
    snapshots.sort_by_key(|(j, _)| *j);
    trace.snapshots = snapshots.into_iter().map(|(_, s)| s).collect();
    Ok(trace)
}
