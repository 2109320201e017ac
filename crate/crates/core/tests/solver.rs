use approx::assert_abs_diff_eq;
use elapsed_neurons::analytic::{linear_stationary_profile, n_star};
use elapsed_neurons::solver::{init_grid, run, snapshot_density, step, ActivityTrace};
use elapsed_neurons::{InitialDensity, ModelConfig, ThresholdSpec};
use proptest::prelude::*;

fn linear(sigma: f64, initial: InitialDensity) -> ModelConfig {
    ModelConfig::new(ThresholdSpec::constant(sigma).unwrap(), initial)
}

/// Exact activity for a constant threshold `σ` and the unit block start.
///
/// For `t < σ` only the initial cohorts fire, giving `N = 1 − σe^{−t}`; after
/// that the population above threshold obeys `N' = N(t − σ) − N`. On
/// `[kσ, (k+1)σ]` the solution is `1 + e^{−t}Q_k(t − kσ)` with
/// `Q_0 = −σ` and `Q_{k+1}(u) = Q_k(σ) + e^σ ∫_0^u Q_k`.
struct BlockOracle {
    sigma: f64,
    pieces: Vec<Vec<f64>>,
}

impl BlockOracle {
    fn new(sigma: f64, t_end: f64) -> Self {
        let count = (t_end / sigma).ceil() as usize + 1;
        let mut pieces = vec![vec![-sigma]];
        for _ in 1..count {
            let q = pieces.last().unwrap();
            let at_end: f64 = q
                .iter()
                .enumerate()
                .map(|(j, c)| c * sigma.powi(j as i32))
                .sum();
            let mut next = vec![at_end];
            for (j, c) in q.iter().enumerate() {
                next.push(sigma.exp() * c / (j + 1) as f64);
            }
            pieces.push(next);
        }
        BlockOracle { sigma, pieces }
    }

    fn eval(&self, t: f64) -> f64 {
        let k = ((t / self.sigma).floor() as usize).min(self.pieces.len() - 1);
        let u = t - k as f64 * self.sigma;
        let q: f64 = self.pieces[k].iter().rev().fold(0.0, |acc, c| acc * u + c);
        1.0 + (-t).exp() * q
    }
}

fn sup_error(trace: &ActivityTrace, oracle: &BlockOracle) -> f64 {
    trace
        .times
        .iter()
        .zip(&trace.activity)
        .fold(0.0f64, |m, (t, n)| m.max((n - oracle.eval(*t)).abs()))
}

#[test]
fn block_oracle_matches_its_own_equation() {
    let sigma = 0.5;
    let o = BlockOracle::new(sigma, 5.0);
    assert_abs_diff_eq!(o.eval(0.0), 0.5, epsilon = 1e-15);
    assert_abs_diff_eq!(o.eval(0.3), 1.0 - 0.5 * (-0.3f64).exp(), epsilon = 1e-15);
    for t in [0.7, 1.3, 2.2, 3.9, 4.6] {
        let h = 1e-5;
        let d = (o.eval(t + h) - o.eval(t - h)) / (2.0 * h);
        assert_abs_diff_eq!(d, o.eval(t - sigma) - o.eval(t), epsilon = 1e-8);
    }
    // continuity across the pieces
    for k in 1..10 {
        let t = k as f64 * sigma;
        assert_abs_diff_eq!(o.eval(t - 1e-13), o.eval(t + 1e-13), epsilon = 1e-11);
    }
    // slow approach to the stationary activity
    assert_abs_diff_eq!(
        BlockOracle::new(sigma, 12.0).eval(12.0),
        2.0 / 3.0,
        epsilon = 1e-4
    );
}

#[test]
fn halving_the_step_halves_the_error() {
    let sigma = 0.5;
    let t_end = 4.0;
    let oracle = BlockOracle::new(sigma, t_end);
    let errors: Vec<f64> = [2e-3, 1e-3, 5e-4]
        .iter()
        .map(|ds| {
            let cfg = linear(sigma, InitialDensity::UnitBlock)
                .with_ds(*ds)
                .with_t_max(t_end);
            sup_error(&run(&cfg, &[]).unwrap(), &oracle)
        })
        .collect();
    for w in errors.windows(2) {
        let ratio = w[1] / w[0];
        assert!((0.3..=0.7).contains(&ratio), "errors {errors:?}");
    }
    assert!(errors[1] < 5e-3);
}

#[test]
fn linear_delay_identity() {
    let sigma = 0.5;
    let cfg = linear(sigma, InitialDensity::UnitBlock).with_t_max(10.0);
    let trace = run(&cfg, &[]).unwrap();
    let dt = trace.dt;
    let lag = (sigma / dt).round() as usize;
    let mut worst = 0.0f64;
    for k in lag..trace.len() {
        let window: f64 = trace.activity[k + 1 - lag..=k].iter().sum::<f64>() * dt;
        worst = worst.max((trace.activity[k] + window - 1.0).abs());
    }
    assert!(worst <= 5.0 * cfg.ds, "worst {worst}");
}

#[test]
fn stationary_start_stays_stationary() {
    let cfg = linear(0.5, InitialDensity::LinearStationary { sigma: 0.5 });
    let trace = run(&cfg, &[]).unwrap();
    let target = n_star(0.5).unwrap();
    for n in &trace.activity {
        assert!((n - target).abs() <= 5e-3);
    }
    assert_abs_diff_eq!(trace.activity[0], target, epsilon = 2e-3);
}

#[test]
fn initial_activity_is_the_mass_beyond_threshold() {
    let state = init_grid(&linear(0.5, InitialDensity::UnitBlock)).unwrap();
    assert_abs_diff_eq!(state.activity(), 0.5, epsilon = 1e-12);
    assert_abs_diff_eq!(state.mass(), 1.0, epsilon = 1e-13);
    let snap = snapshot_density(&state);
    for (s, n) in snap.ages.iter().zip(&snap.values) {
        let block = if *s < 1.0 { 1.0 } else { 0.0 };
        assert_abs_diff_eq!(*n, block, epsilon = 1e-12);
    }
}

#[test]
fn unit_delay_step_reproduces_the_instantaneous_input() {
    let base = linear(0.5, InitialDensity::UnitBlock).with_t_max(5.0);
    let instant = run(&base, &[]).unwrap();
    let delayed = run(&base.clone().with_lambda(base.dt()), &[]).unwrap();
    let gap = instant
        .input
        .iter()
        .zip(&delayed.input)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    assert!(gap <= 10.0 * base.dt(), "gap {gap}");
}

#[test]
fn relaxed_density_matches_the_stationary_profile() {
    let cfg = linear(0.5, InitialDensity::UnitBlock);
    let trace = run(&cfg, &[20.0]).unwrap();
    let snap = &trace.snapshots[0];
    let a = linear_stationary_profile(0.5).unwrap();
    let l1: f64 = snap
        .ages
        .iter()
        .zip(&snap.values)
        .map(|(s, n)| (n - a.integral(s - 0.5 * cfg.ds, s + 0.5 * cfg.ds) / cfg.ds).abs() * cfg.ds)
        .sum();
    assert!(l1 <= 1e-2, "L1 distance {l1}");
}

#[test]
fn synchronized_density_is_discontinuous() {
    let cfg = ModelConfig::new(
        ThresholdSpec::paper(3.0).unwrap(),
        InitialDensity::UnitBlock,
    )
    .with_t_max(40.0);
    let trace = run(&cfg, &[39.0]).unwrap();
    let v = &trace.snapshots[0].values;
    let jump = v.windows(2).fold(0.0f64, |m, w| m.max((w[1] - w[0]).abs()));
    assert!(jump > 0.1, "largest cell-to-cell jump {jump}");
}

#[test]
fn mass_is_renormalized_every_step() {
    for cfg in [
        linear(0.5, InitialDensity::UnitBlock),
        ModelConfig::new(
            ThresholdSpec::paper(3.0).unwrap(),
            InitialDensity::Exponential,
        )
        .with_t_max(20.0),
        ModelConfig::new(
            ThresholdSpec::paper(3.0).unwrap(),
            InitialDensity::UnitBlock,
        )
        .with_lambda(0.5)
        .with_t_max(20.0),
    ] {
        let trace = run(&cfg, &[]).unwrap();
        assert!(trace.mass.iter().all(|m| (m - 1.0).abs() <= 1e-13));
    }
}

#[test]
fn pre_correction_drift_is_second_order() {
    let cfg = linear(0.5, InitialDensity::UnitBlock);
    let trace = run(&cfg, &[]).unwrap();
    assert!(
        trace.max_drift < 10.0 * cfg.dt() * cfg.dt(),
        "drift {}",
        trace.max_drift
    );
}

fn max_over_run(cfg: &ModelConfig) -> (f64, f64) {
    let mut state = init_grid(cfg).unwrap();
    let mut hi = state.cells().fold(0.0f64, f64::max);
    let mut lo = state.cells().fold(f64::INFINITY, f64::min);
    for _ in 0..cfg.steps() {
        step(&mut state, cfg).unwrap();
        for v in state.cells().chain([state.activity(), state.input()]) {
            hi = hi.max(v);
            lo = lo.min(v);
        }
    }
    (lo, hi)
}

/// Every value of the state, including the unit block itself, stays in
/// `[0, 1 + 1e-12]` on the acceptance runs.
#[test]
fn state_stays_in_the_unit_interval() {
    let affine = ThresholdSpec::affine_clipped(0.5, 0.1, 0.4).unwrap();
    let paper = ThresholdSpec::paper(3.0).unwrap();
    let configs = [
        linear(0.5, InitialDensity::UnitBlock),
        ModelConfig::new(affine, InitialDensity::UnitBlock).with_t_max(30.0),
        ModelConfig::new(paper, InitialDensity::UnitBlock).with_t_max(60.0),
    ];
    let mut worst = Vec::new();
    for cfg in &configs {
        let (lo, hi) = max_over_run(cfg);
        assert!(lo >= 0.0);
        worst.push(hi);
    }
    assert!(
        worst.iter().all(|hi| *hi <= 1.0 + 1e-12),
        "largest values {worst:?}"
    );
}

#[test]
fn bounded_data_stays_bounded() {
    // densities strictly below one leave room for the O(dt^2) renormalization
    let cfg = linear(0.5, InitialDensity::Exponential).with_t_max(10.0);
    let (lo, hi) = max_over_run(&cfg);
    assert!(lo >= 0.0 && hi <= 1.0 + 1e-12);
}

#[test]
fn zero_horizon_keeps_the_initial_sample() {
    let cfg = linear(0.5, InitialDensity::UnitBlock).with_t_max(0.0);
    let trace = run(&cfg, &[]).unwrap();
    assert_eq!(trace.len(), 1);
    assert_abs_diff_eq!(trace.activity[0], 0.5, epsilon = 1e-12);
}

#[test]
fn runs_are_bit_identical() {
    let cfg = ModelConfig::new(
        ThresholdSpec::paper(3.0).unwrap(),
        InitialDensity::UnitBlock,
    )
    .with_t_max(15.0)
    .with_lambda(0.1);
    let a = run(&cfg, &[3.0, 9.0]).unwrap();
    let b = run(&cfg, &[3.0, 9.0]).unwrap();
    let bits = |t: &ActivityTrace| {
        t.activity
            .iter()
            .chain(&t.input)
            .chain(&t.mass)
            .chain(t.snapshots.iter().flat_map(|s| s.values.iter()))
            .map(|v| v.to_bits())
            .collect::<Vec<_>>()
    };
    assert_eq!(bits(&a), bits(&b));
}

#[test]
fn non_finite_parameters_are_rejected() {
    let cfg = linear(0.5, InitialDensity::UnitBlock).with_connectivity(f64::NAN);
    assert!(run(&cfg, &[]).is_err());
    let cfg = linear(0.5, InitialDensity::UnitBlock).with_ds(0.2);
    assert!(run(&cfg, &[]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn mass_and_bounds_for_random_thresholds(
        sigma0 in 0.4f64..1.5,
        slope in 0.0f64..0.5,
        j in 0.0f64..2.0,
        lambda in prop_oneof![Just(0.0), 0.01f64..1.0],
    ) {
        let floor = 0.5 * sigma0;
        let spec = ThresholdSpec::affine_clipped(sigma0, slope, floor).unwrap();
        let cfg = ModelConfig::new(spec, InitialDensity::Exponential)
            .with_connectivity(j)
            .with_lambda(lambda)
            .with_ds(2e-3)
            .with_t_max(3.0);
        let trace = run(&cfg, &[]).unwrap();
        for k in 0..trace.len() {
            prop_assert!((trace.mass[k] - 1.0).abs() <= 1e-13);
            prop_assert!((0.0..=1.0 + 1e-12).contains(&trace.activity[k]));
            prop_assert!((0.0..=1.0 + 1e-12).contains(&trace.input[k]));
        }
    }
}
