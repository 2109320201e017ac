use std::io::Write;
use std::path::{Path, PathBuf};

use elapsed_neurons::analysis::{
    classify_trace, scan_parameter, ClassifyParams, Regime, RegimeReport, ScanParam, ScanRow,
    ScanSettings, ScanTable,
};
use elapsed_neurons::analytic::{
    build, cross_check_roots, verify as verify_profile, Construction, Family,
};
use elapsed_neurons::numeric::linspace;
use elapsed_neurons::solver::run;
use elapsed_neurons::{Execution, ThresholdSpec};

use crate::config::{self, RunConfig};
use crate::error::{CliError, Result};
use crate::output::{format_value, read_table_file, write_profile, write_snapshot, write_trace};
use crate::plot;

/// Samples written for one period of an analytic profile.
pub const PROFILE_SAMPLES: usize = 10_000;
/// Residual bound for `verify`.
pub const VERIFY_TOL: f64 = 1e-6;

fn io_err(out: std::io::Error) -> CliError {
    CliError::io("<stdout>", out)
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    config::parse(&text, &path.display().to_string())
}

fn prefix_for(config_path: &Path, cfg: &RunConfig, out: Option<&Path>) -> PathBuf {
    match (out, &cfg.out) {
        (Some(p), _) => p.to_path_buf(),
        (None, Some(p)) => p.clone(),
        (None, None) => config_path.with_extension(""),
    }
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn classify_params(cfg: &RunConfig, spec: &ThresholdSpec, t_max: f64) -> ClassifyParams {
    ClassifyParams::for_threshold(cfg.window_for(t_max), cfg.tol, spec)
}

/// `classification=... key=value ...` for a regime report.
pub fn regime_line(report: &RegimeReport) -> String {
    let mut line = format!("classification={}", report.regime);
    match report.regime {
        Regime::Converged => {
            if let Some(l) = report.limit {
                line.push_str(&format!(" limit={l:.6}"));
            }
            if let Some(r) = report.rate {
                line.push_str(&format!(" rate={r:.4}"));
            }
        }
        Regime::Periodic => {
            if let Some(p) = report.period {
                line.push_str(&format!(" period={p:.4}"));
            }
            if let Some(m) = report.jumps_per_period {
                line.push_str(&format!(" jumps={m}"));
            }
        }
        Regime::Undetermined => {}
    }
    line.push_str(&format!(
        " min={:.6} max={:.6} amplitude={:.3e}",
        report.min, report.max, report.trailing_amplitude
    ));
    line
}

/// Runs the configured simulation, writes `<prefix>_trace.csv`,
/// `<prefix>_snapshot_<k>.csv` and `<prefix>_report.txt`, and prints the
/// report.
pub fn simulate(
    config_path: &Path,
    out_prefix: Option<&Path>,
    stdout: &mut dyn Write,
) -> Result<()> {
    let cfg = load_config(config_path)?;
    let prefix = prefix_for(config_path, &cfg, out_prefix);
    let model = &cfg.model;
    let trace = run(model, &cfg.snapshots)?;

    let trace_path = with_suffix(&prefix, "_trace.csv");
    write_trace(&trace_path, &trace)?;
    let mut files = vec![trace_path];
    for (k, snap) in trace.snapshots.iter().enumerate() {
        let path = with_suffix(&prefix, &format!("_snapshot_{k}.csv"));
        write_snapshot(&path, snap)?;
        files.push(path);
    }

    let mass_error = trace
        .mass
        .iter()
        .fold(0.0f64, |m, v| m.max((v - 1.0).abs()));
    let mut report = String::new();
    report.push_str(&format!(
        "steps={} t_end={} N_final={:.9} mass_error={:.3e} max_drift={:.3e}\n",
        trace.len() - 1,
        trace.times.last().copied().unwrap_or(0.0),
        trace.activity.last().copied().unwrap_or(f64::NAN),
        mass_error,
        trace.max_drift
    ));
    let params = classify_params(&cfg, &model.threshold, model.t_max);
    match classify_trace(&trace, &params) {
        Ok(r) => report.push_str(&regime_line(&r)),
        Err(e) => report.push_str(&format!("classification=Undetermined reason=\"{e}\"")),
    }
    report.push('\n');
    for (snap, t) in trace.snapshots.iter().zip(&cfg.snapshots) {
        report.push_str(&format!("snapshot requested={t} taken={:.6}\n", snap.time));
    }
    for f in &files {
        report.push_str(&format!("wrote {}\n", f.display()));
    }
    let report_path = with_suffix(&prefix, "_report.txt");
    std::fs::write(&report_path, &report).map_err(|e| CliError::io(&report_path, e))?;
    stdout.write_all(report.as_bytes()).map_err(io_err)?;
    Ok(())
}

fn cross_check_lines(alpha: f64, p: f64) -> String {
    let Ok(c) = cross_check_roots(alpha, p) else {
        return String::new();
    };
    let opt = |v: Option<f64>| v.map_or("none".to_string(), |x| format!("{x:.9}"));
    let optr = |v: Option<f64>| v.map_or("none".to_string(), |x| format!("{x:.3e}"));
    format!(
        "cross_check two root={} condition={} g_at_root={} g_ends={:.6e},{:.6e} admissible={} integral_form_at_root={} integral_form_root={} note=\"{}\"\n\
         cross_check flat root={} condition={} f_at_root={} f_ends={:.6e},{:.6e} note=\"{}\"\n",
        opt(c.two.root),
        optr(c.two.condition_at_root),
        optr(c.two.closed_form_at_root),
        c.two.closed_form_at_ends.0,
        c.two.closed_form_at_ends.1,
        c.two.admissible,
        optr(c.two_displayed_at_root),
        opt(c.two_displayed_root),
        c.two.note,
        opt(c.flat.root),
        optr(c.flat.condition_at_root),
        optr(c.flat.closed_form_at_root),
        c.flat.closed_form_at_ends.0,
        c.flat.closed_form_at_ends.1,
        c.flat.note,
    )
}

fn construct(family: Family, alpha: f64, p: Option<f64>) -> Result<Construction> {
    if family != Family::One && p.is_none() {
        return Err(CliError::Usage(format!("family {family} needs --p")));
    }
    build(family, alpha, p).map_err(|e| match p {
        Some(p) if e.is_construction() => CliError::Construction {
            source: e,
            detail: cross_check_lines(alpha, p).trim_end().to_string(),
        },
        _ => CliError::Model(e),
    })
}

fn header(c: &Construction) -> String {
    let mut s = format!("family={} alpha={}", c.family, c.alpha);
    if let Some(p) = c.p {
        s.push_str(&format!(" p={p}"));
    }
    s.push('\n');
    let (lo, hi) = c.profile.min_max(1000);
    s.push_str(&format!(
        "jumps={} period={} min={:.6} max={:.6}\n",
        c.profile.jump_times().len(),
        c.profile.period(),
        lo,
        hi
    ));
    if let Some(r) = c.root {
        s.push_str(&format!(
            "root={r:.12} root_residual={:.3e}\n",
            c.root_residual
        ));
    }
    s
}

/// Builds one periodic activity, writes one period as `t,N` and prints its
/// residuals and the root cross-check.
pub fn analytic(
    family: Family,
    alpha: f64,
    p: Option<f64>,
    out: &Path,
    samples: usize,
    stdout: &mut dyn Write,
) -> Result<()> {
    let c = construct(family, alpha, p)?;
    let period = c.profile.period();
    let dt = period / PROFILE_SAMPLES as f64;
    let times: Vec<f64> = (0..PROFILE_SAMPLES).map(|j| j as f64 * dt).collect();
    let values = c.profile.sample(0.0, dt, PROFILE_SAMPLES);
    write_profile(out, &times, &values)?;

    let spec = ThresholdSpec::paper(alpha)?;
    let v = verify_profile(&c.profile, &spec, samples, Execution::default());
    let mut report = header(&c);
    report.push_str(&format!(
        "samples={} mass_residual={:.3e} boundary_residual={:.3e}\n",
        v.samples, v.mass, v.boundary
    ));
    if let Some(p) = c.p {
        report.push_str(&cross_check_lines(alpha, p));
    }
    report.push_str(&format!("wrote {}\n", out.display()));
    stdout.write_all(report.as_bytes()).map_err(io_err)?;
    Ok(())
}

/// Reconstructs the density of one periodic activity and checks mass and
/// boundary residuals against [`VERIFY_TOL`]. `corrupt` rescales the activity
/// first, which must make the check fail.
pub fn verify(
    family: Family,
    alpha: f64,
    p: Option<f64>,
    samples: usize,
    corrupt: Option<f64>,
    stdout: &mut dyn Write,
) -> Result<()> {
    if samples == 0 {
        return Err(CliError::Usage("--samples must be at least 1".into()));
    }
    let mut c = construct(family, alpha, p)?;
    if let Some(k) = corrupt {
        c.profile = c.profile.scaled(k)?;
    }
    let spec = ThresholdSpec::paper(alpha)?;
    let v = verify_profile(&c.profile, &spec, samples, Execution::default());
    let pass = v.passes(VERIFY_TOL);
    let mut report = header(&c);
    if let Some(k) = corrupt {
        report.push_str(&format!("corrupted scale={k}\n"));
    }
    report.push_str(&format!(
        "samples={} mass_residual={:.3e} boundary_residual={:.3e} tol={VERIFY_TOL:e} result={}\n",
        v.samples,
        v.mass,
        v.boundary,
        if pass { "pass" } else { "fail" }
    ));
    stdout.write_all(report.as_bytes()).map_err(io_err)?;
    if pass {
        Ok(())
    } else {
        Err(CliError::Verification(format!(
            "mass residual {:.3e}, boundary residual {:.3e} exceed {VERIFY_TOL:e}",
            v.mass, v.boundary
        )))
    }
}

#[derive(Debug, Clone)]
pub struct ScanRequest {
    pub param: ScanParam,
    pub from: f64,
    pub to: f64,
    pub steps: usize,
    pub values: Option<Vec<f64>>,
    pub width: f64,
}

impl ScanRequest {
    pub fn grid(&self) -> Result<Vec<f64>> {
        if let Some(v) = &self.values {
            if v.is_empty() || v.iter().any(|x| !x.is_finite() || *x < 0.0) {
                return Err(CliError::Usage(
                    "--values needs non-negative numbers".into(),
                ));
            }
            return Ok(v.clone());
        }
        if !(self.from.is_finite()
            && self.to.is_finite()
            && self.from >= 0.0
            && self.to >= self.from)
        {
            return Err(CliError::Usage(format!(
                "scan range [{}, {}] must satisfy 0 <= from <= to",
                self.from, self.to
            )));
        }
        match self.steps {
            0 => Err(CliError::Usage("--steps must be at least 1".into())),
            1 => Ok(vec![self.from]),
            n => Ok(linspace(self.from, self.to, n)),
        }
    }
}

fn row_record(row: &ScanRow) -> Vec<String> {
    let r = &row.report;
    vec![
        format_value(row.value),
        r.regime.to_string(),
        r.period.map(format_value).unwrap_or_default(),
        format_value(r.min),
        format_value(r.max),
    ]
}

/// CSV table of all runs (grid and refinement) in parameter order, then the
/// transition line.
pub fn scan_table_text(table: &ScanTable) -> String {
    let mut rows: Vec<&ScanRow> = table.rows.iter().chain(&table.refinements).collect();
    rows.sort_by(|a, b| a.value.total_cmp(&b.value));
    let mut buf = Vec::new();
    {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(&mut buf);
        let name = table.param.name();
        w.write_record([name, "classification", "period", "min", "max"])
            .expect("writing to memory");
        for row in rows {
            w.write_record(row_record(row)).expect("writing to memory");
        }
        w.flush().expect("writing to memory");
    }
    let mut text = String::from_utf8(buf).expect("csv output is UTF-8");
    let star = format!("{}*", table.param.name());
    match &table.critical {
        Some(c) if c.resolved => text.push_str(&format!(
            "# {star}={:.6} interval=[{:.6}, {:.6}] width={:.6}\n",
            c.midpoint(),
            c.lo,
            c.hi,
            c.width()
        )),
        Some(c) => text.push_str(&format!(
            "# {star} unresolved interval=[{:.6}, {:.6}] width={:.6}\n",
            c.lo,
            c.hi,
            c.width()
        )),
        None => text.push_str(&format!("# {star} none\n")),
    }
    text
}

pub fn scan(
    config_path: &Path,
    request: &ScanRequest,
    out: Option<&Path>,
    stdout: &mut dyn Write,
) -> Result<()> {
    let cfg = load_config(config_path)?;
    let values = request.grid()?;
    let base = cfg.model.clone();
    for v in &values {
        request.param.apply(&base, *v).validate()?;
    }
    let mut settings = ScanSettings::new(classify_params(&cfg, &base.threshold, base.t_max));
    settings.width = request.width;
    let table = scan_parameter(&base, request.param, &values, &settings)?;
    let text = scan_table_text(&table);
    if let Some(path) = out {
        std::fs::write(path, &text).map_err(|e| CliError::io(path, e))?;
    }
    stdout.write_all(text.as_bytes()).map_err(io_err)?;
    Ok(())
}

/// Plots `columns` (default: every column but the first) of a CSV file.
pub fn plot(input: &Path, output: &Path, columns: Option<Vec<String>>) -> Result<()> {
    let table = read_table_file(input)?;
    let columns = columns.unwrap_or_else(|| table.headers.iter().skip(1).cloned().collect());
    let svg = plot::render(&table, &columns)
        .map_err(|m| CliError::Usage(format!("{}: {m}", input.display())))?;
    std::fs::write(output, svg).map_err(|e| CliError::io(output, e))
}
