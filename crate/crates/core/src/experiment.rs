//! Pipeline orchestration: assemble, check the spectrum, simulate, sweep,
//! fit, and write artifacts.

use std::fmt;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{SystemTime, UNIX_EPOCH};

use crate::assembly::{coo_text, ModelKind, SpatialMesh};
use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::evolution::{make_initial_data, simulate_with, EnergyTrace};
use crate::frequency::{
    decay_fit_above_floor, spectrum_check, sweep_and_fit, validity_window, DecayFit, ResolventSweep, MAX_DENSE_DIM,
};
use crate::kernel::{build_xi_grid, default_xi_max};
use crate::operator::{assemble_generator, DiscreteOperator};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stage {
    Spectrum,
    Evolve,
    Sweep,
    Plots,
}

impl Stage {
    pub const ALL: [Stage; 4] = [Stage::Spectrum, Stage::Evolve, Stage::Sweep, Stage::Plots];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Spectrum => "spectrum",
            Stage::Evolve => "evolve",
            Stage::Sweep => "sweep",
            Stage::Plots => "plots",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Stage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Stage::ALL
            .into_iter()
            .find(|st| st.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| {
                Error::config(
                    "--stage",
                    format!("unknown stage '{s}' (expected spectrum, evolve, sweep or plots)"),
                )
            })
    }
}

/// Outcome of comparing a fitted exponent with its theoretical bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Match,
    /// Faster decay (smaller resolvent growth) than the bound allows for;
    /// consistent with an upper bound.
    BoundConsistent,
    Mismatch,
    /// The fit's r² is below the reporting threshold.
    Unreliable,
}

impl Verdict {
    pub fn label(self) -> &'static str {
        match self {
            Verdict::Match => "match",
            Verdict::BoundConsistent => "bound consistent",
            Verdict::Mismatch => "mismatch",
            Verdict::Unreliable => "unreliable fit",
        }
    }

    pub fn is_failure(self) -> bool {
        matches!(self, Verdict::Mismatch | Verdict::Unreliable)
    }
}

/// Absolute tolerance on the resolvent exponent.
pub const RESOLVENT_TOLERANCE: f64 = 0.2;
/// Relative tolerance on the decay exponent.
pub const DECAY_TOLERANCE: f64 = 0.25;

#[derive(Debug, Clone)]
pub struct Comparison {
    pub quantity: &'static str,
    pub target: f64,
    pub fit: DecayFit,
    pub verdict: Verdict,
}

/// Growth exponent `ℓ`: within ±0.2 matches, below is consistent with the
/// bound, above is a mismatch.
pub fn judge_resolvent(fit: &DecayFit, target: f64) -> Verdict {
    if !fit.is_reliable() {
        Verdict::Unreliable
    } else if (fit.exponent - target).abs() <= RESOLVENT_TOLERANCE {
        Verdict::Match
    } else if fit.exponent < target {
        Verdict::BoundConsistent
    } else {
        Verdict::Mismatch
    }
}

/// Decay exponent: within ±25% matches, faster is consistent with the bound,
/// slower is a mismatch.
pub fn judge_decay(fit: &DecayFit, target: f64) -> Verdict {
    if !fit.is_reliable() {
        Verdict::Unreliable
    } else if (fit.exponent - target).abs() <= DECAY_TOLERANCE * target {
        Verdict::Match
    } else if fit.exponent > target {
        Verdict::BoundConsistent
    } else {
        Verdict::Mismatch
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunSummary {
    pub files: Vec<PathBuf>,
    pub comparisons: Vec<Comparison>,
    pub max_real: Option<f64>,
    pub notes: Vec<String>,
}

impl RunSummary {
    /// No comparison failed.
    pub fn passes(&self) -> bool {
        self.comparisons.iter().all(|c| !c.verdict.is_failure())
    }

    pub fn text(&self, config: &ExperimentConfig) -> String {
        let kind = config.model.kind;
        let alpha = config.fractional.alpha();
        let mut out = String::new();
        let _ = writeln!(out, "model: {kind}");
        let _ = writeln!(out, "alpha: {alpha}");
        let _ = writeln!(out, "eta: {}", config.fractional.eta());
        let _ = writeln!(out, "target_resolvent_exponent: {:.6}", kind.resolvent_exponent(alpha));
        let _ = writeln!(out, "target_decay_exponent: {:.6}", kind.decay_exponent(alpha));
        if let Some(m) = self.max_real {
            let _ = writeln!(out, "max_real_eigenvalue: {m:.6e}");
        }
        for c in &self.comparisons {
            let _ = writeln!(
                out,
                "{}: fitted {:.4} (r2 {:.4}) vs target {:.4} -> {}",
                c.quantity,
                c.fit.exponent,
                c.fit.r_squared,
                c.target,
                c.verdict.label()
            );
        }
        for n in &self.notes {
            let _ = writeln!(out, "note: {n}");
        }
        let _ = writeln!(out, "overall: {}", if self.passes() { "pass" } else { "fail" });
        out
    }
}

/// The discrete operator a configuration describes; `d0 = 0` gives the
/// conservative system.
pub fn build_operator(config: &ExperimentConfig) -> Result<DiscreteOperator> {
    let d = &config.discretization;
    let params = &config.fractional;
    let xi_max = d.xi_max.unwrap_or_else(|| default_xi_max(params, d.quad_tol));
    let grid = build_xi_grid(params, d.n_xi, xi_max, d.quad_tol)?;
    let mesh = SpatialMesh::fitted(&config.model, d.n_left, d.n_right)?;
    assemble_generator(&config.model, &mesh, &grid, params)
}

fn timestamp() -> String {
    let secs = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    format!("# generated_unix={secs}\n")
}

/// `#` header: timestamp line, every config key, then stage metadata.
fn header(config: &ExperimentConfig, extra: &[(String, String)]) -> String {
    let mut out = timestamp();
    for (k, v) in config.echo() {
        let _ = writeln!(out, "# config.{k}={v}");
    }
    for (k, v) in extra {
        let _ = writeln!(out, "# {k}={v}");
    }
    out
}

fn strip_hash_header(csv: &str) -> &str {
    let mut rest = csv;
    while rest.starts_with('#') {
        rest = rest.split_once('\n').map_or("", |(_, r)| r);
    }
    rest
}

fn report_lines(config: &ExperimentConfig, extra: &[(&str, String)]) -> Vec<(String, String)> {
    let mut lines: Vec<(String, String)> = vec![(
        "generated_unix".into(),
        timestamp().trim_start_matches("# generated_unix=").trim().to_string(),
    )];
    lines.extend(config.echo().into_iter().map(|(k, v)| (format!("config.{k}"), v)));
    lines.extend(extra.iter().map(|(k, v)| (k.to_string(), v.clone())));
    lines
}

fn write(path: &Path, text: &str, summary: &mut RunSummary) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))?;
    summary.files.push(path.to_path_buf());
    Ok(())
}

/// Runs `stages` in pipeline order and writes artifacts into
/// `config.output.dir`. Files written before a failing stage stay on disk;
/// the error names the stage.
pub fn run_experiment(config: &ExperimentConfig, stages: &[Stage]) -> Result<RunSummary> {
    let dir = &config.output.dir;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut summary = RunSummary::default();
    let op = build_operator(config).map_err(|e| e.in_stage("assemble"))?;
    let kind = config.model.kind;
    let alpha = config.fractional.alpha();

    for stage in Stage::ALL.into_iter().filter(|s| stages.contains(s)) {
        let result = match stage {
            Stage::Spectrum => spectrum_stage(config, &op, &mut summary),
            Stage::Evolve => evolve_stage(config, &op, kind, alpha, &mut summary),
            Stage::Sweep => sweep_stage(config, &op, kind, alpha, &mut summary),
            Stage::Plots => {
                if config.output.plots {
                    emit_plot_data(dir).map(|files| summary.files.extend(files))
                } else {
                    Ok(())
                }
            }
        };
        result.map_err(|e| e.in_stage(stage.name()))?;
    }
    write(&dir.join("summary.txt"), &summary.text(config), &mut summary)?;
    Ok(summary)
}

fn spectrum_stage(config: &ExperimentConfig, op: &DiscreteOperator, summary: &mut RunSummary) -> Result<()> {
    let dir = &config.output.dir;
    write(
        &dir.join("stiffness.coo"),
        &coo_text("stiffness", &op.system().stiffness),
        summary,
    )?;
    write(&dir.join("mass.coo"), &coo_text("mass", &op.system().mass), summary)?;
    write(
        &dir.join("xi_grid.csv"),
        &format!("{}{}", header(config, &[]), op.grid().to_csv()),
        summary,
    )?;
    if op.dim() > MAX_DENSE_DIM {
        summary.notes.push(format!(
            "spectrum check skipped: state dimension {} exceeds the dense limit {MAX_DENSE_DIM}",
            op.dim()
        ));
        return Ok(());
    }
    let report = spectrum_check(op)?;
    let mut text = header(
        config,
        &[
            ("dim".into(), op.dim().to_string()),
            ("max_real".into(), format!("{:.17e}", report.max_real)),
        ],
    );
    text.push_str("re,im\n");
    let mut eig = report.eigenvalues.clone();
    eig.sort_by(|a, b| b.re.total_cmp(&a.re).then(a.im.total_cmp(&b.im)));
    for e in &eig {
        let _ = writeln!(text, "{:.17e},{:.17e}", e.re, e.im);
    }
    write(&dir.join("spectrum.csv"), &text, summary)?;
    if !op.is_conservative() && report.max_real >= 0.0 {
        return Err(Error::numerical(format!(
            "eigenvalue with real part {:.3e} >= 0 in a damped system",
            report.max_real
        )));
    }
    summary.max_real = Some(report.max_real);
    Ok(())
}

fn evolve_stage(
    config: &ExperimentConfig,
    op: &DiscreteOperator,
    kind: ModelKind,
    alpha: f64,
    summary: &mut RunSummary,
) -> Result<()> {
    let dir = &config.output.dir;
    let e = &config.evolution;
    let x0 = make_initial_data(op, e.profile, config.seed)?;
    let mut last = None;
    let trace = simulate_with(op, &x0, e.t_end, e.dt, e.sample_every, |_, x| last = Some(x.clone()))?;
    let mut text = header(config, &[("profile".into(), e.profile.to_string())]);
    text.push_str(&trace.to_csv());
    write(&dir.join("trace.csv"), &text, summary)?;
    if let Some(x) = last {
        let snapshot = format!(
            "{}{}",
            header(
                config,
                &[("t".into(), trace.times.last().copied().unwrap_or(0.0).to_string())]
            ),
            x.to_csv(&op.dof_labels())
        );
        write(&dir.join("snapshot.csv"), &snapshot, summary)?;
    }
    if trace.max_relative_increase() > 1e-12 {
        summary.notes.push(format!(
            "energy increased by {:.3e} relative in one sample interval",
            trace.max_relative_increase()
        ));
    }
    if op.is_conservative() {
        summary.notes.push("conservative system: decay fit skipped".into());
        return Ok(());
    }
    let fit = decay_fit_above_floor(&trace, e.tail_fraction, e.energy_floor)?;
    let target = kind.decay_exponent(alpha);
    let verdict = judge_decay(&fit, target);
    let extra = report_lines(
        config,
        &[
            ("quantity", "energy decay exponent".into()),
            ("target", format!("{target:.10}")),
            ("verdict", verdict.label().into()),
        ],
    );
    let extra: Vec<(&str, String)> = extra.iter().map(|(k, v)| (k.as_str(), v.clone())).collect();
    write(&dir.join("decay_fit.txt"), &fit.report(&extra), summary)?;
    summary.comparisons.push(Comparison {
        quantity: "decay_exponent",
        target,
        fit,
        verdict,
    });
    Ok(())
}

/// Sweep band: configured bounds, else the top decade of the validity window.
pub fn sweep_range(config: &ExperimentConfig, op: &DiscreteOperator) -> Result<(f64, f64)> {
    let window = validity_window(op)?;
    let hi = config.sweep.lambda_max.unwrap_or(window.lambda_max);
    let lo = config
        .sweep
        .lambda_min
        .unwrap_or_else(|| (hi / 10.0).max(window.lambda_min));
    if !window.contains(lo, hi) {
        return Err(Error::config(
            "sweep",
            format!(
                "lambda range [{lo:.4e}, {hi:.4e}] is not inside the validity window [{:.4e}, {:.4e}] of this mesh; refine the mesh or narrow the range",
                window.lambda_min, window.lambda_max
            ),
        ));
    }
    Ok((lo, hi))
}

fn sweep_stage(
    config: &ExperimentConfig,
    op: &DiscreteOperator,
    kind: ModelKind,
    alpha: f64,
    summary: &mut RunSummary,
) -> Result<()> {
    if op.is_conservative() {
        summary
            .notes
            .push("conservative system: resolvent sweep skipped".into());
        return Ok(());
    }
    let dir = &config.output.dir;
    let range = sweep_range(config, op)?;
    let (sweep, fit) = sweep_and_fit(op, range, config.sweep.n_points)?;
    let text = format!("{}{}", header(config, &[]), sweep.to_csv());
    write(&dir.join("sweep.csv"), &text, summary)?;
    let target = kind.resolvent_exponent(alpha);
    let verdict = judge_resolvent(&fit, target);
    let extra = report_lines(
        config,
        &[
            ("quantity", "resolvent growth exponent".into()),
            ("target", format!("{target:.10}")),
            ("predicted_decay_exponent", format!("{:.10}", 2.0 / fit.exponent)),
            ("verdict", verdict.label().into()),
        ],
    );
    let extra: Vec<(&str, String)> = extra.iter().map(|(k, v)| (k.as_str(), v.clone())).collect();
    write(&dir.join("resolvent_fit.txt"), &fit.report(&extra), summary)?;
    summary.comparisons.push(Comparison {
        quantity: "resolvent_exponent",
        target,
        fit,
        verdict,
    });
    Ok(())
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn meta_lookup(meta: &[(String, String)], key: &str) -> Option<String> {
    meta.iter()
        .find(|(k, _)| k == key || k == &format!("config.{key}"))
        .map(|(_, v)| v.clone())
}

fn model_and_alpha(meta: &[(String, String)], path: &Path) -> Result<(ModelKind, f64)> {
    let missing = |k: &str| Error::numerical(format!("{} lacks the '{k}' metadata entry", path.display()));
    let kind: ModelKind = meta_lookup(meta, "model.model")
        .or_else(|| meta_lookup(meta, "model"))
        .ok_or_else(|| missing("model"))?
        .parse()?;
    let alpha: f64 = meta_lookup(meta, "fractional.alpha")
        .or_else(|| meta_lookup(meta, "alpha"))
        .ok_or_else(|| missing("alpha"))?
        .parse()
        .map_err(|_| missing("alpha"))?;
    Ok((kind, alpha))
}

/// Log-log data files and a gnuplot script from the `trace.csv` and
/// `sweep.csv` found in `dir`, with the target power laws overlaid. At least
/// one of the two must exist; an empty trace or sweep is refused.
pub fn emit_plot_data(dir: &Path) -> Result<Vec<PathBuf>> {
    let trace_path = dir.join("trace.csv");
    let sweep_path = dir.join("sweep.csv");
    if !trace_path.exists() && !sweep_path.exists() {
        return Err(Error::numerical(format!(
            "no trace.csv or sweep.csv in {} to plot",
            dir.display()
        )));
    }
    let mut files = Vec::new();
    let mut script = String::from("set logscale xy\nset key top right\nset grid\n");
    if trace_path.exists() {
        let trace = EnergyTrace::from_csv(&read(&trace_path)?)?;
        let (kind, alpha) = model_and_alpha(&trace.meta, &trace_path)?;
        let points: Vec<(f64, f64)> = trace
            .times
            .iter()
            .zip(&trace.energies)
            .filter(|(t, e)| **t > 0.0 && **e > 0.0)
            .map(|(&t, &e)| (t, e))
            .collect();
        if points.is_empty() {
            return Err(Error::numerical("energy trace has no positive samples to plot"));
        }
        let slope = -kind.decay_exponent(alpha);
        let path = dir.join("energy_loglog.dat");
        fs::write(&path, loglog_table("t", "E", slope, &points)).map_err(|e| Error::io(&path, e))?;
        files.push(path);
        let _ = writeln!(
            script,
            "set terminal pngcairo size 800,600\nset output 'energy.png'\nset xlabel 't'\nset ylabel 'E(t)'\n\
             plot 'energy_loglog.dat' using (10**$1):(10**$2) with lines title 'energy', \\\n     \
             '' using (10**$1):(10**$3) with lines dashtype 2 title 'slope {slope:.4}'"
        );
    }
    if sweep_path.exists() {
        let text = read(&sweep_path)?;
        let sweep = ResolventSweep::from_csv(strip_hash_header(&text))?;
        let mut meta = sweep.meta.clone();
        meta.extend(ResolventSweep::from_csv(&text)?.meta);
        let (kind, alpha) = model_and_alpha(&meta, &sweep_path)?;
        if sweep.lambdas.is_empty() {
            return Err(Error::numerical("sweep has no samples to plot"));
        }
        let slope = kind.resolvent_exponent(alpha);
        let points: Vec<(f64, f64)> = sweep.lambdas.iter().copied().zip(sweep.norms.iter().copied()).collect();
        let path = dir.join("resolvent_loglog.dat");
        fs::write(&path, loglog_table("lambda", "norm", slope, &points)).map_err(|e| Error::io(&path, e))?;
        files.push(path);
        let _ = writeln!(
            script,
            "set terminal pngcairo size 800,600\nset output 'resolvent.png'\nset xlabel 'lambda'\nset ylabel '|R(i lambda)|'\n\
             plot 'resolvent_loglog.dat' using (10**$1):(10**$2) with linespoints title 'local sup', \\\n     \
             '' using (10**$1):(10**$3) with lines dashtype 2 title 'slope {slope:.4}'"
        );
    }
    let path = dir.join("plots.gp");
    fs::write(&path, script).map_err(|e| Error::io(&path, e))?;
    files.push(path);
    Ok(files)
}

// columns: log10 x, log10 y, log10 of a reference line through the first point
fn loglog_table(x: &str, y: &str, slope: f64, points: &[(f64, f64)]) -> String {
    let (x0, y0) = points[0];
    let mut out = format!("# log10_{x} log10_{y} log10_reference slope={slope}\n");
    for &(a, b) in points {
        let reference = y0.log10() + slope * (a.log10() - x0.log10());
        let _ = writeln!(out, "{:.10e} {:.10e} {:.10e}", a.log10(), b.log10(), reference);
    }
    out
}
