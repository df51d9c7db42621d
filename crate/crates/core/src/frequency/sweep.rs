use std::fmt::Write as _;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::fit::{fit_power_law, DecayFit};
use super::resolvent::{resolvent_norm_with, ResolventOptions};
use crate::assembly::FieldKind;
use crate::error::{Error, Result};
use crate::modes::lowest_modes;
use crate::operator::DiscreteOperator;

/// Band of `λ` in which the mesh represents the continuous resolvent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidityWindow {
    pub lambda_min: f64,
    pub lambda_max: f64,
    /// Lowest undamped angular frequency.
    pub fundamental: f64,
}

impl ValidityWindow {
    pub fn contains(&self, lo: f64, hi: f64) -> bool {
        let slack = 1e-9;
        lo >= self.lambda_min * (1.0 - slack) && hi <= self.lambda_max * (1.0 + slack) && lo < hi
    }
}

/// `λ_max`: a tenth of the largest resolved frequency of the coarsest field,
/// `π √c / h` for strings and `π² √c / h²` for beams. `λ_min`: ten times the
/// fundamental undamped frequency.
pub fn validity_window(op: &DiscreteOperator) -> Result<ValidityWindow> {
    let system = op.system();
    let mut lambda_max = f64::INFINITY;
    for layout in system.left.iter().chain(std::iter::once(&system.right)) {
        let h = layout.nodes.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
        let c = layout.coefficient.sqrt();
        let top = match layout.kind {
            FieldKind::WaveP1 => std::f64::consts::PI * c / h,
            FieldKind::BeamHermite => std::f64::consts::PI.powi(2) * c / (h * h),
        };
        lambda_max = lambda_max.min(top / 10.0);
    }
    let modes = lowest_modes(&system.stiffness, &system.mass, 1)?;
    let fundamental = modes.frequencies()[0];
    Ok(ValidityWindow {
        lambda_min: 10.0 * fundamental,
        lambda_max,
        fundamental,
    })
}

/// Undamped angular frequencies in `[lo, hi)`, by Sturm counts of
/// `K - s M_q` and bisection to relative `1e-12` in `s = ω²`.
pub fn undamped_frequencies(op: &DiscreteOperator, lo: f64, hi: f64) -> Vec<f64> {
    let k = &op.system().stiffness;
    let m = &op.system().mass;
    let (s_lo, s_hi) = (lo * lo, hi * hi);
    let c_lo = k.count_below(m, s_lo);
    let c_hi = k.count_below(m, s_hi);
    (c_lo..c_hi)
        .map(|index| {
            // smallest s with count(s) > index
            let (mut a, mut b) = (s_lo, s_hi);
            while b - a > 1e-12 * b {
                let mid = 0.5 * (a + b);
                if k.count_below(m, mid) > index {
                    b = mid;
                } else {
                    a = mid;
                }
            }
            (0.5 * (a + b)).sqrt()
        })
        .collect()
}

/// Eigenvalue of `M⁻¹A` nearest to `guess`: shift-invert iteration at the
/// guess until the Rayleigh estimate `μ = s - 1/ρ`, `ρ = ⟨x, R(s)x⟩ / ⟨x, x⟩`,
/// settles, then a few Rayleigh-quotient shift updates to polish it.
pub fn damped_eigenvalue_near(op: &DiscreteOperator, guess: Complex64) -> Result<Complex64> {
    let d = op.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(guess.im.to_bits() ^ 0xa5a5);
    let mut x: Vec<Complex64> = (0..d)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    let normalize = |x: &mut Vec<Complex64>| {
        let n = op.norm(x);
        x.iter_mut().for_each(|z| *z /= n);
    };
    normalize(&mut x);
    let fixed = op.shifted(guess)?;
    let mut mu = guess;
    for it in 0..60 {
        let y = fixed.resolve(op, &x);
        let next = guess - 1.0 / op.inner(&x, &y);
        x = y;
        normalize(&mut x);
        let settled = (next - mu).norm() <= 1e-6 * next.norm().max(1.0);
        mu = next;
        if settled && it > 1 {
            break;
        }
    }
    for _ in 0..6 {
        let solver = match op.shifted(mu) {
            Ok(s) => s,
            // the shift landed on the eigenvalue itself
            Err(Error::Numerical(_)) => return Ok(mu),
            Err(e) => return Err(e),
        };
        let y = solver.resolve(op, &x);
        let next = mu - 1.0 / op.inner(&x, &y);
        if !next.re.is_finite() || !next.im.is_finite() {
            return Err(Error::numerical("eigenvalue iteration diverged"));
        }
        x = y;
        normalize(&mut x);
        let done = (next - mu).norm() <= 1e-13 * next.norm().max(1.0);
        mu = next;
        if done {
            break;
        }
    }
    Ok(mu)
}

/// One sweep sample: the largest resolvent norm found in a `λ` window.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolventSweep {
    pub lambdas: Vec<f64>,
    pub norms: Vec<f64>,
    pub meta: Vec<(String, String)>,
}

impl ResolventSweep {
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.meta {
            let _ = writeln!(out, "# {k}={v}");
        }
        out.push_str("lambda,resolvent_norm\n");
        for (l, n) in self.lambdas.iter().zip(&self.norms) {
            let _ = writeln!(out, "{l:.17e},{n:.17e}");
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut sweep = ResolventSweep {
            lambdas: Vec::new(),
            norms: Vec::new(),
            meta: Vec::new(),
        };
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with("lambda") {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                if let Some((k, v)) = rest.trim().split_once('=') {
                    sweep.meta.push((k.trim().into(), v.trim().into()));
                }
                continue;
            }
            let parsed: Option<(f64, f64)> = line
                .split_once(',')
                .and_then(|(a, b)| Some((a.trim().parse().ok()?, b.trim().parse().ok()?)));
            let (l, n) =
                parsed.ok_or_else(|| Error::domain(format!("sweep line {}: expected lambda,norm", lineno + 1)))?;
            sweep.lambdas.push(l);
            sweep.norms.push(n);
        }
        Ok(sweep)
    }

    pub fn meta_value(&self, key: &str) -> Option<&str> {
        self.meta.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepOptions {
    /// Least damped eigenvalues per window at which the norm is evaluated.
    pub candidates: usize,
    pub resolvent: ResolventOptions,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            candidates: 2,
            resolvent: ResolventOptions::default(),
        }
    }
}

/// Fewest usable windows accepted by a fit.
pub const MIN_FIT_POINTS: usize = 8;

/// Local suprema of `‖R(iλ)‖` over `n_windows` log-spaced windows of
/// `[lo, hi]`. In each window the undamped frequencies seed the nearby damped
/// eigenvalues `μ`; the norm is evaluated at `λ = Im μ` for the
/// `candidates` eigenvalues closest to the axis, where the peaks sit. Windows
/// without an eigenvalue are skipped.
pub fn sweep(
    op: &DiscreteOperator,
    range: (f64, f64),
    n_windows: usize,
    options: SweepOptions,
) -> Result<ResolventSweep> {
    let (lo, hi) = range;
    if !(lo > 0.0 && hi > lo) || n_windows == 0 {
        return Err(Error::domain(format!(
            "invalid sweep range ({lo}, {hi}) with {n_windows} windows"
        )));
    }
    let edges: Vec<f64> = (0..=n_windows)
        .map(|i| (lo.ln() + (hi / lo).ln() * i as f64 / n_windows as f64).exp())
        .collect();
    let windows: Vec<(f64, f64)> = edges.windows(2).map(|w| (w[0], w[1])).collect();
    let results: Vec<Result<Option<(f64, f64)>>> = map_windows(&windows, |&(a, b)| window_peak(op, a, b, options));
    let mut lambdas = Vec::new();
    let mut norms = Vec::new();
    for r in results {
        if let Some((l, n)) = r? {
            lambdas.push(l);
            norms.push(n);
        }
    }
    let spec = op.spec();
    let meta = vec![
        ("model".to_string(), spec.kind.to_string()),
        ("alpha".into(), op.params().alpha().to_string()),
        ("eta".into(), op.params().eta().to_string()),
        ("d0".into(), spec.d0.to_string()),
        ("n_left".into(), op.mesh().left_elements().to_string()),
        ("n_right".into(), op.mesh().right_elements().to_string()),
        ("n_xi".into(), op.n_xi().to_string()),
        ("lambda_lo".into(), lo.to_string()),
        ("lambda_hi".into(), hi.to_string()),
        ("windows".into(), n_windows.to_string()),
        ("usable_windows".into(), lambdas.len().to_string()),
        ("candidates".into(), options.candidates.to_string()),
        ("lanczos_tol".into(), options.resolvent.tol.to_string()),
    ];
    Ok(ResolventSweep { lambdas, norms, meta })
}

fn window_peak(op: &DiscreteOperator, a: f64, b: f64, options: SweepOptions) -> Result<Option<(f64, f64)>> {
    let freqs = undamped_frequencies(op, a, b);
    let mut eigen: Vec<Complex64> = Vec::new();
    for &w in &freqs {
        let mu = damped_eigenvalue_near(op, Complex64::new(0.0, w))?;
        if mu.im >= a && mu.im < b && !eigen.iter().any(|e| (e - mu).norm() <= 1e-8 * mu.norm()) {
            eigen.push(mu);
        }
    }
    if eigen.is_empty() {
        return Ok(None);
    }
    eigen.sort_by(|x, y| x.re.abs().total_cmp(&y.re.abs()));
    let norm = |l: f64| resolvent_norm_with(op, l, options.resolvent);
    let mut best: Option<(f64, f64, f64)> = None;
    for mu in eigen.iter().take(options.candidates.max(1)) {
        let n = norm(mu.im)?;
        if best.is_none_or(|(_, m, _)| n > m) {
            best = Some((mu.im, n, mu.re.abs()));
        }
    }
    let (center, value, width) = best.expect("at least one candidate");
    // golden-section polish of the peak within a few half-widths of Im μ
    let (mut lo, mut hi) = ((center - 3.0 * width).max(a), (center + 3.0 * width).min(b));
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut x1, mut x2) = (hi - g * (hi - lo), lo + g * (hi - lo));
    let (mut f1, mut f2) = (norm(x1)?, norm(x2)?);
    for _ in 0..16 {
        if f1 > f2 {
            hi = x2;
            (x2, f2) = (x1, f1);
            x1 = hi - g * (hi - lo);
            f1 = norm(x1)?;
        } else {
            lo = x1;
            (x1, f1) = (x2, f2);
            x2 = lo + g * (hi - lo);
            f2 = norm(x2)?;
        }
    }
    let peak = [(center, value), (x1, f1), (x2, f2)]
        .into_iter()
        .max_by(|p, q| p.1.total_cmp(&q.1))
        .expect("non-empty");
    Ok(Some(peak))
}

#[cfg(feature = "parallel")]
fn map_windows<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn map_windows<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    items.iter().map(f).collect()
}

/// Power-law fit of a sweep; refuses fewer than [`MIN_FIT_POINTS`] samples.
pub fn fit_sweep(sweep: &ResolventSweep) -> Result<DecayFit> {
    if sweep.lambdas.len() < MIN_FIT_POINTS {
        return Err(Error::numerical(format!(
            "only {} usable sweep points, at least {MIN_FIT_POINTS} needed for a fit",
            sweep.lambdas.len()
        )));
    }
    fit_power_law(&sweep.lambdas, &sweep.norms)
}

/// [`sweep`] inside the validity window followed by [`fit_sweep`].
pub fn sweep_and_fit(op: &DiscreteOperator, range: (f64, f64), n_points: usize) -> Result<(ResolventSweep, DecayFit)> {
    let window = validity_window(op)?;
    if !window.contains(range.0, range.1) {
        return Err(Error::domain(format!(
            "sweep range ({:.4e}, {:.4e}) leaves the validity window ({:.4e}, {:.4e})",
            range.0, range.1, window.lambda_min, window.lambda_max
        )));
    }
    let mut s = sweep(op, range, n_points, SweepOptions::default())?;
    s.meta.push(("validity_min".into(), window.lambda_min.to_string()));
    s.meta.push(("validity_max".into(), window.lambda_max.to_string()));
    let fit = fit_sweep(&s)?;
    Ok((s, fit))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::{ModelKind, ModelSpec, SpatialMesh};
    use crate::frequency::spectrum_check;
    use crate::kernel::{FractionalParams, XiGrid};
    use crate::operator::assemble_generator;

    fn operator(kind: ModelKind, n: usize) -> DiscreteOperator {
        let spec = ModelSpec::standard(kind);
        let mesh = SpatialMesh::uniform(&spec, n).unwrap();
        let params = FractionalParams::new(0.5, 1.0).unwrap();
        let grid = XiGrid::geometric(8, 1e-3, 1e3).unwrap();
        assemble_generator(&spec, &mesh, &grid, &params).unwrap()
    }

    #[test]
    fn sturm_frequencies_match_modes() {
        let op = operator(ModelKind::WW, 20);
        let f = undamped_frequencies(&op, 0.1, 20.0);
        let modes = lowest_modes(&op.system().stiffness, &op.system().mass, f.len()).unwrap();
        for (a, b) in f.iter().zip(modes.frequencies()) {
            assert!((a - b).abs() < 1e-9 * b);
        }
    }

    #[test]
    fn eigenvalue_iteration_hits_the_spectrum() {
        let op = operator(ModelKind::WEbb, 6);
        let s = spectrum_check(&op).unwrap();
        for w in undamped_frequencies(&op, 1.0, 40.0) {
            let mu = damped_eigenvalue_near(&op, Complex64::new(0.0, w)).unwrap();
            let dist = s
                .eigenvalues
                .iter()
                .map(|e| (e - mu).norm())
                .fold(f64::INFINITY, f64::min);
            assert!(dist < 1e-7 * mu.norm(), "{mu}: {dist}");
        }
    }

    #[test]
    fn csv_round_trip() {
        let s = ResolventSweep {
            lambdas: vec![1.0, 2.0],
            norms: vec![3.0, 4.5],
            meta: vec![("model".into(), "WW".into())],
        };
        assert_eq!(ResolventSweep::from_csv(&s.to_csv()).unwrap(), s);
    }

    #[test]
    fn too_few_points_refused() {
        let s = ResolventSweep {
            lambdas: (1..=5).map(f64::from).collect(),
            norms: vec![1.0; 5],
            meta: vec![],
        };
        assert!(matches!(fit_sweep(&s), Err(Error::Numerical(_))));
    }
}
