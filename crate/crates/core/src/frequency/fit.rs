use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::evolution::EnergyTrace;

/// Least-squares power law `y ≈ c x^{±exponent}` on a log-log window.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayFit {
    pub exponent: f64,
    pub stderr: f64,
    pub window: (f64, f64),
    pub r_squared: f64,
    pub points: usize,
}

/// Fits below this coefficient of determination are not reported as rates.
pub const MIN_R_SQUARED: f64 = 0.98;

impl DecayFit {
    pub fn is_reliable(&self) -> bool {
        self.r_squared >= MIN_R_SQUARED
    }

    /// `key: value` report lines.
    pub fn report(&self, extra: &[(&str, String)]) -> String {
        let mut out = String::new();
        for (k, v) in extra {
            let _ = writeln!(out, "{k}: {v}");
        }
        let _ = writeln!(out, "exponent: {:.10}", self.exponent);
        let _ = writeln!(out, "stderr: {:.3e}", self.stderr);
        let _ = writeln!(out, "window_start: {:.10e}", self.window.0);
        let _ = writeln!(out, "window_end: {:.10e}", self.window.1);
        let _ = writeln!(out, "r_squared: {:.10}", self.r_squared);
        let _ = writeln!(out, "points: {}", self.points);
        let _ = writeln!(out, "reliable: {}", self.is_reliable());
        out
    }
}

/// Ordinary least squares of `log y` on `log x`; the exponent is the slope.
pub fn fit_power_law(xs: &[f64], ys: &[f64]) -> Result<DecayFit> {
    if xs.len() != ys.len() {
        return Err(Error::domain("abscissae and ordinates differ in length"));
    }
    if xs.len() < 3 {
        return Err(Error::numerical(format!(
            "a power-law fit needs at least 3 points, got {}",
            xs.len()
        )));
    }
    if xs.iter().chain(ys).any(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(Error::numerical("power-law fit needs strictly positive finite data"));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ly.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::numerical("all abscissae coincide"));
    }
    let slope = sxy / sxx;
    let sse: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| (y - my - slope * (x - mx)).powi(2))
        .sum();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - sse / syy };
    let stderr = if lx.len() > 2 {
        (sse / (n - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(DecayFit {
        exponent: slope,
        stderr,
        window: (lo, hi),
        r_squared,
        points: xs.len(),
    })
}

/// Target number of log-spaced samples kept before fitting a trace.
pub const THINNED_SAMPLES: usize = 200;

/// Samples of a trace thinned to at most [`THINNED_SAMPLES`] log-spaced times
/// (t > 0 only), returned as `(t, E)` pairs.
pub fn thin_logarithmically(trace: &EnergyTrace) -> Vec<(f64, f64)> {
    let pairs: Vec<(f64, f64)> = trace
        .times
        .iter()
        .zip(&trace.energies)
        .filter(|(t, _)| **t > 0.0)
        .map(|(&t, &e)| (t, e))
        .collect();
    if pairs.len() <= THINNED_SAMPLES {
        return pairs;
    }
    let (t0, t1) = (pairs[0].0.ln(), pairs[pairs.len() - 1].0.ln());
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(THINNED_SAMPLES);
    let mut cursor = 0;
    for i in 0..THINNED_SAMPLES {
        let target = (t0 + (t1 - t0) * i as f64 / (THINNED_SAMPLES - 1) as f64).exp();
        while cursor + 1 < pairs.len() && (pairs[cursor + 1].0 - target).abs() <= (pairs[cursor].0 - target).abs() {
            cursor += 1;
        }
        if out.last().is_none_or(|last| last.0 < pairs[cursor].0) {
            out.push(pairs[cursor]);
        }
    }
    out
}

/// Decay exponent `-d log E / d log t` over the final `tail_fraction` of the
/// log-thinned samples.
pub fn decay_fit(trace: &EnergyTrace, tail_fraction: f64) -> Result<DecayFit> {
    if !(tail_fraction > 0.0 && tail_fraction <= 1.0) {
        return Err(Error::domain(format!(
            "tail_fraction must lie in (0, 1], got {tail_fraction}"
        )));
    }
    let samples = thin_logarithmically(trace);
    if samples.is_empty() {
        return Err(Error::numerical("empty trace cannot be fitted"));
    }
    let take = ((samples.len() as f64 * tail_fraction).ceil() as usize)
        .max(3)
        .min(samples.len());
    let tail = &samples[samples.len() - take..];
    if tail.iter().any(|&(_, e)| !(e > f64::MIN_POSITIVE)) {
        return Err(Error::numerical(
            "energy underflows or is non-positive on the fit window",
        ));
    }
    let (ts, es): (Vec<f64>, Vec<f64>) = tail.iter().copied().unzip();
    let mut fit = fit_power_law(&ts, &es)?;
    fit.exponent = -fit.exponent;
    Ok(fit)
}

/// [`decay_fit`] on the part of the trace before the energy first drops
/// below `energy_floor · E(0)`; the roundoff floor otherwise flattens the tail.
pub fn decay_fit_above_floor(trace: &EnergyTrace, tail_fraction: f64, energy_floor: f64) -> Result<DecayFit> {
    let Some(&e0) = trace.energies.first() else {
        return Err(Error::numerical("empty trace cannot be fitted"));
    };
    let keep = trace
        .energies
        .iter()
        .position(|&e| e < energy_floor * e0)
        .unwrap_or(trace.len());
    let mut cut = EnergyTrace {
        meta: trace.meta.clone(),
        ..EnergyTrace::default()
    };
    for i in 0..keep {
        cut.push(trace.times[i], trace.energies[i], trace.dissipations[i]);
    }
    decay_fit(&cut, tail_fraction)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law() {
        let xs: Vec<f64> = (1..=20).map(|i| 10f64.powf(i as f64 / 10.0)).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x.powf(1.5)).collect();
        let f = fit_power_law(&xs, &ys).unwrap();
        assert!((f.exponent - 1.5).abs() < 1e-10);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
        assert!(f.stderr < 1e-10);
        assert_eq!(f.window, (xs[0], xs[19]));
    }

    #[test]
    fn synthetic_inverse_square_trace() {
        let mut trace = EnergyTrace::default();
        for i in 0..=5000 {
            let t = i as f64 * 0.2;
            trace.push(t, if t > 0.0 { t.powi(-2) } else { 1.0 }, 0.0);
        }
        let f = decay_fit(&trace, 0.5).unwrap();
        assert!((f.exponent - 2.0).abs() < 1e-6, "{}", f.exponent);
    }

    #[test]
    fn refuses_bad_data() {
        assert!(fit_power_law(&[1.0, 2.0], &[1.0, 2.0]).is_err());
        assert!(fit_power_law(&[1.0, 2.0, 3.0], &[1.0, 0.0, 2.0]).is_err());
        assert!(decay_fit(&EnergyTrace::default(), 0.5).is_err());
        let mut trace = EnergyTrace::default();
        for i in 0..10 {
            trace.push(i as f64, 0.0, 0.0);
        }
        assert!(decay_fit(&trace, 0.5).is_err());
    }

    #[test]
    fn thinning_keeps_endpoints_and_order() {
        let mut trace = EnergyTrace::default();
        for i in 0..=100_000 {
            trace.push(i as f64 * 0.01, 1.0, 0.0);
        }
        let s = thin_logarithmically(&trace);
        assert!(s.len() <= THINNED_SAMPLES && s.len() > 100);
        assert_eq!(s[0].0, 0.01);
        assert_eq!(s.last().unwrap().0, 1000.0);
        assert!(s.windows(2).all(|w| w[0].0 < w[1].0));
    }

    #[test]
    fn floor_cuts_the_flat_tail() {
        let mut trace = EnergyTrace::default();
        for i in 0..=2000 {
            let t = i as f64 * 0.5;
            let e = if t > 0.0 { t.powi(-3) } else { 1.0 };
            trace.push(t, e.max(1e-6), 0.0);
        }
        let plain = decay_fit(&trace, 0.5).unwrap();
        let cut = decay_fit_above_floor(&trace, 0.5, 2e-6).unwrap();
        assert!(plain.exponent < 2.0);
        assert!((cut.exponent - 3.0).abs() < 1e-6, "{}", cut.exponent);
    }
}
