use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Sampled energy history of one simulation.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EnergyTrace {
    pub times: Vec<f64>,
    pub energies: Vec<f64>,
    pub dissipations: Vec<f64>,
    /// Ordered `key=value` metadata written as `#` header lines.
    pub meta: Vec<(String, String)>,
}

impl EnergyTrace {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn push(&mut self, t: f64, energy: f64, dissipation: f64) {
        self.times.push(t);
        self.energies.push(energy);
        self.dissipations.push(dissipation);
    }

    pub fn meta_value(&self, key: &str) -> Option<&str> {
        self.meta.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn set_meta(&mut self, key: &str, value: impl ToString) {
        let value = value.to_string();
        match self.meta.iter_mut().find(|(k, _)| k == key) {
            Some(slot) => slot.1 = value,
            None => self.meta.push((key.to_string(), value)),
        }
    }

    /// Largest relative growth `E_{n+1}/E_n - 1` between consecutive samples.
    pub fn max_relative_increase(&self) -> f64 {
        self.energies
            .windows(2)
            .filter(|w| w[0] > 0.0)
            .map(|w| w[1] / w[0] - 1.0)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// `|E(0) - E(T) - ∫ dissipation dt| / E(0)`, trapezoidal in the samples.
    pub fn balance_residual(&self) -> f64 {
        if self.len() < 2 || self.energies[0] == 0.0 {
            return 0.0;
        }
        let integral: f64 = self
            .times
            .windows(2)
            .zip(self.dissipations.windows(2))
            .map(|(t, d)| 0.5 * (t[1] - t[0]) * (d[0] + d[1]))
            .sum();
        let drop = self.energies[0] - self.energies[self.len() - 1];
        (drop - integral).abs() / self.energies[0]
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.meta {
            let _ = writeln!(out, "# {k}={v}");
        }
        out.push_str("t,energy,dissipation\n");
        for i in 0..self.len() {
            let _ = writeln!(
                out,
                "{:.17e},{:.17e},{:.17e}",
                self.times[i], self.energies[i], self.dissipations[i]
            );
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut trace = EnergyTrace::default();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                if let Some((k, v)) = rest.trim().split_once('=') {
                    trace.meta.push((k.trim().to_string(), v.trim().to_string()));
                }
                continue;
            }
            if line.starts_with('t') {
                continue;
            }
            let fields: Vec<f64> = line
                .split(',')
                .map(|f| f.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::domain(format!("trace line {}: {e}", lineno + 1)))?;
            if fields.len() != 3 {
                return Err(Error::domain(format!("trace line {}: expected 3 columns", lineno + 1)));
            }
            trace.push(fields[0], fields[1], fields[2]);
        }
        Ok(trace)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip() {
        let mut t = EnergyTrace::default();
        t.set_meta("dt", 0.01);
        t.set_meta("model", "WW");
        t.push(0.0, 1.0, 0.5);
        t.push(0.1, 0.95, 0.4);
        let back = EnergyTrace::from_csv(&t.to_csv()).unwrap();
        assert_eq!(back, t);
        assert_eq!(back.meta_value("model"), Some("WW"));
    }

    #[test]
    fn balance_of_exact_exponential() {
        // E = e^{-t}, dissipation = e^{-t}
        let mut t = EnergyTrace::default();
        for i in 0..=1000 {
            let s = i as f64 * 1e-3;
            t.push(s, (-s).exp(), (-s).exp());
        }
        assert!(t.balance_residual() < 1e-7);
        assert!(t.max_relative_increase() < 0.0);
    }
}
