//! Experiment configuration: a `key = value` document with optional
//! `[section]` headers.
//!
//! ```text
//! model = WW
//! alpha = 0.5
//! eta = 1.0
//!
//! [evolution]
//! t_end = 200
//! ```
//!
//! Every key has one home section but may also appear before the first
//! header. `#` and `;` start comments. Errors name the line (or the
//! override) and the violated constraint.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use crate::assembly::{JunctionCondition, ModelKind, ModelSpec};
use crate::error::{Error, Result};
use crate::evolution::InitialProfile;
use crate::kernel::FractionalParams;

#[derive(Debug, Clone, PartialEq)]
pub struct Discretization {
    pub n_left: usize,
    pub n_right: usize,
    pub n_xi: usize,
    /// `None` picks the tail bound from `quad_tol`.
    pub xi_max: Option<f64>,
    pub quad_tol: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionSettings {
    pub t_end: f64,
    pub dt: f64,
    pub sample_every: usize,
    pub profile: InitialProfile,
    pub tail_fraction: f64,
    /// Samples after the energy first drops below `energy_floor · E(0)` are
    /// left out of the decay fit.
    pub energy_floor: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSettings {
    /// `None` defaults to the validity window.
    pub lambda_min: Option<f64>,
    pub lambda_max: Option<f64>,
    pub n_points: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputSettings {
    pub dir: PathBuf,
    pub plots: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub model: ModelSpec,
    pub fractional: FractionalParams,
    pub discretization: Discretization,
    pub evolution: EvolutionSettings,
    pub sweep: SweepSettings,
    pub output: OutputSettings,
    pub seed: u64,
}

// (section, key, default); `None` marks a required key
const KEYS: &[(&str, &str, Option<&str>)] = &[
    ("model", "model", None),
    ("model", "a", Some("1")),
    ("model", "b", Some("1")),
    ("model", "length", Some("1")),
    ("model", "l0", Some("0.25")),
    ("model", "l1", Some("0.5")),
    ("model", "d0", Some("1")),
    ("model", "junction", Some("null-moment")),
    ("fractional", "alpha", None),
    ("fractional", "eta", None),
    ("discretization", "n_left", Some("200")),
    ("discretization", "n_right", Some("200")),
    ("discretization", "n_xi", Some("80")),
    ("discretization", "xi_max", Some("auto")),
    ("discretization", "quad_tol", Some("1e-6")),
    ("evolution", "t_end", Some("1000")),
    ("evolution", "dt", Some("0.01")),
    ("evolution", "sample_every", Some("10")),
    ("evolution", "profile", Some("low-mode")),
    ("evolution", "tail_fraction", Some("0.5")),
    ("evolution", "energy_floor", Some("1e-10")),
    ("sweep", "lambda_min", Some("auto")),
    ("sweep", "lambda_max", Some("auto")),
    ("sweep", "n_points", Some("12")),
    ("output", "dir", Some("out")),
    ("output", "plots", Some("true")),
    ("run", "seed", Some("0")),
];

fn home_section(key: &str) -> Option<&'static str> {
    KEYS.iter().find(|(_, k, _)| *k == key).map(|(s, _, _)| *s)
}

#[derive(Debug, Clone)]
struct Entry {
    value: String,
    origin: String,
}

/// Raw key/value pairs with their origins, before typing.
#[derive(Debug, Clone, Default)]
struct Document {
    entries: BTreeMap<String, Entry>,
}

impl Document {
    fn parse(text: &str) -> Result<Self> {
        let mut doc = Document::default();
        let mut section: Option<String> = None;
        for (index, raw) in text.lines().enumerate() {
            let origin = format!("line {}", index + 1);
            let line = strip_comment(raw).trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| Error::config(&origin, format!("unterminated section header '{line}'")))?
                    .trim()
                    .to_ascii_lowercase();
                if !KEYS.iter().any(|(s, _, _)| *s == name) {
                    return Err(Error::config(&origin, format!("unknown section [{name}]")));
                }
                section = Some(name);
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::config(&origin, format!("expected 'key = value', got '{line}'")))?;
            doc.set(key, value, section.as_deref(), origin)?;
        }
        Ok(doc)
    }

    fn set(&mut self, key: &str, value: &str, section: Option<&str>, origin: String) -> Result<()> {
        let mut key = key.trim().to_ascii_lowercase();
        // dotted form `section.key`
        let mut section = section.map(str::to_string);
        if let Some((s, k)) = key.clone().split_once('.') {
            section = Some(s.to_string());
            key = k.to_string();
        }
        if key == "t" {
            key = "t_end".into();
        }
        let home = home_section(&key).ok_or_else(|| Error::config(&origin, format!("unknown key '{key}'")))?;
        if let Some(s) = section {
            if s != home {
                return Err(Error::config(
                    &origin,
                    format!("key '{key}' belongs to [{home}], not [{s}]"),
                ));
            }
        }
        let value = value.trim().trim_matches('"').to_string();
        if value.is_empty() {
            return Err(Error::config(&origin, format!("key '{key}' has an empty value")));
        }
        if let Some(previous) = self.entries.get(&key) {
            if !previous.origin.starts_with("override") && !origin.starts_with("override") {
                return Err(Error::config(
                    &origin,
                    format!("key '{key}' already set at {}", previous.origin),
                ));
            }
        }
        self.entries.insert(key, Entry { value, origin });
        Ok(())
    }

    fn raw(&self, key: &str) -> Result<(&str, String)> {
        match self.entries.get(key) {
            Some(e) => Ok((e.value.as_str(), e.origin.clone())),
            None => {
                let default = KEYS
                    .iter()
                    .find(|(_, k, _)| *k == key)
                    .and_then(|(_, _, d)| *d)
                    .ok_or_else(|| Error::config("document", format!("required key '{key}' is missing")))?;
                Ok((default, "default".to_string()))
            }
        }
    }

    fn real(&self, key: &str) -> Result<(f64, String)> {
        let (v, origin) = self.raw(key)?;
        let parsed: f64 = v
            .parse()
            .map_err(|_| Error::config(&origin, format!("{key} = '{v}' is not a number")))?;
        if !parsed.is_finite() {
            return Err(Error::config(&origin, format!("{key} = {v} must be finite")));
        }
        Ok((parsed, origin))
    }

    fn optional_real(&self, key: &str) -> Result<(Option<f64>, String)> {
        let (v, origin) = self.raw(key)?;
        if v.eq_ignore_ascii_case("auto") {
            return Ok((None, origin));
        }
        let (x, origin) = self.real(key)?;
        Ok((Some(x), origin))
    }

    fn integer(&self, key: &str) -> Result<(u64, String)> {
        let (v, origin) = self.raw(key)?;
        let parsed = v
            .parse()
            .map_err(|_| Error::config(&origin, format!("{key} = '{v}' is not a non-negative integer")))?;
        Ok((parsed, origin))
    }

    fn boolean(&self, key: &str) -> Result<(bool, String)> {
        let (v, origin) = self.raw(key)?;
        match v.to_ascii_lowercase().as_str() {
            "true" | "yes" | "1" | "on" => Ok((true, origin)),
            "false" | "no" | "0" | "off" => Ok((false, origin)),
            _ => Err(Error::config(&origin, format!("{key} = '{v}' is not a boolean"))),
        }
    }
}

fn strip_comment(line: &str) -> &str {
    let cut = line.find(['#', ';']).unwrap_or(line.len());
    &line[..cut]
}

fn require(ok: bool, origin: &str, message: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::config(origin, message()))
    }
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    parse_config_with_overrides::<&str>(text, &[])
}

/// As [`parse_config`], then applies `key=value` overrides (bare or dotted
/// keys) on top of the document.
pub fn parse_config_with_overrides<S: AsRef<str>>(text: &str, overrides: &[S]) -> Result<ExperimentConfig> {
    let mut doc = Document::parse(text)?;
    for o in overrides {
        let o = o.as_ref();
        let origin = format!("override '{o}'");
        let (k, v) = o
            .split_once('=')
            .ok_or_else(|| Error::config(&origin, "expected key=value"))?;
        doc.set(k, v, None, origin)?;
    }
    build(&doc)
}

fn build(doc: &Document) -> Result<ExperimentConfig> {
    let (kind, origin) = doc.raw("model")?;
    let kind: ModelKind = kind.parse().map_err(|e: Error| Error::config(&origin, strip_kind(e)))?;

    let positive = |key: &str| -> Result<f64> {
        let (v, origin) = doc.real(key)?;
        require(v > 0.0, &origin, || format!("{key} = {v} violates {key} > 0"))?;
        Ok(v)
    };
    let a = positive("a")?;
    let b = positive("b")?;
    let length = positive("length")?;
    let d0 = {
        let (v, origin) = doc.real("d0")?;
        require(v >= 0.0, &origin, || format!("d0 = {v} violates d0 >= 0"))?;
        v
    };
    let (l0, origin_l0) = doc.real("l0")?;
    let (l1, origin_l1) = doc.real("l1")?;
    require(l0 > 0.0, &origin_l0, || format!("l0 = {l0} violates 0 < l0"))?;
    require(l0 < l1, &origin_l1, || {
        format!("ordering violated: l0 = {l0} must be below l1 = {l1} (0 < l0 < l1 < length)")
    })?;
    require(l1 < length, &origin_l1, || {
        format!("ordering violated: l1 = {l1} must be below length = {length} (0 < l0 < l1 < length)")
    })?;
    let (junction, origin) = doc.raw("junction")?;
    let junction = match junction.to_ascii_lowercase().replace('_', "-").as_str() {
        "null-moment" => JunctionCondition::NullMoment,
        "zero-rotation" => JunctionCondition::ZeroRotation,
        other => {
            return Err(Error::config(
                &origin,
                format!("junction = '{other}' (expected null-moment or zero-rotation)"),
            ))
        }
    };
    require(
        junction == JunctionCondition::NullMoment || kind == ModelKind::EbbW,
        &origin,
        || format!("junction = zero-rotation applies to model EBBW only, not {kind}"),
    )?;
    // d0 = 0 is the conservative limit, which ModelSpec itself refuses
    let model = ModelSpec {
        kind,
        a,
        b,
        length,
        l0,
        l1,
        d0,
        junction,
    };

    let (alpha, origin) = doc.real("alpha")?;
    require(alpha > 0.0 && alpha < 1.0, &origin, || {
        format!("alpha = {alpha} violates 0 < alpha < 1")
    })?;
    let (eta, origin) = doc.real("eta")?;
    require(eta >= 0.0, &origin, || format!("eta = {eta} violates eta >= 0"))?;
    let fractional = FractionalParams::new(alpha, eta)?;

    let count = |key: &str, min: u64| -> Result<usize> {
        let (v, origin) = doc.integer(key)?;
        require(v >= min, &origin, || format!("{key} = {v} violates {key} >= {min}"))?;
        Ok(v as usize)
    };
    let n_left = count("n_left", 1)?;
    let n_right = count("n_right", 3)?;
    let n_xi = count("n_xi", 2)?;
    let (xi_max, origin) = doc.optional_real("xi_max")?;
    if let Some(x) = xi_max {
        require(x > 1.0, &origin, || format!("xi_max = {x} violates xi_max > 1"))?;
    }
    let (quad_tol, origin) = doc.real("quad_tol")?;
    require(quad_tol > 0.0 && quad_tol < 1.0, &origin, || {
        format!("quad_tol = {quad_tol} violates 0 < quad_tol < 1")
    })?;

    let (t_end, origin) = doc.real("t_end")?;
    require(t_end > 0.0, &origin, || format!("t_end = {t_end} violates t_end > 0"))?;
    let (dt, origin) = doc.real("dt")?;
    require(dt > 0.0 && dt <= t_end, &origin, || {
        format!("dt = {dt} violates 0 < dt <= t_end")
    })?;
    let sample_every = count("sample_every", 1)?;
    let (profile, origin) = doc.raw("profile")?;
    let profile: InitialProfile = profile
        .parse()
        .map_err(|e: Error| Error::config(&origin, strip_kind(e)))?;
    let (tail_fraction, origin) = doc.real("tail_fraction")?;
    require(tail_fraction > 0.0 && tail_fraction <= 1.0, &origin, || {
        format!("tail_fraction = {tail_fraction} violates 0 < tail_fraction <= 1")
    })?;
    let (energy_floor, origin) = doc.real("energy_floor")?;
    require((0.0..1.0).contains(&energy_floor), &origin, || {
        format!("energy_floor = {energy_floor} violates 0 <= energy_floor < 1")
    })?;

    let (lambda_min, origin_min) = doc.optional_real("lambda_min")?;
    let (lambda_max, origin_max) = doc.optional_real("lambda_max")?;
    if let Some(l) = lambda_min {
        require(l > 0.0, &origin_min, || {
            format!("lambda_min = {l} violates lambda_min > 0")
        })?;
    }
    if let (Some(lo), Some(hi)) = (lambda_min, lambda_max) {
        require(lo < hi, &origin_max, || {
            format!("ordering violated: lambda_min = {lo} must be below lambda_max = {hi}")
        })?;
    }
    let n_points = count("n_points", 8)?;

    let (dir, _) = doc.raw("dir")?;
    let (plots, _) = doc.boolean("plots")?;
    let (seed, _) = doc.integer("seed")?;

    Ok(ExperimentConfig {
        model,
        fractional,
        discretization: Discretization {
            n_left,
            n_right,
            n_xi,
            xi_max,
            quad_tol,
        },
        evolution: EvolutionSettings {
            t_end,
            dt,
            sample_every,
            profile,
            tail_fraction,
            energy_floor,
        },
        sweep: SweepSettings {
            lambda_min,
            lambda_max,
            n_points,
        },
        output: OutputSettings {
            dir: PathBuf::from(dir),
            plots,
        },
        seed,
    })
}

fn strip_kind(e: Error) -> String {
    match e {
        Error::Domain(m) => m,
        other => other.to_string(),
    }
}

fn auto(v: Option<f64>) -> String {
    v.map_or_else(|| "auto".to_string(), |x| x.to_string())
}

impl ExperimentConfig {
    /// Every key with its effective value, in document order.
    pub fn echo(&self) -> Vec<(String, String)> {
        let m = &self.model;
        let junction = match m.junction {
            JunctionCondition::NullMoment => "null-moment",
            JunctionCondition::ZeroRotation => "zero-rotation",
        };
        let d = &self.discretization;
        let e = &self.evolution;
        let s = &self.sweep;
        let values = [
            m.kind.to_string(),
            m.a.to_string(),
            m.b.to_string(),
            m.length.to_string(),
            m.l0.to_string(),
            m.l1.to_string(),
            m.d0.to_string(),
            junction.to_string(),
            self.fractional.alpha().to_string(),
            self.fractional.eta().to_string(),
            d.n_left.to_string(),
            d.n_right.to_string(),
            d.n_xi.to_string(),
            auto(d.xi_max),
            d.quad_tol.to_string(),
            e.t_end.to_string(),
            e.dt.to_string(),
            e.sample_every.to_string(),
            e.profile.to_string(),
            e.tail_fraction.to_string(),
            e.energy_floor.to_string(),
            auto(s.lambda_min),
            auto(s.lambda_max),
            s.n_points.to_string(),
            self.output.dir.display().to_string(),
            self.output.plots.to_string(),
            self.seed.to_string(),
        ];
        KEYS.iter()
            .zip(values)
            .map(|((section, key, _), v)| (format!("{section}.{key}"), v))
            .collect()
    }

    /// A document that parses back to this configuration.
    pub fn to_document(&self) -> String {
        let mut out = String::new();
        let mut current = "";
        for (full, v) in self.echo() {
            let (section, key) = full.split_once('.').expect("dotted key");
            if section != current {
                if !current.is_empty() {
                    out.push('\n');
                }
                let _ = writeln!(out, "[{section}]");
                current = KEYS
                    .iter()
                    .find(|(s, _, _)| *s == section)
                    .map(|(s, _, _)| *s)
                    .unwrap_or("");
            }
            let _ = writeln!(out, "{key} = {v}");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_document_gets_defaults() {
        let c = parse_config("model=WW\nalpha=0.5\neta=1.0\n").unwrap();
        assert_eq!(c.model.kind, ModelKind::WW);
        assert_eq!(c.model.l1, 0.5);
        assert_eq!(c.discretization.n_xi, 80);
        assert_eq!(c.discretization.xi_max, None);
        assert_eq!(c.evolution.profile, InitialProfile::LowMode);
        assert_eq!(c.sweep.n_points, 12);
    }

    #[test]
    fn alpha_out_of_range_names_the_constraint_and_line() {
        let err = parse_config("model = WW\n\nalpha = 1.2\neta = 1\n").unwrap_err();
        let text = err.to_string();
        assert!(text.contains("0 < alpha < 1"), "{text}");
        assert!(text.contains("line 3"), "{text}");
    }

    #[test]
    fn l0_after_l1_is_an_ordering_error() {
        let err = parse_config("model=EBB\nalpha=0.5\neta=1\n[model]\nl0 = 0.6\nl1 = 0.5\n").unwrap_err();
        let text = err.to_string();
        assert!(text.contains("ordering"), "{text}");
        assert!(text.contains("line 6"), "{text}");
    }

    #[test]
    fn unknown_and_misplaced_keys() {
        let e = parse_config("model=WW\nalpha=0.5\neta=1\ncolour = red\n").unwrap_err();
        assert!(e.to_string().contains("unknown key 'colour'"));
        let e = parse_config("model=WW\nalpha=0.5\neta=1\n[sweep]\ndt = 0.1\n").unwrap_err();
        assert!(e.to_string().contains("belongs to [evolution]"));
        let e = parse_config("model=WW\nalpha=0.5\n").unwrap_err();
        assert!(e.to_string().contains("'eta' is missing"));
        let e = parse_config("model=WW\nalpha=0.5\neta=x\n").unwrap_err();
        assert!(e.to_string().contains("not a number"));
    }

    #[test]
    fn overrides_win_and_are_located() {
        let c =
            parse_config_with_overrides("model=WW\nalpha=0.5\neta=1\n", &["fractional.alpha=0.25", "n_xi=40"]).unwrap();
        assert_eq!(c.fractional.alpha(), 0.25);
        assert_eq!(c.discretization.n_xi, 40);
        let e = parse_config_with_overrides("model=WW\nalpha=0.5\neta=1\n", &["alpha=2"]).unwrap_err();
        assert!(e.to_string().contains("override 'alpha=2'"));
    }

    #[test]
    fn document_round_trip() {
        let c = parse_config("model=EBBW\nalpha=0.3\neta=0.1\njunction=zero-rotation\nxi_max=1e5\nseed=9\n").unwrap();
        let again = parse_config(&c.to_document()).unwrap();
        assert_eq!(c, again);
        assert_eq!(c.echo().len(), KEYS.len());
    }

    #[test]
    fn zero_damping_is_accepted_as_the_conservative_limit() {
        let c = parse_config("model=WW\nalpha=0.5\neta=1\nd0=0\n").unwrap();
        assert_eq!(c.model.d0, 0.0);
    }
}
