use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// The five boundary-coupled systems.
///
/// | kind     | field on (-L,0)       | damped field on (0,L)  |
/// |----------|-----------------------|------------------------|
/// | `EbbW`   | beam `y`, coeff `b`   | wave `u`, coeff `a`    |
/// | `WW`     | wave `y`, coeff `b`   | wave `u`, coeff `a`    |
/// | `WEbb`   | wave `u`, coeff `a`   | beam `y`, coeff `b`    |
/// | `Ebb`    | —                     | beam `y`, coeff `b`    |
/// | `EbbEbb` | beam `u`, coeff `a`   | beam `y`, coeff `b`    |
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    EbbW,
    WW,
    WEbb,
    Ebb,
    EbbEbb,
}

impl ModelKind {
    pub const ALL: [ModelKind; 5] = [
        ModelKind::EbbW,
        ModelKind::WW,
        ModelKind::WEbb,
        ModelKind::Ebb,
        ModelKind::EbbEbb,
    ];

    /// Element family on (-L, 0), if the model has a second field.
    pub fn left_field(self) -> Option<FieldKind> {
        match self {
            ModelKind::EbbW | ModelKind::EbbEbb => Some(FieldKind::BeamHermite),
            ModelKind::WW | ModelKind::WEbb => Some(FieldKind::WaveP1),
            ModelKind::Ebb => None,
        }
    }

    /// Element family of the damped field on (0, L).
    pub fn right_field(self) -> FieldKind {
        match self {
            ModelKind::EbbW | ModelKind::WW => FieldKind::WaveP1,
            ModelKind::WEbb | ModelKind::Ebb | ModelKind::EbbEbb => FieldKind::BeamHermite,
        }
    }

    /// Name of the displacement on each side, `(left, right)`.
    pub fn field_names(self) -> (Option<&'static str>, &'static str) {
        match self {
            ModelKind::EbbW | ModelKind::WW => (Some("y"), "u"),
            ModelKind::WEbb | ModelKind::EbbEbb => (Some("u"), "y"),
            ModelKind::Ebb => (None, "y"),
        }
    }

    /// Resolvent growth exponent ℓ with `‖(iλ - A)^{-1}‖ = O(|λ|^ℓ)`.
    pub fn resolvent_exponent(self, alpha: f64) -> f64 {
        match self {
            ModelKind::EbbW | ModelKind::WW => 1.0 - alpha / 2.0,
            ModelKind::WEbb | ModelKind::EbbEbb => 3.0 - alpha,
            ModelKind::Ebb => 1.0 - alpha,
        }
    }

    /// Energy decay exponent `2/ℓ`: `E(t) ≤ C t^{-2/ℓ}`.
    pub fn decay_exponent(self, alpha: f64) -> f64 {
        2.0 / self.resolvent_exponent(alpha)
    }

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::EbbW => "EBBW",
            ModelKind::WW => "WW",
            ModelKind::WEbb => "WEBB",
            ModelKind::Ebb => "EBB",
            ModelKind::EbbEbb => "EBBEBB",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_uppercase();
        let key = key.strip_suffix("FKV").unwrap_or(&key);
        match key {
            "EBBW" => Ok(ModelKind::EbbW),
            "WW" => Ok(ModelKind::WW),
            "WEBB" => Ok(ModelKind::WEbb),
            "EBB" => Ok(ModelKind::Ebb),
            "EBBEBB" => Ok(ModelKind::EbbEbb),
            _ => Err(Error::domain(format!(
                "unknown model '{s}' (expected one of EBBW, WW, WEBB, EBB, EBBEBB)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FieldKind {
    WaveP1,
    BeamHermite,
}

impl FieldKind {
    pub fn dofs_per_node(self) -> usize {
        match self {
            FieldKind::WaveP1 => 1,
            FieldKind::BeamHermite => 2,
        }
    }
}

/// Condition closing the beam at the junction of the EBBW model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum JunctionCondition {
    /// `y_xx(0) = 0`, imposed weakly.
    #[default]
    NullMoment,
    /// `y_x(0) = 0`, imposed by eliminating the slope unknown.
    ZeroRotation,
}

/// Physical description of one coupled system.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub a: f64,
    pub b: f64,
    pub length: f64,
    pub l0: f64,
    pub l1: f64,
    pub d0: f64,
    pub junction: JunctionCondition,
}

impl ModelSpec {
    pub fn new(kind: ModelKind, a: f64, b: f64, length: f64, l0: f64, l1: f64, d0: f64) -> Result<Self> {
        let spec = Self {
            kind,
            a,
            b,
            length,
            l0,
            l1,
            d0,
            junction: JunctionCondition::NullMoment,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// `a = b = 1`, `L = 1`, damping `d0 = 1` on `(L/4, L/2)`.
    pub fn standard(kind: ModelKind) -> Self {
        Self::new(kind, 1.0, 1.0, 1.0, 0.25, 0.5, 1.0).expect("standard parameters are valid")
    }

    pub fn with_junction(mut self, junction: JunctionCondition) -> Self {
        self.junction = junction;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::domain(format!("{name} must be > 0, got {v}")))
            }
        };
        positive("a", self.a)?;
        positive("b", self.b)?;
        positive("L", self.length)?;
        if !(self.d0 >= 0.0 && self.d0.is_finite()) {
            return Err(Error::domain(format!("d0 must be >= 0, got {}", self.d0)));
        }
        if !(0.0 < self.l0 && self.l0 < self.l1 && self.l1 < self.length) {
            return Err(Error::domain(format!(
                "damping interval must satisfy 0 < l0 < l1 < L, got l0 = {}, l1 = {}, L = {}",
                self.l0, self.l1, self.length
            )));
        }
        if self.junction == JunctionCondition::ZeroRotation && self.kind != ModelKind::EbbW {
            return Err(Error::domain(
                "the zero-rotation junction applies to the EBBW model only",
            ));
        }
        Ok(())
    }

    /// Stiffness coefficient of the field on (-L, 0).
    pub fn left_coefficient(&self) -> f64 {
        match self.kind {
            ModelKind::EbbW | ModelKind::WW => self.b,
            _ => self.a,
        }
    }

    /// Stiffness coefficient of the damped field on (0, L).
    pub fn right_coefficient(&self) -> f64 {
        match self.kind {
            ModelKind::EbbW | ModelKind::WW => self.a,
            _ => self.b,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_model_names() {
        assert_eq!("WW".parse::<ModelKind>().unwrap(), ModelKind::WW);
        assert_eq!("(EBB)-W_FKV".parse::<ModelKind>().unwrap(), ModelKind::EbbW);
        assert_eq!("w-(ebb)".parse::<ModelKind>().unwrap(), ModelKind::WEbb);
        assert!("plate".parse::<ModelKind>().is_err());
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(ModelSpec::new(ModelKind::WW, 1.0, 1.0, 1.0, 0.25, 0.5, -1.0).is_err());
        assert!(ModelSpec::new(ModelKind::WW, 1.0, 1.0, 1.0, 0.5, 0.25, 1.0).is_err());
        assert!(ModelSpec::new(ModelKind::WW, 1.0, 1.0, 1.0, 0.25, 1.5, 1.0).is_err());
        assert!(ModelSpec::new(ModelKind::WW, -1.0, 1.0, 1.0, 0.25, 0.5, 1.0).is_err());
        let bad = ModelSpec::standard(ModelKind::WW).with_junction(JunctionCondition::ZeroRotation);
        assert!(bad.validate().is_err());
    }

    #[test]
    fn decay_targets() {
        assert!((ModelKind::Ebb.decay_exponent(0.5) - 4.0).abs() < 1e-14);
        assert!((ModelKind::WW.decay_exponent(0.5) - 8.0 / 3.0).abs() < 1e-14);
        assert!((ModelKind::EbbW.decay_exponent(1.0 - 1e-12) - 4.0).abs() < 1e-9);
        assert!((ModelKind::WEbb.decay_exponent(0.5) - 0.8).abs() < 1e-14);
    }
}
