//! The kernel integrals that control the fractional damping terms.
//!
//! `I1`, `I13` and `I14` have elementary closed forms; the explicit `I12`
//! reduces to a constant `c1(α)` times a power of `|λ|+η`. All of them can
//! also be evaluated on an [`XiGrid`] through [`quad_integral`].

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Mutex, OnceLock};

use super::quadrature::integrate;
use super::{kappa, XiGrid};
use crate::error::{Error, Result};

/// Which integrand. `I12` is the `λ²`-form used for strong stability;
/// `I12Explicit`, `I13Squared` and `I14Squared` are the `|λ|`-forms whose
/// closed values are known (the squares of `I13`, `I14`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IntegralTag {
    I1,
    I2,
    I3,
    I7,
    I8,
    I11,
    I12,
    I12Explicit,
    I13Squared,
    I14Squared,
    I15,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegralId {
    pub tag: IntegralTag,
    pub lambda: f64,
    pub eta: f64,
    pub alpha: f64,
}

impl IntegralId {
    pub fn new(tag: IntegralTag, lambda: f64, eta: f64, alpha: f64) -> Self {
        Self {
            tag,
            lambda,
            eta,
            alpha,
        }
    }

    pub fn validate(&self) -> Result<()> {
        use IntegralTag::*;
        kappa(self.alpha)?;
        let (eta, lambda) = (self.eta, self.lambda);
        if !(eta >= 0.0) || !lambda.is_finite() {
            return Err(Error::domain(format!(
                "{:?} needs eta >= 0 and finite lambda",
                self.tag
            )));
        }
        let ok = match self.tag {
            I1 | I2 | I3 => true,
            I15 | I12Explicit | I13Squared | I14Squared => eta > 0.0,
            I7 | I8 | I11 | I12 => eta > 0.0 || lambda != 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::domain(format!(
                "{:?} is undefined at eta = {eta}, lambda = {lambda}",
                self.tag
            )))
        }
    }

    /// Integrand value at `ξ > 0`.
    fn integrand(&self, xi: f64) -> f64 {
        use IntegralTag::*;
        let (a, eta, lam) = (self.alpha, self.eta, self.lambda);
        let k = (a * PI).sin() / PI;
        let x2 = xi * xi;
        let s = x2 + eta;
        match self.tag {
            I1 => k * xi.powf(2.0 * a - 1.0) / (1.0 + s),
            I2 => xi.powf(2.0 * a - 1.0) / ((1.0 + s) * (1.0 + s)),
            I3 => xi.powf(2.0 * a + 1.0) / ((1.0 + s) * (1.0 + s)),
            I7 => k * xi.powf(2.0 * a - 1.0) / (lam * lam + s * s),
            I8 => k * xi.powf(2.0 * a - 1.0) * s / (lam * lam + s * s),
            I11 => xi.powf(2.0 * a - 1.0) / (lam * lam + s * s).sqrt(),
            I12 => xi.powf(2.0 * a + 1.0) / (lam * lam + s * s),
            I12Explicit => {
                let d = lam.abs() + s;
                xi.powf(a + 0.5) / (d * d)
            }
            I13Squared => {
                let d = lam.abs() + s;
                1.0 / (d * d)
            }
            I14Squared => {
                let d = lam.abs() + s;
                x2 / (d * d * d * d)
            }
            I15 => xi.powf(2.0 * a - 1.0) / s,
        }
    }

    /// `I3` is defined on the half-line, all others on ℝ.
    fn is_half_line(&self) -> bool {
        self.tag == IntegralTag::I3
    }
}

/// Evaluates the selected integral on the grid: `2 Σ w_k f(ξ_k)` for the
/// integrals over ℝ, `Σ w_k f(ξ_k)` for the half-line `I3`.
pub fn quad_integral(id: &IntegralId, grid: &XiGrid) -> Result<f64> {
    id.validate()?;
    let half = grid.integrate_half(|xi| id.integrand(xi));
    Ok(if id.is_half_line() { half } else { 2.0 * half })
}

fn check_eta_positive(eta: f64) -> Result<()> {
    if eta > 0.0 && eta.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("closed form requires eta > 0, got {eta}")))
    }
}

/// `I1(η,α) = κ(α) ∫_ℝ |ξ|^{2α-1}/(1+ξ²+η) dξ = (1+η)^{α-1}`.
pub fn closed_i1(eta: f64, alpha: f64) -> Result<f64> {
    kappa(alpha)?;
    if !(eta >= 0.0 && eta.is_finite()) {
        return Err(Error::domain(format!("I1 requires eta >= 0, got {eta}")));
    }
    Ok((1.0 + eta).powf(alpha - 1.0))
}

/// `c1(α) = ∫_1^∞ (y-1)^{α/2-1/4} / y² dy`, computed once per α by adaptive
/// Gauss–Kronrod to 1e-10 and cached.
pub fn c1_constant(alpha: f64) -> Result<f64> {
    kappa(alpha)?;
    static CACHE: OnceLock<Mutex<HashMap<u64, f64>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(&v) = cache.lock().expect("c1 cache poisoned").get(&alpha.to_bits()) {
        return Ok(v);
    }
    // y = 1/t maps (1, ∞) onto (0, 1): ∫_0^1 (1-t)^β t^{-β} dt
    let beta = 0.5 * alpha - 0.25;
    let value = integrate(|t| (1.0 - t).powf(beta) * t.powf(-beta), 0.0, 1.0, 1e-10)?.value;
    // two threads racing here compute the same number
    cache.lock().expect("c1 cache poisoned").insert(alpha.to_bits(), value);
    Ok(value)
}

/// `I12(λ,η,α) = ∫_ℝ |ξ|^{α+1/2}/(|λ|+ξ²+η)² dξ = c1(α) (|λ|+η)^{α/2-5/4}`.
pub fn closed_i12(lambda: f64, eta: f64, alpha: f64) -> Result<f64> {
    check_eta_positive(eta)?;
    Ok(c1_constant(alpha)? * (lambda.abs() + eta).powf(0.5 * alpha - 1.25))
}

/// `I13(λ,η) = (∫_ℝ (|λ|+ξ²+η)^{-2} dξ)^{1/2} = √(π/2) (|λ|+η)^{-3/4}`.
pub fn closed_i13(lambda: f64, eta: f64) -> Result<f64> {
    check_eta_positive(eta)?;
    Ok((PI / 2.0).sqrt() * (lambda.abs() + eta).powf(-0.75))
}

/// `I14(λ,η) = (∫_ℝ ξ²(|λ|+ξ²+η)^{-4} dξ)^{1/2} = (√π/4) (|λ|+η)^{-5/4}`.
pub fn closed_i14(lambda: f64, eta: f64) -> Result<f64> {
    check_eta_positive(eta)?;
    Ok(PI.sqrt() / 4.0 * (lambda.abs() + eta).powf(-1.25))
}
