use std::fmt::Write as _;

use super::{closed_i1, FractionalParams};
use crate::error::{Error, Result};

pub const DEFAULT_QUAD_TOL: f64 = 1e-6;

/// Truncated quadrature of the half-axis ξ > 0.
///
/// The weights integrate over `(0, ∞)`; integrals over ℝ of even integrands
/// are `2 Σ w_k f(ξ_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct XiGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    xi_max: f64,
}

impl XiGrid {
    /// Log-uniform nodes on `(xi_min, xi_max)` with composite-midpoint weights in
    /// `log ξ`. No accuracy check; see [`build_xi_grid`] for the checked builder.
    pub fn geometric(count: usize, xi_min: f64, xi_max: f64) -> Result<Self> {
        if count < 2 {
            return Err(Error::domain(format!("a ξ-grid needs at least 2 nodes, got {count}")));
        }
        if !(xi_min > 0.0 && xi_max > xi_min && xi_max.is_finite()) {
            return Err(Error::domain(format!(
                "ξ-grid bounds must satisfy 0 < xi_min < xi_max, got ({xi_min}, {xi_max})"
            )));
        }
        let (lo, hi) = (xi_min.ln(), xi_max.ln());
        let step = (hi - lo) / count as f64;
        let nodes: Vec<f64> = (0..count).map(|k| (lo + (k as f64 + 0.5) * step).exp()).collect();
        let weights = nodes.iter().map(|xi| xi * step).collect();
        Ok(Self { nodes, weights, xi_max })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn xi_max(&self) -> f64 {
        self.xi_max
    }

    pub fn count(&self) -> usize {
        self.nodes.len()
    }

    /// `2 Σ w_k f(ξ_k)`: the integral over ℝ of an even integrand.
    pub fn integrate_even<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        2.0 * self.integrate_half(f)
    }

    /// `Σ w_k f(ξ_k)`: the integral over `(0, ∞)`.
    pub fn integrate_half<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&xi, &w)| w * f(xi)).sum()
    }

    /// Same nodes, all weights multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            nodes: self.nodes.clone(),
            weights: self.weights.iter().map(|w| w * factor).collect(),
            xi_max: self.xi_max,
        }
    }

    /// Relative error of the grid on the `I1` probe integrand.
    pub fn probe_error(&self, params: &FractionalParams) -> f64 {
        let (alpha, eta) = (params.alpha(), params.eta());
        let kappa = params.kappa();
        let approx = kappa * self.integrate_even(|xi| xi.powf(2.0 * alpha - 1.0) / (1.0 + xi * xi + eta));
        let exact = closed_i1(eta, alpha).expect("params are validated");
        ((approx - exact) / exact).abs()
    }

    /// Two-column `node,weight` text block.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("node,weight\n");
        for (xi, w) in self.nodes.iter().zip(&self.weights) {
            let _ = writeln!(out, "{xi:.17e},{w:.17e}");
        }
        out
    }
}

/// Upper truncation putting the analytic tail of the I1 probe below `quad_tol / 10`.
pub fn default_xi_max(params: &FractionalParams, quad_tol: f64) -> f64 {
    let (alpha, eta) = (params.alpha(), params.eta());
    let target = 0.1 * quad_tol * (1.0 + eta).powf(alpha - 1.0);
    // 2κ ∫_X^∞ ξ^{2α-3} dξ = 2κ X^{2α-2} / (2-2α)
    let x = (target * (2.0 - 2.0 * alpha) / (2.0 * params.kappa())).powf(1.0 / (2.0 * alpha - 2.0));
    x.max(10.0)
}

/// Lower truncation: `1e-6 (1+η)`, lowered further when the head of the probe
/// integral (`∝ ξ_min^{2α}`) would exceed `quad_tol / 10`, and when the head of
/// the regular integrand `1/(ξ²+η)²` (relative size `4 ξ_min / (π √η)`) would.
pub fn default_xi_min(params: &FractionalParams, quad_tol: f64) -> f64 {
    let (alpha, eta) = (params.alpha(), params.eta());
    let target = 0.1 * quad_tol * (1.0 + eta).powf(alpha - 1.0);
    // 2κ ∫_0^m ξ^{2α-1}/(1+η) dξ = κ m^{2α} / (α (1+η))
    let head = (target * alpha * (1.0 + eta) / params.kappa()).powf(1.0 / (2.0 * alpha));
    let mut xi_min = head.min(1e-6 * (1.0 + eta));
    if eta > 0.0 {
        xi_min = xi_min.min(0.1 * quad_tol * std::f64::consts::PI * eta.sqrt() / 4.0);
    }
    xi_min
}

/// Geometric grid whose I1 probe error is at most `quad_tol`.
pub fn build_xi_grid(params: &FractionalParams, n_xi: usize, xi_max: f64, quad_tol: f64) -> Result<XiGrid> {
    if xi_max <= 1.0 {
        return Err(Error::domain(format!("xi_max must exceed 1, got {xi_max}")));
    }
    let grid = XiGrid::geometric(n_xi, default_xi_min(params, quad_tol), xi_max)?;
    let achieved = grid.probe_error(params);
    if achieved <= quad_tol {
        Ok(grid)
    } else {
        Err(Error::Resolution {
            message: format!(
                "{n_xi} nodes up to xi_max = {xi_max:.3e} cannot resolve the kernel for alpha = {}, eta = {}",
                params.alpha(),
                params.eta()
            ),
            achieved,
            required: quad_tol,
        })
    }
}
