use super::{mu, FractionalParams, XiGrid};
use crate::error::{Error, Result};

/// Scalar input/output form of the diffusive representation.
///
/// Feeding an input signal `V` through `ω_k' = -(ξ_k²+η) ω_k + μ(ξ_k) V`,
/// `ω_k(0) = 0`, produces the output `κ Σ_k W_k μ(ξ_k) ω_k`, which
/// approximates the shifted fractional integral `I^{1-α,η} V`. With `V = w'`
/// the output is the Caputo derivative `∂^{α,η} w`.
#[derive(Debug, Clone)]
pub struct DiffusiveRealization {
    params: FractionalParams,
    grid: XiGrid,
}

impl DiffusiveRealization {
    pub fn new(params: FractionalParams, grid: XiGrid) -> Self {
        Self { params, grid }
    }

    pub fn params(&self) -> &FractionalParams {
        &self.params
    }

    pub fn grid(&self) -> &XiGrid {
        &self.grid
    }

    /// Output sampled at `t_n = n dt` for an input sampled on the same times.
    /// Each relaxation is advanced with the implicit midpoint rule.
    pub fn respond(&self, input: &[f64], dt: f64) -> Result<Vec<f64>> {
        if !(dt > 0.0) {
            return Err(Error::domain(format!("time step must be positive, got {dt}")));
        }
        let alpha = self.params.alpha();
        let eta = self.params.eta();
        let kappa = self.params.kappa();
        // per-node (decay factor, input gain, output weight)
        let coeffs: Vec<(f64, f64, f64)> = self
            .grid
            .nodes()
            .iter()
            .zip(self.grid.weights())
            .map(|(&xi, &w)| {
                let rate = xi * xi + eta;
                let denom = 1.0 + 0.5 * dt * rate;
                let m = mu(xi, alpha);
                ((1.0 - 0.5 * dt * rate) / denom, dt * m / denom, 2.0 * kappa * w * m)
            })
            .collect();
        let mut omega = vec![0.0; coeffs.len()];
        let mut out = Vec::with_capacity(input.len());
        out.extend(input.first().map(|_| 0.0));
        for pair in input.windows(2) {
            let forcing = 0.5 * (pair[0] + pair[1]);
            let mut y = 0.0;
            for (o, &(decay, gain, weight)) in omega.iter_mut().zip(&coeffs) {
                *o = decay * *o + gain * forcing;
                y += weight * *o;
            }
            out.push(y);
        }
        Ok(out)
    }
}
