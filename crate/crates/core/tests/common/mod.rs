#![allow(dead_code)]

use std::f64::consts::PI;
use std::num::NonZeroUsize;

use fkv_core::assembly::{ModelKind, ModelSpec, SpatialMesh};
use fkv_core::kernel::{FractionalParams, XiGrid};
use fkv_core::operator::{assemble_generator, assemble_generator_with, DiscreteOperator, GeneratorOptions};
use gauss_quad::GaussLegendre;
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const MODELS: [ModelKind; 5] = [
    ModelKind::EbbW,
    ModelKind::WW,
    ModelKind::WEbb,
    ModelKind::Ebb,
    ModelKind::EbbEbb,
];

/// Standard geometry on a uniform mesh with a geometric ξ-grid on `(1e-3, 1e3)`.
pub fn small_operator(kind: ModelKind, n: usize, n_xi: usize, alpha: f64, eta: f64) -> DiscreteOperator {
    let spec = ModelSpec::standard(kind);
    let mesh = SpatialMesh::uniform(&spec, n).unwrap();
    let grid = XiGrid::geometric(n_xi, 1e-3, 1e3).unwrap();
    let params = FractionalParams::new(alpha, eta).unwrap();
    assemble_generator(&spec, &mesh, &grid, &params).unwrap()
}

pub fn conservative_operator(kind: ModelKind, n: usize) -> DiscreteOperator {
    let spec = ModelSpec::standard(kind);
    let mesh = SpatialMesh::uniform(&spec, n).unwrap();
    let grid = XiGrid::geometric(4, 1e-3, 1e3).unwrap();
    let params = FractionalParams::new(0.5, 1.0).unwrap();
    assemble_generator_with(&spec, &mesh, &grid, &params, GeneratorOptions { conservative: true }).unwrap()
}

/// Seeded random state with entries uniform in `(-1, 1)`.
pub fn random_state(op: &DiscreteOperator, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..op.dim()).map(|_| rng.random_range(-1.0..1.0)).collect()
}

/// `exp(t M⁻¹A) x` by dense matrix exponential.
pub fn exact_flow(op: &DiscreteOperator, x: &[f64], t: f64) -> Vec<f64> {
    let m = op.dense_mass();
    let a = op.dense_generator();
    let g = m.lu().solve(&a).unwrap();
    let e = (g * t).exp();
    (e * DVector::from_column_slice(x)).as_slice().to_vec()
}

/// Chirp sweeping `f0 → f1` over `[0, horizon]`; with 0.5 → 1.5 over 10 it makes ten periods.
#[derive(Debug, Clone, Copy)]
pub struct Chirp {
    pub f0: f64,
    pub f1: f64,
    pub horizon: f64,
}

impl Chirp {
    pub const TEN_PERIODS: Chirp = Chirp {
        f0: 0.5,
        f1: 1.5,
        horizon: 10.0,
    };

    pub fn value(&self, t: f64) -> f64 {
        let k = (self.f1 - self.f0) / self.horizon;
        (2.0 * PI * (self.f0 * t + 0.5 * k * t * t)).sin()
    }

    pub fn derivative(&self, t: f64) -> f64 {
        let k = (self.f1 - self.f0) / self.horizon;
        2.0 * PI * (self.f0 + k * t) * (2.0 * PI * (self.f0 * t + 0.5 * k * t * t)).cos()
    }
}

/// `(1/Γ(1-α)) ∫₀ᵗ (t-s)^{-α} e^{-η(t-s)} v(s) ds` by direct convolution.
///
/// The substitution `τ = (t-s)^{1-α}` removes the endpoint singularity; the
/// remaining smooth integral goes to composite Gauss-Legendre.
pub fn caputo_convolution<F: Fn(f64) -> f64>(v: F, t: f64, alpha: f64, eta: f64, panels: usize) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let rule = GaussLegendre::new(NonZeroUsize::new(8).unwrap());
    let p = 1.0 / (1.0 - alpha);
    let top = t.powf(1.0 - alpha);
    let h = top / panels as f64;
    let integrand = |tau: f64| {
        let lag = tau.powf(p);
        (-eta * lag).exp() * v(t - lag)
    };
    let total: f64 = (0..panels)
        .map(|i| rule.integrate(i as f64 * h, (i + 1) as f64 * h, integrand))
        .sum();
    total * p / statrs::function::gamma::gamma(1.0 - alpha)
}

/// Relative discrete L² distance.
pub fn relative_l2(approx: &[f64], exact: &[f64]) -> f64 {
    let num: f64 = approx.iter().zip(exact).map(|(a, b)| (a - b).powi(2)).sum();
    let den: f64 = exact.iter().map(|b| b * b).sum();
    (num / den).sqrt()
}

/// Slope of `log y` against `log x` by least squares.
pub fn log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// `∫_ℝ f(ξ) dξ` for even `f`, via `ξ = s·tan θ` and composite Gauss-Legendre on `(0, π/2)`.
/// `s` should match the scale where `f` turns over.
pub fn even_line_integral<F: Fn(f64) -> f64>(f: F, s: f64) -> f64 {
    let rule = GaussLegendre::new(NonZeroUsize::new(10).unwrap());
    let panels = 64;
    let h = 0.5 * PI / panels as f64;
    let integrand = |theta: f64| {
        let c = theta.cos();
        f(s * theta.tan()) * s / (c * c)
    };
    2.0 * (0..panels)
        .map(|i| rule.integrate(i as f64 * h, (i + 1) as f64 * h, integrand))
        .sum::<f64>()
}
