use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::operator::{DiscreteOperator, ShiftedSolver};

/// Largest state dimension handled by dense eigen/singular value solvers.
pub const MAX_DENSE_DIM: usize = 2000;

/// Below this dimension a non-converged iteration falls back to a dense SVD.
pub const DENSE_FALLBACK_DIM: usize = 600;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolventOptions {
    /// Relative change of the top Ritz value accepted as converged.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for ResolventOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 300,
        }
    }
}

/// `R(iλ)` together with its `M`-adjoint.
///
/// With `J = diag(I, -I, I)` the generator satisfies `Aᵀ = J A J`, so the
/// `M`-adjoint of `R(iλ)` is `J R(-iλ) J`, and `R(-iλ) w = conj(R(iλ) conj w)`
/// because all matrices are real. One factorization serves both.
pub struct ImaginaryResolvent<'a> {
    op: &'a DiscreteOperator,
    solver: ShiftedSolver<Complex64>,
}

impl<'a> ImaginaryResolvent<'a> {
    pub fn new(op: &'a DiscreteOperator, lambda: f64) -> Result<Self> {
        Ok(Self {
            op,
            solver: op.shifted(Complex64::new(0.0, lambda))?,
        })
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        self.solver.resolve(self.op, v)
    }

    pub fn apply_adjoint(&self, v: &[Complex64]) -> Vec<Complex64> {
        let n = self.op.n_q();
        let flip = |x: &mut [Complex64]| {
            for (i, z) in x.iter_mut().enumerate() {
                *z = z.conj();
                if (n..2 * n).contains(&i) {
                    *z = -*z;
                }
            }
        };
        let mut w = v.to_vec();
        flip(&mut w);
        let mut r = self.solver.resolve(self.op, &w);
        flip(&mut r);
        r
    }
}

/// `‖(iλ - M⁻¹A)⁻¹‖` in the energy norm: the square root of the top
/// eigenvalue of `R*R`, found by Lanczos in the `M`-inner product with full
/// reorthogonalization.
pub fn resolvent_norm(op: &DiscreteOperator, lambda: f64) -> Result<f64> {
    resolvent_norm_with(op, lambda, ResolventOptions::default())
}

pub fn resolvent_norm_with(op: &DiscreteOperator, lambda: f64, options: ResolventOptions) -> Result<f64> {
    match lanczos_norm(op, lambda, options) {
        Ok(v) => Ok(v),
        Err(Error::Numerical(msg)) if op.dim() <= DENSE_FALLBACK_DIM => {
            dense_resolvent_norm(op, lambda).map_err(|e| Error::numerical(format!("{msg}; dense fallback: {e}")))
        }
        Err(e) => Err(e),
    }
}

fn lanczos_norm(op: &DiscreteOperator, lambda: f64, options: ResolventOptions) -> Result<f64> {
    let r = ImaginaryResolvent::new(op, lambda)?;
    let d = op.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed ^ lambda.to_bits());
    let mut v: Vec<Complex64> = (0..d)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    let nv = op.norm(&v);
    v.iter_mut().for_each(|z| *z /= nv);

    let max_iter = options.max_iter.min(d);
    let mut basis: Vec<Vec<Complex64>> = Vec::new();
    let mut mbasis: Vec<Vec<Complex64>> = Vec::new();
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut last = 0.0;
    let mut mv = vec![Complex64::new(0.0, 0.0); d];
    for j in 0..max_iter {
        op.mass_apply(&v, &mut mv);
        let mut w = r.apply_adjoint(&r.apply(&v));
        let a: f64 = mv.iter().zip(&w).map(|(m, x)| m.conj() * x).sum::<Complex64>().re;
        basis.push(v.clone());
        mbasis.push(mv.clone());
        // two passes of classical Gram–Schmidt in the M-inner product
        for _ in 0..2 {
            for (b, mb) in basis.iter().zip(&mbasis) {
                let c: Complex64 = mb.iter().zip(&w).map(|(m, x)| m.conj() * x).sum();
                for (x, y) in w.iter_mut().zip(b) {
                    *x -= c * y;
                }
            }
        }
        alphas.push(a);
        let theta = top_ritz(&alphas, &betas);
        let beta = op.norm(&w);
        let converged = j > 0 && (theta - last).abs() <= options.tol * theta;
        if converged || beta <= 1e-14 * theta || j + 1 == d {
            if !(theta > 0.0 && theta.is_finite()) {
                return Err(Error::numerical(format!(
                    "Lanczos produced an invalid Ritz value {theta}"
                )));
            }
            return Ok(theta.sqrt());
        }
        last = theta;
        betas.push(beta);
        v = w.into_iter().map(|z| z / beta).collect();
    }
    Err(Error::numerical(format!(
        "Lanczos did not converge in {max_iter} iterations at lambda = {lambda} (last relative change above {:.1e})",
        options.tol
    )))
}

// Largest eigenvalue of the Lanczos tridiagonal by Sturm bisection.
fn top_ritz(alphas: &[f64], betas: &[f64]) -> f64 {
    let n = alphas.len();
    let off = &betas[..n - 1];
    // Gershgorin bounds
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = if i > 0 { off[i - 1].abs() } else { 0.0 } + if i + 1 < n { off[i].abs() } else { 0.0 };
        lo = lo.min(alphas[i] - r);
        hi = hi.max(alphas[i] + r);
    }
    let count_above = |x: f64| {
        let mut count = 0;
        let mut d = 1.0;
        for i in 0..n {
            let b2 = if i > 0 { off[i - 1] * off[i - 1] } else { 0.0 };
            d = alphas[i] - x - if i > 0 { b2 / d } else { 0.0 };
            if d == 0.0 {
                d = -f64::EPSILON * (x.abs() + 1.0);
            }
            if d > 0.0 {
                count += 1;
            }
        }
        count
    };
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= 4.0 * f64::EPSILON * hi.abs().max(lo.abs()) {
            break;
        }
        if count_above(mid) > 0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `H = L⁻¹ A L⁻ᵀ` with `M = L Lᵀ`: the generator in energy-orthonormal
/// coordinates, so `‖R(iλ)‖_M = 1 / σ_min(iλ - H)`.
pub fn energy_coordinates(op: &DiscreteOperator) -> Result<DMatrix<f64>> {
    if op.dim() > MAX_DENSE_DIM {
        return Err(Error::numerical(format!(
            "state dimension {} exceeds the dense limit {MAX_DENSE_DIM}; reduce the mesh or N_xi",
            op.dim()
        )));
    }
    let m = op.dense_mass();
    let a = op.dense_generator();
    let chol = m
        .cholesky()
        .ok_or_else(|| Error::numerical("energy Gram matrix is not positive definite"))?;
    let l = chol.l();
    let y = l
        .solve_lower_triangular(&a)
        .ok_or_else(|| Error::numerical("singular Cholesky factor"))?;
    let h = l
        .solve_lower_triangular(&y.transpose())
        .ok_or_else(|| Error::numerical("singular Cholesky factor"))?
        .transpose();
    Ok(h)
}

/// Dense oracle for [`resolvent_norm`].
pub fn dense_resolvent_norm(op: &DiscreteOperator, lambda: f64) -> Result<f64> {
    let h = energy_coordinates(op)?;
    let d = h.nrows();
    let shifted = DMatrix::from_fn(d, d, |i, j| {
        let diag = if i == j {
            Complex64::new(0.0, lambda)
        } else {
            Complex64::new(0.0, 0.0)
        };
        diag - Complex64::new(h[(i, j)], 0.0)
    });
    let s = shifted.singular_values();
    let smin = s.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(if smin > 0.0 { 1.0 / smin } else { f64::INFINITY })
}
