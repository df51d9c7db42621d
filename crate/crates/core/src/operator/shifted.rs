use super::DiscreteOperator;
use crate::banded::{BandLu, BandMatrix, Scalar};
use crate::error::{Error, Result};

/// Factorization behind `R(σ) = (σ - M⁻¹A)⁻¹`.
///
/// Eliminating `p = σq - v_q` and the diagonal `ω` equations leaves one banded
/// system in the displacement unknowns,
/// `Z(σ) = σ² M_q + K + σ κ J(σ) K_d` with `J(σ) = Σ_k W_k μ_k² / (σ + Λ_k)`,
/// so each application costs `O(n + n_points · N_ξ)`.
#[derive(Debug, Clone)]
pub struct ShiftedSolver<T> {
    sigma: T,
    kernel_sum: T,
    inverse_rates: Vec<T>,
    lu: BandLu<T>,
}

impl<T: Scalar> ShiftedSolver<T> {
    pub(super) fn new(op: &DiscreteOperator, sigma: T) -> Result<Self> {
        let inverse_rates: Vec<T> = op
            .rates
            .iter()
            .map(|&r| T::from_real(1.0) / (sigma + T::from_real(r)))
            .collect();
        if inverse_rates.iter().any(|v| !v.modulus().is_finite()) {
            return Err(Error::numerical("shift coincides with a relaxation rate"));
        }
        let mut kernel_sum = T::zero();
        if op.n_points() > 0 {
            for (k, inv) in inverse_rates.iter().enumerate() {
                kernel_sum += T::from_real(op.weights[k] * op.gains[k] * op.gains[k]) * *inv;
            }
        }
        let z = BandMatrix::combine(&[
            (sigma * sigma, &op.system.mass),
            (T::from_real(1.0), &op.system.stiffness),
            (sigma * T::from_real(op.kappa) * kernel_sum, &op.damping_stiffness),
        ]);
        let lu = z.factor()?;
        Ok(Self {
            sigma,
            kernel_sum,
            inverse_rates,
            lu,
        })
    }

    pub fn sigma(&self) -> T {
        self.sigma
    }

    /// `R(σ) v` on flat vectors.
    pub fn resolve(&self, op: &DiscreteOperator, v: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); v.len()];
        self.resolve_into(op, v, &mut out);
        out
    }

    pub fn resolve_into(&self, op: &DiscreteOperator, v: &[T], out: &mut [T]) {
        let n = op.n_q();
        let nx = op.n_xi();
        assert_eq!(v.len(), op.dim());
        assert_eq!(out.len(), op.dim());
        let (g, rest) = v.split_at(n);
        let (vp, vo) = rest.split_at(n);
        let sigma = self.sigma;

        // rhs = M_q (v_p + σ g) + κ J K_d g - C (σ + Λ)⁻¹ v_ω
        let mut tmp: Vec<T> = vp.iter().zip(g).map(|(&a, &b)| a + sigma * b).collect();
        let mut rhs = vec![T::zero(); n];
        op.system.mass.apply(&tmp, &mut rhs);
        op.damping_stiffness.apply(g, &mut tmp);
        let scale = T::from_real(op.kappa) * self.kernel_sum;
        for (r, t) in rhs.iter_mut().zip(&tmp) {
            *r += scale * *t;
        }
        for (j, pt) in op.points.iter().enumerate() {
            let mut acc = T::zero();
            for k in 0..nx {
                acc += T::from_real(op.weights[k] * op.gains[k]) * vo[j * nx + k] * self.inverse_rates[k];
            }
            let h = T::from_real(pt.weight * pt.sqrt_d * op.kappa) * acc;
            for &(c, val) in &pt.row {
                rhs[c] -= T::from_real(val) * h;
            }
        }
        self.lu.solve_in_place(&mut rhs);

        let (oq, rest) = out.split_at_mut(n);
        let (op_, oo) = rest.split_at_mut(n);
        oq.copy_from_slice(&rhs);
        for ((p, &q), &gi) in op_.iter_mut().zip(oq.iter()).zip(g) {
            *p = sigma * q - gi;
        }
        for (j, pt) in op.points.iter().enumerate() {
            let s = T::from_real(pt.sqrt_d) * pt.strain(op_);
            for k in 0..nx {
                let i = j * nx + k;
                oo[i] = (T::from_real(op.gains[k]) * s + vo[i]) * self.inverse_rates[k];
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::*;
    use crate::assembly::ModelKind;
    use crate::kernel::XiGrid;
    use nalgebra::DVector;
    use num_complex::Complex64;

    fn operator(kind: ModelKind) -> DiscreteOperator {
        let spec = ModelSpec::standard(kind);
        let mesh = SpatialMesh::uniform(&spec, 6).unwrap();
        let params = FractionalParams::new(0.3, 1.0).unwrap();
        let grid = XiGrid::geometric(5, 1e-3, 1e2).unwrap();
        assemble_generator(&spec, &mesh, &grid, &params).unwrap()
    }

    #[test]
    fn real_shift_matches_dense_solve() {
        for kind in ModelKind::ALL {
            let op = operator(kind);
            let sigma = 7.5;
            let solver = op.shifted(sigma).unwrap();
            let v: Vec<f64> = (0..op.dim()).map(|i| ((i * 7 + 3) % 11) as f64 - 5.0).collect();
            let x = solver.resolve(&op, &v);
            let (m, a) = (op.dense_mass(), op.dense_generator());
            let lhs = (&m * sigma - &a) * DVector::from_column_slice(&x);
            let rhs = &m * DVector::from_column_slice(&v);
            assert!((lhs - &rhs).amax() < 1e-9 * rhs.amax(), "{kind}");
        }
    }

    #[test]
    fn imaginary_shift_matches_dense_solve() {
        for kind in ModelKind::ALL {
            let op = operator(kind);
            let sigma = Complex64::new(0.0, 13.0);
            let solver = op.shifted(sigma).unwrap();
            let v: Vec<Complex64> = (0..op.dim())
                .map(|i| Complex64::new((i as f64).cos(), (2.0 * i as f64).sin()))
                .collect();
            let x = solver.resolve(&op, &v);
            let m = op.dense_mass().map(|e| Complex64::new(e, 0.0));
            let a = op.dense_generator().map(|e| Complex64::new(e, 0.0));
            let lhs = (&m * sigma - &a) * DVector::from_column_slice(&x);
            let rhs = &m * DVector::from_column_slice(&v);
            let err = (lhs - &rhs).iter().map(|z| z.norm()).fold(0.0, f64::max);
            let scale = rhs.iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert!(err < 1e-9 * scale, "{kind}: {err}");
        }
    }
}
