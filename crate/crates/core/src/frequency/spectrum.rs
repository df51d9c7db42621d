use num_complex::Complex64;

use super::resolvent::energy_coordinates;
use crate::error::{Error, Result};
use crate::operator::DiscreteOperator;

/// Dense spectrum of `M⁻¹A`.
#[derive(Debug, Clone)]
pub struct SpectrumReport {
    pub max_real: f64,
    pub eigenvalues: Vec<Complex64>,
}

impl SpectrumReport {
    /// Distance from `iλ` to the spectrum.
    pub fn distance_to(&self, lambda: f64) -> f64 {
        let z = Complex64::new(0.0, lambda);
        self.eigenvalues
            .iter()
            .map(|&e| (e - z).norm())
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest `|Re μ|`, useful in the conservative limit.
    pub fn max_abs_real(&self) -> f64 {
        self.eigenvalues.iter().map(|e| e.re.abs()).fold(0.0, f64::max)
    }
}

/// All eigenvalues of the generator from a dense eigensolve of the
/// energy-orthonormal form. Refuses dimensions above
/// [`super::MAX_DENSE_DIM`].
pub fn spectrum_check(op: &DiscreteOperator) -> Result<SpectrumReport> {
    let h = energy_coordinates(op)?;
    let d = h.nrows();
    let dense = faer::Mat::<f64>::from_fn(d, d, |i, j| h[(i, j)]);
    let eigenvalues: Vec<Complex64> = dense
        .eigenvalues()
        .map_err(|e| Error::numerical(format!("dense eigensolve failed: {e:?}")))?
        .into_iter()
        .map(|z| Complex64::new(z.re, z.im))
        .collect();
    let max_real = eigenvalues.iter().map(|e| e.re).fold(f64::NEG_INFINITY, f64::max);
    Ok(SpectrumReport { max_real, eigenvalues })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::{ModelKind, ModelSpec, SpatialMesh};
    use crate::kernel::{FractionalParams, XiGrid};
    use crate::operator::{assemble_generator_with, GeneratorOptions};

    #[test]
    fn conjugate_pairs() {
        let spec = ModelSpec::standard(ModelKind::EbbEbb);
        let mesh = SpatialMesh::uniform(&spec, 4).unwrap();
        let params = FractionalParams::new(0.5, 1.0).unwrap();
        let grid = XiGrid::geometric(4, 1e-2, 1e2).unwrap();
        let op = assemble_generator_with(&spec, &mesh, &grid, &params, GeneratorOptions::default()).unwrap();
        let s = spectrum_check(&op).unwrap();
        assert!(s.max_real < 0.0);
        for e in &s.eigenvalues {
            let partner = s
                .eigenvalues
                .iter()
                .map(|f| (f - e.conj()).norm())
                .fold(f64::INFINITY, f64::min);
            assert!(partner < 1e-8 * e.norm().max(1.0), "{e}");
        }
    }
}
