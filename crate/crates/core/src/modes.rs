//! Lowest eigenpairs of the undamped pencil `K φ = ω² M φ`.

use nalgebra::DMatrix;

use crate::banded::BandMatrix;
use crate::error::{Error, Result};

/// Lowest modes, eigenvalues `ω²` increasing, vectors `M`-orthonormal.
#[derive(Debug, Clone)]
pub struct Modes {
    pub eigenvalues: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
}

impl Modes {
    /// Angular frequencies `ω = √λ`.
    pub fn frequencies(&self) -> Vec<f64> {
        self.eigenvalues.iter().map(|l| l.max(0.0).sqrt()).collect()
    }
}

/// Subspace iteration with Rayleigh–Ritz projection for the `count` smallest
/// eigenpairs of the symmetric pencil `(k, m)`, `k` and `m` positive definite.
pub fn lowest_modes(k: &BandMatrix<f64>, m: &BandMatrix<f64>, count: usize) -> Result<Modes> {
    let n = k.dim();
    if count == 0 || count > n {
        return Err(Error::domain(format!(
            "cannot compute {count} modes of a {n}-dimensional pencil"
        )));
    }
    if n <= 64 {
        return dense_modes(k, m, count);
    }
    let block = (count + count / 2 + 4).min(n);
    let lu = k.factor()?;
    // deterministic start: smooth-ish vectors with distinct wavenumbers
    let mut x: Vec<Vec<f64>> = (0..block)
        .map(|j| {
            (0..n)
                .map(|i| ((j + 1) as f64 * (i as f64 + 0.5) * 1.618_033_988_7).sin() + 1e-3 * (i as f64).cos())
                .collect()
        })
        .collect();
    let mut previous = vec![f64::INFINITY; count];
    let mut last_change = f64::INFINITY;
    let dot = |a: &[f64], c: &[f64]| a.iter().zip(c).map(|(p, q)| p * q).sum::<f64>();
    for iteration in 0..1000 {
        // Y = K⁻¹ M X; then Yᵀ K Y = Yᵀ M X, so the projection needs only M,
        // which keeps the Ritz values clear of the conditioning of K
        let mx: Vec<Vec<f64>> = x
            .iter()
            .map(|v| {
                let mut out = vec![0.0; n];
                m.apply(v, &mut out);
                out
            })
            .collect();
        let y: Vec<Vec<f64>> = mx
            .iter()
            .map(|v| {
                let mut out = v.clone();
                lu.solve_in_place(&mut out);
                out
            })
            .collect();
        let my: Vec<Vec<f64>> = y
            .iter()
            .map(|v| {
                let mut out = vec![0.0; n];
                m.apply(v, &mut out);
                out
            })
            .collect();
        let kr = DMatrix::from_fn(block, block, |i, j| 0.5 * (dot(&y[i], &mx[j]) + dot(&y[j], &mx[i])));
        let mr = DMatrix::from_fn(block, block, |i, j| 0.5 * (dot(&y[i], &my[j]) + dot(&y[j], &my[i])));
        let (values, coeffs) = generalized_symmetric(kr, mr)?;
        x = combine(&y, &coeffs);
        let change = values
            .iter()
            .take(count)
            .zip(&previous)
            .map(|(a, b)| (a - b).abs() / a.abs())
            .fold(0.0, f64::max);
        // roundoff in the solves with K leaves a jitter well above 1e-12 on
        // fine beam meshes; accept once the change stops shrinking below 1e-8
        let stalled = iteration > 5 && change <= 1e-8 && change >= 0.5 * last_change;
        last_change = change;
        previous.copy_from_slice(&values[..count]);
        if (change <= 1e-12 && iteration > 2) || stalled {
            x.truncate(count);
            return Ok(Modes {
                eigenvalues: values[..count].to_vec(),
                vectors: x,
            });
        }
    }
    Err(Error::numerical(
        "subspace iteration for the lowest modes did not converge",
    ))
}

/// Eigenpairs of `K c = λ M c` for small dense SPD `M`, increasing, with
/// `Cᵀ M C = I`.
fn generalized_symmetric(k: DMatrix<f64>, m: DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let chol = m
        .cholesky()
        .ok_or_else(|| Error::numerical("projected mass matrix lost positive definiteness"))?;
    let l = chol.l();
    let linv = l
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::numerical("singular projected mass matrix"))?;
    let h = &linv * k * linv.transpose();
    let h = (&h + h.transpose()) * 0.5;
    let eig = h.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = DMatrix::from_fn(eig.eigenvectors.nrows(), order.len(), |r, c| {
        eig.eigenvectors[(r, order[c])]
    });
    Ok((values, linv.transpose() * vecs))
}

fn combine(x: &[Vec<f64>], c: &DMatrix<f64>) -> Vec<Vec<f64>> {
    let n = x[0].len();
    (0..c.ncols())
        .map(|j| {
            let mut v = vec![0.0; n];
            for (i, xi) in x.iter().enumerate() {
                let w = c[(i, j)];
                for (a, b) in v.iter_mut().zip(xi) {
                    *a += w * b;
                }
            }
            v
        })
        .collect()
}

fn dense_modes(k: &BandMatrix<f64>, m: &BandMatrix<f64>, count: usize) -> Result<Modes> {
    let (values, vecs) = generalized_symmetric(k.to_dense(), m.to_dense())?;
    Ok(Modes {
        eigenvalues: values[..count].to_vec(),
        vectors: (0..count).map(|j| vecs.column(j).iter().copied().collect()).collect(),
    })
}
