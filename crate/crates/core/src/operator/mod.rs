//! Semi-discrete generator of the augmented system.
//!
//! With the state `X = (q, p, ω)` the discrete system reads `M Ẋ = A X` where
//!
//! ```text
//! M = diag(K, M_q, D),        D_jk = κ m_j W_k
//! A = [  0   K    0  ]
//!     [ -K   0   -C  ]
//!     [  0   DB  -DΛ ]
//! ```
//!
//! `K`, `M_q` are the coupled stiffness and mass, `(Bp)_jk = √d_j μ_k (G_j p)`
//! samples the damped strain rate at quadrature point `j`, `C = BᵀD`, and
//! `Λ_k = ξ_k² + η`. The skew part cancels in `XᵀAX`, leaving exactly
//! `-κ Σ_jk m_j W_k Λ_k ω_jk²`.

mod shifted;
mod state;

use nalgebra::DMatrix;

pub use shifted::ShiftedSolver;
pub use state::StateVector;

use crate::assembly::{assemble_system, damped_points, CoupledSystem, DampedPoint, ModelSpec, SpatialMesh};
use crate::banded::{BandMatrix, Scalar};
use crate::error::{Error, Result};
use crate::kernel::{mu, FractionalParams, XiGrid};

/// Assembly switches.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GeneratorOptions {
    /// Drop the damping (the `d0 → 0` limit): no `ω` unknowns, skew generator.
    /// Implied by `d0 = 0`.
    pub conservative: bool,
}

#[derive(Debug, Clone)]
struct Point {
    weight: f64,
    sqrt_d: f64,
    row: Vec<(usize, f64)>,
}

impl Point {
    fn strain<T: Scalar>(&self, p: &[T]) -> T {
        let mut s = T::zero();
        for &(g, v) in &self.row {
            s += T::from_real(v) * p[g];
        }
        s
    }
}

#[derive(Debug, Clone)]
pub struct DiscreteOperator {
    spec: ModelSpec,
    mesh: SpatialMesh,
    grid: XiGrid,
    params: FractionalParams,
    system: CoupledSystem,
    points: Vec<Point>,
    quadrature_points: Vec<DampedPoint>,
    damping_stiffness: BandMatrix<f64>,
    /// `ξ_k² + η`
    rates: Vec<f64>,
    /// `μ(ξ_k)`
    gains: Vec<f64>,
    /// full-line weights `W_k = 2 w_k`
    weights: Vec<f64>,
    kappa: f64,
    conservative: bool,
}

pub fn assemble_generator(
    spec: &ModelSpec,
    mesh: &SpatialMesh,
    grid: &XiGrid,
    params: &FractionalParams,
) -> Result<DiscreteOperator> {
    assemble_generator_with(spec, mesh, grid, params, GeneratorOptions::default())
}

pub fn assemble_generator_with(
    spec: &ModelSpec,
    mesh: &SpatialMesh,
    grid: &XiGrid,
    params: &FractionalParams,
    options: GeneratorOptions,
) -> Result<DiscreteOperator> {
    let conservative = options.conservative || spec.d0 == 0.0;
    if !conservative {
        params.require_positive_eta()?;
    }
    let system = assemble_system(spec, mesh)?;
    let quadrature_points = if conservative {
        Vec::new()
    } else {
        damped_points(spec, mesh, &system)?
    };
    if !conservative && quadrature_points.is_empty() {
        return Err(Error::assembly("no mesh element lies inside the damping interval"));
    }
    let n = system.dim();
    if quadrature_points.iter().any(|p| p.row.iter().any(|&(g, _)| g >= n)) {
        return Err(Error::assembly(
            "damped quadrature rows reference unknowns outside the mesh",
        ));
    }
    let w = system.stiffness.lower_bandwidth();
    let mut damping_stiffness = BandMatrix::zeros(n, w, w);
    for p in &quadrature_points {
        for &(a, va) in &p.row {
            for &(b, vb) in &p.row {
                if a.abs_diff(b) > w {
                    return Err(Error::assembly("damping couples unknowns outside the stiffness band"));
                }
                damping_stiffness.add(a, b, p.weight * p.damping * va * vb);
            }
        }
    }
    let points = quadrature_points
        .iter()
        .map(|p| Point {
            weight: p.weight,
            sqrt_d: p.damping.sqrt(),
            row: p.row.clone(),
        })
        .collect();
    let (alpha, eta) = (params.alpha(), params.eta());
    Ok(DiscreteOperator {
        spec: spec.clone(),
        mesh: mesh.clone(),
        grid: grid.clone(),
        params: *params,
        system,
        points,
        quadrature_points,
        damping_stiffness,
        rates: grid.nodes().iter().map(|x| x * x + eta).collect(),
        gains: grid.nodes().iter().map(|&x| mu(x, alpha)).collect(),
        weights: grid.weights().iter().map(|w| 2.0 * w).collect(),
        kappa: params.kappa(),
        conservative,
    })
}

impl DiscreteOperator {
    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn mesh(&self) -> &SpatialMesh {
        &self.mesh
    }

    pub fn grid(&self) -> &XiGrid {
        &self.grid
    }

    pub fn params(&self) -> &FractionalParams {
        &self.params
    }

    pub fn system(&self) -> &CoupledSystem {
        &self.system
    }

    pub fn damped_points(&self) -> &[DampedPoint] {
        &self.quadrature_points
    }

    pub fn is_conservative(&self) -> bool {
        self.conservative
    }

    /// Number of displacement unknowns.
    pub fn n_q(&self) -> usize {
        self.system.dim()
    }

    pub fn n_points(&self) -> usize {
        self.points.len()
    }

    /// `ξ` nodes carried per damped point (0 in the conservative limit).
    pub fn n_xi(&self) -> usize {
        if self.conservative {
            0
        } else {
            self.grid.count()
        }
    }

    /// Length of the flat state.
    pub fn dim(&self) -> usize {
        2 * self.n_q() + self.n_points() * self.n_xi()
    }

    pub fn zero_state(&self) -> StateVector {
        StateVector::zeros(self.n_q(), self.n_points(), self.n_xi())
    }

    pub fn state_from_flat(&self, data: Vec<f64>) -> Result<StateVector> {
        StateVector::from_flat(self.n_q(), self.n_points(), self.n_xi(), data)
    }

    fn check(&self, x: &StateVector) -> Result<()> {
        if x.shape() != (self.n_q(), self.n_points(), self.n_xi()) {
            return Err(Error::domain(format!(
                "state shape {:?} does not match the operator {:?}",
                x.shape(),
                (self.n_q(), self.n_points(), self.n_xi())
            )));
        }
        Ok(())
    }

    /// `κ m_j W_k`, the `ω`-block of `M`.
    fn omega_mass(&self, j: usize, k: usize) -> f64 {
        self.kappa * self.points[j].weight * self.weights[k]
    }

    /// `y = M x` on flat vectors.
    pub fn mass_apply<T: Scalar>(&self, x: &[T], y: &mut [T]) {
        let n = self.n_q();
        let nx = self.n_xi();
        self.system.stiffness.apply(&x[..n], &mut y[..n]);
        self.system.mass.apply(&x[n..2 * n], &mut y[n..2 * n]);
        for j in 0..self.n_points() {
            for k in 0..nx {
                let i = 2 * n + j * nx + k;
                y[i] = T::from_real(self.omega_mass(j, k)) * x[i];
            }
        }
    }

    /// `y = A x` on flat vectors.
    pub fn generator_apply<T: Scalar>(&self, x: &[T], y: &mut [T]) {
        let n = self.n_q();
        let nx = self.n_xi();
        let (q, rest) = x.split_at(n);
        let (p, om) = rest.split_at(n);
        let (yq, rest) = y.split_at_mut(n);
        let (yp, yo) = rest.split_at_mut(n);
        self.system.stiffness.apply(p, yq);
        self.system.stiffness.apply(q, yp);
        for v in yp.iter_mut() {
            *v = -*v;
        }
        for (j, pt) in self.points.iter().enumerate() {
            let s = pt.strain(p);
            // C ω: load of the fractional stress on the velocity equation
            let mut stress = T::zero();
            for k in 0..nx {
                let i = j * nx + k;
                stress += T::from_real(self.weights[k] * self.gains[k]) * om[i];
                let dm = self.omega_mass(j, k);
                yo[i] = T::from_real(dm * pt.sqrt_d * self.gains[k]) * s - T::from_real(dm * self.rates[k]) * om[i];
            }
            let c = T::from_real(pt.weight * pt.sqrt_d * self.kappa) * stress;
            for &(g, v) in &pt.row {
                yp[g] -= T::from_real(v) * c;
            }
        }
    }

    /// `M x` for a state.
    pub fn mass_times(&self, x: &StateVector) -> Result<StateVector> {
        self.check(x)?;
        let mut y = self.zero_state();
        self.mass_apply(x.as_slice(), y.as_mut_slice());
        Ok(y)
    }

    /// `A x` for a state.
    pub fn apply(&self, x: &StateVector) -> Result<StateVector> {
        self.check(x)?;
        let mut y = self.zero_state();
        self.generator_apply(x.as_slice(), y.as_mut_slice());
        Ok(y)
    }

    /// `x^H M y`.
    pub fn inner<T: Scalar>(&self, x: &[T], y: &[T]) -> T {
        let mut my = vec![T::zero(); y.len()];
        self.mass_apply(y, &mut my);
        x.iter().zip(&my).fold(T::zero(), |acc, (&a, &b)| acc + a.conj() * b)
    }

    /// `‖x‖_M`
    pub fn norm<T: Scalar>(&self, x: &[T]) -> f64 {
        self.inner(x, x).re().max(0.0).sqrt()
    }

    /// `½ XᵀMX`: kinetic, elastic and diffusive energy.
    pub fn energy(&self, x: &StateVector) -> Result<f64> {
        self.check(x)?;
        let n = self.n_q();
        let s = x.as_slice();
        let elastic = self.system.stiffness.quad_form(&s[..n]);
        let kinetic = self.system.mass.quad_form(&s[n..2 * n]);
        let nx = self.n_xi();
        let mut diffusive = 0.0;
        for j in 0..self.n_points() {
            for k in 0..nx {
                let w = x.omega_at(j, k);
                diffusive += self.omega_mass(j, k) * w * w;
            }
        }
        Ok(0.5 * (elastic + kinetic + diffusive))
    }

    /// `κ Σ_jk m_j W_k (ξ_k²+η) ω_jk²`, the rate `-dE/dt`.
    pub fn dissipation(&self, x: &StateVector) -> Result<f64> {
        self.check(x)?;
        let nx = self.n_xi();
        let mut total = 0.0;
        for j in 0..self.n_points() {
            for k in 0..nx {
                let w = x.omega_at(j, k);
                total += self.omega_mass(j, k) * self.rates[k] * w * w;
            }
        }
        Ok(total)
    }

    /// `Re⟨AX, X⟩_M = XᵀAX`, computed from the generator directly.
    pub fn dissipation_form(&self, x: &StateVector) -> Result<f64> {
        let ax = self.apply(x)?;
        Ok(ax.as_slice().iter().zip(x.as_slice()).map(|(a, b)| a * b).sum())
    }

    /// Dense `M`.
    pub fn dense_mass(&self) -> DMatrix<f64> {
        self.dense_of(|x, y| self.mass_apply(x, y))
    }

    /// Dense `A`.
    pub fn dense_generator(&self) -> DMatrix<f64> {
        self.dense_of(|x, y| self.generator_apply(x, y))
    }

    fn dense_of(&self, f: impl Fn(&[f64], &mut [f64])) -> DMatrix<f64> {
        let d = self.dim();
        let mut out = DMatrix::zeros(d, d);
        let mut e = vec![0.0; d];
        let mut col = vec![0.0; d];
        for j in 0..d {
            e[j] = 1.0;
            f(&e, &mut col);
            out.set_column(j, &nalgebra::DVector::from_column_slice(&col));
            e[j] = 0.0;
        }
        out
    }

    /// `(σ M - A)`-solver at shift `σ`, giving `R(σ) = (σ - M⁻¹A)⁻¹`.
    pub fn shifted<T: Scalar>(&self, sigma: T) -> Result<ShiftedSolver<T>> {
        ShiftedSolver::new(self, sigma)
    }

    /// Labels of the displacement unknowns for snapshot export.
    pub fn dof_labels(&self) -> Vec<(String, usize)> {
        self.system.dof_labels()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::ModelKind;
    use crate::kernel::{default_xi_min, XiGrid};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn operator(kind: ModelKind, conservative: bool) -> DiscreteOperator {
        let spec = ModelSpec::standard(kind);
        let mesh = SpatialMesh::uniform(&spec, 8).unwrap();
        let params = FractionalParams::new(0.5, 1.0).unwrap();
        let grid = XiGrid::geometric(6, default_xi_min(&params, 1e-6), 1e3).unwrap();
        assemble_generator_with(&spec, &mesh, &grid, &params, GeneratorOptions { conservative }).unwrap()
    }

    fn random_state(op: &DiscreteOperator, rng: &mut ChaCha8Rng) -> StateVector {
        let data = (0..op.dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
        op.state_from_flat(data).unwrap()
    }

    #[test]
    fn zero_state_has_zero_energy() {
        let op = operator(ModelKind::WW, false);
        let z = op.zero_state();
        assert_eq!(op.energy(&z).unwrap(), 0.0);
        assert_eq!(op.dissipation(&z).unwrap(), 0.0);
    }

    #[test]
    fn energy_is_half_the_mass_form() {
        let op = operator(ModelKind::WEbb, false);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = random_state(&op, &mut rng);
        let m = op.dense_mass();
        let v = nalgebra::DVector::from_column_slice(x.as_slice());
        let e = 0.5 * v.dot(&(&m * &v));
        assert!((op.energy(&x).unwrap() - e).abs() < 1e-12 * e);
    }

    #[test]
    fn velocity_only_energy() {
        let op = operator(ModelKind::EbbW, false);
        let mut x = op.zero_state();
        for (i, v) in x.velocity_mut().iter_mut().enumerate() {
            *v = (i as f64).sin();
        }
        let expected = 0.5 * op.system().mass.quad_form(x.velocity());
        assert_eq!(op.energy(&x).unwrap(), expected);
    }

    #[test]
    fn single_omega_entry_dissipation() {
        let op = operator(ModelKind::Ebb, false);
        let mut x = op.zero_state();
        x.set_omega(1, 2, 0.7);
        let xi = op.grid().nodes()[2];
        let expected =
            op.params().kappa() * 2.0 * op.grid().weights()[2] * op.damped_points()[1].weight * (xi * xi + 1.0) * 0.49;
        assert!((op.dissipation(&x).unwrap() - expected).abs() < 1e-14 * expected);
    }

    #[test]
    fn omega_nodes_are_uncoupled() {
        let op = operator(ModelKind::WW, false);
        let a = op.dense_generator();
        let n = 2 * op.n_q();
        let nx = op.n_xi();
        for r in n..op.dim() {
            for c in n..op.dim() {
                if r != c && a[(r, c)] != 0.0 {
                    panic!("ω coupling between {} and {}", (r - n) % nx, (c - n) % nx);
                }
            }
        }
    }

    #[test]
    fn conservative_limit_is_skew() {
        for kind in ModelKind::ALL {
            let op = operator(kind, true);
            assert_eq!(op.n_points(), 0);
            let a = op.dense_generator();
            assert!((&a + a.transpose()).amax() == 0.0, "{kind}");
        }
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        let op = operator(ModelKind::WW, false);
        let other = operator(ModelKind::Ebb, false);
        assert!(op.energy(&other.zero_state()).is_err());
    }

    #[test]
    fn zero_eta_is_rejected() {
        let spec = ModelSpec::standard(ModelKind::WW);
        let mesh = SpatialMesh::uniform(&spec, 4).unwrap();
        let params = FractionalParams::new(0.5, 0.0).unwrap();
        let grid = XiGrid::geometric(4, 1e-3, 1e3).unwrap();
        assert!(matches!(
            assemble_generator(&spec, &mesh, &grid, &params),
            Err(Error::Hypothesis(_))
        ));
    }
}
