//! Implicit midpoint integration of `M Ẋ = A X` and energy traces.

mod initial;
mod trace;

pub use initial::{make_initial_data, InitialProfile};
pub use trace::EnergyTrace;

use crate::error::{Error, Result};
use crate::operator::{DiscreteOperator, ShiftedSolver, StateVector};

/// Reusable midpoint step for one operator and one `dt`.
///
/// `(M - dt/2 A) x⁺ = (M + dt/2 A) x` is written as `x⁺ = 2σ R(σ) x - x` with
/// `σ = 2/dt`, so the only factorization is the banded one inside `R(σ)`.
pub struct MidpointStepper<'a> {
    op: &'a DiscreteOperator,
    dt: f64,
    solver: ShiftedSolver<f64>,
}

impl<'a> MidpointStepper<'a> {
    pub fn new(op: &'a DiscreteOperator, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::domain(format!("time step must be positive, got {dt}")));
        }
        let solver = op.shifted(2.0 / dt)?;
        Ok(Self { op, dt, solver })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Advances the flat state `x` by one step; `scratch` has the same length.
    pub fn step_in_place(&self, x: &mut [f64], scratch: &mut [f64]) {
        let two_sigma = 4.0 / self.dt;
        self.solver.resolve_into(self.op, x, scratch);
        for (xi, &ri) in x.iter_mut().zip(scratch.iter()) {
            *xi = two_sigma * ri - *xi;
        }
    }

    pub fn step(&self, x: &StateVector) -> Result<StateVector> {
        let mut out = x.clone();
        let mut scratch = vec![0.0; x.len()];
        if x.len() != self.op.dim() {
            return Err(Error::domain("state does not match the operator"));
        }
        self.step_in_place(out.as_mut_slice(), &mut scratch);
        Ok(out)
    }
}

/// One implicit midpoint step.
pub fn step_midpoint(op: &DiscreteOperator, x: &StateVector, dt: f64) -> Result<StateVector> {
    let next = MidpointStepper::new(op, dt)?.step(x)?;
    if !next.is_finite() {
        return Err(Error::numerical("midpoint step produced non-finite values"));
    }
    Ok(next)
}

/// Steps from `x0` to `t_end` with constant `dt`, sampling `(t, E, dissipation)`
/// every `sample_every` steps and at the final time.
pub fn simulate(
    op: &DiscreteOperator,
    x0: &StateVector,
    t_end: f64,
    dt: f64,
    sample_every: usize,
) -> Result<EnergyTrace> {
    simulate_with(op, x0, t_end, dt, sample_every, |_, _| {})
}

/// [`simulate`] with a callback receiving `(t, state)` at every sample.
pub fn simulate_with<F: FnMut(f64, &StateVector)>(
    op: &DiscreteOperator,
    x0: &StateVector,
    t_end: f64,
    dt: f64,
    sample_every: usize,
    mut observe: F,
) -> Result<EnergyTrace> {
    if !(t_end > 0.0) {
        return Err(Error::domain(format!("final time must be positive, got {t_end}")));
    }
    if sample_every == 0 {
        return Err(Error::domain("sample_every must be at least 1"));
    }
    if x0.omega().iter().any(|&w| w != 0.0) {
        return Err(Error::domain("initial diffusive variable must vanish"));
    }
    let stepper = MidpointStepper::new(op, dt)?;
    let steps = (t_end / dt).round().max(1.0) as usize;
    let mut x = x0.clone();
    if x.len() != op.dim() {
        return Err(Error::domain("initial state does not match the operator"));
    }
    let mut scratch = vec![0.0; x.len()];
    let mut trace = EnergyTrace::default();
    let spec = op.spec();
    let (n_left, n_right) = (op.mesh().left_elements(), op.mesh().right_elements());
    for (k, v) in [
        ("model", spec.kind.to_string()),
        ("alpha", op.params().alpha().to_string()),
        ("eta", op.params().eta().to_string()),
        ("a", spec.a.to_string()),
        ("b", spec.b.to_string()),
        ("L", spec.length.to_string()),
        ("l0", spec.l0.to_string()),
        ("l1", spec.l1.to_string()),
        ("d0", spec.d0.to_string()),
        ("n_left", n_left.to_string()),
        ("n_right", n_right.to_string()),
        ("n_xi", op.n_xi().to_string()),
        ("xi_max", op.grid().xi_max().to_string()),
        ("dt", dt.to_string()),
        ("T", (steps as f64 * dt).to_string()),
        ("sample_every", sample_every.to_string()),
        ("conservative", op.is_conservative().to_string()),
    ] {
        trace.set_meta(k, v);
    }
    trace.push(0.0, op.energy(&x)?, op.dissipation(&x)?);
    observe(0.0, &x);
    for n in 1..=steps {
        stepper.step_in_place(x.as_mut_slice(), &mut scratch);
        if n % sample_every == 0 || n == steps {
            if !x.is_finite() {
                return Err(Error::numerical(format!("state became non-finite at step {n}")));
            }
            let t = n as f64 * dt;
            trace.push(t, op.energy(&x)?, op.dissipation(&x)?);
            observe(t, &x);
        }
    }
    Ok(trace)
}
