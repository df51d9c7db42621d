use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::assembly::ModelKind;
use crate::error::{Error, Result};
use crate::modes::lowest_modes;
use crate::operator::{DiscreteOperator, StateVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum InitialProfile {
    /// Compactly supported bump in the undamped part, at rest.
    #[default]
    SmoothBump,
    /// `φ₁ + φ₂/2 + φ₃/4` in the undamped eigenmodes, at rest.
    LowMode,
    /// `Σ_{n≤10} g_n φ_n / n²` with seeded standard normal `g_n`, at rest.
    RandomSmooth,
}

impl InitialProfile {
    pub fn name(self) -> &'static str {
        match self {
            InitialProfile::SmoothBump => "smooth-bump",
            InitialProfile::LowMode => "low-mode",
            InitialProfile::RandomSmooth => "random-smooth",
        }
    }
}

impl fmt::Display for InitialProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for InitialProfile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "smooth-bump" | "bump" => Ok(InitialProfile::SmoothBump),
            "low-mode" | "lowmode" => Ok(InitialProfile::LowMode),
            "random-smooth" | "random" => Ok(InitialProfile::RandomSmooth),
            _ => Err(Error::domain(format!(
                "unknown profile '{s}' (expected smooth-bump, low-mode or random-smooth)"
            ))),
        }
    }
}

// (1 - r²)^4 on |r| < 1 and its derivative in x
fn bump(x: f64, center: f64, half_width: f64) -> (f64, f64) {
    let r = (x - center) / half_width;
    if r.abs() >= 1.0 {
        return (0.0, 0.0);
    }
    let s = 1.0 - r * r;
    (s.powi(4), -8.0 * r * s.powi(3) / half_width)
}

/// Initial state with `ω = 0`, scaled to unit energy. Essential boundary
/// conditions and interface continuity hold by construction since only
/// retained unknowns are set.
pub fn make_initial_data(op: &DiscreteOperator, profile: InitialProfile, seed: u64) -> Result<StateVector> {
    let system = op.system();
    let l = op.spec().length;
    let q = match profile {
        InitialProfile::SmoothBump => {
            if op.spec().kind == ModelKind::Ebb {
                system.interpolate(|_| (0.0, 0.0), |x| bump(x, 0.75 * l, 0.2 * l))
            } else {
                system.interpolate(|x| bump(x, -0.5 * l, 0.25 * l), |_| (0.0, 0.0))
            }
        }
        InitialProfile::LowMode => {
            let modes = lowest_modes(&system.stiffness, &system.mass, 3.min(system.dim()))?;
            combine(&modes.vectors, &[1.0, 0.5, 0.25])
        }
        InitialProfile::RandomSmooth => {
            let count = 10.min(system.dim());
            let modes = lowest_modes(&system.stiffness, &system.mass, count)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let coeffs: Vec<f64> = (1..=count)
                .map(|n| {
                    let g: f64 = StandardNormal.sample(&mut rng);
                    g / (n * n) as f64
                })
                .collect();
            combine(&modes.vectors, &coeffs)
        }
    };
    let zeros = vec![0.0; q.len()];
    let mut x = StateVector::from_parts(&q, &zeros, op.n_points(), op.n_xi())?;
    let e = op.energy(&x)?;
    if !(e > 0.0) {
        return Err(Error::numerical("initial profile has zero energy on this mesh"));
    }
    let scale = (1.0 / e).sqrt();
    x.as_mut_slice().iter_mut().for_each(|v| *v *= scale);
    Ok(x)
}

fn combine(vectors: &[Vec<f64>], coeffs: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; vectors[0].len()];
    for (v, &c) in vectors.iter().zip(coeffs) {
        for (o, a) in out.iter_mut().zip(v) {
            *o += c * a;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::{ModelSpec, Side, SpatialMesh};
    use crate::kernel::{FractionalParams, XiGrid};
    use crate::operator::assemble_generator;

    fn operator(kind: ModelKind) -> DiscreteOperator {
        let spec = ModelSpec::standard(kind);
        let mesh = SpatialMesh::uniform(&spec, 16).unwrap();
        let params = FractionalParams::new(0.5, 1.0).unwrap();
        let grid = XiGrid::geometric(8, 1e-4, 1e3).unwrap();
        assemble_generator(&spec, &mesh, &grid, &params).unwrap()
    }

    #[test]
    fn profiles_have_unit_energy_and_rest() {
        for kind in ModelKind::ALL {
            let op = operator(kind);
            for profile in [
                InitialProfile::SmoothBump,
                InitialProfile::LowMode,
                InitialProfile::RandomSmooth,
            ] {
                let x = make_initial_data(&op, profile, 7).unwrap();
                assert!((op.energy(&x).unwrap() - 1.0).abs() < 1e-10, "{kind} {profile}");
                assert!(x.velocity().iter().all(|&v| v == 0.0));
                assert!(x.omega().iter().all(|&v| v == 0.0));
            }
        }
    }

    #[test]
    fn bump_vanishes_at_outer_ends() {
        let op = operator(ModelKind::WW);
        let x = make_initial_data(&op, InitialProfile::SmoothBump, 0).unwrap();
        let left = op.system().nodal_values(Side::Left, x.displacement()).unwrap();
        let right = op.system().nodal_values(Side::Right, x.displacement()).unwrap();
        assert_eq!(left[0].1, 0.0);
        assert_eq!(right.last().unwrap().1, 0.0);
        assert!(left.iter().any(|&(_, v)| v > 0.0));
    }

    #[test]
    fn seeds_are_reproducible() {
        let op = operator(ModelKind::WEbb);
        let a = make_initial_data(&op, InitialProfile::RandomSmooth, 11).unwrap();
        let b = make_initial_data(&op, InitialProfile::RandomSmooth, 11).unwrap();
        let c = make_initial_data(&op, InitialProfile::RandomSmooth, 12).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn profile_names_parse() {
        for p in [
            InitialProfile::SmoothBump,
            InitialProfile::LowMode,
            InitialProfile::RandomSmooth,
        ] {
            assert_eq!(p.name().parse::<InitialProfile>().unwrap(), p);
        }
        assert!("square".parse::<InitialProfile>().is_err());
    }
}
