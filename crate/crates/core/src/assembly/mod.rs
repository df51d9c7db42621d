//! Finite element discretization of the coupled systems: P1 elements for
//! strings, Hermite cubics for beams, on a mesh fitted to the damping region.

mod coupling;
mod element;
mod mesh;
mod model;

use std::fmt::Write as _;

pub use coupling::{
    apply_boundary_conditions, assemble_system, clamped_dofs, couple_transmission, damped_points, damping_indicator,
    ConstrainedBlock, CoupledSystem, DampedPoint, FieldLayout, Side,
};
pub use element::{
    assemble_beam_block, assemble_block, assemble_wave_block, beam_curvature_row, beam_element, beam_shape,
    wave_element, FieldBlock,
};
pub use mesh::SpatialMesh;
pub use model::{FieldKind, JunctionCondition, ModelKind, ModelSpec};

use crate::banded::BandMatrix;

/// Coordinate-format text of the nonzero entries, 0-based, one `row col value`
/// triple per line after `#` header lines.
pub fn coo_text(name: &str, m: &BandMatrix<f64>) -> String {
    let n = m.dim();
    let (kl, ku) = (m.lower_bandwidth(), m.upper_bandwidth());
    let mut body = String::new();
    let mut nnz = 0;
    for i in 0..n {
        for j in i.saturating_sub(kl)..=(i + ku).min(n - 1) {
            let v = m.get(i, j);
            if v != 0.0 {
                nnz += 1;
                let _ = writeln!(body, "{i} {j} {v:.17e}");
            }
        }
    }
    format!("# matrix: {name}\n# rows: {n}\n# cols: {n}\n# nnz: {nnz}\n{body}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coo_round_trip() {
        let block = assemble_wave_block(&[0.0, 0.5, 1.0], 1.0).unwrap();
        let text = coo_text("K", &block.stiffness);
        assert!(text.contains("# nnz: 7"));
        let mut rebuilt = BandMatrix::zeros(3, 1, 1);
        for line in text.lines().filter(|l| !l.starts_with('#')) {
            let f: Vec<&str> = line.split_whitespace().collect();
            rebuilt.add(f[0].parse().unwrap(), f[1].parse().unwrap(), f[2].parse().unwrap());
        }
        assert_eq!(rebuilt.to_dense(), block.stiffness.to_dense());
    }
}
