use super::FieldKind;
use crate::banded::BandMatrix;
use crate::error::{Error, Result};

/// Mass and stiffness of one field on its own nodes, before any boundary
/// condition. Unknowns are numbered node-major: `node * dofs_per_node + c`
/// with `c = 0` the displacement and `c = 1` the slope (beams only).
#[derive(Debug, Clone)]
pub struct FieldBlock {
    pub kind: FieldKind,
    pub coefficient: f64,
    pub nodes: Vec<f64>,
    pub mass: BandMatrix<f64>,
    pub stiffness: BandMatrix<f64>,
}

impl FieldBlock {
    pub fn dim(&self) -> usize {
        self.nodes.len() * self.kind.dofs_per_node()
    }
}

/// P1 element matrices `(mass, stiffness)` for `-(c u_x)_x`.
pub fn wave_element(h: f64, c: f64) -> ([[f64; 2]; 2], [[f64; 2]; 2]) {
    let m = h / 6.0;
    let k = c / h;
    ([[2.0 * m, m], [m, 2.0 * m]], [[k, -k], [-k, k]])
}

/// Hermite cubic element matrices `(mass, stiffness)` for `c y_xxxx`, local
/// order `(y_0, y'_0, y_1, y'_1)`.
pub fn beam_element(h: f64, c: f64) -> ([[f64; 4]; 4], [[f64; 4]; 4]) {
    let m = h / 420.0;
    let h2 = h * h;
    let mass = [
        [156.0 * m, 22.0 * h * m, 54.0 * m, -13.0 * h * m],
        [22.0 * h * m, 4.0 * h2 * m, 13.0 * h * m, -3.0 * h2 * m],
        [54.0 * m, 13.0 * h * m, 156.0 * m, -22.0 * h * m],
        [-13.0 * h * m, -3.0 * h2 * m, -22.0 * h * m, 4.0 * h2 * m],
    ];
    let k = c / (h2 * h);
    let stiffness = [
        [12.0 * k, 6.0 * h * k, -12.0 * k, 6.0 * h * k],
        [6.0 * h * k, 4.0 * h2 * k, -6.0 * h * k, 2.0 * h2 * k],
        [-12.0 * k, -6.0 * h * k, 12.0 * k, -6.0 * h * k],
        [6.0 * h * k, 2.0 * h2 * k, -6.0 * h * k, 4.0 * h2 * k],
    ];
    (mass, stiffness)
}

/// Second derivative of the Hermite basis at local coordinate `s ∈ [0, 1]`.
pub fn beam_curvature_row(h: f64, s: f64) -> [f64; 4] {
    [
        (12.0 * s - 6.0) / (h * h),
        (6.0 * s - 4.0) / h,
        (6.0 - 12.0 * s) / (h * h),
        (6.0 * s - 2.0) / h,
    ]
}

/// Hermite basis values at local coordinate `s ∈ [0, 1]`.
pub fn beam_shape(h: f64, s: f64) -> [f64; 4] {
    let (s2, s3) = (s * s, s * s * s);
    [
        1.0 - 3.0 * s2 + 2.0 * s3,
        h * (s - 2.0 * s2 + s3),
        3.0 * s2 - 2.0 * s3,
        h * (s3 - s2),
    ]
}

fn check_nodes(nodes: &[f64], c: f64) -> Result<()> {
    if nodes.len() < 2 {
        return Err(Error::assembly("a field needs at least one element"));
    }
    if !nodes.windows(2).all(|w| w[1] > w[0]) {
        return Err(Error::assembly("element lengths must be positive"));
    }
    if !(c > 0.0) {
        return Err(Error::assembly(format!(
            "stiffness coefficient must be positive, got {c}"
        )));
    }
    Ok(())
}

pub fn assemble_wave_block(nodes: &[f64], coefficient: f64) -> Result<FieldBlock> {
    check_nodes(nodes, coefficient)?;
    let n = nodes.len();
    let mut mass = BandMatrix::zeros(n, 1, 1);
    let mut stiffness = BandMatrix::zeros(n, 1, 1);
    for (e, w) in nodes.windows(2).enumerate() {
        let (me, ke) = wave_element(w[1] - w[0], coefficient);
        for a in 0..2 {
            for b in 0..2 {
                mass.add(e + a, e + b, me[a][b]);
                stiffness.add(e + a, e + b, ke[a][b]);
            }
        }
    }
    Ok(FieldBlock {
        kind: FieldKind::WaveP1,
        coefficient,
        nodes: nodes.to_vec(),
        mass,
        stiffness,
    })
}

pub fn assemble_beam_block(nodes: &[f64], coefficient: f64) -> Result<FieldBlock> {
    check_nodes(nodes, coefficient)?;
    let n = 2 * nodes.len();
    let mut mass = BandMatrix::zeros(n, 3, 3);
    let mut stiffness = BandMatrix::zeros(n, 3, 3);
    for (e, w) in nodes.windows(2).enumerate() {
        let (me, ke) = beam_element(w[1] - w[0], coefficient);
        let base = 2 * e;
        for a in 0..4 {
            for b in 0..4 {
                mass.add(base + a, base + b, me[a][b]);
                stiffness.add(base + a, base + b, ke[a][b]);
            }
        }
    }
    Ok(FieldBlock {
        kind: FieldKind::BeamHermite,
        coefficient,
        nodes: nodes.to_vec(),
        mass,
        stiffness,
    })
}

pub fn assemble_block(kind: FieldKind, nodes: &[f64], coefficient: f64) -> Result<FieldBlock> {
    match kind {
        FieldKind::WaveP1 => assemble_wave_block(nodes, coefficient),
        FieldKind::BeamHermite => assemble_beam_block(nodes, coefficient),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn curvature_row_matches_stiffness() {
        // ∫ c (N_a'')(N_b'') over the element with 2-point Gauss is exact
        let (h, c) = (0.37, 2.5);
        let (_, k) = beam_element(h, c);
        let g = 0.5 / 3f64.sqrt();
        let rows = [beam_curvature_row(h, 0.5 - g), beam_curvature_row(h, 0.5 + g)];
        for a in 0..4 {
            for b in 0..4 {
                let q: f64 = rows.iter().map(|r| c * r[a] * r[b] * h / 2.0).sum();
                assert!((q - k[a][b]).abs() < 1e-9 * k[a][b].abs().max(1.0), "{a}{b}");
            }
        }
    }

    #[test]
    fn shape_functions_interpolate() {
        let h = 0.2;
        assert_eq!(beam_shape(h, 0.0), [1.0, 0.0, 0.0, 0.0]);
        let end = beam_shape(h, 1.0);
        assert!(end[2] == 1.0 && end[0].abs() < 1e-15 && end[1].abs() < 1e-15 && end[3].abs() < 1e-15);
    }

    #[test]
    fn beam_mass_integrates_unity() {
        // sum of value-value mass entries equals the element length
        let (m, _) = beam_element(0.3, 1.0);
        let total = m[0][0] + m[0][2] + m[2][0] + m[2][2];
        assert!((total - 0.3).abs() < 1e-14);
    }

    #[test]
    fn blocks_reject_degenerate_nodes() {
        assert!(assemble_wave_block(&[0.0, 0.0, 1.0], 1.0).is_err());
        assert!(assemble_beam_block(&[0.0], 1.0).is_err());
        assert!(assemble_wave_block(&[0.0, 1.0], 0.0).is_err());
    }
}
