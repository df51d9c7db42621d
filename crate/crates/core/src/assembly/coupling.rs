use super::element::{assemble_block, beam_curvature_row, FieldBlock};
use super::{FieldKind, JunctionCondition, ModelKind, ModelSpec, SpatialMesh};
use crate::banded::BandMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    /// `(-L, 0)`
    Left,
    /// `(0, L)`, the damped side
    Right,
}

/// A field block with its clamped unknowns removed.
#[derive(Debug, Clone)]
pub struct ConstrainedBlock {
    pub side: Side,
    pub block: FieldBlock,
    /// Local unknowns that survive, increasing.
    pub retained: Vec<usize>,
    pub mass: BandMatrix<f64>,
    pub stiffness: BandMatrix<f64>,
}

/// Local unknowns fixed to zero by the essential conditions of `spec` on `side`.
pub fn clamped_dofs(spec: &ModelSpec, side: Side, kind: FieldKind, nodes: usize) -> Vec<usize> {
    let last = nodes - 1;
    let mut out = match (side, kind) {
        (Side::Left, FieldKind::WaveP1) => vec![0],
        (Side::Left, FieldKind::BeamHermite) => vec![0, 1],
        (Side::Right, FieldKind::WaveP1) => vec![last],
        (Side::Right, FieldKind::BeamHermite) if spec.kind == ModelKind::Ebb => vec![0, 1],
        (Side::Right, FieldKind::BeamHermite) => vec![2 * last, 2 * last + 1],
    };
    if side == Side::Left && spec.kind == ModelKind::EbbW && spec.junction == JunctionCondition::ZeroRotation {
        out.push(2 * last + 1);
    }
    out
}

/// Removes the clamped unknowns of one field. The natural junction and
/// free-end conditions need no action.
pub fn apply_boundary_conditions(spec: &ModelSpec, side: Side, block: FieldBlock) -> Result<ConstrainedBlock> {
    let expected = match side {
        Side::Left => spec.kind.left_field(),
        Side::Right => Some(spec.kind.right_field()),
    };
    if expected != Some(block.kind) {
        return Err(Error::assembly(format!(
            "{:?} element family does not match the {:?} side of {}",
            block.kind, side, spec.kind
        )));
    }
    let clamped = clamped_dofs(spec, side, block.kind, block.nodes.len());
    let retained: Vec<usize> = (0..block.dim()).filter(|i| !clamped.contains(i)).collect();
    let restrict = |m: &BandMatrix<f64>| {
        let w = m.lower_bandwidth();
        let mut out = BandMatrix::zeros(retained.len(), w, w);
        for (a, &i) in retained.iter().enumerate() {
            for (b, &j) in retained.iter().enumerate().skip(a.saturating_sub(w)).take(2 * w + 1) {
                if i.abs_diff(j) <= w {
                    out.add(a, b, m.get(i, j));
                }
            }
        }
        out
    };
    Ok(ConstrainedBlock {
        side,
        mass: restrict(&block.mass),
        stiffness: restrict(&block.stiffness),
        retained,
        block,
    })
}

/// Placement of one field's unknowns in the global vector.
#[derive(Debug, Clone)]
pub struct FieldLayout {
    pub kind: FieldKind,
    pub name: &'static str,
    pub coefficient: f64,
    pub nodes: Vec<f64>,
    /// Local unknown → global index, `None` when clamped.
    pub map: Vec<Option<usize>>,
}

impl FieldLayout {
    pub fn dofs_per_node(&self) -> usize {
        self.kind.dofs_per_node()
    }

    /// Global index of component `c` (0 value, 1 slope) at `node`.
    pub fn global(&self, node: usize, c: usize) -> Option<usize> {
        self.map[node * self.dofs_per_node() + c]
    }
}

/// Reduced global stiffness and mass with the interface value shared by the
/// two fields.
#[derive(Debug, Clone)]
pub struct CoupledSystem {
    pub kind: ModelKind,
    pub stiffness: BandMatrix<f64>,
    pub mass: BandMatrix<f64>,
    pub left: Option<FieldLayout>,
    pub right: FieldLayout,
    pub notes: Vec<String>,
}

impl CoupledSystem {
    pub fn dim(&self) -> usize {
        self.mass.dim()
    }

    pub fn layout(&self, side: Side) -> Option<&FieldLayout> {
        match side {
            Side::Left => self.left.as_ref(),
            Side::Right => Some(&self.right),
        }
    }

    /// `(field label, node index)` of every global unknown. Slopes carry an
    /// `_x` suffix; the shared interface value is labelled with the damped field.
    pub fn dof_labels(&self) -> Vec<(String, usize)> {
        let mut labels = vec![(String::new(), 0); self.dim()];
        for layout in self.left.iter().chain(std::iter::once(&self.right)) {
            let dpn = layout.dofs_per_node();
            for (local, g) in layout.map.iter().enumerate() {
                if let Some(g) = *g {
                    let suffix = if local % dpn == 1 { "_x" } else { "" };
                    labels[g] = (format!("{}{suffix}", layout.name), local / dpn);
                }
            }
        }
        labels
    }

    /// Global vector interpolating `(value, slope)` profiles on each side.
    /// The shared interface value is taken from the right profile.
    pub fn interpolate<F, G>(&self, left: F, right: G) -> Vec<f64>
    where
        F: Fn(f64) -> (f64, f64),
        G: Fn(f64) -> (f64, f64),
    {
        let mut out = vec![0.0; self.dim()];
        if let Some(layout) = &self.left {
            fill(layout, &left, &mut out);
        }
        fill(&self.right, &right, &mut out);
        out
    }

    /// Values of one field at its nodes (clamped unknowns read as 0).
    pub fn nodal_values(&self, side: Side, q: &[f64]) -> Option<Vec<(f64, f64)>> {
        let layout = self.layout(side)?;
        Some(
            layout
                .nodes
                .iter()
                .enumerate()
                .map(|(i, &x)| (x, layout.global(i, 0).map_or(0.0, |g| q[g])))
                .collect(),
        )
    }
}

fn fill(layout: &FieldLayout, f: &dyn Fn(f64) -> (f64, f64), out: &mut [f64]) {
    let dpn = layout.dofs_per_node();
    for (i, &x) in layout.nodes.iter().enumerate() {
        let (v, s) = f(x);
        for (c, val) in [v, s].into_iter().enumerate().take(dpn) {
            if let Some(g) = layout.global(i, c) {
                out[g] = val;
            }
        }
    }
}

/// Numbers the unknowns from left to right, identifies the two interface
/// displacements and scatters both blocks into the global matrices. The flux
/// balance at the junction is natural in the weak form.
pub fn couple_transmission(
    spec: &ModelSpec,
    left: Option<ConstrainedBlock>,
    right: ConstrainedBlock,
) -> Result<CoupledSystem> {
    let (left_name, right_name) = spec.kind.field_names();
    let mut notes = Vec::new();
    match (&left, spec.kind.left_field()) {
        (None, Some(_)) => {
            return Err(Error::assembly(format!("{} needs a field on (-L, 0)", spec.kind)));
        }
        (Some(_), None) => {
            return Err(Error::assembly(format!("{} has no field on (-L, 0)", spec.kind)));
        }
        (None, None) => notes.push(format!(
            "{} has a single field; no transmission coupling applied",
            spec.kind
        )),
        _ => {}
    }
    if right.side != Side::Right || left.as_ref().is_some_and(|l| l.side != Side::Left) {
        return Err(Error::assembly("blocks passed on the wrong sides"));
    }

    let local_map = |c: &ConstrainedBlock| {
        let mut m = vec![None; c.block.dim()];
        for (r, &i) in c.retained.iter().enumerate() {
            m[i] = Some(r);
        }
        m
    };
    let mut next = 0usize;
    let mut take = || {
        next += 1;
        next - 1
    };

    let mut left_map = left.as_ref().map(|c| vec![None; c.block.dim()]);
    let mut right_map = vec![None; right.block.dim()];
    let right_local = local_map(&right);
    let right_dpn = right.block.kind.dofs_per_node();

    if let (Some(lc), Some(lm)) = (&left, left_map.as_mut()) {
        let retained = local_map(lc);
        let dpn = lc.block.kind.dofs_per_node();
        let last = lc.block.nodes.len() - 1;
        for node in 0..last {
            for c in 0..dpn {
                let i = node * dpn + c;
                if retained[i].is_some() {
                    lm[i] = Some(take());
                }
            }
        }
        if dpn == 2 && retained[2 * last + 1].is_some() {
            lm[2 * last + 1] = Some(take());
        }
        let value = last * dpn;
        match (retained[value].is_some(), right_local[0].is_some()) {
            (true, true) => {
                let g = take();
                lm[value] = Some(g);
                right_map[0] = Some(g);
            }
            (false, false) => {}
            _ => return Err(Error::assembly("interface displacement clamped on one side only")),
        }
    } else if right_local[0].is_some() {
        right_map[0] = Some(take());
    }
    if right_dpn == 2 && right_local[1].is_some() {
        right_map[1] = Some(take());
    }
    for node in 1..right.block.nodes.len() {
        for c in 0..right_dpn {
            let i = node * right_dpn + c;
            if right_local[i].is_some() {
                right_map[i] = Some(take());
            }
        }
    }
    let n = next;

    // triplets in global numbering, then the band shape they need
    let mut entries: Vec<(usize, usize, f64, f64)> = Vec::new();
    let mut scatter = |c: &ConstrainedBlock, map: &[Option<usize>]| {
        let w = c.mass.lower_bandwidth();
        for (a, &i) in c.retained.iter().enumerate() {
            for (b, &j) in c.retained.iter().enumerate() {
                if a.abs_diff(b) > w {
                    continue;
                }
                let (k, m) = (c.stiffness.get(a, b), c.mass.get(a, b));
                if k != 0.0 || m != 0.0 {
                    entries.push((map[i].unwrap(), map[j].unwrap(), k, m));
                }
            }
        }
    };
    if let (Some(lc), Some(lm)) = (&left, &left_map) {
        scatter(lc, lm);
    }
    scatter(&right, &right_map);
    let width = entries.iter().map(|e| e.0.abs_diff(e.1)).max().unwrap_or(0);
    let mut stiffness = BandMatrix::zeros(n, width, width);
    let mut mass = BandMatrix::zeros(n, width, width);
    for (i, j, k, m) in entries {
        stiffness.add(i, j, k);
        mass.add(i, j, m);
    }

    let layout = |c: &ConstrainedBlock, map: Vec<Option<usize>>, name: &'static str| FieldLayout {
        kind: c.block.kind,
        name,
        coefficient: c.block.coefficient,
        nodes: c.block.nodes.clone(),
        map,
    };
    Ok(CoupledSystem {
        kind: spec.kind,
        stiffness,
        mass,
        left: match (&left, left_map, left_name) {
            (Some(lc), Some(lm), Some(name)) => Some(layout(lc, lm, name)),
            _ => None,
        },
        right: layout(&right, right_map, right_name),
        notes,
    })
}

/// Assembles, constrains and couples both fields of `spec` on `mesh`.
pub fn assemble_system(spec: &ModelSpec, mesh: &SpatialMesh) -> Result<CoupledSystem> {
    spec.validate()?;
    if !mesh.is_fitted(spec.l0, spec.l1) {
        return Err(Error::assembly(format!(
            "mesh is not fitted to the damping interval ({}, {})",
            spec.l0, spec.l1
        )));
    }
    let left = match spec.kind.left_field() {
        Some(kind) => {
            if mesh.left_nodes().is_empty() {
                return Err(Error::assembly(format!("{} needs a mesh on (-L, 0)", spec.kind)));
            }
            let block = assemble_block(kind, mesh.left_nodes(), spec.left_coefficient())?;
            Some(apply_boundary_conditions(spec, Side::Left, block)?)
        }
        None => None,
    };
    let block = assemble_block(spec.kind.right_field(), mesh.right_nodes(), spec.right_coefficient())?;
    let right = apply_boundary_conditions(spec, Side::Right, block)?;
    couple_transmission(spec, left, right)
}

/// `d(x)` on each element of the damped side: `d0` inside `(l0, l1)`, else 0.
pub fn damping_indicator(spec: &ModelSpec, mesh: &SpatialMesh) -> Result<Vec<f64>> {
    if !mesh.is_fitted(spec.l0, spec.l1) {
        return Err(Error::assembly(format!(
            "mesh is not fitted to the damping interval ({}, {})",
            spec.l0, spec.l1
        )));
    }
    Ok(mesh
        .right_nodes()
        .windows(2)
        .map(|w| {
            let mid = 0.5 * (w[0] + w[1]);
            if spec.l0 < mid && mid < spec.l1 {
                spec.d0
            } else {
                0.0
            }
        })
        .collect())
}

/// Quadrature point carrying one copy of the diffusive variable.
///
/// `row` is the strain functional at the point (`u_x` for a wave, `y_xx` for a
/// beam) in global unknowns; `weight` is the quadrature weight in `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct DampedPoint {
    pub x: f64,
    pub weight: f64,
    pub damping: f64,
    pub row: Vec<(usize, f64)>,
}

/// Gauss points of the damped elements: one per P1 element, two per Hermite
/// element, which integrate the damping energy exactly.
pub fn damped_points(spec: &ModelSpec, mesh: &SpatialMesh, system: &CoupledSystem) -> Result<Vec<DampedPoint>> {
    let d = damping_indicator(spec, mesh)?;
    let layout = &system.right;
    let mut out = Vec::new();
    for (e, w) in layout.nodes.windows(2).enumerate() {
        if d[e] == 0.0 {
            continue;
        }
        let h = w[1] - w[0];
        match layout.kind {
            FieldKind::WaveP1 => {
                let row = [(layout.global(e, 0), -1.0 / h), (layout.global(e + 1, 0), 1.0 / h)]
                    .into_iter()
                    .filter_map(|(g, v)| g.map(|g| (g, v)))
                    .collect();
                out.push(DampedPoint {
                    x: 0.5 * (w[0] + w[1]),
                    weight: h,
                    damping: d[e],
                    row,
                });
            }
            FieldKind::BeamHermite => {
                let g = 0.5 / 3f64.sqrt();
                for s in [0.5 - g, 0.5 + g] {
                    let curv = beam_curvature_row(h, s);
                    let globals = [
                        layout.global(e, 0),
                        layout.global(e, 1),
                        layout.global(e + 1, 0),
                        layout.global(e + 1, 1),
                    ];
                    let row = globals
                        .into_iter()
                        .zip(curv)
                        .filter_map(|(g, v)| g.map(|g| (g, v)))
                        .collect();
                    out.push(DampedPoint {
                        x: w[0] + s * h,
                        weight: 0.5 * h,
                        damping: d[e],
                        row,
                    });
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn system(kind: ModelKind, n: usize) -> (ModelSpec, SpatialMesh, CoupledSystem) {
        let spec = ModelSpec::new(kind, 1.3, 0.7, 1.0, 0.25, 0.5, 1.0).unwrap();
        let mesh = SpatialMesh::uniform(&spec, n).unwrap();
        let sys = assemble_system(&spec, &mesh).unwrap();
        (spec, mesh, sys)
    }

    fn min_eig(m: &BandMatrix<f64>) -> f64 {
        m.to_dense().symmetric_eigenvalues().min()
    }

    #[test]
    fn matrices_are_symmetric_positive_definite() {
        for kind in ModelKind::ALL {
            let (_, _, sys) = system(kind, 8);
            let (k, m) = (sys.stiffness.to_dense(), sys.mass.to_dense());
            assert!((&k - k.transpose()).amax() < 1e-10 * k.amax(), "{kind}");
            assert!((&m - m.transpose()).amax() < 1e-14, "{kind}");
            assert!(min_eig(&sys.stiffness) > 0.0, "{kind}");
            assert!(min_eig(&sys.mass) > 0.0, "{kind}");
            assert!(sys.stiffness.lower_bandwidth() <= 3, "{kind}");
        }
    }

    #[test]
    fn unknown_counts() {
        // interior + shared value (+ free slopes)
        assert_eq!(system(ModelKind::WW, 8).2.dim(), 7 + 1 + 7);
        assert_eq!(system(ModelKind::Ebb, 8).2.dim(), 16);
        assert_eq!(system(ModelKind::EbbW, 8).2.dim(), 14 + 2 + 7);
        assert_eq!(system(ModelKind::WEbb, 8).2.dim(), 7 + 2 + 14);
        assert_eq!(system(ModelKind::EbbEbb, 8).2.dim(), 14 + 3 + 14);
        let spec = ModelSpec::standard(ModelKind::EbbW).with_junction(JunctionCondition::ZeroRotation);
        let mesh = SpatialMesh::uniform(&spec, 8).unwrap();
        assert_eq!(assemble_system(&spec, &mesh).unwrap().dim(), 14 + 1 + 7);
    }

    #[test]
    fn clamped_side_without_coupling_is_singular_free() {
        // removing the clamps leaves rigid motions in the kernel of a free block
        let block = assemble_block(FieldKind::BeamHermite, &[0.0, 0.3, 0.7, 1.0], 1.0).unwrap();
        assert!(min_eig(&block.stiffness).abs() < 1e-9);
        let wave = assemble_block(FieldKind::WaveP1, &[0.0, 0.5, 1.0], 2.0).unwrap();
        let k = wave.stiffness.to_dense();
        assert!((k * nalgebra::DVector::from_element(3, 1.0)).amax() < 1e-14);
    }

    #[test]
    fn wave_wave_static_flux_balance() {
        // K q = e_0 reproduces b y_x(0-) - a u_x(0+) = 1 exactly for P1
        let (spec, _, sys) = system(ModelKind::WW, 6);
        let g0 = sys.right.global(0, 0).unwrap();
        let mut rhs = vec![0.0; sys.dim()];
        rhs[g0] = 1.0;
        sys.stiffness.factor().unwrap().solve_in_place(&mut rhs);
        let u1 = sys.right.global(1, 0).map_or(0.0, |g| rhs[g]);
        let left = sys.left.as_ref().unwrap();
        let nl = left.nodes.len();
        let y1 = left.global(nl - 2, 0).map_or(0.0, |g| rhs[g]);
        let h_r = sys.right.nodes[1];
        let h_l = -left.nodes[nl - 2];
        let flux = spec.b * (rhs[g0] - y1) / h_l - spec.a * (u1 - rhs[g0]) / h_r;
        assert!((flux - 1.0).abs() < 1e-12, "{flux}");
    }

    #[test]
    fn beam_beam_static_shear_balance() {
        // point load at the junction: moments vanish there, shears balance
        let (spec, _, sys) = system(ModelKind::EbbEbb, 8);
        let g0 = sys.right.global(0, 0).unwrap();
        let mut q = vec![0.0; sys.dim()];
        q[g0] = 1.0;
        sys.stiffness.factor().unwrap().solve_in_place(&mut q);
        let left = sys.left.as_ref().unwrap();
        let local = |layout: &FieldLayout, e: usize| -> [f64; 4] {
            [
                layout.global(e, 0).map_or(0.0, |g| q[g]),
                layout.global(e, 1).map_or(0.0, |g| q[g]),
                layout.global(e + 1, 0).map_or(0.0, |g| q[g]),
                layout.global(e + 1, 1).map_or(0.0, |g| q[g]),
            ]
        };
        // y''' on an element is constant: (12 y0 + 6h s0 - 12 y1 + 6h s1)/h³
        let third = |d: [f64; 4], h: f64| (12.0 * d[0] + 6.0 * h * d[1] - 12.0 * d[2] + 6.0 * h * d[3]) / h.powi(3);
        let second =
            |d: [f64; 4], h: f64, s: f64| -> f64 { beam_curvature_row(h, s).iter().zip(d).map(|(r, v)| r * v).sum() };
        let nl = left.nodes.len();
        let hl = left.nodes[nl - 1] - left.nodes[nl - 2];
        let hr = sys.right.nodes[1];
        let dl = local(left, nl - 2);
        let dr = local(&sys.right, 0);
        assert!(second(dl, hl, 1.0).abs() < 1e-9);
        assert!(second(dr, hr, 0.0).abs() < 1e-9);
        let jump = spec.b * third(dr, hr) - spec.a * third(dl, hl);
        assert!((jump - 1.0).abs() < 1e-9, "{jump}");
    }

    #[test]
    fn unfitted_mesh_is_an_assembly_error() {
        let spec = ModelSpec::standard(ModelKind::WW);
        let mesh = SpatialMesh::from_nodes(vec![-1.0, -0.5, 0.0], vec![0.0, 0.3, 0.6, 1.0]).unwrap();
        assert!(matches!(assemble_system(&spec, &mesh), Err(Error::Assembly(_))));
        assert!(matches!(damping_indicator(&spec, &mesh), Err(Error::Assembly(_))));
    }

    #[test]
    fn mismatched_blocks_are_rejected() {
        let spec = ModelSpec::standard(ModelKind::WW);
        let beam = assemble_block(FieldKind::BeamHermite, &[0.0, 0.5, 1.0], 1.0).unwrap();
        assert!(apply_boundary_conditions(&spec, Side::Right, beam).is_err());
        let wave = assemble_block(FieldKind::WaveP1, &[0.0, 0.25, 0.5, 1.0], 1.0).unwrap();
        let right = apply_boundary_conditions(&spec, Side::Right, wave).unwrap();
        assert!(couple_transmission(&spec, None, right).is_err());
    }

    #[test]
    fn single_field_coupling_is_a_noop_with_note() {
        let (_, _, sys) = system(ModelKind::Ebb, 5);
        assert!(sys.left.is_none());
        assert_eq!(sys.notes.len(), 1);
    }

    #[test]
    fn damping_energy_is_exact() {
        // Hermite cubics reproduce a cubic, so Σ m d (G q)² = d0 ∫ (y'')²
        let (spec, mesh, sys) = system(ModelKind::WEbb, 16);
        let pts = damped_points(&spec, &mesh, &sys).unwrap();
        let q = sys.interpolate(|_| (0.0, 0.0), |x| (x * (1.0 - x).powi(2), 1.0 - 4.0 * x + 3.0 * x * x));
        let e: f64 = pts
            .iter()
            .map(|p| {
                let s: f64 = p.row.iter().map(|&(g, v)| v * q[g]).sum();
                p.weight * p.damping * s * s
            })
            .sum();
        // ∫_{1/4}^{1/2} (6x - 4)² dx
        assert!((e - 0.8125).abs() < 1e-12, "{e}");
        let w: f64 = pts.iter().map(|p| p.weight).sum();
        assert!((w - (spec.l1 - spec.l0)).abs() < 1e-12);

        let (spec, mesh, sys) = system(ModelKind::WW, 16);
        let pts = damped_points(&spec, &mesh, &sys).unwrap();
        assert_eq!(pts.len(), 4);
        let q = sys.interpolate(|_| (0.0, 0.0), |x| (1.0 - x, -1.0));
        for p in &pts {
            let s: f64 = p.row.iter().map(|&(g, v)| v * q[g]).sum();
            assert!((s + 1.0).abs() < 1e-12);
        }
    }
}
