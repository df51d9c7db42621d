mod common;

use std::f64::consts::PI;
use std::num::NonZeroUsize;

use approx::assert_relative_eq;
use fkv_core::assembly::{
    assemble_beam_block, assemble_system, assemble_wave_block, clamped_dofs, damping_indicator, FieldKind, ModelKind,
    ModelSpec, Side, SpatialMesh,
};
use gauss_quad::GaussLegendre;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_nodes(rng: &mut ChaCha8Rng, n: usize, a: f64, b: f64) -> Vec<f64> {
    let mut cuts: Vec<f64> = (0..n - 1).map(|_| rng.random_range(0.05..1.0)).collect();
    cuts.insert(0, 0.0);
    let mut acc = 0.0;
    let mut nodes: Vec<f64> = cuts
        .iter()
        .map(|c| {
            acc += c;
            acc
        })
        .collect();
    nodes.push(acc + rng.random_range(0.05..1.0));
    let span = nodes.last().unwrap() - nodes[0];
    nodes.iter().map(|x| a + (b - a) * (x - nodes[0]) / span).collect()
}

#[test]
fn two_p1_elements_give_the_textbook_stiffness() {
    let h = 0.5;
    let block = assemble_wave_block(&[0.0, 0.5, 1.0], 1.0).unwrap();
    let k = block.stiffness.to_dense();
    let expected = DMatrix::from_row_slice(3, 3, &[1.0, -1.0, 0.0, -1.0, 2.0, -1.0, 0.0, -1.0, 1.0]) / h;
    assert_relative_eq!(k, expected, epsilon = 1e-14);
    let ones = nalgebra::DVector::from_element(3, 1.0);
    assert!((k * ones).amax() < 1e-14);
}

#[test]
fn p1_form_is_the_exact_gradient_energy_on_random_meshes() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let nodes = random_nodes(&mut rng, 9, -1.0, 2.0);
        let c = rng.random_range(0.5..3.0);
        let block = assemble_wave_block(&nodes, c).unwrap();
        let u: Vec<f64> = (0..nodes.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let exact: f64 = nodes
            .windows(2)
            .zip(u.windows(2))
            .map(|(x, v)| c * (v[1] - v[0]).powi(2) / (x[1] - x[0]))
            .sum();
        assert_relative_eq!(block.stiffness.quad_form(&u), exact, max_relative = 1e-13);
    }
}

/// Second derivatives of the Hermite cubics on `[0, h]` at `x`.
fn hermite_second(h: f64, x: f64) -> [f64; 4] {
    let s = x / h;
    [
        (-6.0 + 12.0 * s) / (h * h),
        (-4.0 + 6.0 * s) / h,
        (6.0 - 12.0 * s) / (h * h),
        (-2.0 + 6.0 * s) / h,
    ]
}

#[test]
fn hermite_element_matches_gauss_integrated_bending() {
    let rule = GaussLegendre::new(NonZeroUsize::new(4).unwrap());
    for (h, b) in [(1.0, 1.0), (0.3, 2.5), (2.0, 0.7)] {
        let block = assemble_beam_block(&[0.0, h], b).unwrap();
        let k = block.stiffness.to_dense();
        for i in 0..4 {
            for j in 0..4 {
                let oracle = rule.integrate(0.0, h, |x| b * hermite_second(h, x)[i] * hermite_second(h, x)[j]);
                assert_relative_eq!(k[(i, j)], oracle, epsilon = 1e-12 * b / h.powi(3));
            }
        }
        let scale = b / h.powi(3);
        assert_relative_eq!(k[(0, 0)], 12.0 * scale, max_relative = 1e-14);
        assert_relative_eq!(k[(0, 1)], 6.0 * h * scale, max_relative = 1e-14);
        assert_relative_eq!(k[(0, 2)], -12.0 * scale, max_relative = 1e-14);
        assert_relative_eq!(k[(0, 3)], 6.0 * h * scale, max_relative = 1e-14);
    }
}

#[test]
fn beam_form_is_exact_on_cubics_and_vanishes_on_affine_fields() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let nodes = random_nodes(&mut rng, 7, 0.0, 1.5);
    let b = 1.7;
    let block = assemble_beam_block(&nodes, b).unwrap();
    let (c0, c1, c2, c3) = (0.3, -1.2, 0.8, 2.0);
    let cubic: Vec<f64> = nodes
        .iter()
        .flat_map(|&x| {
            [
                c0 + c1 * x + c2 * x * x + c3 * x.powi(3),
                c1 + 2.0 * c2 * x + 3.0 * c3 * x * x,
            ]
        })
        .collect();
    let rule = GaussLegendre::new(NonZeroUsize::new(3).unwrap());
    let exact = rule.integrate(0.0, 1.5, |x| b * (2.0 * c2 + 6.0 * c3 * x).powi(2));
    assert_relative_eq!(block.stiffness.quad_form(&cubic), exact, max_relative = 1e-12);

    let affine: Vec<f64> = nodes.iter().flat_map(|&x| [c0 + c1 * x, c1]).collect();
    let scale = block.stiffness.to_dense().amax() * affine.iter().map(|v| v * v).sum::<f64>();
    let residual = block.stiffness.quad_form(&affine).abs();
    assert!(residual < 1e-13 * scale, "{residual} vs {scale}");
}

#[test]
fn damping_covers_exactly_the_fitted_interval() {
    for kind in common::MODELS {
        let spec = ModelSpec::new(kind, 1.0, 1.0, 2.0, 0.5, 1.0, 3.0).unwrap();
        let mesh = SpatialMesh::uniform(&spec, 16).unwrap();
        let d = damping_indicator(&spec, &mesh).unwrap();
        let integral: f64 = d
            .iter()
            .zip(mesh.right_nodes().windows(2))
            .map(|(d, w)| d * (w[1] - w[0]))
            .sum();
        assert_relative_eq!(integral, 3.0 * 0.5, max_relative = 1e-14);
        assert!(d.iter().all(|&v| v == 0.0 || v == 3.0));
    }
}

#[test]
fn clamps_follow_the_boundary_conditions() {
    let ebb = ModelSpec::standard(ModelKind::Ebb);
    assert_eq!(clamped_dofs(&ebb, Side::Right, FieldKind::BeamHermite, 5), vec![0, 1]);
    let ww = ModelSpec::standard(ModelKind::WW);
    assert_eq!(clamped_dofs(&ww, Side::Left, FieldKind::WaveP1, 5), vec![0]);
    assert_eq!(clamped_dofs(&ww, Side::Right, FieldKind::WaveP1, 5), vec![4]);
    // WW on 8+8 elements: 17 nodes, one shared, two clamped
    let system = assemble_system(&ww, &SpatialMesh::uniform(&ww, 8).unwrap()).unwrap();
    assert_eq!(system.dim(), 15);
}

/// Half the elastic energy of the interpolant, which converges to the exact value.
fn interpolated_energy(kind: ModelKind, n: usize) -> f64 {
    let spec = ModelSpec::standard(kind);
    let mesh = SpatialMesh::uniform(&spec, n).unwrap();
    let system = assemble_system(&spec, &mesh).unwrap();
    let q = match kind {
        ModelKind::WW => {
            let f = |x: f64| ((PI * x / 2.0).cos(), -(PI / 2.0) * (PI * x / 2.0).sin());
            system.interpolate(f, f)
        }
        ModelKind::Ebb => system.interpolate(|_| (0.0, 0.0), |x: f64| (x.sin() - x, x.cos() - 1.0)),
        _ => unreachable!(),
    };
    0.5 * system.stiffness.quad_form(&q)
}

#[test]
fn interpolated_energy_converges_at_second_order() {
    // cos(πx/2) on (-1, 1): ½∫(π/2)² sin² = π²/8
    let ww_exact = PI * PI / 8.0;
    // sin x − x on (0, 1): ½∫ sin² = (1 − sin 2 / 2) / 4
    let ebb_exact = (1.0 - (2.0f64).sin() / 2.0) / 4.0;
    for (kind, exact) in [(ModelKind::WW, ww_exact), (ModelKind::Ebb, ebb_exact)] {
        let sizes = [8usize, 16, 32];
        let errors: Vec<f64> = sizes
            .iter()
            .map(|&n| (interpolated_energy(kind, n) - exact).abs())
            .collect();
        let hs: Vec<f64> = sizes.iter().map(|&n| 1.0 / n as f64).collect();
        let order = common::log_slope(&hs, &errors);
        assert!(order >= 1.9, "{kind:?}: errors {errors:?}, order {order}");
    }
}
