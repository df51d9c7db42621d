mod common;

use common::{conservative_operator, small_operator, MODELS};
use fkv_core::assembly::ModelKind;
use proptest::prelude::*;

fn model() -> impl Strategy<Value = ModelKind> {
    prop::sample::select(MODELS.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generator_is_dissipative_with_the_exact_identity(
        kind in model(),
        alpha in prop::sample::select(vec![0.3, 0.5, 0.9]),
        eta in 0.1f64..10.0,
        seed in any::<u64>(),
    ) {
        let op = small_operator(kind, 8, 12, alpha, eta);
        let x = op.state_from_flat(common::random_state(&op, seed)).unwrap();
        let form = op.dissipation_form(&x).unwrap();
        let norm2 = op.norm(x.as_slice()).powi(2);
        prop_assert!(form <= 1e-12 * norm2, "Re<AX,X> = {form}, |X|^2 = {norm2}");
        let identity = op.dissipation(&x).unwrap();
        prop_assert!((form + identity).abs() <= 1e-10 * norm2.max(identity));
    }

    #[test]
    fn energy_is_half_the_mass_form(kind in model(), seed in any::<u64>()) {
        let op = small_operator(kind, 4, 6, 0.5, 1.0);
        let x = op.state_from_flat(common::random_state(&op, seed)).unwrap();
        let mx = op.mass_times(&x).unwrap();
        let half: f64 = 0.5 * mx.as_slice().iter().zip(x.as_slice()).map(|(a, b)| a * b).sum::<f64>();
        let e = op.energy(&x).unwrap();
        prop_assert!((e - half).abs() <= 1e-13 * e);
    }
}

#[test]
fn undamped_generator_is_skew_in_the_energy_inner_product() {
    for kind in MODELS {
        let op = conservative_operator(kind, 8);
        let a = op.dense_generator();
        let sym = &a + a.transpose();
        assert!(sym.amax() < 1e-10 * a.amax(), "{kind:?}: |A + A^T| = {}", sym.amax());
    }
}

#[test]
fn omega_couples_only_through_the_velocity() {
    let op = small_operator(ModelKind::WW, 8, 6, 0.5, 1.0);
    let a = op.dense_generator();
    let start = 2 * op.n_q();
    for i in start..op.dim() {
        for j in start..op.dim() {
            if i != j {
                assert_eq!(a[(i, j)], 0.0);
            }
        }
        for j in 0..op.n_q() {
            assert_eq!(a[(i, j)], 0.0, "omega row {i} sees displacement {j}");
        }
    }
}
