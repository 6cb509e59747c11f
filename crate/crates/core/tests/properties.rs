use std::sync::Arc;

use cdlab_core::analysis::convolution::{convolve_g_alpha, Kernel};
use cdlab_core::analysis::functions::{PiecewiseAffine, PiecewiseConstant};
use cdlab_core::analysis::gram::{
    alpha_energy_gram, h_half_00_gram, h_half_left_zero_gram, h_half_seminorm_gram, theorem_norm_gram_1d, NormGram,
    Side, Space,
};
use cdlab_core::analysis::hilbert::{derivative_pairing, HilbertTransform};
use cdlab_core::elements::{upwind_shape, Node, Peclet};
use cdlab_core::mesh::uniform_partition;
use cdlab_core::parabolic::{energy_decay_ratio, ParabolicProblem};
use cdlab_core::upwind_basis::exact_upwind_interpolant;
use nalgebra::DVector;
use proptest::prelude::*;

fn log_uniform(lo: f64, hi: f64) -> impl Strategy<Value = f64> {
    (lo.ln()..hi.ln()).prop_map(f64::exp)
}

fn mesh_and_values() -> impl Strategy<Value = (usize, f64, Vec<f64>)> {
    (2usize..16, 0.5f64..3.0).prop_flat_map(|(n, t)| (Just(n), Just(t), prop::collection::vec(-1.0f64..1.0, n + 1)))
}

fn assert_spd(g: &NormGram) -> Result<(), TestCaseError> {
    let scale = g.matrix.amax();
    prop_assert!(g.symmetry_defect() <= 1e-12 * scale, "asymmetric {}", g.symmetry_defect());
    prop_assert!(g.min_eigenvalue() >= -1e-12 * scale, "indefinite {}", g.min_eigenvalue());
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn grams_are_symmetric_semidefinite(n in 2usize..24, t in 0.2f64..4.0, alpha in log_uniform(1e-8, 1.0)) {
        let mesh = uniform_partition(t, n).unwrap();
        for space in [Space::Affine, Space::Upwind { alpha, beta: 1.0 }] {
            assert_spd(&h_half_seminorm_gram(&mesh, space))?;
            assert_spd(&h_half_00_gram(&mesh, space))?;
            assert_spd(&h_half_left_zero_gram(&mesh, space))?;
            assert_spd(&alpha_energy_gram(&mesh, space, alpha))?;
        }
        assert_spd(&theorem_norm_gram_1d(&mesh, alpha, 1.0, Side::Trial))?;
        assert_spd(&theorem_norm_gram_1d(&mesh, alpha, 1.0, Side::Test))?;
    }

    #[test]
    fn hilbert_pairing_is_symmetric_and_nonnegative((n, t, u) in mesh_and_values(), v in prop::collection::vec(-1.0f64..1.0, 17)) {
        let mesh = uniform_partition(t, n).unwrap();
        let mut u = u;
        let mut v = v[..=n].to_vec();
        for w in [&mut u, &mut v] {
            w[0] = 0.0;
            w[n] = 0.0;
        }
        let uv = derivative_pairing(&mesh.vertices, &u, &v);
        let vu = derivative_pairing(&mesh.vertices, &v, &u);
        let uu = derivative_pairing(&mesh.vertices, &u, &u);
        prop_assert!((uv - vu).abs() <= 1e-12 * (1.0 + uu));
        prop_assert!(uu >= -1e-14);
    }

    #[test]
    fn hilbert_transform_is_odd_under_reflection((n, t, u) in mesh_and_values(), x in -1.0f64..2.0) {
        let mesh = uniform_partition(t, n).unwrap();
        let mut u = u;
        u[0] = 0.0;
        u[n] = 0.0;
        let reflected_nodes: Vec<f64> = mesh.vertices.iter().rev().map(|s| t - s).collect();
        let reflected: Vec<f64> = u.iter().rev().copied().collect();
        let h = HilbertTransform::new(&mesh.vertices, &u);
        let hr = HilbertTransform::new(&reflected_nodes, &reflected);
        let x = x * t;
        prop_assert!((hr.eval(t - x) + h.eval(x)).abs() <= 1e-10);
    }

    #[test]
    fn upwind_shapes_partition_unity(p in log_uniform(1e-8, 1e8), s in 0.0f64..=1.0) {
        let sum = upwind_shape(Peclet(p), s, Node::Left) + upwind_shape(Peclet(p), s, Node::Right);
        prop_assert!((sum - 1.0).abs() <= 1e-13);
    }

    #[test]
    fn upwind_interpolant_matches_at_vertices((n, t, vals) in mesh_and_values(), alpha in log_uniform(1e-8, 1.0)) {
        let mesh = uniform_partition(t, n).unwrap();
        let u = PiecewiseAffine::new(mesh.clone(), vals.clone()).unwrap();
        let v = exact_upwind_interpolant(&u, alpha, 1.0).unwrap();
        for (k, &x) in mesh.vertices.iter().enumerate() {
            prop_assert!((v.eval(x) - vals[k]).abs() <= 1e-12);
        }
    }

    #[test]
    fn crank_nicolson_dissipates_energy(n in 4usize..40, steps in 1usize..40, alpha in log_uniform(1e-6, 1.0), u0 in prop::collection::vec(-1.0f64..1.0, 39)) {
        let problem = ParabolicProblem::on_unit_interval(n, alpha, 1.0, Arc::new(|_, _| 0.0)).unwrap();
        let start = DVector::from_column_slice(&u0[..n - 1]);
        let ratio = energy_decay_ratio(&problem, start, steps).unwrap();
        prop_assert!(ratio <= 1.0 + 1e-12, "ratio {ratio}");
    }

    #[test]
    fn smoothing_contracts_l2((n, t, vals) in mesh_and_values(), alpha in log_uniform(1e-6, 10.0), beta in 0.1f64..10.0) {
        let mesh = uniform_partition(t, n).unwrap();
        let u = PiecewiseConstant::new(mesh, vals[..n].to_vec()).unwrap();
        let v = convolve_g_alpha(&u, Kernel::new(alpha, beta).unwrap());
        prop_assert!(v.l2_sq() <= u.l2_sq() * (1.0 + 1e-12) + 1e-300);
    }
}
