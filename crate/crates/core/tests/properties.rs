use clustersim::channels::{decohere, single_qubit_kraus, ChannelKind};
use clustersim::entanglement::{negativity, witness_expectation};
use clustersim::logical::{euler_unitary, reconstruct_superoperator, RotationSpec};
use clustersim::states::{build_cluster, psi_in, InitialState, RotationConvention};
use clustersim::tensor::{
    c, hermitian_eigenvalues, kron_all, partial_transpose, unvec_row_major, vec_row_major, ComplexMatrix,
    DensityMatrix,
};
use num_complex::Complex64;
use proptest::prelude::*;

const SUBSETS: [&[usize]; 7] = [&[1], &[2], &[3], &[4], &[1, 2], &[1, 3], &[1, 4]];

fn angle() -> impl Strategy<Value = f64> {
    0.0..std::f64::consts::TAU
}

fn kind() -> impl Strategy<Value = ChannelKind> {
    prop::sample::select(ChannelKind::ALL.to_vec())
}

fn matrix(n: usize) -> impl Strategy<Value = ComplexMatrix> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), n * n).prop_map(move |v| {
        let entries: Vec<Complex64> = v.into_iter().map(|(a, b)| c(a, b)).collect();
        ComplexMatrix::from_row_slice(n, n, &entries)
    })
}

fn local_unitary() -> impl Strategy<Value = ComplexMatrix> {
    (angle(), angle(), angle())
        .prop_map(|(a, b, g)| euler_unitary(&RotationSpec::new(a, b, g), RotationConvention::Exponential))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn vec_unvec_round_trip(m in matrix(4)) {
        let back = unvec_row_major(&vec_row_major(&m)).unwrap();
        prop_assert_eq!(back, m);
    }

    #[test]
    fn partial_transpose_is_an_involution(m in matrix(16), which in 0usize..7) {
        let sub = SUBSETS[which];
        let twice = partial_transpose(&partial_transpose(&m, sub).unwrap(), sub).unwrap();
        prop_assert!(twice.max_abs_diff(&m) < 1e-15);
    }

    #[test]
    fn complementary_partial_transposes_share_a_spectrum(alpha in angle(), beta in angle(), k in kind(), p in 0.0..1.0f64) {
        let rho = decohere(&build_cluster(InitialState::new(alpha, beta)), k, p).unwrap();
        let a = hermitian_eigenvalues(&rho.partial_transpose(&[1, 2]).unwrap()).unwrap();
        let b = hermitian_eigenvalues(&rho.partial_transpose(&[3, 4]).unwrap()).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn negativity_is_local_unitary_invariant(
        alpha in angle(), k in kind(), p in 0.0..1.0f64,
        u1 in local_unitary(), u2 in local_unitary(), u3 in local_unitary(), u4 in local_unitary(),
    ) {
        let rho = decohere(&build_cluster(InitialState::new(alpha, 0.0)), k, p).unwrap();
        let rotated = rho.conjugate_by(&kron_all([&u1, &u2, &u3, &u4])).unwrap();
        for sub in SUBSETS {
            let a = negativity(&rho, sub).unwrap().value;
            let b = negativity(&rotated, sub).unwrap().value;
            prop_assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn witness_is_nonnegative_on_product_states(
        a in prop::collection::vec((angle(), angle()), 4), beta in angle(),
    ) {
        let factors: Vec<ComplexMatrix> = a
            .iter()
            .map(|&(x, y)| ComplexMatrix::outer(&psi_in(InitialState::new(x, y))))
            .collect();
        let rho = DensityMatrix::new(kron_all(factors.iter())).unwrap();
        prop_assert!(witness_expectation(&rho, beta).unwrap() >= -1e-12);
    }

    #[test]
    fn decoherence_keeps_states_physical(alpha in angle(), beta in angle(), k in kind(), p in 0.0..=1.0f64) {
        let out = decohere(&build_cluster(InitialState::new(alpha, beta)), k, p).unwrap();
        prop_assert!(DensityMatrix::new(out.matrix().clone()).is_ok());
    }

    #[test]
    fn single_qubit_sets_are_complete(k in kind(), p in 0.0..=1.0f64) {
        prop_assert!(single_qubit_kraus(k, p).unwrap().completeness_residual() < 1e-14);
    }

    #[test]
    fn logical_maps_are_trace_and_hermiticity_preserving(
        k in kind(), p in 0.0..=1.0f64, t1 in angle(), t2 in angle(), t3 in angle(),
    ) {
        let s = reconstruct_superoperator(k, p, RotationSpec::new(t1, t2, t3)).unwrap();
        prop_assert!(s.trace_residual() < 1e-10);
        prop_assert!(s.hermiticity_residual() < 1e-10);
    }
}
