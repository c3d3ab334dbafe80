//! Input states, the gate set, and the four-qubit linear cluster.

use std::f64::consts::FRAC_1_SQRT_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::{c, cis, kron, ComplexMatrix, DensityMatrix, ONE, ZERO};
use num_complex::Complex64;

/// Number of physical qubits in the cluster.
pub const CLUSTER_QUBITS: usize = 4;

/// Logical input `cos α |0⟩ + e^{iβ} sin α |1⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialState {
    pub alpha: f64,
    pub beta: f64,
}

impl InitialState {
    pub fn new(alpha: f64, beta: f64) -> Self {
        Self { alpha, beta }
    }
}

/// How `Z(φ)` and `X(φ)` are written as matrices. The two forms differ by a
/// global phase only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RotationConvention {
    /// `Z(φ) = diag(1, e^{iφ})`, `X(φ) = H Z(φ) H`.
    Phase,
    /// `Z(φ) = e^{-iφσ_z/2}`, `X(φ) = e^{-iφσ_x/2}`.
    Exponential,
}

impl RotationConvention {
    pub const ALL: [RotationConvention; 2] = [Self::Phase, Self::Exponential];
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate {
    Identity,
    Hadamard,
    PauliX,
    PauliY,
    PauliZ,
    RotZ(f64),
    RotX(f64),
    /// Controlled phase, `diag(1, 1, 1, -1)`.
    Cz,
}

impl Gate {
    pub fn matrix(self, convention: RotationConvention) -> ComplexMatrix {
        match self {
            Gate::Identity => ComplexMatrix::identity(2),
            Gate::Hadamard => hadamard(),
            Gate::PauliX => pauli_x(),
            Gate::PauliY => pauli_y(),
            Gate::PauliZ => pauli_z(),
            Gate::RotZ(phi) => z_rotation(phi, convention),
            Gate::RotX(phi) => x_rotation(phi, convention),
            Gate::Cz => ComplexMatrix::diagonal(&[ONE, ONE, ONE, -ONE]),
        }
    }

    pub fn arity(self) -> usize {
        match self {
            Gate::Cz => 2,
            _ => 1,
        }
    }
}

pub fn hadamard() -> ComplexMatrix {
    let h = FRAC_1_SQRT_2;
    ComplexMatrix::from_real_rows([[h, h], [h, -h]])
}

pub fn pauli_x() -> ComplexMatrix {
    ComplexMatrix::from_real_rows([[0.0, 1.0], [1.0, 0.0]])
}

pub fn pauli_y() -> ComplexMatrix {
    ComplexMatrix::from_rows([[ZERO, c(0.0, -1.0)], [c(0.0, 1.0), ZERO]])
}

pub fn pauli_z() -> ComplexMatrix {
    ComplexMatrix::from_real_rows([[1.0, 0.0], [0.0, -1.0]])
}

pub fn z_rotation(phi: f64, convention: RotationConvention) -> ComplexMatrix {
    match convention {
        RotationConvention::Phase => ComplexMatrix::diagonal(&[ONE, cis(phi)]),
        RotationConvention::Exponential => {
            ComplexMatrix::diagonal(&[cis(-phi / 2.0), cis(phi / 2.0)])
        }
    }
}

pub fn x_rotation(phi: f64, convention: RotationConvention) -> ComplexMatrix {
    match convention {
        RotationConvention::Phase => {
            let h = hadamard();
            &(&h * &z_rotation(phi, convention)) * &h
        }
        RotationConvention::Exponential => {
            let (s, co) = (phi / 2.0).sin_cos();
            ComplexMatrix::from_rows([[c(co, 0.0), c(0.0, -s)], [c(0.0, -s), c(co, 0.0)]])
        }
    }
}

/// Embeds a `k`-qubit gate acting on `qubits` (1-based, in the gate's own
/// factor order) into an `n`-qubit operator.
pub fn embed(gate: &ComplexMatrix, qubits: &[usize], n: usize) -> Result<ComplexMatrix> {
    let k = qubits.len();
    if gate.rows() != 1 << k || !gate.is_square() {
        return Err(Error::DimensionMismatch {
            expected: format!("{0}x{0} gate for {k} qubits", 1 << k),
            found: format!("{}x{}", gate.rows(), gate.cols()),
        });
    }
    let mut mask = 0usize;
    for &q in qubits {
        let bit = if q >= 1 && q <= n { 1 << (n - q) } else { 0 };
        if bit == 0 || mask & bit != 0 {
            return Err(Error::InvalidQubitSet {
                subset: qubits.to_vec(),
                qubits: n,
                reason: "qubit index out of range or repeated",
            });
        }
        mask |= bit;
    }
    let local = |index: usize| -> usize {
        qubits
            .iter()
            .fold(0, |acc, &q| (acc << 1) | ((index >> (n - q)) & 1))
    };
    let d = 1 << n;
    Ok(ComplexMatrix::from_fn(d, d, |i, j| {
        if (i & !mask) != (j & !mask) {
            ZERO
        } else {
            gate[(local(i), local(j))]
        }
    }))
}

/// `(cos α, e^{iβ} sin α)`
pub fn psi_in(s: InitialState) -> [Complex64; 2] {
    [c(s.alpha.cos(), 0.0), cis(s.beta) * s.alpha.sin()]
}

pub fn plus_state() -> [Complex64; 2] {
    [c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0)]
}

/// `CZ₃₄ CZ₂₃ CZ₁₂` on four qubits. All factors are diagonal and commute.
pub fn cz_chain() -> ComplexMatrix {
    let d = 1 << CLUSTER_QUBITS;
    let bit = |i: usize, q: usize| (i >> (CLUSTER_QUBITS - q)) & 1;
    let diag: Vec<Complex64> = (0..d)
        .map(|i| {
            let flips = (1..CLUSTER_QUBITS)
                .filter(|&q| bit(i, q) == 1 && bit(i, q + 1) == 1)
                .count();
            if flips % 2 == 1 {
                -ONE
            } else {
                ONE
            }
        })
        .collect();
    ComplexMatrix::diagonal(&diag)
}

/// `|ψ_4I⟩ = CZ₃₄ CZ₂₃ CZ₁₂ (|ψ_in⟩ ⊗ |+⟩⊗³)`
pub fn cluster_vector(s: InitialState) -> Vec<Complex64> {
    let psi = ComplexMatrix::column(&psi_in(s));
    let plus = ComplexMatrix::column(&plus_state());
    let product = kron(&kron(&kron(&psi, &plus), &plus), &plus);
    let v = &cz_chain() * &product;
    v.entries_row_major()
}

/// `ρ_4I(α, β)`
pub fn build_cluster(s: InitialState) -> DensityMatrix {
    DensityMatrix::pure(&cluster_vector(s)).expect("unit-norm cluster vector")
}

/// Cluster built from an arbitrary (possibly mixed) single-qubit input.
pub fn cluster_from_input(rho_in: &DensityMatrix) -> Result<DensityMatrix> {
    if rho_in.qubits() != 1 {
        return Err(Error::DimensionMismatch {
            expected: "1-qubit input state".into(),
            found: format!("{} qubits", rho_in.qubits()),
        });
    }
    let plus = DensityMatrix::pure(&plus_state())?;
    let product = rho_in.tensor(&plus).tensor(&plus).tensor(&plus);
    product.conjugate_by(&cz_chain())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{kron_all, hermitian_eigenvalues};
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    const CONV: RotationConvention = RotationConvention::Phase;

    fn is_unitary(u: &ComplexMatrix) -> bool {
        let n = u.rows();
        (&(u * &u.adjoint())).max_abs_diff(&ComplexMatrix::identity(n)) < 1e-12
    }

    #[test]
    fn psi_in_definition() {
        let s = FRAC_1_SQRT_2;
        let v = psi_in(InitialState::new(0.0, 1.3));
        assert_eq!(v, [ONE, ZERO]);
        let v = psi_in(InitialState::new(FRAC_PI_2, 0.0));
        assert!((v[0].norm()) < 1e-16 && (v[1] - ONE).norm() < 1e-16);
        let v = psi_in(InitialState::new(FRAC_PI_4, FRAC_PI_2));
        assert!((v[0] - c(s, 0.0)).norm() < 1e-15);
        assert!((v[1] - c(0.0, s)).norm() < 1e-15);
    }

    #[test]
    fn gates_are_unitary() {
        for conv in RotationConvention::ALL {
            for g in [
                Gate::Identity,
                Gate::Hadamard,
                Gate::PauliX,
                Gate::PauliY,
                Gate::PauliZ,
                Gate::RotZ(0.83),
                Gate::RotX(-2.1),
                Gate::Cz,
            ] {
                assert!(is_unitary(&g.matrix(conv)), "{g:?} {conv:?}");
            }
        }
    }

    #[test]
    fn zero_rotation_and_hadamard_involution() {
        assert!(z_rotation(0.0, CONV).max_abs_diff(&ComplexMatrix::identity(2)) < 1e-16);
        let h = hadamard();
        assert!((&h * &h).max_abs_diff(&ComplexMatrix::identity(2)) < 1e-15);
    }

    #[test]
    fn conventions_differ_by_global_phase() {
        for phi in [0.3, 1.7, -2.2] {
            for (a, b) in [
                (z_rotation(phi, RotationConvention::Phase), z_rotation(phi, RotationConvention::Exponential)),
                (x_rotation(phi, RotationConvention::Phase), x_rotation(phi, RotationConvention::Exponential)),
            ] {
                let ratio = a[(0, 0)] / b[(0, 0)];
                assert!((ratio.norm() - 1.0).abs() < 1e-14);
                assert!(a.max_abs_diff(&b.scale(ratio)) < 1e-14);
            }
        }
    }

    #[test]
    fn cz_is_symmetric_under_swap() {
        let cz = Gate::Cz.matrix(CONV);
        let a = embed(&cz, &[1, 3], 3).unwrap();
        let b = embed(&cz, &[3, 1], 3).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-16);
    }

    #[test]
    fn embed_rejects_bad_indices() {
        let h = hadamard();
        assert!(embed(&h, &[5], 4).is_err());
        assert!(embed(&h, &[0], 4).is_err());
        assert!(embed(&Gate::Cz.matrix(CONV), &[2, 2], 4).is_err());
        assert!(embed(&h, &[1, 2], 4).is_err());
    }

    #[test]
    fn embed_single_qubit_matches_kron() {
        let h = hadamard();
        let i2 = ComplexMatrix::identity(2);
        let e = embed(&h, &[2], 3).unwrap();
        assert!(e.max_abs_diff(&kron_all([&i2, &h, &i2])) < 1e-16);
    }

    #[test]
    fn cz_twice_restores_plus_product() {
        let plus = ComplexMatrix::column(&plus_state());
        let state = kron_all([&plus, &plus, &plus, &plus]);
        let cz12 = embed(&Gate::Cz.matrix(CONV), &[1, 2], 4).unwrap();
        let twice = &cz12 * &(&cz12 * &state);
        assert!(twice.max_abs_diff(&state) < 1e-15);
    }

    #[test]
    fn cluster_is_pure() {
        for (a, b) in [(0.0, 0.0), (0.4, 1.1), (FRAC_PI_4, 0.0), (2.9, 5.0)] {
            let rho = build_cluster(InitialState::new(a, b));
            assert!((rho.purity() - 1.0).abs() < 1e-12);
            assert!((rho.matrix().trace() - ONE).norm() < 1e-12);
        }
    }

    #[test]
    fn cluster_stabilizers() {
        // ⟨X₁Z₂⟩ = ⟨Z₁X₂Z₃⟩ = ⟨Z₂X₃Z₄⟩ = ⟨Z₃X₄⟩ = 1 for |ψ_in⟩ = |+⟩
        let rho = build_cluster(InitialState::new(FRAC_PI_4, 0.0));
        let (x, z, i) = (pauli_x(), pauli_z(), ComplexMatrix::identity(2));
        let stabs = [
            kron_all([&x, &z, &i, &i]),
            kron_all([&z, &x, &z, &i]),
            kron_all([&i, &z, &x, &z]),
            kron_all([&i, &i, &z, &x]),
        ];
        for s in &stabs {
            // oracle: ⟨ψ|S|ψ⟩ on the raw vector
            let v = cluster_vector(InitialState::new(FRAC_PI_4, 0.0));
            let sv = s * &ComplexMatrix::column(&v);
            let direct: Complex64 = v
                .iter()
                .zip(sv.entries_row_major())
                .map(|(a, b)| a.conj() * b)
                .sum();
            assert!((direct - ONE).norm() < 1e-12);
            assert!((rho.expectation(s) - ONE).norm() < 1e-12);
        }
    }

    #[test]
    fn cluster_overlap_with_zero_input() {
        let a = build_cluster(InitialState::new(FRAC_PI_4, 0.0));
        let b = build_cluster(InitialState::new(0.0, 0.0));
        assert!((a.overlap(&b) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn cz_order_does_not_matter() {
        let cz = Gate::Cz.matrix(CONV);
        let cz12 = embed(&cz, &[1, 2], 4).unwrap();
        let cz23 = embed(&cz, &[2, 3], 4).unwrap();
        let cz34 = embed(&cz, &[3, 4], 4).unwrap();
        let forward = &(&cz34 * &cz23) * &cz12;
        let backward = &(&cz12 * &cz23) * &cz34;
        assert!(forward.max_abs_diff(&cz_chain()) < 1e-16);
        assert!(backward.max_abs_diff(&cz_chain()) < 1e-16);
    }

    #[test]
    fn plus_input_cluster_has_flat_magnitudes() {
        let rho = build_cluster(InitialState::new(FRAC_PI_4, 0.0));
        let m = rho.matrix();
        for i in 0..16 {
            for j in 0..16 {
                assert!((m[(i, j)].norm() - 1.0 / 16.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn cluster_from_pure_input_matches_vector_construction() {
        let s = InitialState::new(1.1, 2.5);
        let rho_in = DensityMatrix::pure(&psi_in(s)).unwrap();
        let a = cluster_from_input(&rho_in).unwrap();
        assert!(a.matrix().max_abs_diff(build_cluster(s).matrix()) < 1e-14);
        let vals = hermitian_eigenvalues(a.matrix()).unwrap();
        assert!(vals[0] > -1e-12);
        assert!(cluster_from_input(&a).is_err());
    }

    #[test]
    fn full_turn_rotation_is_global_phase() {
        let z = z_rotation(2.0 * PI, RotationConvention::Exponential);
        assert!(z.max_abs_diff(&ComplexMatrix::identity(2).scale_real(-1.0)) < 1e-14);
    }
}
