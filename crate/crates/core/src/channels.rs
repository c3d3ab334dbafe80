//! Independent-qubit dephasing, amplitude damping and depolarizing noise.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::states::{pauli_x, pauli_y, pauli_z, CLUSTER_QUBITS};
use crate::tensor::{kron, local_sandwich, qubit_count, ComplexMatrix, DensityMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ChannelKind {
    #[serde(rename = "dephasing")]
    Dephasing,
    #[serde(rename = "amp")]
    AmplitudeDamping,
    #[serde(rename = "depol")]
    Depolarizing,
}

impl ChannelKind {
    pub const ALL: [ChannelKind; 3] = [
        ChannelKind::Dephasing,
        ChannelKind::AmplitudeDamping,
        ChannelKind::Depolarizing,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ChannelKind::Dephasing => "dephasing",
            ChannelKind::AmplitudeDamping => "amp",
            ChannelKind::Depolarizing => "depol",
        }
    }
}

impl fmt::Display for ChannelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ChannelKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dephasing" => Ok(ChannelKind::Dephasing),
            "amp" => Ok(ChannelKind::AmplitudeDamping),
            "depol" => Ok(ChannelKind::Depolarizing),
            other => Err(Error::UnknownChannel(other.to_string())),
        }
    }
}

/// A completely positive trace-preserving map in Kraus form.
///
/// Zero operators (dephasing at `p = 0`, for instance) are kept so that
/// operator counts do not depend on `p`.
#[derive(Debug, Clone)]
pub struct KrausChannel {
    kind: ChannelKind,
    strength: f64,
    qubits: usize,
    operators: Vec<ComplexMatrix>,
}

impl KrausChannel {
    pub fn kind(&self) -> ChannelKind {
        self.kind
    }

    pub fn strength(&self) -> f64 {
        self.strength
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn operators(&self) -> &[ComplexMatrix] {
        &self.operators
    }

    /// `max |Σ K†K − I|`
    pub fn completeness_residual(&self) -> f64 {
        let d = 1 << self.qubits;
        let sum = self
            .operators
            .iter()
            .fold(ComplexMatrix::zeros(d, d), |acc, k| &acc + &(&k.adjoint() * k));
        sum.max_abs_diff(&ComplexMatrix::identity(d))
    }

    /// `Σ vec(K) vec(K)†` with row-major vectorization.
    pub fn choi_matrix(&self) -> ComplexMatrix {
        let d = 1 << self.qubits;
        let mut choi = ComplexMatrix::zeros(d * d, d * d);
        for k in &self.operators {
            let v = k.entries_row_major();
            for a in 0..d * d {
                if v[a].norm_sqr() == 0.0 {
                    continue;
                }
                for b in 0..d * d {
                    choi[(a, b)] += v[a] * v[b].conj();
                }
            }
        }
        choi
    }
}

/// The displayed single-qubit Kraus set for `kind` at strength `p`.
pub fn single_qubit_kraus(kind: ChannelKind, p: f64) -> Result<KrausChannel> {
    if !(0.0..=1.0).contains(&p) || p.is_nan() {
        return Err(Error::StrengthOutOfRange(p));
    }
    let keep = (1.0 - p).sqrt();
    let jump = p.sqrt();
    let operators = match kind {
        ChannelKind::Dephasing => vec![
            ComplexMatrix::from_real_rows([[1.0, 0.0], [0.0, keep]]),
            ComplexMatrix::from_real_rows([[0.0, 0.0], [0.0, jump]]),
        ],
        ChannelKind::AmplitudeDamping => vec![
            ComplexMatrix::from_real_rows([[1.0, 0.0], [0.0, keep]]),
            ComplexMatrix::from_real_rows([[0.0, jump], [0.0, 0.0]]),
        ],
        ChannelKind::Depolarizing => {
            let id = (1.0 - 0.75 * p).sqrt();
            vec![
                ComplexMatrix::identity(2).scale_real(id),
                pauli_x().scale_real(jump / 2.0),
                pauli_y().scale_real(jump / 2.0),
                pauli_z().scale_real(jump / 2.0),
            ]
        }
    };
    Ok(KrausChannel {
        kind,
        strength: p,
        qubits: 1,
        operators,
    })
}

/// All products `K_i ⊗ K_j ⊗ K_k ⊗ K_l`, qubit 1 leftmost, index of qubit 4
/// running fastest.
pub fn lift_to_four_qubits(single: &KrausChannel) -> Result<KrausChannel> {
    if single.qubits != 1 {
        return Err(Error::AlreadyLifted(single.qubits));
    }
    let mut operators = vec![ComplexMatrix::identity(1)];
    for _ in 0..CLUSTER_QUBITS {
        operators = operators
            .iter()
            .flat_map(|acc| single.operators.iter().map(move |k| kron(acc, k)))
            .collect();
    }
    Ok(KrausChannel {
        kind: single.kind,
        strength: single.strength,
        qubits: CLUSTER_QUBITS,
        operators,
    })
}

/// `Σ K ρ K†`
pub fn apply_channel(rho: &DensityMatrix, channel: &KrausChannel) -> Result<DensityMatrix> {
    if rho.qubits() != channel.qubits {
        return Err(Error::DimensionMismatch {
            expected: format!("{}-qubit state", channel.qubits),
            found: format!("{} qubits", rho.qubits()),
        });
    }
    let d = rho.dim();
    let out = channel
        .operators
        .iter()
        .fold(ComplexMatrix::zeros(d, d), |acc, k| {
            &acc + &(&(k * rho.matrix()) * &k.adjoint())
        });
    Ok(DensityMatrix::from_trusted(out))
}

/// Applies a single-qubit channel independently to every qubit of `rho`.
/// Same result as [`apply_channel`] with the lifted channel, at a fraction of
/// the cost.
pub fn apply_independent(rho: &DensityMatrix, single: &KrausChannel) -> Result<DensityMatrix> {
    if single.qubits != 1 {
        return Err(Error::AlreadyLifted(single.qubits));
    }
    let n = qubit_count(rho.matrix())?;
    let d = rho.dim();
    let mut m = rho.matrix().clone();
    for q in 1..=n {
        m = single
            .operators
            .iter()
            .fold(ComplexMatrix::zeros(d, d), |acc, k| {
                &acc + &local_sandwich(&m, k, q)
            });
    }
    Ok(DensityMatrix::from_trusted(m))
}

/// `ρ_4F(α, β, p)`: the cluster after independent noise of strength `p`.
pub fn decohere(rho: &DensityMatrix, kind: ChannelKind, p: f64) -> Result<DensityMatrix> {
    apply_independent(rho, &single_qubit_kraus(kind, p)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{build_cluster, InitialState};
    use crate::tensor::{c, hermitian_eigenvalues, ONE};
    use std::f64::consts::FRAC_PI_4;

    fn grid() -> impl Iterator<Item = f64> {
        (0..=10).map(|k| k as f64 / 10.0)
    }

    fn qubit_state() -> DensityMatrix {
        DensityMatrix::new(ComplexMatrix::from_rows([
            [c(0.6, 0.0), c(0.2, -0.3)],
            [c(0.2, 0.3), c(0.4, 0.0)],
        ]))
        .unwrap()
    }

    #[test]
    fn parses_cli_names() {
        assert_eq!("dephasing".parse::<ChannelKind>(), Ok(ChannelKind::Dephasing));
        assert_eq!("amp".parse::<ChannelKind>(), Ok(ChannelKind::AmplitudeDamping));
        assert_eq!("depol".parse::<ChannelKind>(), Ok(ChannelKind::Depolarizing));
        assert!("Dephasing".parse::<ChannelKind>().is_err());
        assert!("bitflip".parse::<ChannelKind>().is_err());
        for k in ChannelKind::ALL {
            assert_eq!(k.to_string().parse::<ChannelKind>(), Ok(k));
        }
    }

    #[test]
    fn strength_out_of_range() {
        for p in [-0.1, 1.01, f64::NAN] {
            assert!(single_qubit_kraus(ChannelKind::Dephasing, p).is_err());
        }
    }

    #[test]
    fn dephasing_operators() {
        let ch = single_qubit_kraus(ChannelKind::Dephasing, 0.0).unwrap();
        assert_eq!(ch.operators()[0], ComplexMatrix::identity(2));
        assert_eq!(ch.operators()[1], ComplexMatrix::zeros(2, 2));
        let p: f64 = 0.37;
        let ch = single_qubit_kraus(ChannelKind::Dephasing, p).unwrap();
        let k2 = ComplexMatrix::from_real_rows([[0.0, 0.0], [0.0, p.sqrt()]]);
        assert_eq!(ch.operators()[1], k2);
    }

    #[test]
    fn completeness_on_grid() {
        for kind in ChannelKind::ALL {
            for p in grid() {
                let ch = single_qubit_kraus(kind, p).unwrap();
                assert!(ch.completeness_residual() < 1e-12);
            }
        }
    }

    #[test]
    fn operator_counts() {
        let counts = [(ChannelKind::Dephasing, 2, 16), (ChannelKind::AmplitudeDamping, 2, 16), (ChannelKind::Depolarizing, 4, 256)];
        for (kind, one, four) in counts {
            let ch = single_qubit_kraus(kind, 0.3).unwrap();
            assert_eq!(ch.operators().len(), one);
            let lifted = lift_to_four_qubits(&ch).unwrap();
            assert_eq!(lifted.operators().len(), four);
            assert!(lifted.completeness_residual() < 1e-12);
            assert!(matches!(lift_to_four_qubits(&lifted), Err(Error::AlreadyLifted(4))));
        }
    }

    #[test]
    fn full_depolarization_gives_maximally_mixed() {
        let ch = single_qubit_kraus(ChannelKind::Depolarizing, 1.0).unwrap();
        let out = apply_channel(&qubit_state(), &ch).unwrap();
        assert!(out.matrix().max_abs_diff(&ComplexMatrix::identity(2).scale_real(0.5)) < 1e-15);
    }

    #[test]
    fn dephasing_scales_coherences() {
        let rho = qubit_state();
        for p in grid() {
            let ch = single_qubit_kraus(ChannelKind::Dephasing, p).unwrap();
            let out = apply_channel(&rho, &ch).unwrap();
            let f = (1.0 - p).sqrt();
            assert!((out.matrix()[(0, 1)] - rho.matrix()[(0, 1)] * f).norm() < 1e-15);
            assert!((out.matrix()[(1, 0)] - rho.matrix()[(1, 0)] * f).norm() < 1e-15);
            assert!((out.matrix()[(0, 0)] - rho.matrix()[(0, 0)]).norm() < 1e-15);
        }
    }

    #[test]
    fn zero_noise_is_identity() {
        let rho = build_cluster(InitialState::new(0.7, 0.4));
        for kind in ChannelKind::ALL {
            let lifted = lift_to_four_qubits(&single_qubit_kraus(kind, 0.0).unwrap()).unwrap();
            let out = apply_channel(&rho, &lifted).unwrap();
            assert!(out.matrix().max_abs_diff(rho.matrix()) < 1e-15);
        }
    }

    #[test]
    fn full_dephasing_of_plus_cluster_is_flat_diagonal() {
        let rho = build_cluster(InitialState::new(FRAC_PI_4, 0.0));
        let lifted =
            lift_to_four_qubits(&single_qubit_kraus(ChannelKind::Dephasing, 1.0).unwrap()).unwrap();
        let out = apply_channel(&rho, &lifted).unwrap();
        let expect = ComplexMatrix::identity(16).scale_real(1.0 / 16.0);
        assert!(out.matrix().max_abs_diff(&expect) < 1e-15);
    }

    #[test]
    fn independent_application_matches_lifted_sum() {
        let rho = build_cluster(InitialState::new(1.2, 2.2));
        for kind in ChannelKind::ALL {
            for p in [0.0, 0.35, 0.9, 1.0] {
                let single = single_qubit_kraus(kind, p).unwrap();
                let lifted = lift_to_four_qubits(&single).unwrap();
                let a = apply_channel(&rho, &lifted).unwrap();
                let b = apply_independent(&rho, &single).unwrap();
                assert!(a.matrix().max_abs_diff(b.matrix()) < 1e-14, "{kind} {p}");
            }
        }
    }

    #[test]
    fn dimension_mismatch() {
        let single = single_qubit_kraus(ChannelKind::Dephasing, 0.2).unwrap();
        let lifted = lift_to_four_qubits(&single).unwrap();
        assert!(apply_channel(&qubit_state(), &lifted).is_err());
    }

    #[test]
    fn trace_and_positivity_preserved() {
        let mut seed = 17u64;
        let mut next = || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (seed >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..20 {
            let s = InitialState::new(next() * std::f64::consts::PI, next() * 6.28);
            let kind = ChannelKind::ALL[(next() * 3.0) as usize % 3];
            let p = next();
            let out = decohere(&build_cluster(s), kind, p).unwrap();
            assert!((out.matrix().trace() - ONE).norm() < 1e-12);
            assert!(out.matrix().hermitian_residual() < 1e-12);
            assert!(hermitian_eigenvalues(out.matrix()).unwrap()[0] > -1e-10);
        }
    }

    #[test]
    fn lifted_choi_is_positive() {
        for kind in ChannelKind::ALL {
            for p in [0.0, 0.5, 1.0] {
                let lifted = lift_to_four_qubits(&single_qubit_kraus(kind, p).unwrap()).unwrap();
                let choi = lifted.choi_matrix();
                assert!(hermitian_eigenvalues(&choi).unwrap()[0] > -1e-10);
            }
        }
    }

    #[test]
    fn purity_decreases_with_strength() {
        let rho = build_cluster(InitialState::new(FRAC_PI_4, 0.0));
        for kind in [ChannelKind::Dephasing, ChannelKind::Depolarizing] {
            let purities: Vec<f64> =
                grid().map(|p| decohere(&rho, kind, p).unwrap().purity()).collect();
            for w in purities.windows(2) {
                assert!(w[1] <= w[0] + 1e-12);
            }
        }
    }
}
