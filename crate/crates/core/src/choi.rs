//! Choi matrix of a one-qubit superoperator and the ranked Kraus operators
//! read off its eigensystem.

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::logical::{ConventionCalibration, Superoperator};
use crate::tensor::{hermitian_eigensystem, unvec_row_major, ComplexMatrix, ZERO};

/// Hilbert-space dimension of the logical qubit.
const N: usize = 2;
/// Eigenvalues closer than this are treated as one degenerate eigenspace.
pub const DEGENERACY_TOL: f64 = 1e-9;
/// Most negative Choi eigenvalue accepted as rounding noise.
pub const CP_TOL: f64 = 1e-8;

/// `C[(i,j),(k,l)] = S[(i,k),(j,l)]`.
pub fn choi_from_superoperator(s: &Superoperator) -> ComplexMatrix {
    choi_from_matrix(&s.matrix)
}

pub fn choi_from_matrix(s: &ComplexMatrix) -> ComplexMatrix {
    assert!(s.rows() == N * N && s.cols() == N * N, "4x4 superoperator expected");
    let idx = |a: usize, b: usize| N * a + b;
    ComplexMatrix::from_fn(N * N, N * N, |row, col| {
        let (i, j) = (row / N, row % N);
        let (k, l) = (col / N, col % N);
        s[(idx(i, k), idx(j, l))]
    })
}

#[derive(Debug, Clone)]
pub struct ChoiDecomposition {
    pub choi: ComplexMatrix,
    /// Descending, clamped at zero.
    pub eigenvalues: Vec<f64>,
    pub kraus: Vec<ComplexMatrix>,
    /// `√(λ_a / 2)`
    pub amplitudes: Vec<f64>,
}

impl ChoiDecomposition {
    pub fn apply(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        self.kraus.iter().fold(ComplexMatrix::zeros(N, N), |acc, k| {
            &acc + &(&(k * rho) * &k.adjoint())
        })
    }

    /// `Σ A_a²`, equal to 1 for a trace-preserving map.
    pub fn amplitude_norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a * a).sum()
    }

    pub fn first(&self) -> &ComplexMatrix {
        &self.kraus[0]
    }
}

#[derive(Serialize)]
struct DecompositionRecord {
    eigenvalues: Vec<f64>,
    amplitudes: Vec<f64>,
    kraus: Vec<Vec<Vec<[f64; 2]>>>,
    choi: Vec<Vec<[f64; 2]>>,
}

impl Serialize for ChoiDecomposition {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        DecompositionRecord {
            eigenvalues: self.eigenvalues.clone(),
            amplitudes: self.amplitudes.clone(),
            kraus: self.kraus.iter().map(ComplexMatrix::to_pairs).collect(),
            choi: self.choi.to_pairs(),
        }
        .serialize(serializer)
    }
}

fn dot(a: &[num_complex::Complex64], b: &[num_complex::Complex64]) -> num_complex::Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Replaces the solver's arbitrary basis of a degenerate eigenspace by the
/// Gram-Schmidt orthonormalization of the projected computational basis.
fn canonical_basis(space: &[Vec<num_complex::Complex64>]) -> Vec<Vec<num_complex::Complex64>> {
    let dim = space[0].len();
    let mut out: Vec<Vec<num_complex::Complex64>> = Vec::with_capacity(space.len());
    for e in 0..dim {
        if out.len() == space.len() {
            break;
        }
        // P e_k = Σ_q q (q† e_k)
        let mut w = vec![ZERO; dim];
        for q in space {
            let coeff = q[e].conj();
            for (wi, qi) in w.iter_mut().zip(q) {
                *wi += qi * coeff;
            }
        }
        for u in &out {
            let proj = dot(u, &w);
            for (wi, ui) in w.iter_mut().zip(u) {
                *wi -= ui * proj;
            }
        }
        let norm = dot(&w, &w).re.sqrt();
        if norm > 1e-6 {
            out.push(w.into_iter().map(|x| x / norm).collect());
        }
    }
    if out.len() == space.len() {
        out
    } else {
        space.to_vec()
    }
}

/// Rotates the global phase of `k` so that `Tr[U†K]` is real and
/// non-negative. When that trace vanishes, the largest entry is made real
/// and positive instead.
fn fix_phase(k: &ComplexMatrix, u: &ComplexMatrix) -> ComplexMatrix {
    let t = u.hs_inner(k);
    if t.norm() > 1e-12 {
        return k.scale(t.conj() / t.norm());
    }
    let entries = k.entries_row_major();
    let max = entries.iter().map(|z| z.norm()).fold(0.0, f64::max);
    match entries.iter().find(|z| z.norm() >= max - 1e-12 && max > 0.0) {
        Some(z) => k.scale(z.conj() / z.norm()),
        None => k.clone(),
    }
}

/// Ranked Kraus operators `K_a = √λ_a · unvec(v_a)`, each phase-fixed
/// against `reference`.
pub fn kraus_from_choi(choi: &ComplexMatrix, reference: &ComplexMatrix) -> Result<ChoiDecomposition> {
    let eig = hermitian_eigensystem(choi)?;
    let d = choi.rows();
    // descending order
    let mut values: Vec<f64> = eig.values.iter().rev().copied().collect();
    let mut vectors: Vec<Vec<num_complex::Complex64>> = (0..d).rev().map(|k| eig.vector(k)).collect();
    if let Some(&min) = values.last() {
        if min < -CP_TOL {
            return Err(Error::NotCompletelyPositive { eigenvalue: min });
        }
    }
    for v in values.iter_mut() {
        *v = v.max(0.0);
    }

    let mut start = 0;
    while start < d {
        let mut end = start + 1;
        while end < d && (values[start] - values[end]).abs() < DEGENERACY_TOL {
            end += 1;
        }
        if end - start > 1 {
            let basis = canonical_basis(&vectors[start..end]);
            vectors.splice(start..end, basis);
        }
        start = end;
    }

    let kraus = values
        .iter()
        .zip(&vectors)
        .map(|(lambda, v)| {
            let k = unvec_row_major(&ComplexMatrix::column(v))?.scale_real(lambda.sqrt());
            Ok(fix_phase(&k, reference))
        })
        .collect::<Result<Vec<_>>>()?;
    let amplitudes = values.iter().map(|l| (l / N as f64).sqrt()).collect();
    Ok(ChoiDecomposition {
        choi: choi.clone(),
        eigenvalues: values,
        kraus,
        amplitudes,
    })
}

/// Decomposes `s`, phase-fixing against the calibrated target unitary of its
/// rotation.
pub fn decompose(s: &Superoperator) -> Result<ChoiDecomposition> {
    let u = ConventionCalibration::SHIPPED.target_unitary(&s.rotation);
    kraus_from_choi(&choi_from_superoperator(s), &u)
}

/// `Tr[U†K₁] / Tr[U†U]`
pub fn first_kraus_fidelity(d: &ChoiDecomposition, u: &ComplexMatrix) -> f64 {
    u.hs_inner(d.first()).re / u.hs_inner(u).re
}

/// `Tr[U†K₁] / √(Tr[U†U] Tr[K₁†K₁])`
pub fn first_kraus_correlation(d: &ChoiDecomposition, u: &ComplexMatrix) -> Result<f64> {
    let k = d.first();
    let kk = k.frobenius_norm_sqr();
    if kk < 1e-24 {
        return Err(Error::ZeroKraus);
    }
    Ok(u.hs_inner(k).re / (u.hs_inner(u).re * kk).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::ChannelKind;
    use crate::logical::{ideal_superoperator, reconstruct_superoperator, RotationSpec};
    use crate::tensor::{c, kron, ONE};
    use std::f64::consts::FRAC_1_SQRT_2;

    fn unit(j: usize, l: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(2, 2, |a, b| if a == j && b == l { ONE } else { ZERO })
    }

    /// `Σ_{jl} S(|j⟩⟨l|) ⊗ |j⟩⟨l|`, the same operator built from the action
    /// rather than by reindexing.
    fn jamiolkowski(s: &Superoperator) -> ComplexMatrix {
        let mut acc = ComplexMatrix::zeros(4, 4);
        for j in 0..2 {
            for l in 0..2 {
                let out = s.apply(&unit(j, l)).unwrap();
                acc = &acc + &kron(&out, &unit(j, l));
            }
        }
        acc
    }

    fn rotations() -> Vec<RotationSpec> {
        crate::logical::HaarRotations::new(21).take(4).collect()
    }

    fn mixed_states() -> Vec<ComplexMatrix> {
        let mut x = 0.37f64;
        (0..20)
            .map(|_| {
                let mut next = || {
                    x = (x * 9.13 + 0.271).fract();
                    x
                };
                let (a, b, cc) = (next() - 0.5, next() - 0.5, next() - 0.5);
                let r = (a * a + b * b + cc * cc).sqrt().max(1.0);
                let (a, b, cc) = (a / r, b / r, cc / r);
                ComplexMatrix::from_rows([[c(0.5 + 0.5 * cc, 0.0), c(0.5 * a, -0.5 * b)], [c(0.5 * a, 0.5 * b), c(0.5 - 0.5 * cc, 0.0)]])
            })
            .collect()
    }

    #[test]
    fn reshuffle_matches_jamiolkowski() {
        for kind in ChannelKind::ALL {
            for r in rotations() {
                let s = reconstruct_superoperator(kind, 0.37, r).unwrap();
                let choi = choi_from_superoperator(&s);
                assert!(choi.max_abs_diff(&jamiolkowski(&s)) < 1e-14);
                assert!(choi.hermitian_residual() < 1e-12);
                assert!((choi.trace() - c(2.0, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn identity_channel() {
        let s = Superoperator {
            matrix: ComplexMatrix::identity(4),
            ..ideal_superoperator(RotationSpec::identity())
        };
        let d = kraus_from_choi(&choi_from_superoperator(&s), &ComplexMatrix::identity(2)).unwrap();
        assert!((d.amplitudes[0] - 1.0).abs() < 1e-12);
        assert!(d.amplitudes[1..].iter().all(|a| *a < 1e-7));
        assert!(d.first().max_abs_diff(&ComplexMatrix::identity(2)) < 1e-12);
        let id = ComplexMatrix::identity(2);
        assert!((first_kraus_fidelity(&d, &id) - 1.0).abs() < 1e-12);
        assert!((first_kraus_correlation(&d, &id).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ideal_rotation_is_a_single_unitary() {
        for r in rotations() {
            let s = ideal_superoperator(r);
            let d = decompose(&s).unwrap();
            let u = ConventionCalibration::SHIPPED.target_unitary(&r);
            assert!(d.first().max_abs_diff(&u) < 1e-10);
            assert!((first_kraus_fidelity(&d, &u) - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn fully_depolarized_logical_channels() {
        for kind in [ChannelKind::Dephasing, ChannelKind::Depolarizing] {
            for r in rotations() {
                let s = reconstruct_superoperator(kind, 1.0, r).unwrap();
                let d = decompose(&s).unwrap();
                for a in &d.amplitudes {
                    assert!((a - 0.5).abs() < 1e-10, "{kind}: {:?}", d.amplitudes);
                }
                for k in &d.kraus {
                    let mags: Vec<f64> = k.entries_row_major().iter().map(|z| z.norm()).collect();
                    assert_eq!(mags.iter().filter(|m| **m > 1e-9).count(), 1);
                    let big = mags.iter().cloned().fold(0.0, f64::max);
                    assert!((big - FRAC_1_SQRT_2).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn kraus_reproduce_action() {
        for kind in ChannelKind::ALL {
            for p in [0.0, 0.2, 0.65, 0.99] {
                for r in rotations() {
                    let s = reconstruct_superoperator(kind, p, r).unwrap();
                    let d = decompose(&s).unwrap();
                    assert!((d.amplitude_norm() - 1.0).abs() < 1e-10);
                    assert!(d.amplitudes.windows(2).all(|w| w[0] >= w[1]));
                    for rho in mixed_states() {
                        let want = s.apply(&rho).unwrap();
                        assert!(d.apply(&rho).max_abs_diff(&want) < 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn phase_convention() {
        let r = RotationSpec::new(0.9, 1.3, 4.1);
        let u = ConventionCalibration::SHIPPED.target_unitary(&r);
        let d = decompose(&reconstruct_superoperator(ChannelKind::AmplitudeDamping, 0.4, r).unwrap()).unwrap();
        for k in &d.kraus {
            let t = u.hs_inner(k);
            assert!(t.im.abs() < 1e-12 && t.re >= -1e-12);
        }
        let f = first_kraus_fidelity(&d, &u);
        assert!((0.0..=1.0).contains(&f));
    }

    #[test]
    fn transpose_map_is_not_cp() {
        // S(ρ) = ρᵀ
        let s = ComplexMatrix::from_fn(4, 4, |row, col| {
            let (i, k) = (row / 2, row % 2);
            let (j, l) = (col / 2, col % 2);
            if i == l && k == j { ONE } else { ZERO }
        });
        let err = kraus_from_choi(&choi_from_matrix(&s), &ComplexMatrix::identity(2)).unwrap_err();
        assert!(matches!(err, Error::NotCompletelyPositive { eigenvalue } if (eigenvalue + 1.0).abs() < 1e-12));
    }

    #[test]
    fn zero_map_has_no_first_kraus() {
        let d = kraus_from_choi(&ComplexMatrix::zeros(4, 4), &ComplexMatrix::identity(2)).unwrap();
        assert_eq!(first_kraus_correlation(&d, &ComplexMatrix::identity(2)), Err(Error::ZeroKraus));
    }

    #[test]
    fn first_kraus_trends_at_reference_rotation() {
        let r = RotationSpec::identity();
        let u = ConventionCalibration::SHIPPED.target_unitary(&r);
        let metrics = |kind, p| {
            let d = decompose(&reconstruct_superoperator(kind, p, r).unwrap()).unwrap();
            (first_kraus_fidelity(&d, &u), first_kraus_correlation(&d, &u).unwrap())
        };
        let grid: Vec<f64> = (0..10).map(|k| k as f64 / 10.0).collect();
        let deph: Vec<(f64, f64)> = grid.iter().map(|p| metrics(ChannelKind::Dephasing, *p)).collect();
        assert!(deph.windows(2).all(|w| w[1].0 < w[0].0));
        for (p, (_, c1)) in grid.iter().zip(&deph) {
            if *p <= 0.8 {
                assert!((c1 - 1.0).abs() < 1e-6);
            }
        }
        let amp: Vec<f64> = grid.iter().map(|p| metrics(ChannelKind::AmplitudeDamping, *p).1).collect();
        assert!(amp.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn serializes_pairs() {
        let d = decompose(&ideal_superoperator(RotationSpec::identity())).unwrap();
        let v: serde_json::Value = serde_json::to_value(&d).unwrap();
        assert_eq!(v["kraus"].as_array().unwrap().len(), 4);
        assert_eq!(v["kraus"][0][1][0].as_array().unwrap().len(), 2);
        assert_eq!(v["amplitudes"].as_array().unwrap().len(), 4);
    }
}
