//! The measurement chain that turns the four-qubit cluster into a logical
//! one-qubit rotation, superoperator reconstruction, and fidelities.

mod calibration;
mod closed_form;

use std::f64::consts::{FRAC_1_SQRT_2, PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize, Serializer};

use crate::channels::{decohere, ChannelKind};
use crate::error::{Error, Result};
use crate::states::{cluster_from_input, hadamard, x_rotation, z_rotation, RotationConvention, CLUSTER_QUBITS};
use crate::tensor::{
    c, cis, kron, local_sandwich, trace_out, unvec_row_major, vec_row_major, ComplexMatrix, DensityMatrix,
    ONE, ZERO,
};

pub use calibration::{
    calibrate_conventions, probe_rotations, CalibrationReport, ConventionCalibration, EulerMapping,
    MeasurementConvention, MeasurementScore, Sign, PROBE_STRENGTHS,
};
pub use closed_form::{
    closed_form_fidelity, closed_form_superoperator, depolarizing_with_phase_flip,
    gate_amplitude_quarter_prefactor, ClosedFormFidelity, FidelityArgs, DEPOLARIZING_SUSPECT_ENTRIES,
};

/// Post-selection probabilities below this cannot be renormalized.
pub const MIN_POSTSELECTION: f64 = 1e-14;

/// Euler angles of the target rotation, each reduced to `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotationSpec {
    pub theta1: f64,
    pub theta2: f64,
    pub theta3: f64,
}

fn canonical_angle(x: f64) -> f64 {
    assert!(x.is_finite(), "rotation angles must be finite, got {x}");
    let r = x.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Distance between two angles on the circle.
fn angular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

impl RotationSpec {
    /// # Panics
    /// If any angle is NaN or infinite.
    pub fn new(theta1: f64, theta2: f64, theta3: f64) -> Self {
        Self {
            theta1: canonical_angle(theta1),
            theta2: canonical_angle(theta2),
            theta3: canonical_angle(theta3),
        }
    }

    pub fn identity() -> Self {
        Self::new(0.0, 0.0, 0.0)
    }

    pub fn angles(&self) -> [f64; 3] {
        [self.theta1, self.theta2, self.theta3]
    }

    pub fn from_angles(t: [f64; 3]) -> Self {
        Self::new(t[0], t[1], t[2])
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.angles()
            .iter()
            .zip(other.angles())
            .all(|(a, b)| angular_distance(*a, b) <= tol)
    }
}

/// Samples rotations from the Haar measure on SU(2) in Euler coordinates.
pub struct HaarRotations {
    rng: ChaCha8Rng,
}

impl HaarRotations {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

impl Iterator for HaarRotations {
    type Item = RotationSpec;

    fn next(&mut self) -> Option<RotationSpec> {
        let t1 = self.rng.gen::<f64>() * TAU;
        let t2 = (1.0 - 2.0 * self.rng.gen::<f64>()).clamp(-1.0, 1.0).acos();
        let t3 = self.rng.gen::<f64>() * TAU;
        Some(RotationSpec::new(t1, t2, t3))
    }
}

pub fn haar_random_rotation(seed: u64) -> RotationSpec {
    HaarRotations::new(seed).next().expect("infinite iterator")
}

/// `H Z(θ₁) X(θ₂) Z(θ₃)` with the angles taken literally.
pub fn euler_unitary(r: &RotationSpec, convention: RotationConvention) -> ComplexMatrix {
    let z1 = z_rotation(r.theta1, convention);
    let x2 = x_rotation(r.theta2, convention);
    let z3 = z_rotation(r.theta3, convention);
    &(&(&hadamard() * &z1) * &x2) * &z3
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SuperoperatorSource {
    Ideal,
    Reconstructed,
    ClosedForm,
}

/// A 4×4 map on row-major vectorized one-qubit density matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct Superoperator {
    pub matrix: ComplexMatrix,
    /// `None` for the noiseless target.
    pub channel: Option<ChannelKind>,
    pub p: f64,
    pub rotation: RotationSpec,
    pub source: SuperoperatorSource,
    pub convention: String,
}

impl Superoperator {
    pub fn apply(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        if rho.rows() != 2 || rho.cols() != 2 {
            return Err(Error::DimensionMismatch {
                expected: "2x2".into(),
                found: format!("{}x{}", rho.rows(), rho.cols()),
            });
        }
        unvec_row_major(&(&self.matrix * &vec_row_major(rho)))
    }

    /// Largest deviation of `Tr S(E_ij)` from `Tr E_ij` over the matrix units.
    pub fn trace_residual(&self) -> f64 {
        (0..4)
            .map(|j| {
                let expect = if j == 0 || j == 3 { ONE } else { ZERO };
                (self.matrix[(0, j)] + self.matrix[(3, j)] - expect).norm()
            })
            .fold(0.0, f64::max)
    }

    /// Largest violation of `S(X)† = S(X†)`.
    pub fn hermiticity_residual(&self) -> f64 {
        let idx = |a: usize, b: usize| 2 * a + b;
        let mut worst = 0.0f64;
        for (i, k, j, l) in itertools4() {
            let lhs = self.matrix[(idx(i, k), idx(j, l))];
            let rhs = self.matrix[(idx(k, i), idx(l, j))].conj();
            worst = worst.max((lhs - rhs).norm());
        }
        worst
    }

    pub fn max_abs_diff(&self, other: &Superoperator) -> f64 {
        self.matrix.max_abs_diff(&other.matrix)
    }

    pub fn label(&self) -> &'static str {
        self.channel.map_or("ideal", ChannelKind::as_str)
    }
}

fn itertools4() -> impl Iterator<Item = (usize, usize, usize, usize)> {
    (0..16).map(|n| (n >> 3 & 1, n >> 2 & 1, n >> 1 & 1, n & 1))
}

#[derive(Serialize)]
struct SuperoperatorRecord<'a> {
    channel: &'static str,
    p: f64,
    theta: [f64; 3],
    source: SuperoperatorSource,
    convention: &'a str,
    matrix: Vec<Vec<[f64; 2]>>,
}

impl Serialize for Superoperator {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        SuperoperatorRecord {
            channel: self.label(),
            p: self.p,
            theta: self.rotation.angles(),
            source: self.source,
            convention: &self.convention,
            matrix: self.matrix.to_pairs(),
        }
        .serialize(serializer)
    }
}

/// Output of the post-selected measurement chain.
#[derive(Debug, Clone)]
pub struct ChainOutput {
    pub state: DensityMatrix,
    pub probability: f64,
}

/// Projects qubits 1, 2, 3 onto the post-selected outcome at the mapped
/// angles, traces them out and renormalizes.
pub fn measure_chain_with_probability(
    rho: &DensityMatrix,
    r: &RotationSpec,
    calib: &ConventionCalibration,
) -> Result<ChainOutput> {
    if rho.qubits() != CLUSTER_QUBITS {
        return Err(Error::DimensionMismatch {
            expected: format!("{CLUSTER_QUBITS} qubits"),
            found: format!("{} qubits", rho.qubits()),
        });
    }
    let angles = calib.measurement.angles(r);
    let mut m = rho.matrix().clone();
    for (k, phi) in angles.iter().enumerate() {
        let ket = [c(FRAC_1_SQRT_2, 0.0), cis(*phi) * calib.measurement.outcome.value() * FRAC_1_SQRT_2];
        m = local_sandwich(&m, &ComplexMatrix::outer(&ket), k + 1);
    }
    let reduced = trace_out(&m, &[1, 2, 3])?;
    let probability = reduced.trace().re;
    if !(probability >= MIN_POSTSELECTION) {
        return Err(Error::MeasurementIncompatible { probability });
    }
    let out = reduced.scale_real(1.0 / probability);
    let herm = &out + &out.adjoint();
    Ok(ChainOutput {
        state: DensityMatrix::from_trusted(herm.scale_real(0.5)),
        probability,
    })
}

pub fn measure_chain(rho: &DensityMatrix, r: &RotationSpec, calib: &ConventionCalibration) -> Result<DensityMatrix> {
    measure_chain_with_probability(rho, r, calib).map(|o| o.state)
}

/// `|0⟩, |1⟩, |+⟩, |+i⟩`.
pub fn tomography_inputs() -> [[num_complex::Complex64; 2]; 4] {
    let h = c(FRAC_1_SQRT_2, 0.0);
    [[ONE, ZERO], [ZERO, ONE], [h, h], [h, c(0.0, FRAC_1_SQRT_2)]]
}

fn input_states() -> Vec<DensityMatrix> {
    tomography_inputs()
        .iter()
        .map(|v| DensityMatrix::pure(v).expect("normalized input"))
        .collect()
}

/// Clusters built from the tomography inputs, decohered by `kind` at `p`.
pub(crate) fn prepared_clusters(kind: Option<ChannelKind>, p: f64) -> Result<Vec<DensityMatrix>> {
    input_states()
        .iter()
        .map(|s| {
            let rho = cluster_from_input(s)?;
            match kind {
                Some(k) => decohere(&rho, k, p),
                None => Ok(rho),
            }
        })
        .collect()
}

/// Solves `S V = W` where the columns of `V` and `W` are the vectorized
/// inputs and chain outputs.
pub(crate) fn solve_from_clusters(
    clusters: &[DensityMatrix],
    r: &RotationSpec,
    calib: &ConventionCalibration,
) -> Result<(ComplexMatrix, [f64; 4])> {
    let inputs = input_states();
    let mut v = ComplexMatrix::zeros(4, 4);
    let mut w = ComplexMatrix::zeros(4, 4);
    let mut probabilities = [0.0; 4];
    for (col, (rho_in, cluster)) in inputs.iter().zip(clusters).enumerate() {
        let out = measure_chain_with_probability(cluster, r, calib)?;
        probabilities[col] = out.probability;
        let vin = vec_row_major(rho_in.matrix());
        let vout = vec_row_major(out.state.matrix());
        for row in 0..4 {
            v[(row, col)] = vin[(row, 0)];
            w[(row, col)] = vout[(row, 0)];
        }
    }
    let inv = v.try_inverse().ok_or(Error::SingularReconstruction)?;
    Ok((&w * &inv, probabilities))
}

/// A reconstructed superoperator with the post-selection probability seen
/// for each tomography input.
#[derive(Debug, Clone)]
pub struct Tomography {
    pub superoperator: Superoperator,
    pub probabilities: [f64; 4],
}

impl Tomography {
    pub fn probability_spread(&self) -> f64 {
        let max = self.probabilities.iter().cloned().fold(f64::MIN, f64::max);
        let min = self.probabilities.iter().cloned().fold(f64::MAX, f64::min);
        max - min
    }
}

pub fn tomography(
    kind: Option<ChannelKind>,
    p: f64,
    r: RotationSpec,
    calib: &ConventionCalibration,
) -> Result<Tomography> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::StrengthOutOfRange(p));
    }
    let clusters = prepared_clusters(kind, p)?;
    let (matrix, probabilities) = solve_from_clusters(&clusters, &r, calib)?;
    Ok(Tomography {
        superoperator: Superoperator {
            matrix,
            channel: kind,
            p: if kind.is_some() { p } else { 0.0 },
            rotation: r,
            source: SuperoperatorSource::Reconstructed,
            convention: calib.tag(),
        },
        probabilities,
    })
}

pub fn reconstruct_superoperator_with(
    kind: ChannelKind,
    p: f64,
    r: RotationSpec,
    calib: &ConventionCalibration,
) -> Result<Superoperator> {
    tomography(Some(kind), p, r, calib).map(|t| t.superoperator)
}

/// Reconstruction under the shipped conventions.
pub fn reconstruct_superoperator(kind: ChannelKind, p: f64, r: RotationSpec) -> Result<Superoperator> {
    reconstruct_superoperator_with(kind, p, r, &ConventionCalibration::SHIPPED)
}

/// `U ⊗ conj U` for the calibrated target unitary.
pub fn ideal_superoperator_with(r: RotationSpec, calib: &ConventionCalibration) -> Superoperator {
    let u = calib.target_unitary(&r);
    Superoperator {
        matrix: kron(&u, &u.conj()),
        channel: None,
        p: 0.0,
        rotation: r,
        source: SuperoperatorSource::Ideal,
        convention: calib.tag(),
    }
}

pub fn ideal_superoperator(r: RotationSpec) -> Superoperator {
    ideal_superoperator_with(r, &ConventionCalibration::SHIPPED)
}

/// `Tr[S₀ S_p†] / 4`.
pub fn gate_fidelity(s0: &Superoperator, sp: &Superoperator) -> Result<f64> {
    if !s0.rotation.approx_eq(&sp.rotation, 1e-12) {
        return Err(Error::RotationMismatch);
    }
    Ok(sp.matrix.hs_inner(&s0.matrix).re / 4.0)
}

/// `Tr[ρ_ref ρ_fin†]`.
pub fn cluster_fidelity(reference: &DensityMatrix, fin: &DensityMatrix) -> Result<f64> {
    if reference.qubits() != CLUSTER_QUBITS || fin.qubits() != CLUSTER_QUBITS {
        return Err(Error::DimensionMismatch {
            expected: format!("two {CLUSTER_QUBITS}-qubit states"),
            found: format!("{} and {} qubits", reference.qubits(), fin.qubits()),
        });
    }
    Ok(fin.matrix().hs_inner(reference.matrix()).re)
}

/// Offsets the Euler angle by `π`, the effect of a flipped outcome bit.
pub(crate) fn with_pi(angle: f64, flip: bool) -> f64 {
    if flip {
        angle + PI
    } else {
        angle
    }
}
