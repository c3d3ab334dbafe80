//! Negativities, the phase-rotated cluster witness, and threshold searches
//! for entanglement sudden death.

use serde::{Deserialize, Serialize};

use crate::channels::{decohere, single_qubit_kraus, apply_independent, ChannelKind};
use crate::error::{Error, Result};
use crate::states::{build_cluster, InitialState, CLUSTER_QUBITS};
use crate::tensor::{cis, hermitian_eigenvalues, kron_all, ComplexMatrix, DensityMatrix};
use std::f64::consts::FRAC_PI_4;

/// Negativity values at or below this are treated as zero.
pub const NEGATIVITY_FLOOR: f64 = 1e-12;

/// Upper end of every bisection bracket in `p`.
pub const BRACKET_TOP: f64 = 1.0 - 1e-9;

/// Negativity still positive here counts as asymptotic decay. Closer to
/// `p = 1` an asymptotically decaying negativity such as `(1 − p)²` drops
/// under [`NEGATIVITY_FLOOR`] and would read as a spurious threshold.
pub const ESD_PROBE_TOP: f64 = 1.0 - 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NegativityResult {
    pub subset: Vec<usize>,
    pub value: f64,
}

/// Magnitude of the most negative eigenvalue of `ρ^{T_subset}`, or zero if
/// the partial transpose is positive.
pub fn negativity(rho: &DensityMatrix, subset: &[usize]) -> Result<NegativityResult> {
    let pt = rho.partial_transpose(subset)?;
    let min = hermitian_eigenvalues(&pt)?[0];
    Ok(NegativityResult {
        subset: subset.to_vec(),
        value: (-min).max(0.0),
    })
}

/// `W_β = 𝟙/2 − R_β ρ_4I(π/4, 0) R_β†` with `R_β = e^{−iβσ_z/2}` on qubit 1.
#[derive(Debug, Clone)]
pub struct WitnessOperator {
    pub beta: f64,
    pub matrix: ComplexMatrix,
}

impl WitnessOperator {
    /// `Tr[W ρ]`
    pub fn expectation(&self, rho: &DensityMatrix) -> Result<f64> {
        if rho.dim() != self.matrix.rows() {
            return Err(Error::DimensionMismatch {
                expected: format!("{CLUSTER_QUBITS}-qubit state"),
                found: format!("{} qubits", rho.qubits()),
            });
        }
        Ok(rho.expectation(&self.matrix).re)
    }
}

pub fn witness_operator(beta: f64) -> WitnessOperator {
    let reference = build_cluster(InitialState::new(FRAC_PI_4, 0.0));
    let id = ComplexMatrix::identity(2);
    let phase = ComplexMatrix::diagonal(&[cis(-beta / 2.0), cis(beta / 2.0)]);
    let r = kron_all([&phase, &id, &id, &id]);
    let rotated = &(&r * reference.matrix()) * &r.adjoint();
    let d = 1 << CLUSTER_QUBITS;
    let matrix = &ComplexMatrix::identity(d).scale_real(0.5) - &rotated;
    WitnessOperator { beta, matrix }
}

pub fn witness_expectation(rho: &DensityMatrix, beta: f64) -> Result<f64> {
    witness_operator(beta).expectation(rho)
}

/// Smallest `p` at which `f` stops being positive, assuming `f(lo) > 0` and
/// `f(hi) <= 0`.
fn bisect(mut lo: f64, mut hi: f64, tol: f64, mut positive: impl FnMut(f64) -> Result<bool>) -> Result<f64> {
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if positive(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 && tol < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidTolerance(tol))
    }
}

/// Noise strength at which the negativity across `subset` of the decohered
/// cluster `ρ_4F(α, β, p)` first vanishes, located to within `tol`.
///
/// Returns `None` when the negativity is still positive at
/// [`ESD_PROBE_TOP`], i.e. the entanglement only decays asymptotically.
pub fn esd_threshold(
    kind: ChannelKind,
    subset: &[usize],
    s: InitialState,
    tol: f64,
) -> Result<Option<f64>> {
    check_tol(tol)?;
    let rho = build_cluster(s);
    if negativity(&rho, subset)?.value <= NEGATIVITY_FLOOR {
        return Err(Error::NoInitialEntanglement {
            subset: subset.to_vec(),
        });
    }
    let alive = |p: f64| -> Result<bool> {
        Ok(negativity(&decohere(&rho, kind, p)?, subset)?.value > NEGATIVITY_FLOOR)
    };
    let top = ESD_PROBE_TOP;
    if alive(top)? {
        return Ok(None);
    }
    bisect(0.0, top, tol / 4.0, alive).map(Some)
}

/// Noise strength at which `Tr[W_β ρ_4F]` first becomes non-negative, to
/// within `tol`. `Some(0.0)` means the witness never detects the state;
/// `None` means it still detects it at the top of the bracket.
pub fn witness_crossing(
    kind: ChannelKind,
    s: InitialState,
    witness_beta: f64,
    tol: f64,
) -> Result<Option<f64>> {
    check_tol(tol)?;
    let rho = build_cluster(s);
    let w = witness_operator(witness_beta);
    let detected = |p: f64| -> Result<bool> {
        let single = single_qubit_kraus(kind, p)?;
        Ok(w.expectation(&apply_independent(&rho, &single)?)? < 0.0)
    };
    if !detected(0.0)? {
        return Ok(Some(0.0));
    }
    if detected(BRACKET_TOP)? {
        return Ok(None);
    }
    bisect(0.0, BRACKET_TOP, tol / 4.0, detected).map(Some)
}
