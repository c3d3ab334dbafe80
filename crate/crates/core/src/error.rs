use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("invalid qubit subset {subset:?} for {qubits} qubits: {reason}")]
    InvalidQubitSet {
        subset: Vec<usize>,
        qubits: usize,
        reason: &'static str,
    },

    #[error("vector of length {0} cannot be reshaped into a square matrix")]
    NotSquareLength(usize),

    #[error("matrix is not Hermitian (max residual {residual:e})")]
    NotHermitian { residual: f64 },

    #[error("not a density matrix: {0}")]
    NotDensityMatrix(String),

    #[error("noise strength p = {0} outside [0, 1]")]
    StrengthOutOfRange(f64),

    #[error("channel already acts on {0} qubits; only single-qubit channels can be lifted")]
    AlreadyLifted(usize),

    #[error("post-selection probability {probability:e} too small to renormalize")]
    MeasurementIncompatible { probability: f64 },

    #[error("tomography system is singular")]
    SingularReconstruction,

    #[error("state has no negativity across {subset:?} at p = 0")]
    NoInitialEntanglement { subset: Vec<usize> },

    #[error("tolerance must be positive and below 1, got {0}")]
    InvalidTolerance(f64),

    #[error("superoperators refer to different rotations")]
    RotationMismatch,

    #[error("Choi matrix has eigenvalue {eigenvalue:e}; map is not completely positive")]
    NotCompletelyPositive { eigenvalue: f64 },

    #[error("leading Kraus operator is numerically zero")]
    ZeroKraus,

    #[error("convention calibration failed (best residual {best_residual:e}): {detail}")]
    CalibrationFailed { best_residual: f64, detail: String },

    #[error("unknown channel `{0}` (expected dephasing, amp or depol)")]
    UnknownChannel(String),

    #[error("unknown closed-form fidelity `{0}`")]
    UnknownFormula(String),
}

pub type Result<T> = std::result::Result<T, Error>;
