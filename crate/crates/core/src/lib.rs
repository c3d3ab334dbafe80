//! Simulation of a four-qubit linear cluster state under local decoherence:
//! entanglement measures, the logical one-qubit rotation implemented by
//! measuring three of the qubits, and its superoperator and Kraus form.

pub mod channels;
pub mod choi;
pub mod entanglement;
pub mod error;
pub mod logical;
pub mod states;
pub mod tensor;
pub mod validation;

pub use channels::{decohere, ChannelKind, KrausChannel};
pub use error::{Error, Result};
pub use logical::{ConventionCalibration, RotationSpec, Superoperator};
pub use states::{build_cluster, InitialState};
pub use tensor::{ComplexMatrix, DensityMatrix};
