//! Closed-form logical superoperators and fidelities, written out entry by entry.
//!
//! Shorthand used throughout: `q = p − 1`, `p̃ = √(1 − p)`, `sj = sin θj`,
//! `cj = cos θj`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{RotationSpec, Superoperator, SuperoperatorSource};
use crate::channels::ChannelKind;
use crate::error::{Error, Result};
use crate::states::InitialState;
use crate::tensor::{c, cis, ComplexMatrix, I};

/// Entries (0-based row, column) of the closed-form depolarizing superoperator
/// whose `e^{−iθ₁}` factor breaks the column phase pattern: column 2 carries
/// `e^{+iθ₁}` everywhere else.
pub const DEPOLARIZING_SUSPECT_ENTRIES: [(usize, usize); 2] = [(0, 1), (3, 1)];

struct Shorthand {
    p: f64,
    q: f64,
    pt: f64,
    s2: f64,
    s3: f64,
    c2: f64,
    c3: f64,
    e: Complex64,
    ec: Complex64,
}

impl Shorthand {
    fn new(p: f64, r: &RotationSpec) -> Self {
        let (s2, c2) = r.theta2.sin_cos();
        let (s3, c3) = r.theta3.sin_cos();
        Self {
            p,
            q: p - 1.0,
            pt: (1.0 - p).sqrt(),
            s2,
            s3,
            c2,
            c3,
            e: cis(r.theta1),
            ec: cis(-r.theta1),
        }
    }
}

fn re(x: f64) -> Complex64 {
    c(x, 0.0)
}

fn check_strength(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::StrengthOutOfRange(p))
    }
}

/// Rows 2 and 3, shared by the dephasing and amplitude damping forms.
fn middle_rows(v: &Shorthand) -> [[Complex64; 4]; 2] {
    let Shorthand { q, pt, s2, s3, c2, c3, e, ec, .. } = *v;
    [
        [
            q * (c2 - I * pt * c3 * s2),
            e * q * (q * c2 * c3 + I * pt * (s2 + s3)),
            -ec * q * (q * c2 * c3 + I * pt * (s2 - s3)),
            -q * (c2 - I * pt * c3 * s2),
        ],
        [
            q * (c2 + I * pt * c3 * s2),
            -e * q * (q * c2 * c3 - I * pt * (s2 - s3)),
            ec * q * (q * c2 * c3 - I * pt * (s2 + s3)),
            -q * (c2 + I * pt * c3 * s2),
        ],
    ]
}

fn dephasing_rows(v: &Shorthand) -> [[Complex64; 4]; 4] {
    let Shorthand { q, pt, s2, s3, c2, c3, e, ec, .. } = *v;
    let [r2, r3] = middle_rows(v);
    [
        [
            re(1.0 - q * s2 * s3),
            -e * q * (c3 - I * pt * c2 * s3),
            -ec * q * (c3 + I * pt * c2 * s3),
            re(1.0 + q * s2 * s3),
        ],
        r2,
        r3,
        [
            re(1.0 + q * s2 * s3),
            e * q * (c3 - I * pt * c2 * s3),
            ec * q * (c3 + I * pt * c2 * s3),
            re(1.0 - q * s2 * s3),
        ],
    ]
}

fn amplitude_rows(v: &Shorthand) -> [[Complex64; 4]; 4] {
    let Shorthand { p, q, pt, s2, s3, c2, c3, e, ec } = *v;
    let q2 = q * q;
    let [r2, r3] = middle_rows(v);
    [
        [
            re((1.0 + p) + q2 * s2 * s3),
            e * q2 * (c3 - I * pt * c2 * s3),
            ec * q2 * (c3 + I * pt * c2 * s3),
            re((1.0 + p) - q2 * s2 * s3),
        ],
        r2,
        r3,
        [
            re(-q * (1.0 + q * s2 * s3)),
            -e * q2 * (c3 - I * pt * c2 * s3),
            -ec * q2 * (c3 + I * pt * c2 * s3),
            re(-q * (1.0 - q * s2 * s3)),
        ],
    ]
}

fn depolarizing_rows(v: &Shorthand) -> [[Complex64; 4]; 4] {
    let Shorthand { q, s2, s3, c2, c3, e, ec, .. } = *v;
    let q2 = q * q;
    let q3 = q2 * q;
    [
        [
            re(1.0 - q3 * s2 * s3),
            -ec * q3 * (c3 + I * q * c2 * s3),
            ec * q3 * (-c3 + I * q * c2 * s3),
            re(1.0 + q3 * s2 * s3),
        ],
        [
            -q2 * (c2 + I * q * c3 * s2),
            e * q3 * (q * c2 * c3 + I * (s2 + s3)),
            -ec * q3 * (q * c2 * c3 + I * (s2 - s3)),
            q2 * (c2 + I * q * c3 * s2),
        ],
        [
            -q2 * (c2 - I * q * c3 * s2),
            -e * q3 * (q * c2 * c3 - I * (s2 - s3)),
            ec * q3 * (q * c2 * c3 - I * (s2 + s3)),
            q2 * (c2 - I * q * c3 * s2),
        ],
        [
            re(1.0 + q3 * s2 * s3),
            ec * q3 * (c3 + I * q * c2 * s3),
            ec * q3 * (c3 - I * q * c2 * s3),
            re(1.0 - q3 * s2 * s3),
        ],
    ]
}

fn assemble(kind: ChannelKind, p: f64, r: RotationSpec, rows: [[Complex64; 4]; 4]) -> Superoperator {
    Superoperator {
        matrix: ComplexMatrix::from_rows(rows).scale_real(0.5),
        channel: Some(kind),
        p,
        rotation: r,
        source: SuperoperatorSource::ClosedForm,
        convention: "closed-form".into(),
    }
}

/// `S_z`, `S_A` or `S_P` in closed form.
pub fn closed_form_superoperator(kind: ChannelKind, p: f64, r: RotationSpec) -> Result<Superoperator> {
    check_strength(p)?;
    let v = Shorthand::new(p, &r);
    let rows = match kind {
        ChannelKind::Dephasing => dephasing_rows(&v),
        ChannelKind::AmplitudeDamping => amplitude_rows(&v),
        ChannelKind::Depolarizing => depolarizing_rows(&v),
    };
    Ok(assemble(kind, p, r, rows))
}

/// The closed-form depolarizing matrix with `e^{−iθ₁}` replaced by `e^{+iθ₁}` at
/// [`DEPOLARIZING_SUSPECT_ENTRIES`]. Diagnostic only.
pub fn depolarizing_with_phase_flip(p: f64, r: RotationSpec) -> Result<Superoperator> {
    let mut s = closed_form_superoperator(ChannelKind::Depolarizing, p, r)?;
    let flip = cis(2.0 * r.theta1);
    for (i, j) in DEPOLARIZING_SUSPECT_ENTRIES {
        s.matrix[(i, j)] *= flip;
    }
    s.convention = "closed-form, suspect phases flipped".into();
    Ok(s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ClosedFormFidelity {
    /// `F^g_z`
    GateDephasing,
    /// `F^C_z`
    ClusterDephasing,
    /// `F^g_A`, evaluated with a 1/16 prefactor.
    GateAmplitude,
    /// `F^g_P`
    GateDepolarizing,
    /// `F^C_P`
    ClusterDepolarizing,
}

impl ClosedFormFidelity {
    pub const ALL: [ClosedFormFidelity; 5] = [
        Self::GateDephasing,
        Self::ClusterDephasing,
        Self::GateAmplitude,
        Self::GateDepolarizing,
        Self::ClusterDepolarizing,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::GateDephasing => "Fg_z",
            Self::ClusterDephasing => "FC_z",
            Self::GateAmplitude => "Fg_A",
            Self::GateDepolarizing => "Fg_P",
            Self::ClusterDepolarizing => "FC_P",
        }
    }

    pub fn is_gate(self) -> bool {
        matches!(self, Self::GateDephasing | Self::GateAmplitude | Self::GateDepolarizing)
    }
}

impl fmt::Display for ClosedFormFidelity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ClosedFormFidelity {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::UnknownFormula(s.to_string()))
    }
}

/// What a closed-form fidelity depends on besides `p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FidelityArgs {
    Rotation(RotationSpec),
    Input(InitialState),
}

/// Bracketed sum shared by `F^g_z` and `F^g_A`.
fn dephasing_gate_bracket(p: f64, r: &RotationSpec) -> f64 {
    let q = p - 1.0;
    let pt = (1.0 - p).sqrt();
    let c2 = r.theta2.cos();
    10.0 + 6.0 * pt
        + p * (p - 6.0 * pt - 7.0)
        + q * (p + 2.0 * pt - 2.0) * (2.0 * r.theta2).cos()
        + 2.0 * q * (p + 2.0 * pt - 2.0) * c2 * c2 * (2.0 * r.theta3).cos()
}

/// `F^g_A` with a 1/4 prefactor, kept for the prefactor comparison.
pub fn gate_amplitude_quarter_prefactor(p: f64, r: &RotationSpec) -> f64 {
    dephasing_gate_bracket(p, r) / 4.0
}

pub fn closed_form_fidelity(which: ClosedFormFidelity, p: f64, args: FidelityArgs) -> Result<f64> {
    check_strength(p)?;
    let q = p - 1.0;
    let pt = (1.0 - p).sqrt();
    match (which, args) {
        (ClosedFormFidelity::GateDephasing | ClosedFormFidelity::GateAmplitude, FidelityArgs::Rotation(r)) => {
            Ok(dephasing_gate_bracket(p, &r) / 16.0)
        }
        (ClosedFormFidelity::GateDepolarizing, FidelityArgs::Rotation(r)) => {
            let poly = (p - 2.0) * (-4.0 + p * (7.0 + p * (p - 6.0)));
            Ok((poly + q * q * p * p * (2.0 * r.theta2).cos()) / 8.0)
        }
        (ClosedFormFidelity::ClusterDephasing, FidelityArgs::Input(s)) => {
            let c4 = (4.0 * s.alpha).cos();
            Ok((16.0 * (1.0 + pt) + p * (p - 6.0 * pt - 14.0) - p * (p - 2.0 * pt - 2.0) * c4) / 32.0)
        }
        (ClosedFormFidelity::ClusterDepolarizing, FidelityArgs::Input(s)) => {
            let c4 = (4.0 * s.alpha).cos();
            Ok((p - 2.0).powi(2) * (3.0 * p * (3.0 * p - 5.0) + 8.0 - q * p * c4) / 32.0)
        }
        _ => Err(Error::UnknownFormula(format!(
            "{which} does not take {}",
            match args {
                FidelityArgs::Rotation(_) => "a rotation",
                FidelityArgs::Input(_) => "an input state",
            }
        ))),
    }
}
