//! Computational toolkit for Cayley calibrated geometry in Spin(7).
//!
//! The crate provides, over ℝ⁸ with the standard Cayley form:
//!
//! * [`forms`]: sparse exterior algebra (wedge, Hodge star, interior
//!   product, musical isomorphisms) with exact-rational and `f64` backends;
//! * [`spin7`]: the Spin(7) structure: two-form splitting, cross/triple/
//!   quadruple products, E-fibers, Clifford multiplication, the stabilizer
//!   action on ℍ⊕ℍ, and the 21-dimensional Lie algebra;
//! * [`planes`]: Grassmannian-level geometry of almost-Cayley 4-planes:
//!   calibration, τ-norm, classification radii, closest-Cayley projection
//!   and adapted frames;
//! * [`dirac`]: the linearized deformation operator on the flat model:
//!   polynomial normal fields, exact kernel dimensions, critical-rate scans,
//!   principal symbol, the special-Lagrangian correspondence and the
//!   quadric-cone verification;
//! * [`moduli`]: expected-dimension calculators for compact, asymptotically
//!   conical and conically singular moduli spaces with rate-crossing
//!   corrections;
//! * [`funcspace`]: weighted Sobolev/Hölder norm quadrature on conical
//!   meshes and the classical non-Fredholm witness family on the line.

pub mod dirac;
pub mod forms;
pub mod funcspace;
pub mod linalg;
pub mod moduli;
pub mod planes;
pub mod scalar;
pub mod spin7;

pub use forms::{contract2, musical_flat, musical_sharp, KForm, MultiIndex, VecN};
pub use scalar::{rat, Rat, Scalar};

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{what}: {detail}")]
    Mismatch { what: &'static str, detail: String },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("plane is not Cayley within tolerance (tau norm {tau_norm:.3e} > {tolerance:.1e})")]
    NotCayley { tau_norm: f64, tolerance: f64 },

    #[error(
        "outside tubular neighbourhood: calibration {calibration:.6} <= threshold {threshold}"
    )]
    OutsideTubularNeighbourhood { calibration: f64, threshold: f64 },

    #[error("missing link constants for {0}")]
    MissingLinkConstants(String),

    #[error("parity violation: {0}")]
    Parity(String),

    #[error("rate {0} is critical; the operator is not Fredholm there")]
    CriticalRate(f64),

    #[error("numerical non-convergence: {0}")]
    NonConvergence(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
