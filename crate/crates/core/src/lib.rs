//! Multipartite quantum information masking.
//!
//! The crate builds masking schemes that spread a `w`-level state over `m`
//! qudits of local dimension `d` so that every single-party reduction is the
//! maximally mixed state `I/d`. Schemes are available both as column-map
//! isometries (`masker::build_scheme`) and as explicit controlled-gate
//! circuits (`masker::qubit4_circuit`, `masker::qudit4_circuit`), and the
//! `verify` module certifies them numerically.
//!
//! Amplitudes are indexed big-endian: party 0 is the most significant digit
//! of the flat index, so `|a b c⟩` on dims `[d0, d1, d2]` lives at
//! `(a * d1 + b) * d2 + c`.

pub mod error;
pub mod gates;
pub mod masker;
pub mod meb;
pub mod tensor;
pub mod verify;

pub use error::{MaskError, Result};
pub use gates::{Circuit, Gate, GateKind};
pub use masker::{MaskingScheme, Provenance};
pub use meb::{MebCertificate, MebFamily};
pub use num_complex::Complex64;
pub use tensor::{DensityMatrix, PartySet, StateVector};
pub use verify::{BoundsReport, LeakageProfile, MaskingReport};

/// Tolerance for structural invariants (normalization, hermiticity, unitarity).
pub const STRUCTURAL_TOL: f64 = 1e-12;
/// Slack allowed below zero for the smallest eigenvalue of a density matrix.
pub const PSD_TOL: f64 = 1e-10;
/// Threshold for marginal deviations in masking certification.
pub const MARGINAL_TOL: f64 = 1e-10;
/// Threshold for Gram-matrix deviations from the identity.
pub const GRAM_TOL: f64 = 1e-11;
