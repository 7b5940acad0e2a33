//! Simulation of single-step N-particle GHZ state creation with a Rydberg
//! control atom and a STIRAP-driven target ensemble.
//!
//! All times and rates are dimensionless, scaled by the STIRAP pulse width
//! `T`. Rabi frequencies are peak values in the convention where a field of
//! Rabi frequency `Ω` couples two levels with matrix element `Ω/2`.
//!
//! The crate is organised bottom-up:
//!
//! * [`fock`]: symmetric Fock basis with at most one Rydberg excitation and
//!   the collective operators acting on it.
//! * [`pulses`]: Gaussian envelopes, pulse areas and STIRAP mixing angles.
//! * [`hamiltonian`]: control, target and total Hamiltonians plus jump
//!   operators.
//! * [`spectral`]: analytic eigenstructure, dark state and adiabaticity
//!   analysis.
//! * [`dynamics`]: Schrödinger and Lindblad propagation.
//! * [`protocol`]: the GHZ sequence, control measurement and fidelity.
//! * [`config`] / [`sweep`]: user-facing parameter sets, figure presets,
//!   grid sweeps and CSV output.

// negated comparisons are used on purpose so that NaN is rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod dynamics;
pub mod error;
pub mod fock;
pub mod hamiltonian;
pub mod protocol;
pub mod pulses;
pub mod spectral;
pub mod sweep;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = nalgebra::Complex<f64>;
/// Dense complex matrix.
pub type CMatrix = nalgebra::DMatrix<C64>;
/// Dense complex vector.
pub type CVector = nalgebra::DVector<C64>;
