//! Analytic quantum full-wave models for a coaxial-fed rectangular cavity.
//!
//! The crate is organised bottom-up:
//!
//! - [`cavity_em`]: closed-form PEC cavity eigenmodes and the coaxial TEM continuum mode.
//! - [`perturbation`]: first-order shape-perturbation shift from protruding probes.
//! - [`port_io`]: cavity/port overlap couplings and the two-port input-output transfer functions.
//! - [`hom`]: Hong-Ou-Mandel second-order correlation for two single photons.
//! - [`transmon`]: dipole capacitance, charge-basis spectrum and charge matrix elements.
//! - [`system_hamiltonian`]: receiving-antenna coupling, the RWA system Hamiltonian and
//!   dispersive parameters extracted from the labelled dressed spectrum.
//! - [`sweep`]: the experiment drivers shared by the CLI and the acceptance suite.
//!
//! Everything is SI with angular frequencies in rad/s.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cavity_em;
pub mod constants;
mod error;
pub mod hom;
pub mod perturbation;
pub mod port_io;
pub mod quadrature;
pub mod sweep;
pub mod system_hamiltonian;
pub mod transmon;

pub use error::{Error, Result};

pub use nalgebra::Vector3;
pub use num_complex::Complex64;
