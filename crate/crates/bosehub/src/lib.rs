//! Ground-state physics of the one-dimensional disordered attractive
//! Bose-Hubbard chain at desk scale.
//!
//! The crate provides:
//!
//! * [`fock`] — the fixed-boson-number occupation basis with combinatorial
//!   ranking;
//! * [`hamil`] — sparse assembly of the disordered Hamiltonian and parameter
//!   scaling;
//! * [`eigen`] — a restarted Lanczos ground-state solver plus a dense
//!   full-diagonalization oracle;
//! * [`pert`] — analytic perturbation theory for the localized, W and
//!   superfluid regimes, emitted as state vectors comparable against the
//!   exact ground state;
//! * [`analysis`] — inverse participation ratios, occupation densities,
//!   reciprocal-space machinery and the critical-hopping extractor;
//! * [`ensemble`] — seeded, parallel disorder averaging and phase-diagram
//!   scans;
//! * [`io`] / [`config`] / [`run`] — plot-ready file formats and the
//!   command-line entry points.

// Negated float comparisons like `!(tol > 0.0)` are deliberate: they reject
// NaN along with the out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod config;
pub mod eigen;
pub mod ensemble;
pub mod error;
pub mod fock;
pub mod hamil;
pub mod io;
pub mod pert;
pub mod run;
pub mod seeds;

pub use error::{Error, Result};
