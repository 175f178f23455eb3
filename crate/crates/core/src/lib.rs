//! Stroboscopic quantum Zeno dynamics of a driven cavity field.
//!
//! The crate simulates a single cavity mode on a truncated Fock space,
//! repeatedly kicked by photon-number-selective unitaries while a classical
//! source displaces it. Those kicks confine the field to subspaces bounded
//! by an exclusion circle in phase space, which in turn yields phase-space
//! tweezers, cat-state factories and squeezing. Realistic kicks (a dressed
//! Rydberg atom probed by a finite pulse) and cavity damping (Lindblad
//! master equation) are modelled as well.

pub mod atomkick;
pub mod error;
pub mod fock;
pub mod linalg;
pub mod openquantum;
pub mod output;
pub mod phasespace;
pub mod protocols;
pub mod zeno;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
