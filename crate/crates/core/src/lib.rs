//! Quantum channel representations, relaxation noise, noisy two-qubit gate
//! simulation and entanglement analysis.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod channel;
pub mod error;
pub mod gate_sim;
pub mod matrix;
pub mod noise;

pub use error::{Error, Result};
pub use matrix::{ComplexMatrix, DimensionProfile, C64};
