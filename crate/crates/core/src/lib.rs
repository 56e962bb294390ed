//! Exact simulation of beam-splitting teleportation on the Boson Fock space.
//!
//! Fock-space vectors are finite combinations of (optionally vacuum-filtered)
//! coherent vectors, and every inner product is evaluated through the
//! exponential kernel `<exp g, exp h> = e^{<g,h>}`. No particle-number
//! truncation is involved, so protocol identities hold to floating-point
//! precision for any mean particle number.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fock;
pub mod hilbert;
pub mod linalg;
pub mod teleport;

pub use error::{Error, Result};
pub use fock::{DensityOperator, FockVector};
pub use hilbert::{ModeVector, Region, Splitting, SplittingKind};
pub use teleport::{BMatrix, QuditState, TeleportModel, Variant};
