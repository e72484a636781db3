//! Clifford testing laboratory.

pub mod commutant;
pub mod densesim;
pub mod error;
pub mod gf2;
pub mod io;
pub mod norms;
pub mod pauli;
pub mod testers;
pub mod verify;

pub use error::{Error, Result};
pub use gf2::{BitMatrix, BitVec, Form, Subspace};
pub use pauli::{CliffordElement, PhasedPauli, StabilizerTableau, WeylLabel};
