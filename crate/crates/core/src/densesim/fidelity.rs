//! Brute-force stabilizer and Clifford fidelities over cached enumerations.

use std::sync::OnceLock;

use nalgebra::DVector;
use num_complex::Complex64;
use rayon::prelude::*;

use super::{CMatrix, DenseUnitary, StateVector};
use crate::error::{budget, Result};
use crate::pauli::{
    enumerate_cliffords, enumerate_stabilizer_states, MAX_CLIFFORD_ENUM_QUBITS, MAX_STAB_ENUM_QUBITS,
};

static STAB_CACHE: [OnceLock<Vec<DVector<Complex64>>>; MAX_STAB_ENUM_QUBITS + 1] =
    [const { OnceLock::new() }; MAX_STAB_ENUM_QUBITS + 1];
static CLIFF_CACHE: [OnceLock<Vec<CMatrix>>; MAX_CLIFFORD_ENUM_QUBITS + 1] =
    [const { OnceLock::new() }; MAX_CLIFFORD_ENUM_QUBITS + 1];

/// State vectors of Stab(n), in enumeration order. Built once per `n`.
pub fn stabilizer_vectors(n: usize) -> Result<&'static [DVector<Complex64>]> {
    budget("qubits for stabilizer fidelity", n, MAX_STAB_ENUM_QUBITS)?;
    if let Some(v) = STAB_CACHE[n].get() {
        return Ok(v);
    }
    let states = enumerate_stabilizer_states(n)?;
    let vecs = states
        .par_iter()
        .map(|t| t.state_vector().map(|s| s.amplitudes().clone()))
        .collect::<Result<Vec<_>>>()?;
    Ok(STAB_CACHE[n].get_or_init(|| vecs))
}

/// Dense representatives of the projective Clifford group. Built once per `n`.
pub fn clifford_matrices(n: usize) -> Result<&'static [CMatrix]> {
    budget("qubits for Clifford fidelity", n, MAX_CLIFFORD_ENUM_QUBITS)?;
    if let Some(v) = CLIFF_CACHE[n].get() {
        return Ok(v);
    }
    let mats = enumerate_cliffords(n)?
        .par_iter()
        .map(|c| c.matrix().map(DenseUnitary::into_matrix))
        .collect::<Result<Vec<_>>>()?;
    Ok(CLIFF_CACHE[n].get_or_init(|| mats))
}

/// `max_{S ∈ Stab(n)} |⟨S|ψ⟩|²`.
pub fn f_stab(psi: &StateVector) -> Result<f64> {
    let stabs = stabilizer_vectors(psi.n())?;
    let amps = psi.amplitudes();
    Ok(stabs
        .par_iter()
        .map(|s| s.dotc(amps).norm_sqr())
        .reduce(|| 0.0, f64::max)
        .min(1.0))
}

/// `max_{C ∈ Cl(n)} 4^{−n} |tr(U†C)|²`.
pub fn f_cliff(u: &DenseUnitary) -> Result<f64> {
    let cliffs = clifford_matrices(u.n())?;
    let m = u.matrix();
    let norm = (u.dim() * u.dim()) as f64;
    Ok(cliffs
        .par_iter()
        .map(|c| m.dotc(c).norm_sqr() / norm)
        .reduce(|| 0.0, f64::max)
        .min(1.0))
}
