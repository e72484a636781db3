//! Characteristic distributions of states and unitaries.

use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{CMatrix, DenseUnitary, StateVector};
use crate::error::{budget, Error, Result};
use crate::gf2::{BitVec, Subspace};
use crate::pauli::{weyl_apply, weyl_monomial, WeylLabel};

/// Largest qubit count for a state's distribution table.
pub const MAX_STATE_DIST_QUBITS: usize = 6;
/// Largest qubit count for a stored unitary table without the large flag.
pub const MAX_UNITARY_TABLE_QUBITS: usize = 2;
/// Largest qubit count for a stored unitary table with the large flag.
pub const MAX_UNITARY_TABLE_QUBITS_LARGE: usize = 3;
/// Largest qubit count for streaming moments of `p_U`.
pub const MAX_UNITARY_MOMENT_QUBITS: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DistKind {
    State,
    Unitary,
}

/// `p_ψ` on `F₂^{2n}` or `p_U` on `F₂^{2n} × F₂^{2n}`.
///
/// Unitary tables are indexed by `(x << 2n) | y`, which is the big-endian
/// index of the concatenated label `(x, y)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CharDist {
    pub n: usize,
    pub kind: DistKind,
    pub table: Vec<f64>,
}

impl CharDist {
    /// Bit length of a label.
    pub fn label_len(&self) -> usize {
        match self.kind {
            DistKind::State => 2 * self.n,
            DistKind::Unitary => 4 * self.n,
        }
    }

    pub fn get(&self, label: &BitVec) -> Result<f64> {
        if label.len() != self.label_len() {
            return Err(Error::LengthMismatch {
                left: label.len(),
                right: self.label_len(),
            });
        }
        Ok(self.table[label.to_index() as usize])
    }

    pub fn total(&self) -> f64 {
        self.table.iter().sum()
    }

    pub fn l2_squared(&self) -> f64 {
        self.table.iter().map(|p| p * p).sum()
    }

    pub fn l3_cubed(&self) -> f64 {
        self.table.iter().map(|p| p * p * p).sum()
    }

    /// Checks the structural invariants; returns the largest violation found.
    pub fn check_invariants(&self) -> Result<()> {
        if self.table.iter().any(|&p| p < -1e-12) {
            return Err(Error::Internal("negative probability".into()));
        }
        let total = self.total();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Internal(format!("distribution sums to {total}")));
        }
        let n = self.n;
        match self.kind {
            DistKind::State => {
                let cap = 2f64.powi(-(n as i32));
                if let Some(p) = self.table.iter().find(|&&p| p > cap + 1e-12) {
                    return Err(Error::Internal(format!("entry {p} exceeds 2^-n")));
                }
            }
            DistKind::Unitary => {
                let side = 1usize << (2 * n);
                let marginal = 1.0 / side as f64;
                for i in 0..side {
                    let row: f64 = self.table[i * side..(i + 1) * side].iter().sum();
                    let col: f64 = (0..side).map(|j| self.table[j * side + i]).sum();
                    if (row - marginal).abs() > 1e-9 || (col - marginal).abs() > 1e-9 {
                        return Err(Error::Internal(format!("marginal at {i} is {row}/{col}")));
                    }
                }
            }
        }
        Ok(())
    }

    /// Human-readable label, `a|b` for states and `a|b,a'|b'` split by `/` for unitaries.
    pub fn label_string(&self, index: usize) -> String {
        let n = self.n;
        let part = |bits: BitVec| format!("{}|{}", bits.slice(0, n), bits.slice(n, 2 * n));
        let full = BitVec::from_index(self.label_len(), index as u64);
        match self.kind {
            DistKind::State => part(full),
            DistKind::Unitary => format!(
                "{}/{}",
                part(full.slice(0, 2 * n)),
                part(full.slice(2 * n, 4 * n))
            ),
        }
    }
}

impl fmt::Display for CharDist {
    /// CSV with header `label,probability`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "label,probability")?;
        for (i, p) in self.table.iter().enumerate() {
            writeln!(f, "{},{p:e}", self.label_string(i))?;
        }
        Ok(())
    }
}

/// `p_ψ(x) = 2^{−n} |⟨ψ|P_x|ψ⟩|²`.
pub fn char_dist_state(psi: &StateVector) -> Result<CharDist> {
    let n = psi.n();
    budget("qubits for state characteristic distribution", n, MAX_STATE_DIST_QUBITS)?;
    let amps: Vec<Complex64> = psi.amplitudes().iter().copied().collect();
    let scale = 2f64.powi(-(n as i32));
    let table = (0..1u64 << (2 * n))
        .into_par_iter()
        .map(|x| {
            let px = weyl_apply(n, x, &amps);
            let e: Complex64 = amps.iter().zip(&px).map(|(a, b)| a.conj() * b).sum();
            scale * e.norm_sqr()
        })
        .collect();
    Ok(CharDist {
        n,
        kind: DistKind::State,
        table,
    })
}

// tr(P_x U P_y U†) for every x, one row per y.
fn trace_rows(u: &DenseUnitary) -> Vec<Vec<f64>> {
    let n = u.n();
    let d = u.dim();
    let labels = 1u64 << (2 * n);
    let monomials: Vec<(usize, Vec<Complex64>)> = (0..labels).map(|x| weyl_monomial(n, x)).collect();
    let m = u.matrix();
    let m_dag = m.adjoint();
    monomials
        .par_iter()
        .map(|(a, ph)| {
            let up = CMatrix::from_fn(d, d, |i, k| m[(i, k ^ a)] * ph[k]);
            let my = up * &m_dag;
            monomials
                .iter()
                .map(|(ax, phx)| {
                    let tr: Complex64 = (0..d).map(|k| phx[k ^ ax] * my[(k ^ ax, k)]).sum();
                    tr.re
                })
                .collect()
        })
        .collect()
}

fn unitary_table(u: &DenseUnitary) -> CharDist {
    let n = u.n();
    let side = 1usize << (2 * n);
    let rows = trace_rows(u);
    let scale = 2f64.powi(-(4 * n as i32));
    let mut table = vec![0.0; side * side];
    for (y, row) in rows.iter().enumerate() {
        for (x, tr) in row.iter().enumerate() {
            table[x * side + y] = scale * tr * tr;
        }
    }
    CharDist {
        n,
        kind: DistKind::Unitary,
        table,
    }
}

/// `p_U(x, y) = 2^{−4n} tr(P_x U P_y U†)²`, stored in full.
pub fn char_dist_unitary(u: &DenseUnitary) -> Result<CharDist> {
    budget("qubits for unitary characteristic table", u.n(), MAX_UNITARY_TABLE_QUBITS)?;
    Ok(unitary_table(u))
}

/// As [`char_dist_unitary`], allowing the 2^{12}-squared table at three qubits.
pub fn char_dist_unitary_large(u: &DenseUnitary) -> Result<CharDist> {
    budget(
        "qubits for unitary characteristic table (large)",
        u.n(),
        MAX_UNITARY_TABLE_QUBITS_LARGE,
    )?;
    Ok(unitary_table(u))
}

/// Sums over `p_U` computed without storing the table.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnitaryMoments {
    pub n: usize,
    pub total: f64,
    /// `Σ p²`.
    pub l2_squared: f64,
    /// `Σ p³`.
    pub l3_cubed: f64,
    /// `Σ_x p(x, x)`.
    pub diagonal: f64,
}

pub fn unitary_moments(u: &DenseUnitary) -> Result<UnitaryMoments> {
    let n = u.n();
    budget("qubits for unitary moments", n, MAX_UNITARY_MOMENT_QUBITS)?;
    let scale = 2f64.powi(-(4 * n as i32));
    let rows = trace_rows(u);
    let mut m = UnitaryMoments {
        n,
        total: 0.0,
        l2_squared: 0.0,
        l3_cubed: 0.0,
        diagonal: 0.0,
    };
    for (y, row) in rows.iter().enumerate() {
        for (x, tr) in row.iter().enumerate() {
            let p = scale * tr * tr;
            m.total += p;
            m.l2_squared += p * p;
            m.l3_cubed += p * p * p;
            if x == y {
                m.diagonal += p;
            }
        }
    }
    Ok(m)
}

/// Fourier coefficients `Û(x) = tr(U P_x) / 2ⁿ`.
pub fn weyl_fourier(u: &DenseUnitary) -> Vec<Complex64> {
    let n = u.n();
    let d = u.dim();
    let m = u.matrix();
    (0..1u64 << (2 * n))
        .map(|x| {
            let (a, ph) = weyl_monomial(n, x);
            let tr: Complex64 = (0..d).map(|k| m[(k, k ^ a)] * ph[k]).sum();
            tr / d as f64
        })
        .collect()
}

/// Index of the Choi-state label carrying `p_U(x, y)`.
///
/// With `x = (a, b)` on the system and `y = (a′, b′)` on the reference, the
/// two-register label is `((a, a′) | (b, b′))`.
pub fn pair_to_state_label(n: usize, x: u64, y: u64) -> u64 {
    let mask = (1u64 << n) - 1;
    let (a, b) = (x >> n, x & mask);
    let (a2, b2) = (y >> n, y & mask);
    ((((a << n) | a2) << (2 * n)) | (b << n)) | b2
}

fn check_ambient(d: &CharDist, v: &Subspace) -> Result<()> {
    if v.ambient_dim() != d.label_len() {
        return Err(Error::LengthMismatch {
            left: v.ambient_dim(),
            right: d.label_len(),
        });
    }
    Ok(())
}

/// `p(V) = Σ_{v ∈ V} p(v)`.
pub fn subspace_weight(d: &CharDist, v: &Subspace) -> Result<f64> {
    check_ambient(d, v)?;
    Ok(v.element_indices()?
        .into_iter()
        .map(|i| d.table[i as usize])
        .sum())
}

/// Weight of the coset `V + shift`.
pub fn shifted_weight(d: &CharDist, v: &Subspace, shift: &BitVec) -> Result<f64> {
    check_ambient(d, v)?;
    if shift.len() != d.label_len() {
        return Err(Error::LengthMismatch {
            left: shift.len(),
            right: d.label_len(),
        });
    }
    let s = shift.to_index();
    Ok(v.element_indices()?
        .into_iter()
        .map(|i| d.table[(i ^ s) as usize])
        .sum())
}

/// `{x : 2ⁿ p_ψ(x) > 1/2}`.
///
/// Entries within 1e−10 of the threshold count as not exceeding it.
pub fn high_weight_set(d: &CharDist) -> Result<Vec<WeylLabel>> {
    if d.kind != DistKind::State {
        return Err(Error::InvalidInput("high-weight set needs a state distribution".into()));
    }
    let scale = 2f64.powi(d.n as i32);
    Ok(d.table
        .iter()
        .enumerate()
        .filter(|(_, &p)| scale * p > 0.5 + 1e-10)
        .map(|(i, _)| WeylLabel::from_index(d.n, i as u64))
        .collect())
}
