//! Clifford commutant: self-dual codes, `Σ_{t,t}`, the operators `r(T)` and
//! `R(T)`, `Π₄`, Gram/Weingarten data, twirls and partial transposes.
//!
//! A code lives in `F₂^{2t}` as `(x | y)` with `x, y ∈ F₂^t`; `r(T) = Σ |x⟩⟨y|`.
//! Dense `t`-copy operators use a copies-major layout: copy 0 holds the most
//! significant `n` bits of an index.

mod transpose;
mod twirl;

pub use transpose::{
    min_trace_norm_pt, partial_transpose_code, partial_transpose_dense, ppt_overlap_check,
    unitary_partial_transpose, unitary_partial_transpose_with, PivotRule, UnitaryTranspose,
};
pub use twirl::{
    avg_stab_fourcopy, clifford_twirl_exact, clifford_twirl_weingarten, fourcopy_formula, gram_dense,
    gram_weingarten, pi_sym, pseudo_inverse, GramWeingarten,
};

use std::collections::HashSet;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::densesim::CMatrix;
use crate::error::{budget, Error, Result};
use crate::gf2::{BitMatrix, BitVec, Subspace};
use crate::pauli::weyl_matrix_index;

pub const MAX_SD_T: usize = 4;
pub const MAX_SIGMA_T: usize = 5;
/// Cap on `n·t` for dense `t`-copy operators.
pub const MAX_DENSE_COPY_QUBITS: usize = 8;
pub const MAX_PI4_QUBITS: usize = 2;

/// A self-dual binary `[2t, t]` code.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SelfDualCode {
    t: usize,
    space: Subspace,
}

impl SelfDualCode {
    pub fn new(space: Subspace) -> Result<Self> {
        let m = space.ambient_dim();
        if !m.is_multiple_of(2) {
            return Err(Error::OddLength(m));
        }
        if space.dim() != m / 2 || !space.is_self_dual() {
            return Err(Error::InvalidInput("code is not self-dual of dimension t".into()));
        }
        Ok(Self { t: m / 2, space })
    }

    pub fn from_generator(g: &BitMatrix) -> Result<Self> {
        Self::new(Subspace::from_matrix(g))
    }

    pub fn from_rows<S: AsRef<str>>(rows: &[S]) -> Result<Self> {
        Self::from_generator(&BitMatrix::from_row_strings(rows)?)
    }

    /// The diagonal `{(x, x)}`.
    pub fn identity(t: usize) -> Self {
        let gens = (0..t)
            .map(|i| BitVec::unit(t, i).concat(&BitVec::unit(t, i)))
            .collect();
        Self::new(Subspace::from_generators(2 * t, gens).expect("same length")).expect("diagonal is self-dual")
    }

    /// `T_O = {(Ox, x)}`.
    pub fn graph(o: &BitMatrix) -> Result<Self> {
        let t = o.ncols();
        let gens = (0..t)
            .map(|i| o.column(i).concat(&BitVec::unit(t, i)))
            .collect();
        Self::new(Subspace::from_generators(2 * t, gens)?)
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn space(&self) -> &Subspace {
        &self.space
    }

    /// Canonical generator `[A | B]` (RREF).
    pub fn generator(&self) -> &BitMatrix {
        self.space.basis()
    }

    pub fn a_block(&self) -> BitMatrix {
        self.generator().select_columns(&(0..self.t).collect::<Vec<_>>())
    }

    pub fn b_block(&self) -> BitMatrix {
        self.generator().select_columns(&(self.t..2 * self.t).collect::<Vec<_>>())
    }

    /// Codewords as `(x, y)` index pairs.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        let mask = (1u64 << self.t) - 1;
        self.space
            .element_indices()
            .expect("t ≤ 12")
            .into_iter()
            .map(|v| ((v >> self.t) as usize, (v & mask) as usize))
            .collect()
    }

    pub fn contains_pair(&self, x: &BitVec, y: &BitVec) -> bool {
        self.space.contains(&x.concat(y))
    }

    /// `Some(O)` with `self = T_O` when the `A` block is invertible.
    pub fn orthogonal_matrix(&self) -> Option<BitMatrix> {
        // Codewords are (Aᵀc, Bᵀc); x = Oy then gives O = Aᵀ (Bᵀ)⁻¹.
        let b_inv = self.b_block().transpose().inverse()?;
        self.a_block().transpose().mul(&b_inv).ok()
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.t)
    }
}

impl fmt::Debug for SelfDualCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SelfDualCode({})", self.generator().to_row_strings().join(","))
    }
}

impl Serialize for SelfDualCode {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.generator().serialize(s)
    }
}

impl<'de> Deserialize<'de> for SelfDualCode {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let g = BitMatrix::deserialize(d)?;
        Self::from_generator(&g).map_err(serde::de::Error::custom)
    }
}

/// An element of `Σ_{t,t}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "SelfDualCode", into = "SelfDualCode")]
pub struct StochasticLagrangian {
    code: SelfDualCode,
}

impl TryFrom<SelfDualCode> for StochasticLagrangian {
    type Error = Error;
    fn try_from(code: SelfDualCode) -> Result<Self> {
        Self::new(code)
    }
}

impl From<StochasticLagrangian> for SelfDualCode {
    fn from(s: StochasticLagrangian) -> Self {
        s.code
    }
}

fn mod4_defect(t: usize, v: u64) -> u32 {
    let mask = (1u64 << t) - 1;
    let x = ((v >> t) & mask).count_ones();
    let y = (v & mask).count_ones();
    (4 + x % 4 - y % 4) % 4
}

impl StochasticLagrangian {
    pub fn new(code: SelfDualCode) -> Result<Self> {
        let t = code.t;
        if !code.space.contains(&BitVec::ones(2 * t)) {
            return Err(Error::InvalidInput("code does not contain the all-ones vector".into()));
        }
        if code
            .space
            .element_indices()?
            .into_iter()
            .any(|v| mod4_defect(t, v) != 0)
        {
            return Err(Error::InvalidInput("code is not totally isotropic mod 4".into()));
        }
        Ok(Self { code })
    }

    pub fn identity(t: usize) -> Self {
        Self::new(SelfDualCode::identity(t)).expect("diagonal is stochastic")
    }

    pub fn code(&self) -> &SelfDualCode {
        &self.code
    }

    pub fn t(&self) -> usize {
        self.code.t
    }
}

/// The special element of `Σ_{4,4}` with `R(T₄) = 2ⁿ Π₄`.
pub fn t4() -> StochasticLagrangian {
    let code = SelfDualCode::from_rows(&["10011001", "01010101", "00001111", "11110000"]).expect("valid code");
    StochasticLagrangian::new(code).expect("T4 is stochastic")
}

fn basis_key(s: &Subspace) -> Vec<u64> {
    s.basis_vectors().iter().map(BitVec::to_index).collect()
}

// Grows self-orthogonal spaces from span{1} one admissible vector at a time,
// deduplicating by canonical basis, until dimension t.
fn grow_self_orthogonal(t: usize, admissible: impl Fn(u64) -> bool) -> Vec<Subspace> {
    let m = 2 * t;
    let start = Subspace::from_generators(m, vec![BitVec::ones(m)]).expect("same length");
    let mut level: Vec<Subspace> = vec![start];
    for _ in 1..t {
        let mut seen = HashSet::new();
        let mut next = Vec::new();
        for v in &level {
            let basis: Vec<u64> = basis_key(v);
            for w in 1u64..1 << m {
                if w.count_ones() % 2 != 0 || !admissible(w) {
                    continue;
                }
                if basis.iter().any(|b| (b & w).count_ones() % 2 != 0) {
                    continue;
                }
                let wv = BitVec::from_index(m, w);
                if v.contains(&wv) {
                    continue;
                }
                let s = v
                    .sum(&Subspace::from_generators(m, vec![wv]).expect("same length"))
                    .expect("same ambient");
                if seen.insert(basis_key(&s)) {
                    next.push(s);
                }
            }
        }
        level = next;
    }
    level.sort_by_key(basis_key);
    level
}

/// All self-dual `[2t, t]` codes, sorted by canonical generator.
pub fn enumerate_sd(t: usize) -> Result<Vec<SelfDualCode>> {
    if t == 0 {
        return Err(Error::InvalidInput("t must be at least 1".into()));
    }
    budget("t for SD(2t) enumeration", t, MAX_SD_T)?;
    grow_self_orthogonal(t, |_| true)
        .into_iter()
        .map(SelfDualCode::new)
        .collect()
}

/// `Σ_{t,t}`: filtered from `SD(2t)` for `t ≤ 4`, direct search at `t = 5`.
pub fn enumerate_sigma_tt(t: usize) -> Result<Vec<StochasticLagrangian>> {
    if t == 0 {
        return Err(Error::InvalidInput("t must be at least 1".into()));
    }
    budget("t for Σ_{t,t} enumeration", t, MAX_SIGMA_T)?;
    if t <= MAX_SD_T {
        Ok(enumerate_sd(t)?
            .into_iter()
            .filter_map(|c| StochasticLagrangian::new(c).ok())
            .collect())
    } else {
        sigma_tt_search(t)
    }
}

/// `Σ_{t,t}` by constrained search (mod-4 isotropy, all-ones start).
pub fn sigma_tt_search(t: usize) -> Result<Vec<StochasticLagrangian>> {
    budget("t for Σ_{t,t} enumeration", t, MAX_SIGMA_T)?;
    grow_self_orthogonal(t, |w| mod4_defect(t, w) == 0)
        .into_iter()
        .map(|s| StochasticLagrangian::new(SelfDualCode::new(s)?))
        .collect()
}

/// `∏_{k=0}^{t−2} (2ᵏ + 1)`.
pub fn sigma_tt_count(t: usize) -> u64 {
    (0..t.saturating_sub(1)).map(|k| (1u64 << k) + 1).product()
}

/// `∏_{i=1}^{t−1} (2ⁱ + 1)`.
pub fn sd_count(t: usize) -> u64 {
    (1..t).map(|i| (1u64 << i) + 1).product()
}

/// `r(D)` as a `2ᵗ × 2ᵗ` matrix.
pub fn r_operator(code: &SelfDualCode) -> CMatrix {
    let d = 1usize << code.t;
    let mut m = CMatrix::zeros(d, d);
    for (x, y) in code.pairs() {
        m[(x, y)] = Complex64::new(1.0, 0.0);
    }
    m
}

/// Nonzero positions of `R(D)` on `n` qubits per copy (copies-major).
pub fn r_support(code: &SelfDualCode, n: usize) -> Vec<(usize, usize)> {
    let t = code.t;
    let pairs = code.pairs();
    let mut out = Vec::with_capacity(pairs.len().pow(n as u32));
    let mut choice = vec![0usize; n];
    loop {
        let (mut row, mut col) = (0usize, 0usize);
        for i in 0..t {
            for (q, &c) in choice.iter().enumerate() {
                let (x, y) = pairs[c];
                let shift = (t - 1 - i) * n + (n - 1 - q);
                row |= ((x >> (t - 1 - i)) & 1) << shift;
                col |= ((y >> (t - 1 - i)) & 1) << shift;
            }
        }
        out.push((row, col));
        let mut j = 0;
        loop {
            if j == n {
                return out;
            }
            choice[j] += 1;
            if choice[j] < pairs.len() {
                break;
            }
            choice[j] = 0;
            j += 1;
        }
    }
}

/// `R(D)` as a dense `2^{nt} × 2^{nt}` matrix.
#[allow(non_snake_case)]
pub fn R_operator(code: &SelfDualCode, n: usize) -> Result<CMatrix> {
    budget("n·t for dense R(T)", n * code.t, MAX_DENSE_COPY_QUBITS)?;
    let d = 1usize << (n * code.t);
    let mut m = CMatrix::zeros(d, d);
    for (r, c) in r_support(code, n) {
        m[(r, c)] = Complex64::new(1.0, 0.0);
    }
    Ok(m)
}

/// `A^{⊗t}`.
pub fn kron_power(a: &CMatrix, t: usize) -> CMatrix {
    let mut out = CMatrix::identity(1, 1);
    for _ in 0..t {
        out = out.kronecker(a);
    }
    out
}

/// `Π₄ = 2^{−2n} Σ_x P_x^{⊗4}`.
pub fn pi4(n: usize) -> Result<CMatrix> {
    budget("qubits for Π₄", n, MAX_PI4_QUBITS)?;
    let d = 1usize << (4 * n);
    let mut m = CMatrix::zeros(d, d);
    for x in 0..1u64 << (2 * n) {
        m += kron_power(&weyl_matrix_index(n, x), 4);
    }
    Ok(m / Complex64::new((1u64 << (2 * n)) as f64, 0.0))
}

pub(crate) fn real_part(m: &CMatrix) -> DMatrix<f64> {
    m.map(|z| z.re)
}
