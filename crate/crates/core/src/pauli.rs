//! Weyl operators with exact Z₄ phases, stabilizer tableaux and projective Cliffords.
//!
//! A label `x = (a | b) ∈ F₂^{2n}` names `P_x = i^{|a∧b|} X^a Z^b`. On basis
//! states this is the monomial map
//! `P_x |k⟩ = i^{|a∧b|} (−1)^{|b∧k|} |k ⊕ a⟩`, with qubit 0 the most
//! significant bit of `k`. Per qubit, `(1,1)` is `Y`.
//!
//! A [`CliffordElement`] `(S, r)` is the projective unitary `C` with
//! `C P_{e_k} C† = (−1)^{r_k} P_{S e_k}`, where `S e_k` is column `k` of `S`.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::densesim::{DenseUnitary, StateVector};
use crate::error::{budget, Error, Result};
use crate::gf2::{self, enumerate_subspaces, BitMatrix, BitVec, Subspace};

/// Largest qubit count for dense Weyl, state and Clifford matrices.
pub const MAX_DENSE_QUBITS: usize = 6;
/// Largest qubit count for listing the projective Clifford group.
pub const MAX_CLIFFORD_ENUM_QUBITS: usize = 2;
/// Largest qubit count for listing all stabilizer states.
pub const MAX_STAB_ENUM_QUBITS: usize = 4;

pub(crate) const I_POW: [Complex64; 4] = [
    Complex64::new(1.0, 0.0),
    Complex64::new(0.0, 1.0),
    Complex64::new(-1.0, 0.0),
    Complex64::new(0.0, -1.0),
];

/// A phase-space label `x = (a | b)` for `n` qubits.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WeylLabel {
    n: usize,
    x: BitVec,
}

impl WeylLabel {
    pub fn new(n: usize, x: BitVec) -> Result<Self> {
        if x.len() != 2 * n {
            return Err(Error::LengthMismatch {
                left: x.len(),
                right: 2 * n,
            });
        }
        Ok(Self { n, x })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            n,
            x: BitVec::zeros(2 * n),
        }
    }

    /// Label from the packed index `(a << n) | b`.
    pub fn from_index(n: usize, index: u64) -> Self {
        Self {
            n,
            x: BitVec::from_index(2 * n, index),
        }
    }

    pub fn index(&self) -> u64 {
        self.x.to_index()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bits(&self) -> &BitVec {
        &self.x
    }

    /// X part as a big-endian integer.
    pub fn a(&self) -> u64 {
        self.index() >> self.n
    }

    /// Z part as a big-endian integer.
    pub fn b(&self) -> u64 {
        self.index() & ((1u64 << self.n) - 1)
    }

    pub fn is_identity(&self) -> bool {
        self.x.is_zero()
    }

    pub fn commutes_with(&self, other: &WeylLabel) -> bool {
        !gf2::symp(&self.x, &other.x)
    }

    /// Single-qubit letters, e.g. `"XIZ"`.
    pub fn letters(&self) -> String {
        (0..self.n)
            .map(|q| match (self.x.get(q), self.x.get(self.n + q)) {
                (false, false) => 'I',
                (true, false) => 'X',
                (false, true) => 'Z',
                (true, true) => 'Y',
            })
            .collect()
    }

    pub fn from_letters(s: &str) -> Result<Self> {
        let letters: Vec<char> = s.chars().collect();
        let n = letters.len();
        let mut x = BitVec::zeros(2 * n);
        for (q, c) in letters.into_iter().enumerate() {
            let (a, b) = match c {
                'I' => (false, false),
                'X' => (true, false),
                'Z' => (false, true),
                'Y' => (true, true),
                other => return Err(Error::Parse(format!("unknown Pauli letter {other:?}"))),
            };
            x.set(q, a);
            x.set(n + q, b);
        }
        Ok(Self { n, x })
    }
}

impl fmt::Debug for WeylLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "P[{}]", self.letters())
    }
}

impl fmt::Display for WeylLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.letters())
    }
}

/// Applies `P_x` (packed label) to a state vector of `n` qubits.
pub fn weyl_apply(n: usize, x: u64, psi: &[Complex64]) -> Vec<Complex64> {
    let d = 1usize << n;
    debug_assert_eq!(psi.len(), d);
    let mask = (d as u64) - 1;
    let (a, b) = ((x >> n) & mask, x & mask);
    let base = (a & b).count_ones() as usize;
    let mut out = vec![Complex64::new(0.0, 0.0); d];
    for (k, amp) in psi.iter().enumerate() {
        let e = (base + 2 * (b & k as u64).count_ones() as usize) % 4;
        out[k ^ a as usize] = I_POW[e] * amp;
    }
    out
}

/// Column data of the monomial `P_x`: `P_x |k⟩ = phase[k] |k ⊕ a⟩`.
pub(crate) fn weyl_monomial(n: usize, x: u64) -> (usize, Vec<Complex64>) {
    let d = 1usize << n;
    let mask = (d as u64) - 1;
    let (a, b) = ((x >> n) & mask, x & mask);
    let base = (a & b).count_ones() as usize;
    let phases = (0..d)
        .map(|k| I_POW[(base + 2 * (b & k as u64).count_ones() as usize) % 4])
        .collect();
    (a as usize, phases)
}

/// Dense `2ⁿ × 2ⁿ` matrix of `P_x`.
pub fn weyl_matrix(label: &WeylLabel) -> Result<DMatrix<Complex64>> {
    budget("qubits for dense Weyl matrix", label.n, MAX_DENSE_QUBITS)?;
    Ok(weyl_matrix_index(label.n, label.index()))
}

pub(crate) fn weyl_matrix_index(n: usize, x: u64) -> DMatrix<Complex64> {
    let d = 1usize << n;
    let (a, phases) = weyl_monomial(n, x);
    let mut m = DMatrix::zeros(d, d);
    for (k, ph) in phases.into_iter().enumerate() {
        m[(k ^ a, k)] = ph;
    }
    m
}

/// `i^phase · P_x` with the phase kept as an exponent in Z₄.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PhasedPauli {
    pub label: WeylLabel,
    pub phase: u8,
}

impl PhasedPauli {
    pub fn new(label: WeylLabel, phase: u8) -> Self {
        Self {
            label,
            phase: phase % 4,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::new(WeylLabel::identity(n), 0)
    }

    pub fn n(&self) -> usize {
        self.label.n
    }

    pub fn is_hermitian(&self) -> bool {
        self.phase.is_multiple_of(2)
    }

    pub fn negated(&self) -> Self {
        Self::new(self.label.clone(), self.phase + 2)
    }

    pub fn matrix(&self) -> Result<DMatrix<Complex64>> {
        Ok(weyl_matrix(&self.label)? * I_POW[self.phase as usize])
    }

    pub fn apply(&self, psi: &[Complex64]) -> Vec<Complex64> {
        let ph = I_POW[self.phase as usize];
        let mut v = weyl_apply(self.n(), self.label.index(), psi);
        for z in &mut v {
            *z *= ph;
        }
        v
    }
}

/// Exact product of two phased Paulis.
pub fn weyl_mul(p: &PhasedPauli, q: &PhasedPauli) -> Result<PhasedPauli> {
    if p.n() != q.n() {
        return Err(Error::LengthMismatch {
            left: p.n(),
            right: q.n(),
        });
    }
    let (a, b) = (p.label.a(), p.label.b());
    let (a2, b2) = (q.label.a(), q.label.b());
    // X^a Z^b X^a' Z^b' = (−1)^{b·a'} X^{a⊕a'} Z^{b⊕b'}, then re-absorb the i^{a·b} factors.
    let e = (a & b).count_ones() as i64 + (a2 & b2).count_ones() as i64
        + 2 * (b & a2).count_ones() as i64
        - ((a ^ a2) & (b ^ b2)).count_ones() as i64
        + p.phase as i64
        + q.phase as i64;
    let label = WeylLabel::new(p.n(), p.label.x.xor(&q.label.x))?;
    Ok(PhasedPauli::new(label, e.rem_euclid(4) as u8))
}

impl fmt::Display for PhasedPauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = ["", "i", "-", "-i"][self.phase as usize];
        write!(f, "{prefix}{}", self.label.letters())
    }
}

impl fmt::Debug for PhasedPauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PhasedPauli({self})")
    }
}

impl FromStr for PhasedPauli {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (phase, rest) = if let Some(r) = s.strip_prefix("+i") {
            (1, r)
        } else if let Some(r) = s.strip_prefix("-i") {
            (3, r)
        } else if let Some(r) = s.strip_prefix('i') {
            (1, r)
        } else if let Some(r) = s.strip_prefix('-') {
            (2, r)
        } else if let Some(r) = s.strip_prefix('+') {
            (0, r)
        } else {
            (0, s)
        };
        if rest.is_empty() {
            return Err(Error::Parse(format!("no Pauli letters in {s:?}")));
        }
        Ok(PhasedPauli::new(WeylLabel::from_letters(rest)?, phase))
    }
}

impl Serialize for PhasedPauli {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for PhasedPauli {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

/// `n` commuting Hermitian generators with independent labels.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct StabilizerTableau {
    n: usize,
    generators: Vec<PhasedPauli>,
}

impl StabilizerTableau {
    pub fn new(generators: Vec<PhasedPauli>) -> Result<Self> {
        let n = generators.len();
        if let Some(g) = generators.iter().find(|g| g.n() != n) {
            return Err(Error::InconsistentTableau(format!(
                "{n} generators but {g} acts on {} qubits",
                g.n()
            )));
        }
        if let Some(g) = generators.iter().find(|g| !g.is_hermitian()) {
            return Err(Error::InconsistentTableau(format!("{g} is not Hermitian")));
        }
        for (i, g) in generators.iter().enumerate() {
            for h in &generators[i + 1..] {
                if !g.label.commutes_with(&h.label) {
                    return Err(Error::InconsistentTableau(format!("{g} and {h} anticommute")));
                }
            }
        }
        let t = Self { n, generators };
        t.reduced()?;
        Ok(t)
    }

    /// The state `|0ⁿ⟩`, stabilized by `Z_1, …, Z_n`.
    pub fn zero_state(n: usize) -> Self {
        let generators = (0..n)
            .map(|j| PhasedPauli::new(WeylLabel::new(n, BitVec::unit(2 * n, n + j)).unwrap(), 0))
            .collect();
        Self { n, generators }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn generators(&self) -> &[PhasedPauli] {
        &self.generators
    }

    /// Span of the generator labels.
    pub fn lagrangian(&self) -> Subspace {
        Subspace::from_generators(
            2 * self.n,
            self.generators.iter().map(|g| g.label.x.clone()).collect(),
        )
        .expect("labels have length 2n")
    }

    // Gauss-Jordan on labels, carrying phases through exact products.
    fn reduced(&self) -> Result<Vec<PhasedPauli>> {
        let mut rows = self.generators.clone();
        let mut r = 0;
        for col in 0..2 * self.n {
            let Some(p) = (r..rows.len()).find(|&i| rows[i].label.x.get(col)) else {
                continue;
            };
            rows.swap(r, p);
            let pivot = rows[r].clone();
            for (i, row) in rows.iter_mut().enumerate() {
                if i != r && row.label.x.get(col) {
                    *row = weyl_mul(row, &pivot)?;
                }
            }
            r += 1;
        }
        if let Some(z) = rows[r..].iter().find(|g| g.label.is_identity()) {
            return Err(Error::InconsistentTableau(if z.phase == 2 {
                "-I lies in the stabilizer group".into()
            } else {
                "generators are dependent".into()
            }));
        }
        Ok(rows)
    }

    /// Canonical generating set: labels in RREF with their exact signs.
    pub fn canonical(&self) -> StabilizerTableau {
        Self {
            n: self.n,
            generators: self.reduced().expect("validated at construction"),
        }
    }

    /// Unit vector fixed by every generator.
    pub fn state_vector(&self) -> Result<StateVector> {
        budget("qubits for stabilizer state vector", self.n, MAX_DENSE_QUBITS)?;
        let d = 1usize << self.n;
        for r in 0..d {
            let mut v = vec![Complex64::new(0.0, 0.0); d];
            v[r] = Complex64::new(1.0, 0.0);
            for g in &self.generators {
                let gv = g.apply(&v);
                for (a, b) in v.iter_mut().zip(gv) {
                    *a = (*a + b) * 0.5;
                }
            }
            let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm > 1e-6 {
                return StateVector::new(self.n, DVector::from_vec(v).unscale(norm));
            }
        }
        Err(Error::Internal("projector annihilated every basis state".into()))
    }
}

impl fmt::Debug for StabilizerTableau {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.generators.iter().map(|g| g.to_string())).finish()
    }
}

impl Serialize for StabilizerTableau {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.generators.serialize(s)
    }
}

impl<'de> Deserialize<'de> for StabilizerTableau {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let gens = Vec::<PhasedPauli>::deserialize(d)?;
        StabilizerTableau::new(gens).map_err(serde::de::Error::custom)
    }
}

/// `Ω` for the block order `(a | b)`.
pub fn symplectic_form(n: usize) -> BitMatrix {
    let mut m = BitMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        m.set(i, n + i, true);
        m.set(n + i, i, true);
    }
    m
}

/// `Sᵀ Ω S = Ω`.
pub fn is_symplectic(s: &BitMatrix) -> bool {
    if s.nrows() != s.ncols() || !s.nrows().is_multiple_of(2) {
        return false;
    }
    let n = s.nrows() / 2;
    let omega = symplectic_form(n);
    let lhs = s.transpose().mul(&omega).and_then(|m| m.mul(s));
    lhs.map(|m| m == omega).unwrap_or(false)
}

/// Projective Clifford unitary in symplectic-plus-signs form.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CliffordElement {
    n: usize,
    symplectic: BitMatrix,
    phase_bits: BitVec,
}

impl CliffordElement {
    pub fn new(symplectic: BitMatrix, phase_bits: BitVec) -> Result<Self> {
        let m = symplectic.nrows();
        if !m.is_multiple_of(2) {
            return Err(Error::OddLength(m));
        }
        if phase_bits.len() != m {
            return Err(Error::LengthMismatch {
                left: phase_bits.len(),
                right: m,
            });
        }
        if !is_symplectic(&symplectic) {
            return Err(Error::NotSymplectic);
        }
        Ok(Self {
            n: m / 2,
            symplectic,
            phase_bits,
        })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            n,
            symplectic: BitMatrix::identity(2 * n),
            phase_bits: BitVec::zeros(2 * n),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn symplectic(&self) -> &BitMatrix {
        &self.symplectic
    }

    pub fn phase_bits(&self) -> &BitVec {
        &self.phase_bits
    }

    /// `C P_{e_k} C†`.
    pub fn image_of_generator(&self, k: usize) -> PhasedPauli {
        let label = WeylLabel {
            n: self.n,
            x: self.symplectic.column(k),
        };
        PhasedPauli::new(label, if self.phase_bits.get(k) { 2 } else { 0 })
    }

    /// `C p C†`, exact including sign.
    pub fn conjugate(&self, p: &PhasedPauli) -> Result<PhasedPauli> {
        if p.n() != self.n {
            return Err(Error::LengthMismatch {
                left: p.n(),
                right: self.n,
            });
        }
        // Write P_x = i^{-φ} ∏_k P_{e_k} (ascending k), then conjugate factor by factor.
        let mut product = PhasedPauli::identity(self.n);
        let mut image = PhasedPauli::identity(self.n);
        for k in p.label.x.ones_positions() {
            let e = PhasedPauli::new(
                WeylLabel {
                    n: self.n,
                    x: BitVec::unit(2 * self.n, k),
                },
                0,
            );
            product = weyl_mul(&product, &e)?;
            image = weyl_mul(&image, &self.image_of_generator(k))?;
        }
        let phase = (4 + p.phase as i64 + image.phase as i64 - product.phase as i64).rem_euclid(4);
        Ok(PhasedPauli::new(image.label, phase as u8))
    }

    pub fn apply_to_tableau(&self, t: &StabilizerTableau) -> Result<StabilizerTableau> {
        let generators = t
            .generators()
            .iter()
            .map(|g| self.conjugate(g))
            .collect::<Result<Vec<_>>>()?;
        StabilizerTableau::new(generators)
    }

    /// A dense representative, fixed up to a global phase.
    pub fn matrix(&self) -> Result<DenseUnitary> {
        budget("qubits for dense Clifford matrix", self.n, MAX_DENSE_QUBITS)?;
        let n = self.n;
        let d = 1usize << n;
        let zero = self
            .apply_to_tableau(&StabilizerTableau::zero_state(n))?
            .state_vector()?;
        let x_images: Vec<PhasedPauli> = (0..n).map(|j| self.image_of_generator(j)).collect();
        let mut m = DMatrix::zeros(d, d);
        let base: Vec<Complex64> = zero.amplitudes().iter().copied().collect();
        for k in 0..d {
            let mut v = base.clone();
            for (j, img) in x_images.iter().enumerate() {
                if (k >> (n - 1 - j)) & 1 == 1 {
                    v = img.apply(&v);
                }
            }
            m.set_column(k, &DVector::from_vec(v));
        }
        DenseUnitary::new(n, m)
    }
}

impl fmt::Debug for CliffordElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "CliffordElement(S={:?}, r={})",
            self.symplectic.to_row_strings(),
            self.phase_bits
        )
    }
}

fn random_combination<R: Rng + ?Sized>(basis: &[BitVec], len: usize, rng: &mut R) -> BitVec {
    let mut v = BitVec::zeros(len);
    for b in basis {
        if rng.random_bool(0.5) {
            v.xor_assign(b);
        }
    }
    v
}

// Basis of {u ∈ W : [u,v] = [u,w] = 0} for a hyperbolic pair (v, w) inside W.
fn symplectic_complement(basis: &[BitVec], v: &BitVec, w: &BitVec) -> Vec<BitVec> {
    let len = v.len();
    let projected: Vec<BitVec> = basis
        .iter()
        .map(|u| {
            let mut p = u.clone();
            if gf2::symp(u, w) {
                p.xor_assign(v);
            }
            if gf2::symp(u, v) {
                p.xor_assign(w);
            }
            p
        })
        .collect();
    Subspace::from_generators(len, projected)
        .expect("same length")
        .basis_vectors()
        .to_vec()
}

fn matrix_from_pairs(n: usize, pairs: &[(BitVec, BitVec)]) -> BitMatrix {
    let mut cols = vec![BitVec::zeros(2 * n); 2 * n];
    for (i, (v, w)) in pairs.iter().enumerate() {
        cols[i] = v.clone();
        cols[n + i] = w.clone();
    }
    BitMatrix::from_rows(2 * n, cols).expect("same length").transpose()
}

/// Exactly uniform element of Sp(2n, F₂).
///
/// Builds a random symplectic basis: `v` uniform nonzero in the current
/// complement, `w` uniform among partners with `[v,w] = 1`, then recurse on
/// the complement of `span{v,w}`. Every matrix arises from exactly one run.
pub fn random_symplectic<R: Rng + ?Sized>(n: usize, rng: &mut R) -> BitMatrix {
    let len = 2 * n;
    let mut basis: Vec<BitVec> = (0..len).map(|i| BitVec::unit(len, i)).collect();
    let mut pairs = Vec::with_capacity(n);
    for _ in 0..n {
        let v = loop {
            let v = random_combination(&basis, len, rng);
            if !v.is_zero() {
                break v;
            }
        };
        let w = loop {
            let w = random_combination(&basis, len, rng);
            if gf2::symp(&v, &w) {
                break w;
            }
        };
        basis = symplectic_complement(&basis, &v, &w);
        pairs.push((v, w));
    }
    matrix_from_pairs(n, &pairs)
}

/// Uniform over the projective Clifford group.
pub fn random_clifford<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CliffordElement {
    let symplectic = random_symplectic(n, rng);
    let phase_bits = BitVec::from_bools(&(0..2 * n).map(|_| rng.random_bool(0.5)).collect::<Vec<_>>());
    CliffordElement {
        n,
        symplectic,
        phase_bits,
    }
}

/// Uniform over Stab(n).
pub fn random_stabilizer_state<R: Rng + ?Sized>(n: usize, rng: &mut R) -> StabilizerTableau {
    random_clifford(n, rng)
        .apply_to_tableau(&StabilizerTableau::zero_state(n))
        .expect("Cliffords map tableaux to tableaux")
}

/// Every element of Sp(2n, F₂), each once.
pub fn enumerate_symplectic(n: usize) -> Result<Vec<BitMatrix>> {
    budget("qubits for symplectic group enumeration", n, MAX_CLIFFORD_ENUM_QUBITS)?;
    let len = 2 * n;
    let basis: Vec<BitVec> = (0..len).map(|i| BitVec::unit(len, i)).collect();
    let mut out = Vec::new();
    let mut pairs = Vec::new();
    extend_pairs(n, &basis, &mut pairs, &mut out);
    Ok(out)
}

fn extend_pairs(
    n: usize,
    basis: &[BitVec],
    pairs: &mut Vec<(BitVec, BitVec)>,
    out: &mut Vec<BitMatrix>,
) {
    if pairs.len() == n {
        out.push(matrix_from_pairs(n, pairs));
        return;
    }
    let w_space = Subspace::from_generators(2 * n, basis.to_vec()).expect("same length");
    let elements = w_space.elements().expect("dimension at most 2n");
    for v in elements.iter().filter(|v| !v.is_zero()) {
        for w in elements.iter().filter(|w| gf2::symp(v, w)) {
            let rest = symplectic_complement(basis, v, w);
            pairs.push((v.clone(), w.clone()));
            extend_pairs(n, &rest, pairs, out);
            pairs.pop();
        }
    }
}

/// The projective Clifford group: every symplectic matrix with every sign pattern.
pub fn enumerate_cliffords(n: usize) -> Result<Vec<CliffordElement>> {
    let sps = enumerate_symplectic(n)?;
    let mut out = Vec::with_capacity(sps.len() << (2 * n));
    for s in sps {
        for r in 0..1u64 << (2 * n) {
            out.push(CliffordElement {
                n,
                symplectic: s.clone(),
                phase_bits: BitVec::from_index(2 * n, r),
            });
        }
    }
    Ok(out)
}

/// Every stabilizer state on `n` qubits: each Lagrangian with each sign choice.
pub fn enumerate_stabilizer_states(n: usize) -> Result<Vec<StabilizerTableau>> {
    budget("qubits for stabilizer state enumeration", n, MAX_STAB_ENUM_QUBITS)?;
    let mut out = Vec::new();
    for l in enumerate_subspaces(2 * n, n)? {
        if !l.is_lagrangian()? {
            continue;
        }
        for signs in 0..1u64 << n {
            let generators = l
                .basis_vectors()
                .iter()
                .enumerate()
                .map(|(i, v)| {
                    let neg = (signs >> i) & 1 == 1;
                    PhasedPauli::new(WeylLabel { n, x: v.clone() }, if neg { 2 } else { 0 })
                })
                .collect();
            out.push(StabilizerTableau { n, generators });
        }
    }
    Ok(out)
}

/// `|Stab(n)| = 2ⁿ ∏_{k=1}^{n} (2ᵏ + 1)`.
pub fn stabilizer_state_count(n: usize) -> u128 {
    (1..=n as u32).fold(1u128 << n, |acc, k| acc * ((1u128 << k) + 1))
}
