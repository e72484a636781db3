//! Exact linear algebra over F₂.
//!
//! Vectors are packed into 64-bit words. Coordinate `i` of a vector of
//! length `len` maps to the integer index bit `len - 1 - i`, so the bit
//! string `"0110"` and the computational basis label `|0110⟩` agree.
//!
//! Symplectic vectors of length `2n` use the block order `(a | b)`:
//! the first `n` coordinates are the X part, the last `n` the Z part.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{budget, Error, Result};

/// Largest subspace whose elements may be listed.
pub const MAX_ELEMENT_DIM: usize = 24;
/// Largest ambient dimension for exhaustive subspace enumeration.
pub const MAX_ENUM_AMBIENT: usize = 10;

const WORD: usize = 64;

/// A vector over F₂ of fixed length.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitVec {
    len: usize,
    words: Vec<u64>,
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; len.div_ceil(WORD)],
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut v = Self::zeros(len);
        for i in 0..len {
            v.set(i, true);
        }
        v
    }

    /// Unit vector with coordinate `i` set.
    pub fn unit(len: usize, i: usize) -> Self {
        let mut v = Self::zeros(len);
        v.set(i, true);
        v
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            v.set(i, b);
        }
        v
    }

    /// Builds a vector from 0/1 entries. Any nonzero entry counts as 1.
    pub fn from_bits(bits: &[u8]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            v.set(i, b != 0);
        }
        v
    }

    /// Inverse of [`BitVec::to_index`].
    pub fn from_index(len: usize, index: u64) -> Self {
        assert!(len <= 64, "index form limited to 64 coordinates");
        let mut v = Self::zeros(len);
        for i in 0..len {
            v.set(i, (index >> (len - 1 - i)) & 1 == 1);
        }
        v
    }

    /// Big-endian integer form: coordinate 0 is the most significant bit.
    pub fn to_index(&self) -> u64 {
        assert!(self.len <= 64, "index form limited to 64 coordinates");
        (0..self.len).fold(0u64, |acc, i| (acc << 1) | self.get(i) as u64)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit {i} out of range (len={})", self.len);
        (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit {i} out of range (len={})", self.len);
        let mask = 1u64 << (i % WORD);
        if value {
            self.words[i / WORD] |= mask;
        } else {
            self.words[i / WORD] &= !mask;
        }
    }

    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len, "bit {i} out of range (len={})", self.len);
        self.words[i / WORD] ^= 1u64 << (i % WORD);
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// In-place addition. Panics on length mismatch.
    pub fn xor_assign(&mut self, other: &BitVec) {
        assert_eq!(self.len, other.len, "length mismatch");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn xor(&self, other: &BitVec) -> BitVec {
        let mut out = self.clone();
        out.xor_assign(other);
        out
    }

    /// Parity of the coordinatewise product. Panics on length mismatch.
    pub fn dot(&self, other: &BitVec) -> bool {
        assert_eq!(self.len, other.len, "length mismatch");
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones())
            .sum::<u32>()
            % 2
            == 1
    }

    /// Number of coordinates set in both vectors, as an integer.
    pub fn overlap(&self, other: &BitVec) -> usize {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    pub fn ones_positions(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(move |&i| self.get(i))
    }

    /// Coordinates `range`, as a new vector.
    pub fn slice(&self, start: usize, end: usize) -> BitVec {
        assert!(start <= end && end <= self.len);
        let mut v = BitVec::zeros(end - start);
        for i in start..end {
            v.set(i - start, self.get(i));
        }
        v
    }

    pub fn concat(&self, other: &BitVec) -> BitVec {
        let mut v = BitVec::zeros(self.len + other.len);
        for i in 0..self.len {
            v.set(i, self.get(i));
        }
        for i in 0..other.len {
            v.set(self.len + i, other.get(i));
        }
        v
    }

    /// Reorders coordinates: output coordinate `i` is input coordinate `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> BitVec {
        assert_eq!(perm.len(), self.len);
        let mut v = BitVec::zeros(self.len);
        for (i, &p) in perm.iter().enumerate() {
            v.set(i, self.get(p));
        }
        v
    }

    /// Parses a string of '0'/'1'.
    pub fn parse(s: &str) -> Result<BitVec> {
        let bits: Result<Vec<bool>> = s
            .trim()
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Parse(format!("unexpected character {other:?}"))),
            })
            .collect();
        Ok(BitVec::from_bools(&bits?))
    }
}

impl fmt::Display for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVec({self})")
    }
}

impl Serialize for BitVec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for BitVec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        BitVec::parse(&s).map_err(serde::de::Error::custom)
    }
}

/// Σ xᵢyᵢ mod 2.
pub fn standard_inner(x: &BitVec, y: &BitVec) -> Result<bool> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    Ok(x.dot(y))
}

/// `[x, y] = a·b′ + a′·b` for `x = (a, b)`, `y = (a′, b′)`.
pub fn symplectic_inner(x: &BitVec, y: &BitVec) -> Result<bool> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if !x.len().is_multiple_of(2) {
        return Err(Error::OddLength(x.len()));
    }
    Ok(symp(x, y))
}

// Unchecked variant for internal use on vectors already known to be valid.
pub(crate) fn symp(x: &BitVec, y: &BitVec) -> bool {
    let n = x.len() / 2;
    let mut acc = false;
    for i in 0..n {
        acc ^= x.get(i) & y.get(n + i);
        acc ^= y.get(i) & x.get(n + i);
    }
    acc
}

/// Symplectic form on packed labels `(a << n) | b`.
pub fn symplectic_inner_index(n: usize, x: u64, y: u64) -> bool {
    let mask = (1u64 << n) - 1;
    let (a, b) = (x >> n, x & mask);
    let (a2, b2) = (y >> n, y & mask);
    ((a & b2).count_ones() + (a2 & b).count_ones()) % 2 == 1
}

/// A dense matrix over F₂, stored as row vectors.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    cols: usize,
    rows: Vec<BitVec>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            cols,
            rows: vec![BitVec::zeros(cols); rows],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            cols: n,
            rows: (0..n).map(|i| BitVec::unit(n, i)).collect(),
        }
    }

    pub fn from_rows(cols: usize, rows: Vec<BitVec>) -> Result<Self> {
        if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
            return Err(Error::LengthMismatch {
                left: bad.len(),
                right: cols,
            });
        }
        Ok(Self { cols, rows })
    }

    /// Convenience constructor from nested 0/1 slices.
    pub fn from_bits(rows: &[&[u8]]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        Self::from_rows(cols, rows.iter().map(|r| BitVec::from_bits(r)).collect())
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn rows(&self) -> &[BitVec] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &BitVec {
        &self.rows[i]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut BitVec {
        &mut self.rows[i]
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.rows[i].get(j)
    }

    pub fn set(&mut self, i: usize, j: usize, value: bool) {
        self.rows[i].set(j, value)
    }

    pub fn column(&self, j: usize) -> BitVec {
        BitVec::from_bools(&self.rows.iter().map(|r| r.get(j)).collect::<Vec<_>>())
    }

    pub fn swap_rows(&mut self, i: usize, j: usize) {
        self.rows.swap(i, j);
    }

    pub fn swap_columns(&mut self, i: usize, j: usize) {
        for r in &mut self.rows {
            let (x, y) = (r.get(i), r.get(j));
            r.set(i, y);
            r.set(j, x);
        }
    }

    /// Adds row `src` into row `dst`.
    pub fn add_row(&mut self, src: usize, dst: usize) {
        let s = self.rows[src].clone();
        self.rows[dst].xor_assign(&s);
    }

    pub fn transpose(&self) -> BitMatrix {
        let mut t = BitMatrix::zeros(self.cols, self.rows.len());
        for (i, r) in self.rows.iter().enumerate() {
            for j in r.ones_positions() {
                t.set(j, i, true);
            }
        }
        t
    }

    /// Submatrix keeping the listed columns, in order.
    pub fn select_columns(&self, cols: &[usize]) -> BitMatrix {
        BitMatrix {
            cols: cols.len(),
            rows: self
                .rows
                .iter()
                .map(|r| BitVec::from_bools(&cols.iter().map(|&c| r.get(c)).collect::<Vec<_>>()))
                .collect(),
        }
    }

    /// Matrix-vector product `M x` with `x` a column vector.
    pub fn mul_vec(&self, x: &BitVec) -> Result<BitVec> {
        if x.len() != self.cols {
            return Err(Error::LengthMismatch {
                left: self.cols,
                right: x.len(),
            });
        }
        Ok(BitVec::from_bools(
            &self.rows.iter().map(|r| r.dot(x)).collect::<Vec<_>>(),
        ))
    }

    /// Row vector times matrix, `u M`.
    pub fn vec_mul(&self, u: &BitVec) -> Result<BitVec> {
        if u.len() != self.rows.len() {
            return Err(Error::LengthMismatch {
                left: self.rows.len(),
                right: u.len(),
            });
        }
        let mut acc = BitVec::zeros(self.cols);
        for i in u.ones_positions() {
            acc.xor_assign(&self.rows[i]);
        }
        Ok(acc)
    }

    pub fn mul(&self, other: &BitMatrix) -> Result<BitMatrix> {
        if self.cols != other.nrows() {
            return Err(Error::LengthMismatch {
                left: self.cols,
                right: other.nrows(),
            });
        }
        let rows = self
            .rows
            .iter()
            .map(|r| other.vec_mul(r))
            .collect::<Result<Vec<_>>>()?;
        Ok(BitMatrix {
            cols: other.cols,
            rows,
        })
    }

    /// Inverse of a square matrix, if it exists.
    pub fn inverse(&self) -> Option<BitMatrix> {
        let n = self.rows.len();
        if n != self.cols {
            return None;
        }
        let mut aug: Vec<BitVec> = self
            .rows
            .iter()
            .enumerate()
            .map(|(i, r)| r.concat(&BitVec::unit(n, i)))
            .collect();
        for col in 0..n {
            let pivot = (col..n).find(|&r| aug[r].get(col))?;
            aug.swap(col, pivot);
            let p = aug[col].clone();
            for (r, row) in aug.iter_mut().enumerate() {
                if r != col && row.get(col) {
                    row.xor_assign(&p);
                }
            }
        }
        Some(BitMatrix {
            cols: n,
            rows: aug.iter().map(|r| r.slice(n, 2 * n)).collect(),
        })
    }

    /// Canonical text form: one row of '0'/'1' per line.
    pub fn to_text(&self) -> String {
        self.rows
            .iter()
            .map(|r| r.to_string())
            .collect::<Vec<_>>()
            .join("\n")
    }

    pub fn parse_text(text: &str) -> Result<BitMatrix> {
        let rows = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(BitVec::parse)
            .collect::<Result<Vec<_>>>()?;
        let cols = rows.first().map_or(0, |r| r.len());
        BitMatrix::from_rows(cols, rows)
    }

    pub fn to_row_strings(&self) -> Vec<String> {
        self.rows.iter().map(|r| r.to_string()).collect()
    }

    pub fn from_row_strings<S: AsRef<str>>(rows: &[S]) -> Result<BitMatrix> {
        let rows = rows
            .iter()
            .map(|s| BitVec::parse(s.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        let cols = rows.first().map_or(0, |r| r.len());
        BitMatrix::from_rows(cols, rows)
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BitMatrix {}x{} [", self.rows.len(), self.cols)?;
        for r in &self.rows {
            writeln!(f, "  {r}")?;
        }
        write!(f, "]")
    }
}

impl Serialize for BitMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_row_strings().serialize(s)
    }
}

impl<'de> Deserialize<'de> for BitMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<String>::deserialize(d)?;
        BitMatrix::from_row_strings(&rows).map_err(serde::de::Error::custom)
    }
}

/// Canonical reduced row echelon form and its pivot columns. Zero rows are dropped.
pub fn rref(m: &BitMatrix) -> (BitMatrix, Vec<usize>) {
    let mut rows = m.rows.clone();
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..m.cols {
        if r == rows.len() {
            break;
        }
        let Some(p) = (r..rows.len()).find(|&i| rows[i].get(col)) else {
            continue;
        };
        rows.swap(r, p);
        let pivot = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != r && row.get(col) {
                row.xor_assign(&pivot);
            }
        }
        pivots.push(col);
        r += 1;
    }
    rows.truncate(r);
    (BitMatrix { cols: m.cols, rows }, pivots)
}

pub fn rank(m: &BitMatrix) -> usize {
    rref(m).1.len()
}

/// Right null space `{x : M x = 0}`.
pub fn kernel(m: &BitMatrix) -> Subspace {
    let (r, pivots) = rref(m);
    let free: Vec<usize> = (0..m.cols).filter(|c| !pivots.contains(c)).collect();
    let basis = free
        .iter()
        .map(|&f| {
            let mut v = BitVec::unit(m.cols, f);
            for (row, &p) in r.rows.iter().zip(&pivots) {
                if row.get(f) {
                    v.set(p, true);
                }
            }
            v
        })
        .collect();
    Subspace::from_generators(m.cols, basis).expect("kernel vectors have ambient length")
}

/// Which bilinear form a duality refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Form {
    Standard,
    Symplectic,
}

/// A linear subspace of F₂^m, stored by its canonical RREF basis.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Subspace {
    ambient: usize,
    basis: BitMatrix,
}

impl Subspace {
    pub fn zero(ambient: usize) -> Self {
        Self {
            ambient,
            basis: BitMatrix::zeros(0, ambient),
        }
    }

    pub fn full(ambient: usize) -> Self {
        Self {
            ambient,
            basis: BitMatrix::identity(ambient),
        }
    }

    pub fn from_generators(ambient: usize, gens: Vec<BitVec>) -> Result<Self> {
        let m = BitMatrix::from_rows(ambient, gens)?;
        Ok(Self::from_matrix(&m))
    }

    /// Row space of `m`.
    pub fn from_matrix(m: &BitMatrix) -> Self {
        Self {
            ambient: m.cols,
            basis: rref(m).0,
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn basis(&self) -> &BitMatrix {
        &self.basis
    }

    pub fn basis_vectors(&self) -> &[BitVec] {
        self.basis.rows()
    }

    pub fn contains(&self, v: &BitVec) -> bool {
        if v.len() != self.ambient {
            return false;
        }
        // Reduce against the RREF basis using pivot positions.
        let mut w = v.clone();
        for row in self.basis.rows() {
            let pivot = row.ones_positions().next().expect("rref rows are nonzero");
            if w.get(pivot) {
                w.xor_assign(row);
            }
        }
        w.is_zero()
    }

    pub fn is_subspace_of(&self, other: &Subspace) -> bool {
        self.ambient == other.ambient && self.basis_vectors().iter().all(|v| other.contains(v))
    }

    pub fn sum(&self, other: &Subspace) -> Result<Subspace> {
        if self.ambient != other.ambient {
            return Err(Error::LengthMismatch {
                left: self.ambient,
                right: other.ambient,
            });
        }
        let gens = self
            .basis_vectors()
            .iter()
            .chain(other.basis_vectors())
            .cloned()
            .collect();
        Subspace::from_generators(self.ambient, gens)
    }

    pub fn intersection(&self, other: &Subspace) -> Result<Subspace> {
        // (U ∩ W) = (U⊥ + W⊥)⊥ under the standard form.
        let s = self.dual(Form::Standard).sum(&other.dual(Form::Standard))?;
        Ok(s.dual(Form::Standard))
    }

    /// Lists every element, starting with zero. Guarded by [`MAX_ELEMENT_DIM`].
    pub fn elements(&self) -> Result<Vec<BitVec>> {
        budget("subspace dimension for element listing", self.dim(), MAX_ELEMENT_DIM)?;
        let basis = self.basis_vectors();
        let mut out = Vec::with_capacity(1 << self.dim());
        out.push(BitVec::zeros(self.ambient));
        for b in basis {
            let len = out.len();
            for i in 0..len {
                out.push(out[i].xor(b));
            }
        }
        Ok(out)
    }

    /// Elements as big-endian indices (ambient ≤ 64).
    pub fn element_indices(&self) -> Result<Vec<u64>> {
        budget("subspace dimension for element listing", self.dim(), MAX_ELEMENT_DIM)?;
        let mut out = vec![0u64];
        for b in self.basis_vectors() {
            let bi = b.to_index();
            let len = out.len();
            for i in 0..len {
                out.push(out[i] ^ bi);
            }
        }
        Ok(out)
    }

    /// Orthogonal complement under the chosen form.
    pub fn dual(&self, form: Form) -> Subspace {
        match form {
            Form::Standard => kernel(&self.basis),
            Form::Symplectic => {
                assert!(self.ambient.is_multiple_of(2), "symplectic dual needs even ambient dimension");
                // [x, y] = (Ω x) · y with Ω swapping the a and b halves.
                let n = self.ambient / 2;
                let swapped: Vec<BitVec> = self
                    .basis_vectors()
                    .iter()
                    .map(|v| v.slice(n, 2 * n).concat(&v.slice(0, n)))
                    .collect();
                kernel(&BitMatrix::from_rows(self.ambient, swapped).expect("same length"))
            }
        }
    }

    pub fn is_isotropic(&self) -> Result<bool> {
        if !self.ambient.is_multiple_of(2) {
            return Err(Error::OddLength(self.ambient));
        }
        let b = self.basis_vectors();
        for i in 0..b.len() {
            for j in i + 1..b.len() {
                if symp(&b[i], &b[j]) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    pub fn is_lagrangian(&self) -> Result<bool> {
        Ok(self.is_isotropic()? && self.dim() == self.ambient / 2)
    }

    pub fn is_self_dual(&self) -> bool {
        self.dual(Form::Standard) == *self
    }
}

impl fmt::Debug for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Subspace(F2^{}, basis=[", self.ambient)?;
        for (i, r) in self.basis.rows().iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{r}")?;
        }
        f.write_str("])")
    }
}

impl Serialize for Subspace {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            ambient_dim: usize,
            basis: &'a BitMatrix,
        }
        Repr {
            ambient_dim: self.ambient,
            basis: &self.basis,
        }
        .serialize(s)
    }
}

/// Gaussian binomial coefficient `[m, k]₂`, the number of k-dim subspaces of F₂^m.
pub fn gaussian_binomial(m: usize, k: usize) -> u128 {
    if k > m {
        return 0;
    }
    let mut num: u128 = 1;
    let mut den: u128 = 1;
    for i in 0..k {
        num *= (1u128 << (m - i)) - 1;
        den *= (1u128 << (i + 1)) - 1;
    }
    num / den
}

/// Iterates every `dim`-dimensional subspace of F₂^`ambient` exactly once.
pub fn enumerate_subspaces(ambient: usize, dim: usize) -> Result<SubspaceIter> {
    budget("ambient dimension for subspace enumeration", ambient, MAX_ENUM_AMBIENT)?;
    if dim > ambient {
        return Err(Error::InvalidInput(format!(
            "dimension {dim} exceeds ambient {ambient}"
        )));
    }
    Ok(SubspaceIter::new(ambient, dim))
}

/// Walks RREF matrices: pivot sets in lexicographic order, then free entries.
pub struct SubspaceIter {
    ambient: usize,
    pivots: Option<Vec<usize>>,
    free: Vec<(usize, usize)>,
    counter: u64,
}

impl SubspaceIter {
    fn new(ambient: usize, dim: usize) -> Self {
        let pivots: Vec<usize> = (0..dim).collect();
        let mut it = Self {
            ambient,
            pivots: Some(pivots),
            free: Vec::new(),
            counter: 0,
        };
        it.refresh_free();
        it
    }

    fn refresh_free(&mut self) {
        self.free.clear();
        if let Some(p) = &self.pivots {
            for (r, &pc) in p.iter().enumerate() {
                for c in pc + 1..self.ambient {
                    if !p.contains(&c) {
                        self.free.push((r, c));
                    }
                }
            }
        }
        self.counter = 0;
    }

    fn advance_pivots(&mut self) {
        let Some(p) = self.pivots.as_mut() else {
            return;
        };
        let k = p.len();
        let m = self.ambient;
        let mut i = k;
        while i > 0 {
            i -= 1;
            if p[i] < m - k + i {
                p[i] += 1;
                for j in i + 1..k {
                    p[j] = p[j - 1] + 1;
                }
                self.refresh_free();
                return;
            }
        }
        self.pivots = None;
    }
}

impl Iterator for SubspaceIter {
    type Item = Subspace;

    fn next(&mut self) -> Option<Subspace> {
        let pivots = self.pivots.clone()?;
        let mut rows: Vec<BitVec> = pivots
            .iter()
            .map(|&p| BitVec::unit(self.ambient, p))
            .collect();
        for (bit, &(r, c)) in self.free.iter().enumerate() {
            if (self.counter >> bit) & 1 == 1 {
                rows[r].set(c, true);
            }
        }
        self.counter += 1;
        if self.counter >> self.free.len() != 0 {
            self.advance_pivots();
        }
        Some(Subspace {
            ambient: self.ambient,
            basis: BitMatrix {
                cols: self.ambient,
                rows,
            },
        })
    }
}

/// Solves `M x = rhs` for a column vector `x`; returns one solution if any.
pub fn solve(m: &BitMatrix, rhs: &BitVec) -> Option<BitVec> {
    assert_eq!(m.nrows(), rhs.len());
    let aug_rows: Vec<BitVec> = m
        .rows()
        .iter()
        .enumerate()
        .map(|(i, r)| r.concat(&BitVec::from_bools(&[rhs.get(i)])))
        .collect();
    let aug = BitMatrix::from_rows(m.ncols() + 1, aug_rows).ok()?;
    let (r, pivots) = rref(&aug);
    if pivots.last() == Some(&m.ncols()) {
        return None;
    }
    let mut x = BitVec::zeros(m.ncols());
    for (row, &p) in r.rows().iter().zip(&pivots) {
        x.set(p, row.get(m.ncols()));
    }
    Some(x)
}
