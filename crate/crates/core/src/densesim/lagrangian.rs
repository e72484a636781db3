//! Clifford Lagrangians, extendable subspaces and symplectic extension.
//!
//! Subspaces of `F₂^{2n} × F₂^{2n}` use the pair layout `(x, y)` with
//! `x = (a | b)` and `y = (a′ | b′)`, so a vector is `(a, b, a′, b′)`. The form
//! on pairs is `[x₁,x₂] + [y₁,y₂]`.

use crate::error::{Error, Result};
use crate::gf2::{self, solve, BitMatrix, BitVec, Subspace};
use crate::pauli::is_symplectic;

/// Reorders `(a, b, a′, b′)` into `(a, a′ | b, b′)`, the usual layout on `2n` qubits.
pub fn pair_to_standard(n: usize, v: &BitVec) -> BitVec {
    let perm: Vec<usize> = (0..n)
        .chain(2 * n..3 * n)
        .chain(n..2 * n)
        .chain(3 * n..4 * n)
        .collect();
    v.permuted(&perm)
}

fn standard_subspace(n: usize, v: &Subspace) -> Subspace {
    Subspace::from_generators(
        4 * n,
        v.basis_vectors().iter().map(|b| pair_to_standard(n, b)).collect(),
    )
    .expect("same length")
}

fn check_pair_ambient(v: &Subspace) -> Result<usize> {
    let m = v.ambient_dim();
    if !m.is_multiple_of(4) {
        return Err(Error::InvalidInput(format!(
            "pair subspace needs ambient dimension divisible by 4, got {m}"
        )));
    }
    Ok(m / 4)
}

/// Isotropy under `[x₁,x₂] + [y₁,y₂]`.
pub fn pair_form_isotropic(v: &Subspace) -> Result<bool> {
    let n = check_pair_ambient(v)?;
    standard_subspace(n, v).is_isotropic()
}

/// `{(x, Sx)}` for a `2n × 2n` matrix `S`.
pub fn graph_subspace(s: &BitMatrix) -> Subspace {
    let m = s.ncols();
    let gens = (0..m)
        .map(|i| BitVec::unit(m, i).concat(&s.column(i)))
        .collect();
    Subspace::from_generators(2 * m, gens).expect("same length")
}

/// Returns `S ∈ Sp(2n, F₂)` with `M = {(x, Sx)}` when `M` is such a graph.
///
/// `Ok(None)` when the left projection is not bijective or the graph map is
/// not symplectic; an error when `M` has the wrong dimension for a Lagrangian
/// or fails isotropy.
pub fn is_clifford_lagrangian(m: &Subspace) -> Result<Option<BitMatrix>> {
    let n = check_pair_ambient(m)?;
    if m.dim() != 2 * n {
        return Err(Error::NotLagrangian);
    }
    let basis = m.basis_vectors();
    let left = BitMatrix::from_rows(2 * n, basis.iter().map(|v| v.slice(0, 2 * n)).collect())?;
    let right = BitMatrix::from_rows(2 * n, basis.iter().map(|v| v.slice(2 * n, 4 * n)).collect())?;
    // Rows are (lᵢ, rᵢ) with S lᵢ = rᵢ, so S = Rᵀ (Lᵀ)⁻¹.
    let Some(lt_inv) = left.transpose().inverse() else {
        return Ok(None);
    };
    let s = right.transpose().mul(&lt_inv)?;
    if !is_symplectic(&s) {
        return Ok(None);
    }
    if !pair_form_isotropic(m)? {
        return Err(Error::NotLagrangian);
    }
    Ok(Some(s))
}

/// `V = V′ ⊕ (L₀ ⊕ 0) ⊕ (0 ⊕ R₀)` for an isotropic `V`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExtendableSplit {
    /// `V′`, the graph of a form-preserving bijection `L′ → R′`.
    pub graph: Subspace,
    /// `L₀ = {x : (x, 0) ∈ V}` in `F₂^{2n}`.
    pub left_kernel: Subspace,
    /// `R₀ = {y : (0, y) ∈ V}` in `F₂^{2n}`.
    pub right_kernel: Subspace,
}

impl ExtendableSplit {
    /// `V′` as a partial map.
    pub fn partial_map(&self) -> PartialSymplecticMap {
        let n2 = self.left_kernel.ambient_dim();
        let (domain, image) = self
            .graph
            .basis_vectors()
            .iter()
            .map(|v| (v.slice(0, n2), v.slice(n2, 2 * n2)))
            .unzip();
        PartialSymplecticMap { domain, image }
    }
}

pub fn extract_extendable(v: &Subspace) -> Result<ExtendableSplit> {
    let n = check_pair_ambient(v)?;
    if !pair_form_isotropic(v)? {
        return Err(Error::NotIsotropic);
    }
    let m = 2 * n;
    let zeros = BitVec::zeros(m);
    let left_axis = Subspace::from_generators(4 * n, (0..m).map(|i| BitVec::unit(m, i).concat(&zeros)).collect())?;
    let right_axis = Subspace::from_generators(4 * n, (0..m).map(|i| zeros.concat(&BitVec::unit(m, i))).collect())?;
    let l0_pairs = v.intersection(&left_axis)?;
    let r0_pairs = v.intersection(&right_axis)?;
    let left_kernel = Subspace::from_generators(
        m,
        l0_pairs.basis_vectors().iter().map(|b| b.slice(0, m)).collect(),
    )?;
    let right_kernel = Subspace::from_generators(
        m,
        r0_pairs.basis_vectors().iter().map(|b| b.slice(m, 2 * m)).collect(),
    )?;
    // Extend a basis of the kernel part through V's RREF basis; the added vectors span V′.
    let mut span = l0_pairs.sum(&r0_pairs)?;
    let mut extra = Vec::new();
    for b in v.basis_vectors() {
        if !span.contains(b) {
            extra.push(b.clone());
            span = span.sum(&Subspace::from_generators(4 * n, vec![b.clone()])?)?;
        }
    }
    Ok(ExtendableSplit {
        graph: Subspace::from_generators(4 * n, extra)?,
        left_kernel,
        right_kernel,
    })
}

/// A linear map given on a basis: `domain[i] ↦ image[i]`.
#[derive(Clone, Debug, PartialEq)]
pub struct PartialSymplecticMap {
    pub domain: Vec<BitVec>,
    pub image: Vec<BitVec>,
}

// Solves [v, c] = value for every (c, value); None when inconsistent.
fn solve_brackets(len: usize, constraints: &[(BitVec, bool)]) -> Option<BitVec> {
    if constraints.is_empty() {
        return Some(BitVec::zeros(len));
    }
    let n = len / 2;
    let rows = constraints
        .iter()
        .map(|(c, _)| c.slice(n, len).concat(&c.slice(0, n)))
        .collect();
    let m = BitMatrix::from_rows(len, rows).ok()?;
    let rhs = BitVec::from_bools(&constraints.iter().map(|(_, b)| *b).collect::<Vec<_>>());
    solve(&m, &rhs)
}

// Symplectic basis (hyperbolic pairs) of a nondegenerate subspace, deterministic.
fn symplectic_basis_of(len: usize, basis: Vec<BitVec>) -> Vec<(BitVec, BitVec)> {
    let mut rest = basis;
    let mut pairs = Vec::new();
    while let Some(v) = rest.iter().find(|b| !b.is_zero()).cloned() {
        let Some(w) = rest.iter().find(|u| gf2::symp(&v, u)).cloned() else {
            break;
        };
        let projected: Vec<BitVec> = rest
            .iter()
            .map(|u| {
                let mut p = u.clone();
                if gf2::symp(u, &w) {
                    p.xor_assign(&v);
                }
                if gf2::symp(u, &v) {
                    p.xor_assign(&w);
                }
                p
            })
            .collect();
        rest = Subspace::from_generators(len, projected)
            .expect("same length")
            .basis_vectors()
            .to_vec();
        pairs.push((v, w));
    }
    pairs
}

/// Extends a form-preserving bijection between subspaces to all of `F₂^{2n}`.
///
/// Pairs up hyperbolic partners on both sides, finds matching partners for the
/// radical, completes both sides with symplectic bases of the complements and
/// returns `S = F E⁻¹`.
pub fn extend_to_symplectic(f: &PartialSymplecticMap) -> Result<BitMatrix> {
    let len = match (f.domain.first(), f.image.first()) {
        (Some(d), _) => d.len(),
        (None, Some(i)) => i.len(),
        (None, None) => {
            return Err(Error::InvalidInput(
                "empty map needs an explicit dimension; use the identity".into(),
            ))
        }
    };
    extend_with_len(len, f)
}

/// As [`extend_to_symplectic`] with the ambient dimension given, so an empty map is allowed.
pub fn extend_to_symplectic_in(len: usize, f: &PartialSymplecticMap) -> Result<BitMatrix> {
    extend_with_len(len, f)
}

fn extend_with_len(len: usize, f: &PartialSymplecticMap) -> Result<BitMatrix> {
    if !len.is_multiple_of(2) {
        return Err(Error::OddLength(len));
    }
    if f.domain.len() != f.image.len() {
        return Err(Error::LengthMismatch {
            left: f.domain.len(),
            right: f.image.len(),
        });
    }
    if f.domain.iter().chain(&f.image).any(|v| v.len() != len) {
        return Err(Error::InvalidInput("map vectors have inconsistent lengths".into()));
    }
    let k = f.domain.len();
    let dom = Subspace::from_generators(len, f.domain.clone())?;
    let img = Subspace::from_generators(len, f.image.clone())?;
    if dom.dim() != k || img.dim() != k {
        return Err(Error::NotFormPreserving);
    }
    for i in 0..k {
        for j in i + 1..k {
            if gf2::symp(&f.domain[i], &f.domain[j]) != gf2::symp(&f.image[i], &f.image[j]) {
                return Err(Error::NotFormPreserving);
            }
        }
    }

    // Symplectic Gram–Schmidt applied in lockstep to both sides.
    let mut rest: Vec<(BitVec, BitVec)> = f.domain.iter().cloned().zip(f.image.iter().cloned()).collect();
    let mut pairs: Vec<((BitVec, BitVec), (BitVec, BitVec))> = Vec::new();
    loop {
        let mut hit = None;
        'search: for i in 0..rest.len() {
            for j in i + 1..rest.len() {
                if gf2::symp(&rest[i].0, &rest[j].0) {
                    hit = Some((i, j));
                    break 'search;
                }
            }
        }
        let Some((i, j)) = hit else { break };
        let (e, e2) = rest[i].clone();
        let (g, g2) = rest[j].clone();
        rest = rest
            .into_iter()
            .enumerate()
            .filter(|(idx, _)| *idx != i && *idx != j)
            .map(|(_, (u, u2))| {
                let (mut p, mut p2) = (u.clone(), u2.clone());
                if gf2::symp(&u, &g) {
                    p.xor_assign(&e);
                    p2.xor_assign(&e2);
                }
                if gf2::symp(&u, &e) {
                    p.xor_assign(&g);
                    p2.xor_assign(&g2);
                }
                (p, p2)
            })
            .collect();
        pairs.push(((e, g), (e2, g2)));
    }

    // Partners for the radical, solved separately on each side.
    let radical = rest;
    let mut dom_fixed: Vec<BitVec> = pairs.iter().flat_map(|((e, g), _)| [e.clone(), g.clone()]).collect();
    let mut img_fixed: Vec<BitVec> = pairs.iter().flat_map(|(_, (e, g))| [e.clone(), g.clone()]).collect();
    let mut partners: Vec<(BitVec, BitVec)> = Vec::new();
    for (j, _) in radical.iter().enumerate() {
        let side = |fixed: &[BitVec], rad: &[BitVec], prev: &[BitVec]| {
            let mut cons: Vec<(BitVec, bool)> = fixed.iter().map(|c| (c.clone(), false)).collect();
            cons.extend(rad.iter().enumerate().map(|(i, u)| (u.clone(), i == j)));
            cons.extend(prev.iter().map(|p| (p.clone(), false)));
            solve_brackets(len, &cons)
        };
        let dom_rad: Vec<BitVec> = radical.iter().map(|(u, _)| u.clone()).collect();
        let img_rad: Vec<BitVec> = radical.iter().map(|(_, u)| u.clone()).collect();
        let dom_prev: Vec<BitVec> = partners.iter().map(|(v, _)| v.clone()).collect();
        let img_prev: Vec<BitVec> = partners.iter().map(|(_, w)| w.clone()).collect();
        let v = side(&dom_fixed, &dom_rad, &dom_prev)
            .ok_or_else(|| Error::Internal("no symplectic partner for radical vector".into()))?;
        let w = side(&img_fixed, &img_rad, &img_prev)
            .ok_or_else(|| Error::Internal("no symplectic partner for radical image".into()))?;
        partners.push((v, w));
    }
    for ((u, u2), (v, w)) in radical.iter().zip(&partners) {
        pairs.push(((u.clone(), v.clone()), (u2.clone(), w.clone())));
        dom_fixed.extend([u.clone(), v.clone()]);
        img_fixed.extend([u2.clone(), w.clone()]);
    }

    // Symplectic bases of the two complements, matched in order.
    let dom_comp = Subspace::from_generators(len, dom_fixed.clone())?.dual(gf2::Form::Symplectic);
    let img_comp = Subspace::from_generators(len, img_fixed.clone())?.dual(gf2::Form::Symplectic);
    let dc = symplectic_basis_of(len, dom_comp.basis_vectors().to_vec());
    let ic = symplectic_basis_of(len, img_comp.basis_vectors().to_vec());
    if dc.len() != ic.len() || 2 * (pairs.len() + dc.len()) != len {
        return Err(Error::Internal("complements have mismatched symplectic bases".into()));
    }
    for (d, i) in dc.into_iter().zip(ic) {
        pairs.push((d, i));
    }

    let e_cols: Vec<BitVec> = pairs.iter().flat_map(|((e, g), _)| [e.clone(), g.clone()]).collect();
    let f_cols: Vec<BitVec> = pairs.iter().flat_map(|(_, (e, g))| [e.clone(), g.clone()]).collect();
    let e_mat = BitMatrix::from_rows(len, e_cols)?.transpose();
    let f_mat = BitMatrix::from_rows(len, f_cols)?.transpose();
    let e_inv = e_mat
        .inverse()
        .ok_or_else(|| Error::Internal("extended basis is singular".into()))?;
    let s = f_mat.mul(&e_inv)?;
    if !is_symplectic(&s) {
        return Err(Error::Internal("extension is not symplectic".into()));
    }
    for (x, y) in f.domain.iter().zip(&f.image) {
        if &s.mul_vec(x)? != y {
            return Err(Error::Internal("extension does not restrict to the map".into()));
        }
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::densesim::{char_dist_unitary, f_cliff, haar_unitary, subspace_weight};
    use crate::gf2::enumerate_subspaces;
    use crate::pauli::enumerate_symplectic;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn v(bits: &[u8]) -> BitVec {
        BitVec::from_bits(bits)
    }

    #[test]
    fn diagonal_is_identity_graph() {
        for n in 1..=2 {
            let diag = graph_subspace(&BitMatrix::identity(2 * n));
            assert_eq!(is_clifford_lagrangian(&diag).unwrap(), Some(BitMatrix::identity(2 * n)));
        }
    }

    #[test]
    fn left_block_is_not_a_clifford_graph() {
        let n = 1;
        let zeros = BitVec::zeros(2 * n);
        let left = Subspace::from_generators(
            4 * n,
            (0..2 * n).map(|i| BitVec::unit(2 * n, i).concat(&zeros)).collect(),
        )
        .unwrap();
        assert_eq!(is_clifford_lagrangian(&left).unwrap(), None);
        assert_eq!(
            is_clifford_lagrangian(&Subspace::zero(4)),
            Err(Error::NotLagrangian)
        );
    }

    #[test]
    fn graphs_of_symplectic_matrices_round_trip() {
        for n in 1..=2 {
            for s in enumerate_symplectic(n).unwrap() {
                let g = graph_subspace(&s);
                assert!(pair_form_isotropic(&g).unwrap());
                assert_eq!(is_clifford_lagrangian(&g).unwrap(), Some(s));
            }
        }
    }

    #[test]
    fn extract_examples() {
        let g = graph_subspace(&enumerate_symplectic(1).unwrap()[3]);
        let split = extract_extendable(&g).unwrap();
        assert_eq!(split.graph, g);
        assert_eq!(split.left_kernel.dim(), 0);
        assert_eq!(split.right_kernel.dim(), 0);

        let v1 = Subspace::from_generators(4, vec![v(&[1, 0, 0, 0])]).unwrap();
        let split = extract_extendable(&v1).unwrap();
        assert_eq!(split.graph.dim(), 0);
        assert_eq!(split.left_kernel, Subspace::from_generators(2, vec![v(&[1, 0])]).unwrap());
        assert_eq!(split.right_kernel.dim(), 0);

        let bad = Subspace::from_generators(4, vec![v(&[1, 0, 0, 0]), v(&[0, 1, 0, 0])]).unwrap();
        assert_eq!(extract_extendable(&bad), Err(Error::NotIsotropic));
    }

    fn isotropic_pair_subspaces(n: usize) -> Vec<Subspace> {
        (0..=2 * n)
            .flat_map(|k| enumerate_subspaces(4 * n, k).unwrap())
            .filter(|s| pair_form_isotropic(s).unwrap())
            .collect()
    }

    #[test]
    fn extraction_decomposes_and_extends() {
        for vsp in isotropic_pair_subspaces(1) {
            let split = extract_extendable(&vsp).unwrap();
            let dims = split.graph.dim() + split.left_kernel.dim() + split.right_kernel.dim();
            assert_eq!(dims, vsp.dim());
            assert!(split.graph.is_subspace_of(&vsp));
            let map = split.partial_map();
            let s = extend_to_symplectic_in(2, &map).unwrap();
            assert!(split.graph.is_subspace_of(&graph_subspace(&s)));
        }
    }

    #[test]
    fn extendable_part_keeps_cubed_weight() {
        let mut rng = ChaCha8Rng::seed_from_u64(44);
        let spaces = isotropic_pair_subspaces(1);
        for _ in 0..20 {
            let u = haar_unitary(1, &mut rng);
            let p = char_dist_unitary(&u).unwrap();
            for vsp in &spaces {
                let w = subspace_weight(&p, vsp).unwrap();
                let g = extract_extendable(vsp).unwrap().graph;
                assert!(subspace_weight(&p, &g).unwrap() >= w.powi(3) - 1e-12);
            }
        }
    }

    #[test]
    fn clifford_lagrangians_lower_bound_clifford_fidelity() {
        let mut rng = ChaCha8Rng::seed_from_u64(45);
        let sps = enumerate_symplectic(1).unwrap();
        for _ in 0..30 {
            let u = haar_unitary(1, &mut rng);
            let p = char_dist_unitary(&u).unwrap();
            let fc = f_cliff(&u).unwrap();
            for s in &sps {
                assert!(fc >= subspace_weight(&p, &graph_subspace(s)).unwrap() - 1e-12);
            }
        }
    }

    #[test]
    fn extension_examples() {
        // Empty map.
        let s = extend_to_symplectic_in(4, &PartialSymplecticMap { domain: vec![], image: vec![] }).unwrap();
        assert!(is_symplectic(&s));
        // Identity on a Lagrangian.
        let lag = vec![v(&[1, 0, 0, 0]), v(&[0, 1, 0, 0])];
        let s = extend_to_symplectic(&PartialSymplecticMap { domain: lag.clone(), image: lag.clone() }).unwrap();
        for x in &lag {
            assert_eq!(&s.mul_vec(x).unwrap(), x);
        }
        // Broken form.
        let bad = PartialSymplecticMap {
            domain: vec![v(&[1, 0]), v(&[0, 1])],
            image: vec![v(&[1, 0]), v(&[1, 0])],
        };
        assert_eq!(extend_to_symplectic(&bad), Err(Error::NotFormPreserving));
        let bad = PartialSymplecticMap {
            domain: vec![v(&[1, 0, 0, 0]), v(&[0, 0, 1, 0])],
            image: vec![v(&[1, 0, 0, 0]), v(&[0, 1, 0, 0])],
        };
        assert_eq!(extend_to_symplectic(&bad), Err(Error::NotFormPreserving));
    }

    #[test]
    fn restrictions_of_symplectic_maps_extend() {
        for n in 1..=2usize {
            let sps = enumerate_symplectic(n).unwrap();
            let subspaces: Vec<Subspace> = (0..=2 * n)
                .flat_map(|k| enumerate_subspaces(2 * n, k).unwrap())
                .collect();
            let step = if n == 1 { 1 } else { 37 };
            for s in sps.iter().step_by(step) {
                for sub in subspaces.iter().step_by(if n == 1 { 1 } else { 5 }) {
                    let domain = sub.basis_vectors().to_vec();
                    let image = domain.iter().map(|x| s.mul_vec(x).unwrap()).collect();
                    let ext = extend_to_symplectic_in(2 * n, &PartialSymplecticMap { domain: domain.clone(), image }).unwrap();
                    for x in &domain {
                        assert_eq!(ext.mul_vec(x).unwrap(), s.mul_vec(x).unwrap());
                    }
                }
            }
        }
    }
}
