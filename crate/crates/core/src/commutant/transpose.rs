//! Partial transposes of codes and dense operators, the augmenting-path
//! construction of a unitary partial transpose, trace norms and PPT overlaps.

use std::collections::VecDeque;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use super::{r_support, real_part, SelfDualCode, StochasticLagrangian, MAX_DENSE_COPY_QUBITS};
use crate::densesim::CMatrix;
use crate::error::{budget, Error, Result};
use crate::gf2::{rank, BitMatrix, Subspace};

fn check_subset(t: usize, s: &[usize]) -> Result<()> {
    if let Some(&i) = s.iter().find(|&&i| i >= t) {
        return Err(Error::InvalidInput(format!("copy index {i} out of range for t = {t}")));
    }
    Ok(())
}

/// Swaps coordinates `aᵢ ↔ bᵢ` for `i ∈ S` (0-based copies).
pub fn partial_transpose_code(code: &SelfDualCode, s: &[usize]) -> Result<SelfDualCode> {
    let t = code.t();
    check_subset(t, s)?;
    let mut g = code.generator().clone();
    for &i in s {
        g.swap_columns(i, t + i);
    }
    SelfDualCode::new(Subspace::from_matrix(&g))
}

/// `M^{Γ_S}` on `t` copies of `n` qubits (copies-major).
pub fn partial_transpose_dense(m: &CMatrix, s: &[usize], n: usize, t: usize) -> Result<CMatrix> {
    check_subset(t, s)?;
    let d = 1usize << (n * t);
    if m.nrows() != d || m.ncols() != d {
        return Err(Error::LengthMismatch {
            left: m.nrows(),
            right: d,
        });
    }
    let block = (1usize << n) - 1;
    let mask = s.iter().fold(0usize, |acc, &i| acc | block << ((t - 1 - i) * n));
    Ok(CMatrix::from_fn(d, d, |r, c| {
        let r0 = (r & !mask) | (c & mask);
        let c0 = (c & !mask) | (r & mask);
        m[(r0, c0)]
    }))
}

/// How a column with no usable pivot is handled.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub enum PivotRule {
    /// Pivot on an existing 1 in `A` when rows `≥ k` have one; fall back to the path reduction.
    #[default]
    PreferExisting,
    /// Always run the path reduction and swap column `k`.
    AlwaysAugment,
}

/// `D^S = T_O` with `r(D)^{Γ_S} = r(O)` unitary.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UnitaryTranspose {
    /// 0-based copies to transpose, ascending.
    pub subset: Vec<usize>,
    pub orthogonal: BitMatrix,
    pub transposed: SelfDualCode,
}

struct Work {
    t: usize,
    m: BitMatrix,
    swapped: Vec<bool>,
}

impl Work {
    fn a(&self, r: usize, c: usize) -> bool {
        self.m.get(r, c)
    }

    fn b(&self, r: usize, c: usize) -> bool {
        self.m.get(r, self.t + c)
    }

    fn swap_column(&mut self, i: usize) {
        self.m.swap_columns(i, self.t + i);
        self.swapped[i] = !self.swapped[i];
    }

    // Clears column `col` of the matrix except in row `pivot`.
    fn clear_column(&mut self, col: usize, pivot: usize) {
        for r in 0..self.t {
            if r != pivot && self.m.get(r, col) {
                self.m.add_row(pivot, r);
            }
        }
    }

    // Returns t0 ≥ k with B[t0][k] = 1, reshaping M along a shortest path if needed.
    fn reduce_augmenting_path(&mut self, k: usize) -> Result<usize> {
        let t = self.t;
        let in_v0 = |w: &Work, i: usize| (k..t).any(|r| w.b(r, i));
        let mut prev: Vec<Option<usize>> = vec![None; k + 1];
        let mut seen = vec![false; k + 1];
        let mut queue = VecDeque::from([k]);
        seen[k] = true;
        let mut end = None;
        while let Some(i) = queue.pop_front() {
            if in_v0(self, i) {
                end = Some(i);
                break;
            }
            for j in 0..=k {
                if !seen[j] && self.b(j, i) {
                    seen[j] = true;
                    prev[j] = Some(i);
                    queue.push_back(j);
                }
            }
        }
        let end = end.ok_or_else(|| Error::Internal(format!("no augmenting path at column {k}")))?;
        let mut path = vec![end];
        while let Some(p) = prev[*path.last().expect("nonempty")] {
            path.push(p);
        }
        path.reverse();
        let l = path.len() - 1;
        let t0 = (k..t)
            .find(|&r| self.b(r, path[l]))
            .expect("endpoint lies in V0");
        for i in (1..=l).rev() {
            let ai = path[i];
            self.clear_column(t + ai, t0);
            self.swap_column(ai);
            self.m.swap_rows(t0, ai);
        }
        if !self.b(t0, k) {
            return Err(Error::Internal(format!("path reduction left B[{t0}][{k}] = 0")));
        }
        Ok(t0)
    }
}

/// Finds `S` making the `A` block of `D^S` invertible.
pub fn unitary_partial_transpose(code: &SelfDualCode) -> Result<UnitaryTranspose> {
    unitary_partial_transpose_with(code, PivotRule::PreferExisting, &mut |_, _| {})
}

/// As [`unitary_partial_transpose`], calling `hook(k, M)` after each column `k`.
pub fn unitary_partial_transpose_with(
    code: &SelfDualCode,
    rule: PivotRule,
    hook: &mut dyn FnMut(usize, &BitMatrix),
) -> Result<UnitaryTranspose> {
    let t = code.t();
    let mut w = Work {
        t,
        m: code.generator().clone(),
        swapped: vec![false; t],
    };
    for k in 0..t {
        let existing = (k..t).find(|&r| w.a(r, k));
        match (rule, existing) {
            (PivotRule::PreferExisting, Some(r)) => {
                w.m.swap_rows(r, k);
            }
            _ => {
                let t0 = w.reduce_augmenting_path(k)?;
                w.swap_column(k);
                w.m.swap_rows(t0, k);
            }
        }
        w.clear_column(k, k);
        hook(k, &w.m);
    }

    let subset: Vec<usize> = (0..t).filter(|&i| w.swapped[i]).collect();
    let a = w.m.select_columns(&(0..t).collect::<Vec<_>>());
    if a != BitMatrix::identity(t) {
        return Err(Error::Internal("left block did not reach the identity".into()));
    }
    let transposed = partial_transpose_code(code, &subset)?;
    if rank(&transposed.a_block()) != t {
        return Err(Error::Internal("transposed code has a singular left block".into()));
    }
    let orthogonal = transposed
        .orthogonal_matrix()
        .ok_or_else(|| Error::Internal("transposed code is not a graph".into()))?;
    if orthogonal.mul(&orthogonal.transpose())? != BitMatrix::identity(t) {
        return Err(Error::Internal("graph matrix is not orthogonal".into()));
    }
    Ok(UnitaryTranspose {
        subset,
        orthogonal,
        transposed,
    })
}

fn trace_norm(m: &DMatrix<f64>) -> f64 {
    m.clone().singular_values().sum()
}

/// `min_S ‖R(T)^{Γ_S}‖₁` and a minimizing `S` (first in mask order).
pub fn min_trace_norm_pt(code: &SelfDualCode, n: usize) -> Result<(f64, Vec<usize>)> {
    let t = code.t();
    budget("n·t for dense R(T)", n * t, MAX_DENSE_COPY_QUBITS)?;
    let mut best: Option<(f64, Vec<usize>)> = None;
    for mask in 0usize..1 << t {
        let s: Vec<usize> = (0..t).filter(|i| mask >> i & 1 == 1).collect();
        let r = super::R_operator(&partial_transpose_code(code, &s)?, n)?;
        let v = trace_norm(&real_part(&r));
        if best.as_ref().is_none_or(|(b, _)| v < *b - 1e-12) {
            best = Some((v, s));
        }
    }
    Ok(best.expect("at least the empty subset"))
}

/// `|tr(R(T) ρ)|` for `ρ = ρ₀ ⊗ ⋯ ⊗ ρ_{t−1}` given by its factors.
pub fn ppt_overlap_check(s: &StochasticLagrangian, factors: &[CMatrix], n: usize) -> Result<f64> {
    let t = s.t();
    if factors.len() != t {
        return Err(Error::LengthMismatch {
            left: factors.len(),
            right: t,
        });
    }
    budget("n·t for dense R(T)", n * t, MAX_DENSE_COPY_QUBITS)?;
    let d = 1usize << n;
    if factors.iter().any(|f| f.nrows() != d || f.ncols() != d) {
        return Err(Error::InvalidInput("factor dimensions do not match n".into()));
    }
    let block = d - 1;
    let total: Complex64 = r_support(s.code(), n)
        .into_iter()
        .map(|(r, c)| {
            // tr(Rρ) = Σ R[r][c] ρ[c][r].
            factors
                .iter()
                .enumerate()
                .map(|(i, f)| {
                    let sh = (t - 1 - i) * n;
                    f[((c >> sh) & block, (r >> sh) & block)]
                })
                .product::<Complex64>()
        })
        .sum();
    Ok(total.norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::commutant::{enumerate_sd, enumerate_sigma_tt, r_operator, t4, R_operator};
    use crate::densesim::{random_state, unitarity_residual};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn code_transpose_examples() {
        let c = SelfDualCode::from_rows(&["1100", "0011"]).unwrap();
        assert_eq!(partial_transpose_code(&c, &[]).unwrap(), c);
        let swapped = partial_transpose_code(&c, &[0]).unwrap();
        assert_eq!(swapped, SelfDualCode::from_rows(&["0110", "1001"]).unwrap());
        assert!(partial_transpose_code(&c, &[2]).is_err());
    }

    #[test]
    fn code_and_dense_transposes_agree() {
        for t in 1..=3 {
            for code in enumerate_sd(t).unwrap() {
                for mask in 0usize..1 << t {
                    let s: Vec<usize> = (0..t).filter(|i| mask >> i & 1 == 1).collect();
                    for n in 1..=2 {
                        let dense = partial_transpose_dense(&R_operator(&code, n).unwrap(), &s, n, t).unwrap();
                        let via_code = R_operator(&partial_transpose_code(&code, &s).unwrap(), n).unwrap();
                        assert_eq!(dense, via_code);
                    }
                }
                let full: Vec<usize> = (0..t).collect();
                let r = r_operator(&code);
                assert_eq!(partial_transpose_dense(&r, &full, 1, t).unwrap(), r.transpose());
            }
        }
    }

    #[test]
    fn appendix_examples() {
        for t in 1..=4 {
            for s in enumerate_sigma_tt(t).unwrap() {
                if s.code().orthogonal_matrix().is_some() {
                    assert!(unitary_partial_transpose(s.code()).unwrap().subset.is_empty());
                }
            }
        }
        let c = SelfDualCode::from_rows(&["1100", "0011"]).unwrap();
        let u = unitary_partial_transpose(&c).unwrap();
        assert_eq!(u.subset.len(), 1);
        assert_eq!(u.orthogonal, BitMatrix::from_bits(&[&[0, 1], &[1, 0]]).unwrap());
    }

    #[test]
    fn appendix_succeeds_on_every_self_dual_code() {
        let mut total = 0;
        for t in 1..=4 {
            for code in enumerate_sd(t).unwrap() {
                for rule in [PivotRule::PreferExisting, PivotRule::AlwaysAugment] {
                    let mut hook = |k: usize, m: &BitMatrix| {
                        for r in 0..t {
                            for c in 0..=k {
                                assert_eq!(m.get(r, c), r == c, "k={k} r={r} c={c}");
                            }
                        }
                    };
                    let u = unitary_partial_transpose_with(&code, rule, &mut hook).unwrap();
                    assert_eq!(rank(&u.transposed.a_block()), t);
                    assert_eq!(u.transposed, SelfDualCode::graph(&u.orthogonal).unwrap());
                    let dense = partial_transpose_dense(&r_operator(&code), &u.subset, 1, t).unwrap();
                    assert!(unitarity_residual(&dense) < 1e-10);
                }
                total += 1;
            }
        }
        assert_eq!(total, 154);
    }

    #[test]
    fn trace_norm_bounds() {
        for t in 1..=4 {
            for s in enumerate_sigma_tt(t).unwrap() {
                let (v, _) = min_trace_norm_pt(s.code(), 1).unwrap();
                if s.code().is_identity() {
                    assert!((v - (1u64 << t) as f64).abs() < 1e-8);
                } else {
                    assert!(v <= (1u64 << (t - 1)) as f64 + 1e-8, "t={t} {:?} {v}", s.code());
                }
            }
        }
        let (v, _) = min_trace_norm_pt(t4().code(), 1).unwrap();
        assert!(v <= 8.0 + 1e-8);
    }

    #[test]
    fn product_state_overlaps() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let zero = CMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0].map(|v| Complex64::new(v, 0.0)));
        let e = StochasticLagrangian::identity(3);
        assert!((ppt_overlap_check(&e, &[zero.clone(), zero.clone(), zero], 1).unwrap() - 1.0).abs() < 1e-12);
        let half = CMatrix::identity(2, 2) / Complex64::new(2.0, 0.0);
        for t in 1..=4 {
            let sigma = enumerate_sigma_tt(t).unwrap();
            for _ in 0..10 {
                let factors: Vec<CMatrix> = (0..t).map(|_| random_state(1, &mut rng).density()).collect();
                let rho = factors.iter().fold(CMatrix::identity(1, 1), |acc, f| acc.kronecker(f));
                for s in &sigma {
                    let v = ppt_overlap_check(s, &factors, 1).unwrap();
                    assert!(v <= 1.0 + 1e-10);
                    let dense = (R_operator(s.code(), 1).unwrap() * &rho).trace().norm();
                    assert!((dense - v).abs() < 1e-12);
                }
            }
            for s in &sigma {
                let mixed = vec![half.clone(); t];
                let v = ppt_overlap_check(s, &mixed, 1).unwrap();
                let tr = R_operator(s.code(), 1).unwrap().trace().re / (1u64 << t) as f64;
                assert!((v - tr).abs() < 1e-12 && v <= 1.0 + 1e-12);
            }
        }
    }
}
