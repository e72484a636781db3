//! Gowers `U^k` norms of amplitude functions and `Q^k` norms of matrices.
//!
//! `U^k` is a sum over `x, h₁, …, h_k`; `Q^k` is an expectation over
//! directions with the normalized trace. Both are computed through the
//! nesting recursion.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::densesim::{CMatrix, DenseUnitary, StateVector};
use crate::error::{budget, Error, Result};
use crate::pauli::weyl_monomial;

pub const MAX_NORM_ORDER: usize = 3;
/// Cap on `n(k+1)` for `U^k`.
pub const MAX_GOWERS_WORK: usize = 20;
pub const MAX_QK_QUBITS: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormConvention {
    Sum,
    Expectation,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormValue {
    pub k: usize,
    /// The norm itself.
    pub value: f64,
    /// `value^{2^k}` as computed, before taking the root.
    pub raw: f64,
    pub convention: NormConvention,
}

impl NormValue {
    fn from_raw(k: usize, raw: Complex64, convention: NormConvention) -> Result<Self> {
        let scale = raw.norm().max(1.0);
        if raw.im.abs() > 1e-9 * scale || raw.re < -1e-9 * scale || !raw.re.is_finite() {
            return Err(Error::Internal(format!("norm power {raw} is not a nonnegative real")));
        }
        let raw = raw.re.max(0.0);
        Ok(Self {
            k,
            value: raw.powf(1.0 / (1u32 << k) as f64),
            raw,
            convention,
        })
    }
}

fn check_order(k: usize) -> Result<()> {
    if k == 0 || k > MAX_NORM_ORDER {
        return Err(Error::InvalidInput(format!("norm order must be 1..={MAX_NORM_ORDER}, got {k}")));
    }
    Ok(())
}

// Σ_{x,h₁..h_k} of the derivative products, via Σ_h ‖Δ_h f‖ at order k−1.
fn gowers_raw(f: &[Complex64], k: usize) -> Complex64 {
    if k == 1 {
        let s: Complex64 = f.iter().sum();
        return Complex64::new(s.norm_sqr(), 0.0);
    }
    let derivative = |h: usize| -> Vec<Complex64> {
        (0..f.len()).map(|x| f[x ^ h] * f[x].conj()).collect()
    };
    if f.len() >= 64 {
        (0..f.len()).into_par_iter().map(|h| gowers_raw(&derivative(h), k - 1)).sum()
    } else {
        (0..f.len()).map(|h| gowers_raw(&derivative(h), k - 1)).sum()
    }
}

/// `‖ψ‖_{U^k}` of the computational-basis amplitude function, sum convention.
pub fn gowers_uk(psi: &StateVector, k: usize) -> Result<NormValue> {
    check_order(k)?;
    budget("Gowers norm work n(k+1)", psi.n() * (k + 1), MAX_GOWERS_WORK)?;
    let raw = gowers_raw(psi.amplitudes().as_slice(), k);
    NormValue::from_raw(k, raw, NormConvention::Sum)
}

/// `P_x A P_x†`.
pub(crate) fn weyl_conjugate(n: usize, x: u64, a: &CMatrix) -> CMatrix {
    let d = a.nrows();
    let (s, ph) = weyl_monomial(n, x);
    CMatrix::from_fn(d, d, |i, j| ph[i ^ s] * a[(i ^ s, j ^ s)] * ph[j ^ s].conj())
}

/// Multiplicative derivative `∂_x A = P_x A P_x† A†`.
pub fn multiplicative_derivative(n: usize, x: u64, a: &CMatrix) -> CMatrix {
    weyl_conjugate(n, x, a) * a.adjoint()
}

// ‖A‖_{Q^k}^{2^k}, bottoming out at ‖A‖²_{Q¹} = |tr A / d|².
fn qk_raw(n: usize, a: &CMatrix, k: usize) -> Complex64 {
    let d = a.nrows() as f64;
    if k == 1 {
        return Complex64::new((a.trace() / d).norm_sqr(), 0.0);
    }
    let count = 1u64 << (2 * n);
    let term = |x: u64| qk_raw(n, &multiplicative_derivative(n, x, a), k - 1);
    let total: Complex64 = if k >= 3 {
        (0..count).into_par_iter().map(term).sum()
    } else {
        (0..count).map(term).sum()
    };
    total / count as f64
}

/// `‖U‖_{Q^k}`, expectation convention.
pub fn qk_norm(u: &DenseUnitary, k: usize) -> Result<NormValue> {
    qk_norm_matrix(u.n(), u.matrix(), k)
}

/// `‖A‖_{Q^k}` for an arbitrary `2ⁿ × 2ⁿ` matrix.
pub fn qk_norm_matrix(n: usize, a: &CMatrix, k: usize) -> Result<NormValue> {
    check_order(k)?;
    budget("qubits for Q^k norm", n, MAX_QK_QUBITS)?;
    if a.nrows() != 1 << n || a.ncols() != 1 << n {
        return Err(Error::LengthMismatch {
            left: a.nrows(),
            right: 1 << n,
        });
    }
    NormValue::from_raw(k, qk_raw(n, a, k), NormConvention::Expectation)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::densesim::{
        char_dist_state, char_dist_unitary, choi_state, haar_unitary, random_state, weyl_fourier,
    };
    use crate::pauli::enumerate_cliffords;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    // Direct sum over x, h₁..h_k of ∏_ω C^{|ω|} f(x + ω·h).
    fn gowers_direct(f: &[Complex64], k: usize) -> Complex64 {
        let m = f.len();
        let mut total = Complex64::new(0.0, 0.0);
        let tuples = m.pow(k as u32 + 1);
        for idx in 0..tuples {
            let mut rest = idx;
            let mut coords = Vec::with_capacity(k + 1);
            for _ in 0..=k {
                coords.push(rest % m);
                rest /= m;
            }
            let mut prod = Complex64::new(1.0, 0.0);
            for w in 0..1usize << k {
                let mut point = coords[0];
                for (j, h) in coords[1..].iter().enumerate() {
                    if w >> j & 1 == 1 {
                        point ^= h;
                    }
                }
                let v = f[point];
                prod *= if w.count_ones() % 2 == 1 { v.conj() } else { v };
            }
            total += prod;
        }
        total
    }

    // E_{x₁..x_k} tr(∂_{x_k}⋯∂_{x₁} A)/d straight from the definition.
    fn qk_direct(n: usize, a: &CMatrix, k: usize) -> Complex64 {
        if k == 0 {
            return a.trace() / a.nrows() as f64;
        }
        let count = 1u64 << (2 * n);
        (0..count)
            .map(|x| qk_direct(n, &multiplicative_derivative(n, x, a), k - 1))
            .sum::<Complex64>()
            / count as f64
    }

    #[test]
    fn recursion_matches_direct_sums() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 1..=2 {
            let psi = random_state(n, &mut rng);
            for k in 1..=3 {
                let direct = gowers_direct(psi.amplitudes().as_slice(), k);
                let rec = gowers_uk(&psi, k).unwrap().raw;
                assert!((direct - rec).norm() < 1e-12);
            }
        }
        for n in 1..=2 {
            let u = haar_unitary(n, &mut rng);
            for k in 1..=2 {
                let direct = qk_direct(n, u.matrix(), k);
                let rec = qk_norm(&u, k).unwrap().raw;
                assert!((direct - rec).norm() < 1e-12, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn delta_and_identity_values() {
        for n in 1..=3 {
            let v = gowers_uk(&StateVector::basis(n, 0), 3).unwrap();
            assert!((v.value - 1.0).abs() < 1e-12);
            assert!((qk_norm(&DenseUnitary::identity(n), 3).unwrap().value - 1.0).abs() < 1e-12);
        }
        for n in 1..=2 {
            let v = gowers_uk(&choi_state(&DenseUnitary::identity(n)).unwrap(), 3).unwrap();
            assert!((v.raw - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn t_gate_values() {
        let t = DenseUnitary::t_gate();
        assert!((qk_norm(&t, 2).unwrap().raw - 0.75).abs() < 1e-12);
        assert!((qk_norm(&t, 3).unwrap().raw - 0.75).abs() < 1e-12);
    }

    #[test]
    fn clifford_norms_are_one() {
        for c in enumerate_cliffords(1).unwrap() {
            let m = c.matrix().unwrap();
            assert!((qk_norm(&m, 3).unwrap().value - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn identities_with_characteristic_distributions() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for n in 1..=2 {
            for _ in 0..3 {
                let u = haar_unitary(n, &mut rng);
                let p = char_dist_unitary(&u).unwrap();
                let d2 = 1u64 << (2 * n);
                let diag: f64 = (0..d2).map(|x| p.table[(x * d2 + x) as usize]).sum();
                let q2 = qk_norm(&u, 2).unwrap();
                let q3 = qk_norm(&u, 3).unwrap();
                assert!((q2.raw - diag).abs() < 1e-9);
                let scale = (1u64 << (2 * n)) as f64;
                assert!((q3.raw - scale * p.l2_squared()).abs() < 1e-9);
                let u3 = gowers_uk(&choi_state(&u).unwrap(), 3).unwrap();
                assert!((q3.value - u3.value).abs() < 1e-9);
                let fourier_max = weyl_fourier(&u).iter().map(|c| c.norm_sqr()).fold(0.0, f64::max);
                assert!(fourier_max >= diag - 1e-12);
            }
        }
        for n in 1..=3 {
            let psi = random_state(n, &mut rng);
            let p = char_dist_state(&psi).unwrap();
            let u3 = gowers_uk(&psi, 3).unwrap();
            assert!((u3.raw - (1u64 << n) as f64 * p.l2_squared()).abs() < 1e-9);
        }
    }

    #[test]
    fn guards() {
        assert!(matches!(gowers_uk(&StateVector::basis(6, 0), 3), Err(Error::Budget { .. })));
        assert!(matches!(qk_norm(&DenseUnitary::identity(4), 2), Err(Error::Budget { .. })));
        assert!(matches!(qk_norm(&DenseUnitary::identity(1), 4), Err(Error::InvalidInput(_))));
        assert!(matches!(qk_norm(&DenseUnitary::identity(1), 0), Err(Error::InvalidInput(_))));
    }
}
