//! Gram and Weingarten matrices, Clifford twirls and the four-copy stabilizer average.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::{enumerate_sigma_tt, kron_power, pi4, r_support, StochasticLagrangian, MAX_DENSE_COPY_QUBITS, R_operator};
use crate::densesim::{stabilizer_vectors, CMatrix};
use crate::error::{budget, Error, Result};
use crate::pauli::MAX_CLIFFORD_ENUM_QUBITS;

/// Relative eigenvalue cutoff for the pseudo-inverse.
pub const PINV_CUTOFF: f64 = 1e-10;
/// Cap on `n·t` for the exact group-average twirl.
pub const MAX_EXACT_TWIRL_QUBITS: usize = 6;
pub const MAX_GRAM_QUBITS: usize = 16;
pub const MAX_FOURCOPY_QUBITS: usize = 2;

#[derive(Clone, Debug, Serialize)]
pub struct GramWeingarten {
    pub n: usize,
    pub t: usize,
    pub labels: Vec<StochasticLagrangian>,
    #[serde(serialize_with = "matrix_rows")]
    pub gram: DMatrix<f64>,
    #[serde(serialize_with = "matrix_rows")]
    pub weingarten: DMatrix<f64>,
}

fn matrix_rows<S: serde::Serializer>(m: &DMatrix<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    let rows: Vec<Vec<f64>> = m.row_iter().map(|r| r.iter().copied().collect()).collect();
    rows.serialize(s)
}

/// Moore–Penrose inverse of a symmetric matrix via its eigendecomposition.
pub fn pseudo_inverse(g: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(g.clone());
    let top = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let inv = eig
        .eigenvalues
        .map(|v| if v.abs() > PINV_CUTOFF * top { 1.0 / v } else { 0.0 });
    &eig.eigenvectors * DMatrix::from_diagonal(&inv) * eig.eigenvectors.transpose()
}

/// `G_{T,T′} = tr(R(T)† R(T′)) = |T ∩ T′|ⁿ` and its pseudo-inverse.
pub fn gram_weingarten(n: usize, t: usize) -> Result<GramWeingarten> {
    budget("qubits for Gram matrix", n, MAX_GRAM_QUBITS)?;
    let labels = enumerate_sigma_tt(t)?;
    let k = labels.len();
    let mut gram = DMatrix::zeros(k, k);
    for i in 0..k {
        for j in i..k {
            let common = labels[i].code().space().intersection(labels[j].code().space())?;
            let v = 2f64.powi((n * common.dim()) as i32);
            gram[(i, j)] = v;
            gram[(j, i)] = v;
        }
    }
    let weingarten = pseudo_inverse(&gram);
    Ok(GramWeingarten {
        n,
        t,
        labels,
        gram,
        weingarten,
    })
}

/// The Gram matrix from dense traces, for cross-checking the closed form.
pub fn gram_dense(n: usize, t: usize) -> Result<DMatrix<f64>> {
    budget("n·t for dense R(T)", n * t, MAX_DENSE_COPY_QUBITS)?;
    let labels = enumerate_sigma_tt(t)?;
    let mats = labels
        .iter()
        .map(|s| R_operator(s.code(), n))
        .collect::<Result<Vec<_>>>()?;
    let k = labels.len();
    Ok(DMatrix::from_fn(k, k, |i, j| (mats[i].adjoint() * &mats[j]).trace().re))
}

impl GramWeingarten {
    /// `tr(R(T)† ρ)` for every label.
    pub fn overlaps(&self, rho: &CMatrix) -> Result<DVector<Complex64>> {
        let d = 1usize << (self.n * self.t);
        if rho.nrows() != d || rho.ncols() != d {
            return Err(Error::LengthMismatch {
                left: rho.nrows(),
                right: d,
            });
        }
        Ok(DVector::from_iterator(
            self.labels.len(),
            self.labels
                .iter()
                .map(|s| r_support(s.code(), self.n).into_iter().map(|(r, c)| rho[(r, c)]).sum()),
        ))
    }

    /// Twirl coefficients `c_T = Σ_{T′} W_{T,T′} tr(R(T′)† ρ)`.
    pub fn coefficients(&self, rho: &CMatrix) -> Result<DVector<Complex64>> {
        let w = self.weingarten.map(|v| Complex64::new(v, 0.0));
        Ok(w * self.overlaps(rho)?)
    }

    /// `Σ_{T,T′} W_{T,T′} tr(R(T′)† ρ) R(T)`.
    pub fn twirl(&self, rho: &CMatrix) -> Result<CMatrix> {
        budget("n·t for dense R(T)", self.n * self.t, MAX_DENSE_COPY_QUBITS)?;
        let coeffs = self.coefficients(rho)?;
        let d = 1usize << (self.n * self.t);
        let mut out = CMatrix::zeros(d, d);
        for (s, c) in self.labels.iter().zip(coeffs.iter()) {
            for (r, col) in r_support(s.code(), self.n) {
                out[(r, col)] += c;
            }
        }
        Ok(out)
    }
}

fn check_copy_operator(rho: &CMatrix, n: usize, t: usize) -> Result<()> {
    let d = 1usize << (n * t);
    if rho.nrows() != d || rho.ncols() != d {
        return Err(Error::LengthMismatch {
            left: rho.nrows(),
            right: d,
        });
    }
    Ok(())
}

/// `E_{C ∈ Cl(n)} C^{⊗t} ρ C^{†⊗t}` by enumerating the group.
pub fn clifford_twirl_exact(n: usize, t: usize, rho: &CMatrix) -> Result<CMatrix> {
    budget("qubits for exact Clifford twirl", n, MAX_CLIFFORD_ENUM_QUBITS)?;
    budget("n·t for exact Clifford twirl", n * t, MAX_EXACT_TWIRL_QUBITS)?;
    check_copy_operator(rho, n, t)?;
    let cliffs = crate::densesim::clifford_matrices(n)?;
    let d = 1usize << (n * t);
    let sum = cliffs
        .par_iter()
        .map(|c| {
            let ct = kron_power(c, t);
            &ct * rho * ct.adjoint()
        })
        .reduce(|| CMatrix::zeros(d, d), |a, b| a + b);
    Ok(sum / Complex64::new(cliffs.len() as f64, 0.0))
}

/// The commutant expansion of the twirl.
pub fn clifford_twirl_weingarten(n: usize, t: usize, rho: &CMatrix) -> Result<CMatrix> {
    budget("n·t for dense R(T)", n * t, MAX_DENSE_COPY_QUBITS)?;
    check_copy_operator(rho, n, t)?;
    gram_weingarten(n, t)?.twirl(rho)
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(k - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, k - 1);
            out.push(q);
        }
    }
    out
}

/// Projector onto the symmetric subspace of `k` copies of `n` qubits.
pub fn pi_sym(n: usize, k: usize) -> Result<CMatrix> {
    budget("n·k for symmetric projector", n * k, MAX_DENSE_COPY_QUBITS)?;
    let d = 1usize << (n * k);
    let block = (1usize << n) - 1;
    let perms = permutations(k);
    let mut m = CMatrix::zeros(d, d);
    for p in &perms {
        for idx in 0..d {
            let mut out = 0usize;
            for (dst, &src) in p.iter().enumerate() {
                let v = (idx >> ((k - 1 - src) * n)) & block;
                out |= v << ((k - 1 - dst) * n);
            }
            m[(out, idx)] += Complex64::new(1.0, 0.0);
        }
    }
    Ok(m / Complex64::new(perms.len() as f64, 0.0))
}

/// `(1/(2ⁿD₊)) (Π₄Π_sym + 4/(d+4) (I − Π₄)Π_sym)` with `D₊ = (d+1)(d+2)/6`.
pub fn fourcopy_formula(n: usize) -> Result<CMatrix> {
    budget("qubits for four-copy average", n, MAX_FOURCOPY_QUBITS)?;
    let d = (1u64 << n) as f64;
    let p4 = pi4(n)?;
    let ps = pi_sym(n, 4)?;
    let dp = (d + 1.0) * (d + 2.0) / 6.0;
    let id = CMatrix::identity(p4.nrows(), p4.ncols());
    let inner = &p4 * &ps + (id - &p4) * &ps * Complex64::new(4.0 / (d + 4.0), 0.0);
    Ok(inner / Complex64::new(d * dp, 0.0))
}

/// `E_S (|S⟩⟨S|)^{⊗4}` over all stabilizer states.
pub fn avg_stab_fourcopy(n: usize) -> Result<CMatrix> {
    budget("qubits for four-copy average", n, MAX_FOURCOPY_QUBITS)?;
    let states = stabilizer_vectors(n)?;
    let dim = 1usize << (4 * n);
    let sum = states
        .par_iter()
        .map(|s| {
            let v = s.kronecker(s).kronecker(&s.kronecker(s));
            &v * v.adjoint()
        })
        .reduce(|| CMatrix::zeros(dim, dim), |a, b| a + b);
    Ok(sum / Complex64::new(states.len() as f64, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::densesim::{haar_unitary, random_state};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_density(dim_qubits: usize, rng: &mut ChaCha8Rng) -> CMatrix {
        // Mixture of two random pure states.
        let a = random_state(dim_qubits, rng).density();
        let b = random_state(dim_qubits, rng).density();
        a * Complex64::new(0.3, 0.0) + b * Complex64::new(0.7, 0.0)
    }

    #[test]
    fn gram_examples() {
        let gw = gram_weingarten(1, 2).unwrap();
        assert_eq!(gw.gram, DMatrix::from_row_slice(2, 2, &[4.0, 2.0, 2.0, 4.0]));
        for (n, t) in [(1, 1), (1, 2), (1, 3), (1, 4), (2, 2), (2, 3)] {
            let gw = gram_weingarten(n, t).unwrap();
            assert_eq!(gw.gram, gram_dense(n, t).unwrap());
            let g = &gw.gram;
            let resid = (g * &gw.weingarten * g - g).amax() / g.amax();
            assert!(resid < 1e-8, "n={n} t={t} {resid}");
            assert!(g.diagonal().iter().all(|&v| v > 0.0));
            assert_eq!(g.transpose(), *g);
        }
    }

    #[test]
    fn weingarten_diagonal_approaches_inverse_dimension() {
        let mut prev = f64::INFINITY;
        for n in 1..=8 {
            let gw = gram_weingarten(n, 2).unwrap();
            let target = 2f64.powi(-(2 * n as i32));
            let gap = (gw.weingarten[(0, 0)] - target).abs() / target;
            assert!(gap < prev);
            prev = gap;
        }
        assert!(prev < 1e-4);
    }

    #[test]
    fn twirl_paths_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for t in 1..=4 {
            let rho = random_density(t, &mut rng);
            let exact = clifford_twirl_exact(1, t, &rho).unwrap();
            let expanded = clifford_twirl_weingarten(1, t, &rho).unwrap();
            assert!((&exact - &expanded).camax() < 1e-8, "t={t}");
            assert!((exact.trace() - rho.trace()).norm() < 1e-10);
            assert!((expanded.trace() - rho.trace()).norm() < 1e-10);
        }
        let rho = random_density(4, &mut rng);
        let exact = clifford_twirl_exact(2, 2, &rho).unwrap();
        let expanded = clifford_twirl_weingarten(2, 2, &rho).unwrap();
        assert!((&exact - &expanded).camax() < 1e-8);
    }

    #[test]
    fn twirl_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        for t in 1..=3 {
            let d = 1usize << t;
            let mixed = CMatrix::identity(d, d) / Complex64::new(d as f64, 0.0);
            assert!((clifford_twirl_exact(1, t, &mixed).unwrap() - &mixed).camax() < 1e-12);
            assert!((clifford_twirl_weingarten(1, t, &mixed).unwrap() - &mixed).camax() < 1e-12);
        }
        let rho = random_density(1, &mut rng);
        let out = clifford_twirl_exact(1, 1, &rho).unwrap();
        assert!((out - CMatrix::identity(2, 2) * Complex64::new(0.5, 0.0)).camax() < 1e-12);
        let u = haar_unitary(2, &mut rng).into_matrix();
        let rho2 = &u * random_density(2, &mut rng) * u.adjoint();
        let tw = clifford_twirl_exact(1, 2, &rho2).unwrap();
        let again = clifford_twirl_exact(1, 2, &tw).unwrap();
        assert!((tw - again).camax() < 1e-12);
    }

    #[test]
    fn symmetric_projector() {
        let p = pi_sym(1, 4).unwrap();
        assert!((&p * &p - &p).camax() < 1e-12);
        assert!((p.trace().re - 5.0).abs() < 1e-12);
        let p2 = pi_sym(2, 4).unwrap();
        assert!((p2.trace().re - 35.0).abs() < 1e-10);
    }

    #[test]
    fn four_copy_average() {
        for n in 1..=2 {
            let avg = avg_stab_fourcopy(n).unwrap();
            let formula = fourcopy_formula(n).unwrap();
            assert!((&avg - &formula).camax() < 1e-10, "n={n}");
            assert!((avg.trace().re - 1.0).abs() < 1e-10);
            let eig = SymmetricEigen::new(avg.clone());
            assert!(eig.eigenvalues.iter().all(|&v| v > -1e-10));
        }
        let p = pi4(1).unwrap() * pi_sym(1, 4).unwrap();
        assert!((p.trace().re - 2.0).abs() < 1e-12);
    }
}
