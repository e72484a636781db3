//! Small-n dense simulation: states, unitaries, Choi states, characteristic
//! distributions, brute-force fidelities, Bell sampling and subspace weights.

mod chardist;
mod fidelity;
mod lagrangian;

pub use chardist::{
    char_dist_state, char_dist_unitary, char_dist_unitary_large, high_weight_set, pair_to_state_label,
    shifted_weight, subspace_weight, unitary_moments, weyl_fourier, CharDist, DistKind, UnitaryMoments,
};
pub use fidelity::{clifford_matrices, f_cliff, f_stab, stabilizer_vectors};
pub use lagrangian::{
    extend_to_symplectic, extend_to_symplectic_in, extract_extendable, graph_subspace, is_clifford_lagrangian, pair_form_isotropic,
    pair_to_standard, ExtendableSplit, PartialSymplecticMap,
};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{budget, Error, Result};
use crate::pauli::{weyl_monomial, WeylLabel};

/// Normalization and unitarity tolerance.
pub const TOL: f64 = 1e-10;
/// Largest qubit count for Choi states.
pub const MAX_CHOI_QUBITS: usize = 5;
/// Largest qubit count for generic dense states.
pub const MAX_STATE_QUBITS: usize = 12;

pub type CMatrix = DMatrix<Complex64>;

/// A unit vector on `n` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: DVector<Complex64>,
}

impl StateVector {
    pub fn new(n: usize, amps: DVector<Complex64>) -> Result<Self> {
        if amps.len() != 1usize << n {
            return Err(Error::LengthMismatch {
                left: amps.len(),
                right: 1 << n,
            });
        }
        let norm = amps.norm();
        if (norm - 1.0).abs() > TOL {
            return Err(Error::InvalidInput(format!("state norm {norm} is not 1")));
        }
        Ok(Self { n, amps })
    }

    /// Normalizes `amps`; fails on the zero vector.
    pub fn normalized(n: usize, amps: DVector<Complex64>) -> Result<Self> {
        let norm = amps.norm();
        if norm < 1e-300 {
            return Err(Error::InvalidInput("zero vector".into()));
        }
        Self::new(n, amps.unscale(norm))
    }

    pub fn basis(n: usize, k: usize) -> Self {
        let mut amps = DVector::zeros(1 << n);
        amps[k] = Complex64::new(1.0, 0.0);
        Self { n, amps }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amps
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amps.dotc(&other.amps)
    }

    pub fn overlap(&self, other: &StateVector) -> f64 {
        self.inner(other).norm_sqr()
    }

    pub fn apply(&self, u: &DenseUnitary) -> Result<StateVector> {
        if u.n != self.n {
            return Err(Error::LengthMismatch {
                left: u.n,
                right: self.n,
            });
        }
        Ok(StateVector {
            n: self.n,
            amps: &u.m * &self.amps,
        })
    }

    pub fn tensor(&self, other: &StateVector) -> StateVector {
        StateVector {
            n: self.n + other.n,
            amps: self.amps.kronecker(&other.amps),
        }
    }

    pub fn density(&self) -> CMatrix {
        &self.amps * self.amps.adjoint()
    }
}

/// A unitary on `n` qubits, row index = output basis state.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseUnitary {
    n: usize,
    m: CMatrix,
}

/// Largest entrywise modulus of `U†U − I`.
pub fn unitarity_residual(m: &CMatrix) -> f64 {
    let d = m.nrows();
    (m.adjoint() * m - CMatrix::identity(d, d))
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

impl DenseUnitary {
    pub fn new(n: usize, m: CMatrix) -> Result<Self> {
        let d = 1usize << n;
        if m.nrows() != d || m.ncols() != d {
            return Err(Error::LengthMismatch {
                left: m.nrows(),
                right: d,
            });
        }
        let res = unitarity_residual(&m);
        if res > TOL {
            return Err(Error::InvalidInput(format!(
                "matrix is not unitary (residual {res:.3e})"
            )));
        }
        Ok(Self { n, m })
    }

    pub fn identity(n: usize) -> Self {
        let d = 1 << n;
        Self {
            n,
            m: CMatrix::identity(d, d),
        }
    }

    /// `diag(1, e^{iπ/4})`.
    pub fn t_gate() -> Self {
        let mut m = CMatrix::identity(2, 2);
        m[(1, 1)] = Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4);
        Self { n: 1, m }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix {
        self.m
    }

    pub fn adjoint(&self) -> Self {
        Self {
            n: self.n,
            m: self.m.adjoint(),
        }
    }

    pub fn mul(&self, other: &DenseUnitary) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::LengthMismatch {
                left: self.n,
                right: other.n,
            });
        }
        Ok(Self {
            n: self.n,
            m: &self.m * &other.m,
        })
    }

    pub fn kron(&self, other: &DenseUnitary) -> Self {
        Self {
            n: self.n + other.n,
            m: self.m.kronecker(&other.m),
        }
    }

    pub fn scaled_by_phase(&self, theta: f64) -> Self {
        Self {
            n: self.n,
            m: &self.m * Complex64::from_polar(1.0, theta),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct UnitaryRepr {
    n: usize,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

impl Serialize for DenseUnitary {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let d = self.dim();
        let rows = |f: fn(&Complex64) -> f64| -> Vec<Vec<f64>> {
            (0..d).map(|i| (0..d).map(|j| f(&self.m[(i, j)])).collect()).collect()
        };
        UnitaryRepr {
            n: self.n,
            re: rows(|z| z.re),
            im: rows(|z| z.im),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for DenseUnitary {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let r = UnitaryRepr::deserialize(d)?;
        if r.n > MAX_STATE_QUBITS {
            return Err(D::Error::custom(format!("n = {} exceeds {MAX_STATE_QUBITS}", r.n)));
        }
        let dim = 1usize << r.n;
        let shape_ok = |m: &Vec<Vec<f64>>| m.len() == dim && m.iter().all(|row| row.len() == dim);
        if !shape_ok(&r.re) || !shape_ok(&r.im) {
            return Err(D::Error::custom(format!("expected {dim}x{dim} re/im arrays")));
        }
        let m = CMatrix::from_fn(dim, dim, |i, j| Complex64::new(r.re[i][j], r.im[i][j]));
        DenseUnitary::new(r.n, m).map_err(D::Error::custom)
    }
}

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Haar-random unitary: QR of a complex Gaussian matrix with the phases of
/// `diag(R)` moved into `Q`.
pub fn haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DenseUnitary {
    let d = 1usize << n;
    let g = CMatrix::from_fn(d, d, |_, _| complex_gaussian(rng));
    let qr = g.qr();
    let (mut q, r) = qr.unpack();
    for j in 0..d {
        let rjj = r[(j, j)];
        let ph = if rjj.norm() > 0.0 { rjj / rjj.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..d {
            q[(i, j)] *= ph;
        }
    }
    DenseUnitary { n, m: q }
}

/// Haar-random pure state.
pub fn random_state<R: Rng + ?Sized>(n: usize, rng: &mut R) -> StateVector {
    let d = 1usize << n;
    let v = DVector::from_fn(d, |_, _| complex_gaussian(rng));
    StateVector::normalized(n, v).expect("Gaussian vector is nonzero")
}

/// `|U⟩⟩ = (U ⊗ I)|Ω⟩`; amplitude of `|i⟩|j⟩` is `U_ij / 2^{n/2}`.
pub fn choi_state(u: &DenseUnitary) -> Result<StateVector> {
    budget("qubits for Choi state", u.n, MAX_CHOI_QUBITS)?;
    let d = u.dim();
    let s = (d as f64).sqrt();
    let amps = DVector::from_fn(d * d, |idx, _| u.m[(idx / d, idx % d)] / s);
    Ok(StateVector { n: 2 * u.n, amps })
}

/// `|P_x⟩⟩ = (P_x ⊗ I)|Ω⟩` on `2n` qubits.
pub fn bell_state(label: &WeylLabel) -> StateVector {
    let n = label.n();
    let d = 1usize << n;
    let (a, phases) = weyl_monomial(n, label.index());
    let s = (d as f64).sqrt();
    let mut amps = DVector::zeros(d * d);
    for (j, ph) in phases.into_iter().enumerate() {
        amps[((j ^ a) << n) | j] = ph / s;
    }
    StateVector { n: 2 * n, amps }
}

/// `|⟨⟨P_y|ψ⟩|²` for every `y ∈ F₂^{2n}`, indexed by the packed label.
pub fn bell_probabilities(psi: &StateVector) -> Result<Vec<f64>> {
    if !psi.n.is_multiple_of(2) {
        return Err(Error::OddLength(psi.n));
    }
    let n = psi.n / 2;
    let d = 1usize << n;
    let s = (d as f64).sqrt();
    let probs: Vec<f64> = (0..1u64 << (2 * n))
        .map(|y| {
            let (a, phases) = weyl_monomial(n, y);
            let amp: Complex64 = phases
                .iter()
                .enumerate()
                .map(|(j, ph)| ph.conj() * psi.amps[((j ^ a) << n) | j])
                .sum();
            (amp / s).norm_sqr()
        })
        .collect();
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::Internal(format!("Bell probabilities sum to {total}")));
    }
    Ok(probs)
}

/// One Bell-basis measurement outcome.
pub fn bell_measure<R: Rng + ?Sized>(psi: &StateVector, rng: &mut R) -> Result<WeylLabel> {
    let probs = bell_probabilities(psi)?;
    let dist = WeightedIndex::new(&probs).map_err(|e| Error::Internal(e.to_string()))?;
    Ok(WeylLabel::from_index(psi.n / 2, dist.sample(rng) as u64))
}

/// `U = Σ_x |x⟩⟨x| ⊗ U^{(x)}` over `x ∈ F₂^k`, with `U^{(0)} = I` and Haar blocks otherwise.
pub fn gap_instance<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Result<DenseUnitary> {
    budget("qubits for gap instance", n, MAX_CHOI_QUBITS)?;
    if k > n {
        return Err(Error::InvalidInput(format!("k={k} exceeds n={n}")));
    }
    let d = 1usize << n;
    let block = 1usize << (n - k);
    let mut m = CMatrix::zeros(d, d);
    for x in 0..1usize << k {
        let b = if x == 0 {
            DenseUnitary::identity(n - k)
        } else {
            haar_unitary(n - k, rng)
        };
        m.view_mut((x * block, x * block), (block, block)).copy_from(&b.m);
    }
    DenseUnitary::new(n, m)
}

/// Stabilizer witness `2^{−(n−k)/2} Σ_y |0^k y⟩|0^k y⟩` for [`gap_instance`].
pub fn gap_witness(n: usize, k: usize) -> Result<StateVector> {
    budget("qubits for gap witness", n, MAX_CHOI_QUBITS)?;
    if k > n {
        return Err(Error::InvalidInput(format!("k={k} exceeds n={n}")));
    }
    let d = 1usize << n;
    let mut amps = DVector::zeros(d * d);
    let block = 1usize << (n - k);
    let s = (block as f64).sqrt();
    for y in 0..block {
        amps[(y << n) | y] = Complex64::new(1.0 / s, 0.0);
    }
    Ok(StateVector { n: 2 * n, amps })
}
