//! Named invariant checks grouped into suites, shared by the `verify`
//! command and the acceptance target.
//!
//! Every check reports the number of cases, the smallest slack seen
//! (negative means violated) and a short detail line.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::commutant::{
    avg_stab_fourcopy, clifford_twirl_exact, clifford_twirl_weingarten, enumerate_sd,
    enumerate_sigma_tt, fourcopy_formula, gram_dense, gram_weingarten, kron_power,
    min_trace_norm_pt, partial_transpose_dense, ppt_overlap_check, r_operator,
    unitary_partial_transpose_with, PivotRule, SelfDualCode, R_operator,
};
use crate::densesim::{
    char_dist_state, char_dist_unitary, char_dist_unitary_large, choi_state, clifford_matrices,
    f_cliff, f_stab, graph_subspace, haar_unitary, high_weight_set, random_state, shifted_weight,
    subspace_weight, unitarity_residual, weyl_fourier, CMatrix, DenseUnitary, StateVector,
};
use crate::error::{Error, Result};
use crate::gf2::{enumerate_subspaces, kernel, rank, rref, symplectic_inner, BitMatrix, BitVec, Form, Subspace};
use crate::norms::{gowers_uk, qk_norm};
use crate::pauli::{
    enumerate_cliffords, enumerate_symplectic, random_clifford, random_stabilizer_state,
    weyl_matrix_index, PhasedPauli, WeylLabel,
};
use crate::testers::{
    avg_fidelity_upper_bound, avg_stab_fidelity_exact, detection_probability, four_query_repetitions,
    leaf_distribution, pacc_exact, pacc_gnw_choi, pacc_pi4, rejection_frequency, run_4query,
    run_4query_repeated, run_aux_free_single_copy, stream_rng, t_tensor_identity, tv_distance,
    Ensemble, OracleStabTester, Round, Strategy, TesterConfig,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Suite {
    #[serde(rename = "all")]
    All,
    #[serde(rename = "fidelity")]
    Fidelity,
    #[serde(rename = "norms")]
    Norms,
    #[serde(rename = "commutant")]
    Commutant,
    #[serde(rename = "testers")]
    Testers,
    #[serde(rename = "appendixA")]
    AppendixA,
    /// F₂ and Pauli structure checks; part of `all`.
    #[serde(rename = "structure")]
    Structure,
}

impl Suite {
    pub const NAMES: [&'static str; 7] = ["all", "fidelity", "norms", "commutant", "testers", "appendixA", "structure"];
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "all" => Suite::All,
            "fidelity" => Suite::Fidelity,
            "norms" => Suite::Norms,
            "commutant" => Suite::Commutant,
            "testers" => Suite::Testers,
            "appendixA" => Suite::AppendixA,
            "structure" => Suite::Structure,
            _ => {
                return Err(Error::InvalidInput(format!(
                    "unknown suite {s:?}; expected one of {}",
                    Suite::NAMES.join(", ")
                )))
            }
        })
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let i = [
            Suite::All,
            Suite::Fidelity,
            Suite::Norms,
            Suite::Commutant,
            Suite::Testers,
            Suite::AppendixA,
            Suite::Structure,
        ]
        .iter()
        .position(|s| s == self)
        .expect("listed");
        f.write_str(Suite::NAMES[i])
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    /// Restrict sampled checks to this qubit count.
    pub n: Option<usize>,
    /// Override the number of random samples per qubit count.
    pub seeds: Option<usize>,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            n: None,
            seeds: None,
            seed: 2024,
        }
    }
}

impl VerifyOptions {
    fn qubits(&self, default: &[usize], max: usize) -> Result<Vec<usize>> {
        match self.n {
            Some(n) if n == 0 || n > max => Err(Error::Budget {
                guard: "qubits for verify suite",
                requested: n,
                limit: max,
            }),
            Some(n) => Ok(vec![n]),
            None => Ok(default.to_vec()),
        }
    }

    fn count(&self, default: usize) -> usize {
        self.seeds.unwrap_or(default)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub suite: String,
    pub name: String,
    pub passed: bool,
    /// False for checks that are recorded but not enforced.
    pub asserted: bool,
    pub cases: usize,
    pub violations: usize,
    /// Smallest slack over all cases; negative on violation.
    pub margin: Option<f64>,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub suite: Suite,
    pub options: VerifyOptions,
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn first_failure(&self) -> Option<&CheckResult> {
        self.checks.iter().find(|c| !c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }
}

struct Check {
    suite: &'static str,
    name: &'static str,
    asserted: bool,
    cases: usize,
    violations: usize,
    margin: Option<f64>,
    detail: String,
}

impl Check {
    fn new(suite: &'static str, name: &'static str) -> Self {
        Self {
            suite,
            name,
            asserted: true,
            cases: 0,
            violations: 0,
            margin: None,
            detail: String::new(),
        }
    }

    fn recorded(mut self) -> Self {
        self.asserted = false;
        self
    }

    fn slack(&mut self, s: f64) {
        self.cases += 1;
        self.margin = Some(self.margin.map_or(s, |m| m.min(s)));
        if s.is_nan() || s < 0.0 {
            self.violations += 1;
        }
    }

    /// `a ≤ b + tol`.
    fn le(&mut self, a: f64, b: f64, tol: f64) {
        self.slack(b + tol - a);
    }

    fn close(&mut self, a: f64, b: f64, tol: f64) {
        self.slack(tol - (a - b).abs());
    }

    fn flag(&mut self, ok: bool) {
        self.cases += 1;
        if !ok {
            self.violations += 1;
        }
    }

    fn detail(mut self, d: impl Into<String>) -> Self {
        self.detail = d.into();
        self
    }

    fn finish(self) -> CheckResult {
        CheckResult {
            suite: self.suite.to_string(),
            name: self.name.to_string(),
            passed: !self.asserted || (self.violations == 0 && self.cases > 0),
            asserted: self.asserted,
            cases: self.cases,
            violations: self.violations,
            margin: self.margin,
            detail: self.detail,
        }
    }
}

pub fn run_suite(suite: Suite, opts: &VerifyOptions) -> Result<VerifyReport> {
    let mut checks = Vec::new();
    let parts: &[Suite] = match suite {
        Suite::All => &[
            Suite::Structure,
            Suite::Fidelity,
            Suite::Norms,
            Suite::Commutant,
            Suite::AppendixA,
            Suite::Testers,
        ],
        _ => std::slice::from_ref(&suite),
    };
    for part in parts {
        checks.extend(match part {
            Suite::Structure => structure(opts)?,
            Suite::Fidelity => fidelity(opts)?,
            Suite::Norms => norms(opts)?,
            Suite::Commutant => commutant(opts)?,
            Suite::AppendixA => appendix_a()?,
            Suite::Testers => testers(opts)?,
            Suite::All => unreachable!(),
        });
    }
    Ok(VerifyReport {
        suite,
        options: opts.clone(),
        passed: checks.iter().all(|c| c.passed),
        checks,
    })
}

/// Haar-random unitaries for qubit count `n`, reproducible from `seed`.
pub fn haar_samples(n: usize, count: usize, seed: u64) -> Vec<DenseUnitary> {
    let mut rng = stream_rng(seed, n as u64);
    (0..count).map(|_| haar_unitary(n, &mut rng)).collect()
}

/// `C · exp(−iθH)` for a random Clifford `C` and a random Hermitian `H` of unit operator norm.
pub fn near_clifford<R: Rng + ?Sized>(n: usize, theta: f64, rng: &mut R) -> Result<DenseUnitary> {
    let d = 1usize << n;
    let g = haar_unitary(n, rng);
    let h = CMatrix::from_fn(d, d, |i, j| {
        let (a, b) = (g.matrix()[(i, j)], g.matrix()[(j, i)].conj());
        (a + b) * 0.5
    });
    let eig = SymmetricEigen::new(h);
    let top = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-12);
    let phases = DVector::from_iterator(
        d,
        eig.eigenvalues.iter().map(|l| Complex64::from_polar(1.0, -theta * l / top)),
    );
    let v = &eig.eigenvectors;
    let e = v * CMatrix::from_diagonal(&phases) * v.adjoint();
    let c = random_clifford(n, rng).matrix()?;
    DenseUnitary::new(n, c.matrix() * e)
}

/// A stabilizer state nudged towards a random state, renormalized.
pub fn near_stabilizer<R: Rng + ?Sized>(n: usize, weight: f64, rng: &mut R) -> Result<StateVector> {
    let s = random_stabilizer_state(n, rng).state_vector()?;
    let r = random_state(n, rng);
    let amps = s.amplitudes() * Complex64::new(1.0 - weight, 0.0) + r.amplitudes() * Complex64::new(weight, 0.0);
    StateVector::normalized(n, amps)
}

fn lagrangians(n: usize) -> Result<Vec<Subspace>> {
    let mut out = Vec::new();
    for v in enumerate_subspaces(2 * n, n)? {
        if v.is_lagrangian()? {
            out.push(v);
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------- structure

fn random_bitmatrix<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> BitMatrix {
    let rows = (0..rows)
        .map(|_| BitVec::from_bools(&(0..cols).map(|_| rng.random::<bool>()).collect::<Vec<_>>()))
        .collect();
    BitMatrix::from_rows(cols, rows).expect("rows have the right length")
}

fn structure(opts: &VerifyOptions) -> Result<Vec<CheckResult>> {
    const S: &str = "structure";
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut out = Vec::new();

    let mut dual = Check::new(S, "dual is an involution (ambient ≤ 8)");
    let spaces: Vec<Subspace> = (0..=8)
        .flat_map(|m| (0..=m).map(move |k| (m, k)))
        .map(|(m, k)| enumerate_subspaces(m, k).map(|it| it.collect::<Vec<_>>()))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    let flags: Vec<bool> = spaces
        .par_iter()
        .map(|v| {
            let m = v.ambient_dim();
            let std_ok = v.dual(Form::Standard).dual(Form::Standard) == *v
                && v.dim() + v.dual(Form::Standard).dim() == m;
            let sym_ok = m % 2 == 1 || v.dual(Form::Symplectic).dual(Form::Symplectic) == *v;
            std_ok && sym_ok
        })
        .collect();
    flags.into_iter().for_each(|f| dual.flag(f));
    out.push(dual.detail(format!("{} subspaces", spaces.len())).finish());

    let mut rn = Check::new(S, "rank-nullity");
    let mut canon = Check::new(S, "RREF is canonical");
    for _ in 0..500 {
        let r = rng.random_range(1..=8);
        let c = rng.random_range(1..=12);
        let m = random_bitmatrix(r, c, &mut rng);
        rn.flag(rank(&m) + kernel(&m).dim() == c);
        // Left-multiply by a random invertible matrix: same row space.
        let mut g = random_bitmatrix(r, r, &mut rng);
        while g.inverse().is_none() {
            g = random_bitmatrix(r, r, &mut rng);
        }
        canon.flag(rref(&g.mul(&m)?).0 == rref(&m).0);
    }
    out.push(rn.finish());
    out.push(canon.finish());

    let mut sym = Check::new(S, "symplectic form is bilinear and alternating");
    for _ in 0..500 {
        let n = rng.random_range(1..=6);
        let v = |rng: &mut ChaCha8Rng| BitVec::from_index(2 * n, rng.random_range(0..1u64 << (2 * n)));
        let (x, y, z) = (v(&mut rng), v(&mut rng), v(&mut rng));
        let ok = !symplectic_inner(&x, &x)?
            && symplectic_inner(&x, &y)? == symplectic_inner(&y, &x)?
            && symplectic_inner(&x.xor(&y), &z)? == (symplectic_inner(&x, &z)? ^ symplectic_inner(&y, &z)?);
        sym.flag(ok);
    }
    out.push(sym.finish());

    let mut herm = Check::new(S, "Weyl operators are Hermitian, unitary and trace-orthogonal");
    let mut comm = Check::new(S, "Weyl commutation follows the symplectic form");
    for n in 1..=2usize {
        let count = 1u64 << (2 * n);
        let mats: Vec<CMatrix> = (0..count).map(|x| weyl_matrix_index(n, x)).collect();
        let d = (1usize << n) as f64;
        for (x, px) in mats.iter().enumerate() {
            herm.slack(1e-12 - (px - px.adjoint()).camax());
            herm.slack(1e-12 - unitarity_residual(px));
            for (y, py) in mats.iter().enumerate() {
                let tr = (px * py).trace();
                let expect = if x == y { d } else { 0.0 };
                herm.close(tr.norm(), expect, 1e-12);
                let sign = if crate::gf2::symplectic_inner_index(n, x as u64, y as u64) { -1.0 } else { 1.0 };
                comm.slack(1e-12 - (px * py - py * px * Complex64::new(sign, 0.0)).camax());
            }
        }
    }
    out.push(herm.finish());
    out.push(comm.finish());

    let mut conj = Check::new(S, "Cliffords map Weyl operators to signed Weyl operators");
    for n in 1..=2usize {
        let cliffs = enumerate_cliffords(n)?;
        let slacks = cliffs
            .par_iter()
            .map(|c| {
                let u = c.matrix()?;
                let mut worst = f64::INFINITY;
                for x in 0..1u64 << (2 * n) {
                    let p = PhasedPauli::new(WeylLabel::from_index(n, x), 0);
                    let image = c.conjugate(&p)?;
                    let dense = u.matrix() * p.matrix()? * u.matrix().adjoint();
                    worst = worst.min(1e-10 - (dense - image.matrix()?).camax());
                }
                Ok(worst)
            })
            .collect::<Result<Vec<_>>>()?;
        slacks.into_iter().for_each(|s| conj.slack(s));
    }
    out.push(conj.finish());

    let mut choi = Check::new(S, "Choi states of Cl(1) are stabilizer states");
    for c in enumerate_cliffords(1)? {
        choi.close(f_stab(&choi_state(&c.matrix()?)?)?, 1.0, 1e-10);
    }
    out.push(choi.finish());
    Ok(out)
}

// ---------------------------------------------------------------- fidelity

struct UnitarySample {
    n: usize,
    f_stab_choi: f64,
    f_cliff: f64,
    choi_dist_gap: f64,
    marginals_ok: bool,
    fourier_max: f64,
    collision: f64,
    graph_max: Option<f64>,
}

fn unitary_sample(u: &DenseUnitary) -> Result<UnitarySample> {
    let n = u.n();
    let choi = choi_state(u)?;
    let p = char_dist_unitary(u)?;
    let q = char_dist_state(&choi)?;
    let gap = p
        .table
        .iter()
        .enumerate()
        .map(|(i, v)| (v - q.table[crate::densesim::pair_to_state_label(n, (i >> (2 * n)) as u64, (i & ((1 << (2 * n)) - 1)) as u64) as usize]).abs())
        .fold(0.0, f64::max);
    let d2 = 1usize << (2 * n);
    let collision = (0..d2).map(|x| p.table[x * d2 + x]).sum();
    let graph_max = if n == 1 {
        let mut m = 0.0f64;
        for s in enumerate_symplectic(1)? {
            m = m.max(subspace_weight(&p, &graph_subspace(&s))?);
        }
        Some(m)
    } else {
        None
    };
    Ok(UnitarySample {
        n,
        f_stab_choi: f_stab(&choi)?,
        f_cliff: f_cliff(u)?,
        choi_dist_gap: gap,
        marginals_ok: p.check_invariants().is_ok(),
        fourier_max: weyl_fourier(u).iter().map(|c| c.norm_sqr()).fold(0.0, f64::max),
        collision,
        graph_max,
    })
}

/// Haar samples plus near-Clifford samples, the latter so that the
/// high-fidelity regime is populated at every `n`.
pub fn fidelity_sample_set(opts: &VerifyOptions) -> Result<Vec<DenseUnitary>> {
    let mut out = Vec::new();
    for n in opts.qubits(&[1, 2], 2)? {
        let count = opts.count(if n == 1 { 200 } else { 25 });
        out.extend(haar_samples(n, count, opts.seed));
        let mut rng = stream_rng(opts.seed ^ 0x5eed, n as u64);
        for i in 0..count.div_ceil(5) {
            out.push(near_clifford(n, 0.1 + 0.05 * (i % 6) as f64, &mut rng)?);
        }
    }
    Ok(out)
}

fn fidelity(opts: &VerifyOptions) -> Result<Vec<CheckResult>> {
    const S: &str = "fidelity";
    let samples = fidelity_sample_set(opts)?;
    let data = samples.par_iter().map(unitary_sample).collect::<Result<Vec<_>>>()?;

    let mut dist = Check::new(S, "unitary distribution equals the Choi-state distribution");
    let mut marg = Check::new(S, "p_U marginals are uniform");
    let mut sandwich = Check::new(S, "fidelity sandwich F_Stab(|U⟩⟩)^6 ≤ F_Cliff ≤ F_Stab(|U⟩⟩)");
    let mut equiv = Check::new(S, "F_Cliff = F_Stab(|U⟩⟩) when F_Stab(|U⟩⟩) > 1/2");
    let mut lag = Check::new(S, "Clifford Lagrangians lower-bound F_Cliff");
    let mut q2 = Check::new(S, "max Fourier weight bounds the collision probability");
    for s in &data {
        dist.slack(1e-10 - s.choi_dist_gap);
        marg.flag(s.marginals_ok);
        sandwich.le(s.f_stab_choi.powi(6), s.f_cliff, 1e-12);
        sandwich.le(s.f_cliff, s.f_stab_choi, 1e-9);
        if s.f_stab_choi > 0.5 {
            equiv.close(s.f_cliff, s.f_stab_choi, 1e-9);
        }
        if let Some(g) = s.graph_max {
            lag.le(g, s.f_cliff, 1e-12);
        }
        q2.le(s.collision, s.fourier_max, 1e-12);
    }
    // Distribution identity at n = 3 through the large table.
    if opts.n.is_none() || opts.n == Some(3) {
        for u in haar_samples(3, 2, opts.seed) {
            let p = char_dist_unitary_large(&u)?;
            let q = char_dist_state(&choi_state(&u)?)?;
            let gap = p
                .table
                .iter()
                .enumerate()
                .map(|(i, v)| (v - q.table[crate::densesim::pair_to_state_label(3, (i >> 6) as u64, (i & 63) as u64) as usize]).abs())
                .fold(0.0, f64::max);
            dist.slack(1e-10 - gap);
            let d2 = 64usize;
            let collision: f64 = (0..d2).map(|x| p.table[x * d2 + x]).sum();
            q2.le(collision, weyl_fourier(&u).iter().map(|c| c.norm_sqr()).fold(0.0, f64::max), 1e-12);
        }
    }
    let per_n = |n: usize| data.iter().filter(|s| s.n == n).count();
    let note = format!("{} unitaries at n=1, {} at n=2", per_n(1), per_n(2));
    let mut out: Vec<CheckResult> = [
        dist.detail(note.clone()),
        marg,
        sandwich.detail(note.clone()),
        equiv.detail(note),
        lag,
        q2,
    ]
    .into_iter()
    .map(Check::finish)
    .collect();
    out.extend(state_checks(opts)?);
    Ok(out)
}

fn state_checks(opts: &VerifyOptions) -> Result<Vec<CheckResult>> {
    const S: &str = "fidelity";
    let mut lower = Check::new(S, "Lagrangian weight lower-bounds F_Stab");
    let mut upper = Check::new(S, "max Lagrangian weight ≥ F_Stab²");
    let mut coll = Check::new(S, "2ⁿ‖p_ψ‖² ≥ F_Stab⁴");
    let mut unc = Check::new(S, "high-weight labels are isotropic");
    let mut shifts = Check::new(S, "affine shifts carry no more weight");
    for n in opts.qubits(&[1, 2, 3], 3)? {
        let mut rng = stream_rng(opts.seed ^ 0x57a7e, n as u64);
        let count = opts.count(20);
        let mut states: Vec<StateVector> = (0..count).map(|_| random_state(n, &mut rng)).collect();
        for i in 0..count {
            states.push(near_stabilizer(n, 0.05 + 0.3 * (i as f64) / count as f64, &mut rng)?);
        }
        let lags = if n <= 2 { lagrangians(n)? } else { Vec::new() };
        let spaces: Vec<Subspace> = if n <= 2 {
            (0..=2 * n)
                .map(|k| enumerate_subspaces(2 * n, k).map(|it| it.collect::<Vec<_>>()))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .flatten()
                .collect()
        } else {
            (0..60)
                .map(|_| {
                    let k = rng.random_range(1..2 * n);
                    let gens = (0..k)
                        .map(|_| BitVec::from_index(2 * n, rng.random_range(1..1u64 << (2 * n))))
                        .collect();
                    Subspace::from_generators(2 * n, gens)
                })
                .collect::<Result<Vec<_>>>()?
        };
        for psi in &states {
            let p = char_dist_state(psi)?;
            let fs = f_stab(psi)?;
            if !lags.is_empty() {
                let mut best = 0.0f64;
                for m in &lags {
                    let w = subspace_weight(&p, m)?;
                    lower.le(w, fs, 1e-12);
                    best = best.max(w);
                }
                upper.le(fs * fs, best, 1e-12);
            }
            coll.le(fs.powi(4), (1u64 << n) as f64 * p.l2_squared(), 1e-12);
            let high = high_weight_set(&p)?;
            unc.flag(high.iter().all(|a| high.iter().all(|b| a.commutes_with(b))));
            for v in &spaces {
                let base = subspace_weight(&p, v)?;
                let total = 1u64 << (2 * n);
                for s in (0..total).step_by(if n == 3 { 7 } else { 1 }) {
                    let shift = BitVec::from_index(2 * n, s);
                    if !v.contains(&shift) {
                        shifts.le(shifted_weight(&p, v, &shift)?, base, 1e-12);
                    }
                }
            }
        }
    }
    Ok(vec![lower.finish(), upper.finish(), coll.finish(), unc.finish(), shifts.finish()])
}

// ---------------------------------------------------------------- norms

fn norms(opts: &VerifyOptions) -> Result<Vec<CheckResult>> {
    const S: &str = "norms";
    let mut fourth = Check::new(S, "‖U‖⁴_{Q²} = Σ_x p_U(x,x)");
    let mut eighth = Check::new(S, "‖U‖⁸_{Q³} = 2^{2n}‖p_U‖²");
    let mut choi = Check::new(S, "‖U‖_{Q³} = ‖|U⟩⟩‖_{U³}");
    let mut states = Check::new(S, "‖ψ‖⁸_{U³} = 2ⁿ‖p_ψ‖²");
    let mut cliff = Check::new(S, "Clifford Q³ norms equal 1");
    let mut inverse = Check::new(S, "F_Cliff > 0 when ‖U‖_{Q³} > 2^{−n/4}").recorded();
    for n in opts.qubits(&[1, 2], 2)? {
        let us = haar_samples(n, opts.count(50), opts.seed ^ 0x9043);
        let rows = us
            .par_iter()
            .map(|u| {
                let p = char_dist_unitary(u)?;
                let d2 = 1usize << (2 * n);
                let diag: f64 = (0..d2).map(|x| p.table[x * d2 + x]).sum();
                let q2 = qk_norm(u, 2)?;
                let q3 = qk_norm(u, 3)?;
                let u3 = gowers_uk(&choi_state(u)?, 3)?;
                Ok((diag, q2.raw, d2 as f64 * p.l2_squared(), q3, u3.value, f_cliff(u)?))
            })
            .collect::<Result<Vec<_>>>()?;
        for (diag, q2raw, l2, q3, u3, fc) in rows {
            fourth.close(q2raw, diag, 1e-9);
            eighth.close(q3.raw, l2, 1e-9);
            choi.close(q3.value, u3, 1e-9);
            if q3.value > 2f64.powf(-(n as f64) / 4.0) {
                inverse.flag(fc > 0.0);
            }
        }
    }
    for c in enumerate_cliffords(1)? {
        let u = c.matrix()?;
        let q3 = qk_norm(&u, 3)?;
        cliff.close(q3.value, 1.0, 1e-10);
        let p = char_dist_unitary(&u)?;
        eighth.close(q3.raw, 4.0 * p.l2_squared(), 1e-9);
        fourth.close(qk_norm(&u, 2)?.raw, (0..4).map(|x| p.table[x * 4 + x]).sum(), 1e-9);
    }
    for n in opts.qubits(&[1, 2, 3], 3)? {
        let mut rng = stream_rng(opts.seed ^ 0x57a7, n as u64);
        for _ in 0..opts.count(50) {
            let psi = random_state(n, &mut rng);
            let p = char_dist_state(&psi)?;
            states.close(gowers_uk(&psi, 3)?.raw, (1u64 << n) as f64 * p.l2_squared(), 1e-9);
        }
    }
    Ok([fourth, eighth, choi, states, cliff, inverse].into_iter().map(Check::finish).collect())
}

// ---------------------------------------------------------------- commutant

fn random_density<R: Rng + ?Sized>(qubits: usize, rng: &mut R) -> CMatrix {
    let d = 1usize << qubits;
    let mut rho = CMatrix::zeros(d, d);
    let weights: Vec<f64> = (0..3).map(|_| rng.random::<f64>()).collect();
    let total: f64 = weights.iter().sum();
    for w in weights {
        rho += random_state(qubits, rng).density() * Complex64::new(w / total, 0.0);
    }
    rho
}

fn commutant(opts: &VerifyOptions) -> Result<Vec<CheckResult>> {
    const S: &str = "commutant";
    let mut out = Vec::new();

    let mut sd = Check::new(S, "|SD(2t)| = 1, 3, 15, 135");
    for (t, want) in [(1, 1), (2, 3), (3, 15), (4, 135)] {
        sd.flag(enumerate_sd(t)?.len() == want);
    }
    out.push(sd.finish());
    let mut sigma = Check::new(S, "|Σ_{t,t}| = 2, 6, 30, 270");
    for (t, want) in [(2, 2), (3, 6), (4, 30), (5, 270)] {
        sigma.flag(enumerate_sigma_tt(t)?.len() == want);
    }
    out.push(sigma.finish());

    let mut inv = Check::new(S, "Σ_{t,t} elements are self-dual and contain 1");
    for t in 1..=5 {
        for s in enumerate_sigma_tt(t)? {
            inv.flag(s.code().space().is_self_dual() && s.code().space().contains(&BitVec::ones(2 * t)));
        }
    }
    out.push(inv.finish());

    let mut chain = Check::new(S, "inclusion chain: permutations, orthogonal graphs and Σ_{t,t}");
    for (t, perms, total) in [(3usize, 6usize, 6usize), (4, 24, 30)] {
        let sig = enumerate_sigma_tt(t)?;
        let graphs: Vec<BitMatrix> = sig.iter().filter_map(|s| s.code().orthogonal_matrix()).collect();
        let p = graphs.iter().filter(|o| o.rows().iter().all(|r| r.weight() == 1)).count();
        chain.flag(p == perms && graphs.len() == perms && sig.len() == total);
    }
    out.push(chain.detail("t=3: 6 = 6 = 6; t=4: 24 = 24 < 30").finish());

    let mut eq_rank = Check::new(S, "rank A = rank B");
    let mut sub_rank = Check::new(S, "rank G_I ≥ |I|");
    for t in 1..=4 {
        for c in enumerate_sd(t)? {
            eq_rank.flag(rank(&c.a_block()) == rank(&c.b_block()));
            for mask in 0usize..1 << t {
                let cols: Vec<usize> = (0..t).filter(|i| mask >> i & 1 == 1).flat_map(|i| [i, t + i]).collect();
                sub_rank.flag(rank(&c.generator().select_columns(&cols)) >= mask.count_ones() as usize);
            }
        }
    }
    out.push(eq_rank.finish());
    out.push(sub_rank.finish());

    let mut commute = Check::new(S, "R(T) commutes with C^{⊗t}");
    let cliffs = clifford_matrices(1)?;
    for t in 1..=4 {
        for s in enumerate_sigma_tt(t)? {
            let r = R_operator(s.code(), 1)?;
            for c in cliffs {
                let ct = kron_power(c, t);
                commute.slack(1e-10 - (&ct * &r - &r * &ct).camax());
            }
        }
    }
    out.push(commute.finish());

    let mut gram = Check::new(S, "Gram closed form matches dense traces");
    for (n, t) in [(1, 1), (1, 2), (1, 3), (1, 4), (2, 2), (2, 3)] {
        let closed = gram_weingarten(n, t)?.gram;
        let dense = gram_dense(n, t)?;
        gram.slack(1e-9 - (closed - dense).amax());
    }
    out.push(gram.finish());

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0xc0);
    let mut ppt = Check::new(S, "|tr(R(T)ρ)| ≤ 1 on product states");
    for t in 1..=4 {
        let sig = enumerate_sigma_tt(t)?;
        for _ in 0..100 {
            let factors: Vec<CMatrix> = (0..t).map(|_| random_state(1, &mut rng).density()).collect();
            for s in &sig {
                ppt.le(ppt_overlap_check(s, &factors, 1)?, 1.0, 1e-10);
            }
        }
    }
    out.push(ppt.detail("100 random product states per t, n=1").finish());

    let mut trace = Check::new(S, "min_S ‖R(T)^{Γ_S}‖₁ ≤ 2^{n(t−1)} for T ≠ e");
    for t in 1..=4 {
        for s in enumerate_sigma_tt(t)? {
            if !s.code().is_identity() {
                let (v, _) = min_trace_norm_pt(s.code(), 1)?;
                trace.le(v, (1u64 << (t - 1)) as f64, 1e-8);
            }
        }
    }
    out.push(trace.finish());

    let mut twirl = Check::new(S, "Clifford twirl equals the Weingarten expansion");
    for t in 2..=4 {
        for _ in 0..3 {
            let rho = random_density(t, &mut rng);
            let a = clifford_twirl_exact(1, t, &rho)?;
            let b = clifford_twirl_weingarten(1, t, &rho)?;
            twirl.slack(1e-8 - (a - b).camax());
        }
    }
    out.push(twirl.finish());

    let mut four = Check::new(S, "four-copy stabilizer average");
    for n in 1..=2 {
        four.slack(1e-10 - (avg_stab_fourcopy(n)? - fourcopy_formula(n)?).camax());
    }
    out.push(four.finish());
    Ok(out)
}

// ---------------------------------------------------------------- appendix A

/// Runs the partial-transpose algorithm on every code of SD(2t), t ≤ 4.
pub fn appendix_a() -> Result<Vec<CheckResult>> {
    const S: &str = "appendixA";
    let mut success = Check::new(S, "unitary partial transpose exists for every self-dual code");
    let mut full_rank = Check::new(S, "transposed left block has full rank");
    let mut orth = Check::new(S, "O is orthogonal and the result is its graph");
    let mut dense = Check::new(S, "r(D)^{Γ_S} is unitary at n=1");
    let mut inv = Check::new(S, "loop invariant: left block is the identity on finished columns");
    let mut graphs = Check::new(S, "graph codes need no transpose");
    let mut total = 0;
    for t in 1..=4 {
        for code in enumerate_sd(t)? {
            total += 1;
            let mut ok = true;
            let mut hook = |k: usize, m: &BitMatrix| {
                for r in 0..t {
                    for c in 0..=k {
                        ok &= m.get(r, c) == (r == c);
                    }
                }
            };
            let res = unitary_partial_transpose_with(&code, PivotRule::default(), &mut hook);
            inv.flag(ok);
            let Ok(u) = res else {
                success.flag(false);
                continue;
            };
            success.flag(true);
            full_rank.flag(rank(&u.transposed.a_block()) == t);
            let o = &u.orthogonal;
            let oot = o.mul(&o.transpose())?;
            orth.flag(oot == BitMatrix::identity(t) && u.transposed == SelfDualCode::graph(o)?);
            let d = partial_transpose_dense(&r_operator(&code), &u.subset, 1, t)?;
            dense.slack(1e-10 - unitarity_residual(&d));
            if code.orthogonal_matrix().is_some() {
                graphs.flag(u.subset.is_empty());
            }
        }
    }
    success.flag(total == 154);
    Ok([success.detail(format!("{total} codes")), full_rank, orth, dense, inv, graphs]
        .into_iter()
        .map(Check::finish)
        .collect())
}

// ---------------------------------------------------------------- testers

fn random_strategy<R: Rng + ?Sized>(t: usize, rng: &mut R) -> Strategy {
    Strategy {
        rounds: (0..t)
            .map(|_| {
                let u = haar_unitary(1, rng);
                let proj = |j: usize| {
                    let v = u.matrix().column(j).clone_owned();
                    &v * v.adjoint()
                };
                Round {
                    state: random_density(1, rng),
                    povm: vec![proj(0), proj(1)],
                }
            })
            .collect(),
    }
}

fn testers(opts: &VerifyOptions) -> Result<Vec<CheckResult>> {
    const S: &str = "testers";
    let mut out = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x7e57);

    let mut complete = Check::new(S, "Cliffords are accepted with probability 1");
    for c in enumerate_cliffords(1)? {
        complete.close(pacc_exact(&c.matrix()?)?, 1.0, 1e-10);
    }
    for _ in 0..100 {
        complete.close(pacc_exact(&random_clifford(2, &mut rng).matrix()?)?, 1.0, 1e-10);
    }
    let c = random_clifford(2, &mut rng).matrix()?;
    let r = run_4query(&c, &TesterConfig::new(0.1, 1000, opts.seed)?)?;
    complete.flag(r.accepted == 1000);
    out.push(complete.detail("24 Cl(1), 100 random Cl(2), 1000 shots").finish());

    let t = DenseUnitary::t_gate();
    let mut tval = Check::new(S, "p_acc(T) = 3/4");
    tval.close(pacc_exact(&t)?, 0.75, 1e-12);
    let r = run_4query(&t, &TesterConfig::new(0.1, 100_000, opts.seed)?)?;
    tval.slack(4.0 * r.sigma(0.75) - (r.acceptance_rate - 0.75).abs());
    out.push(tval.detail(format!("Monte Carlo rate {:.5} at 10^5 shots", r.acceptance_rate)).finish());

    let mut pi4c = Check::new(S, "p_acc equals the Π₄ expression");
    for u in haar_samples(1, 10, opts.seed ^ 0x914) {
        pi4c.close(pacc_pi4(&u)?, pacc_exact(&u)?, 1e-9);
    }
    out.push(pi4c.finish());

    let mut gnw = Check::new(S, "GNW acceptance on Choi(T) is 13/16").recorded();
    let g = pacc_gnw_choi(&t)?;
    gnw.close(g, 13.0 / 16.0, 1e-12);
    out.push(gnw.detail(format!("observed {g}; 25/32 would need 2^{{4n}}Σp³ = 9/16")).finish());

    let samples = fidelity_sample_set(opts)?;
    let rows = samples
        .par_iter()
        .map(|u| Ok((pacc_exact(u)?, f_stab(&choi_state(u)?)?, f_cliff(u)?)))
        .collect::<Result<Vec<_>>>()?;
    let mut upper = Check::new(S, "p_acc ≤ (1 + F_Stab(|U⟩⟩))/2");
    let mut sound = Check::new(S, "1 − p_acc ≥ min(1/4, ε/2) when F_Cliff ≤ 1 − ε");
    let mut tolerant = Check::new(S, "p_acc ≥ F_Cliff⁴");
    for (p, fs, fc) in rows {
        upper.le(p, (1.0 + fs) / 2.0, 1e-9);
        // Tightest ε for this U, plus a grid.
        for eps in [1.0 - fc, 0.05, 0.1, 0.2, 0.5] {
            if eps > 0.0 && fc <= 1.0 - eps {
                sound.le((0.25f64).min(eps / 2.0), 1.0 - p, 1e-9);
            }
        }
        tolerant.le(fc.powi(4), p, 1e-9);
    }
    out.push(upper.finish());
    out.push(sound.finish());
    out.push(tolerant.finish());

    let mut mc = Check::new(S, "Monte Carlo acceptance within 4σ of p_acc");
    let mc_samples: Vec<DenseUnitary> = haar_samples(1, 25, opts.seed ^ 0x3c)
        .into_iter()
        .chain(haar_samples(2, 25, opts.seed ^ 0x3c))
        .collect();
    let slacks = mc_samples
        .par_iter()
        .enumerate()
        .map(|(i, u)| {
            let cfg = TesterConfig::new(0.1, 4000, opts.seed.wrapping_add(i as u64))?;
            let r = run_4query(u, &cfg)?;
            let p = r.exact_reference.expect("exact reference is set");
            Ok(4.0 * r.sigma(p) - (r.acceptance_rate - p).abs())
        })
        .collect::<Result<Vec<_>>>()?;
    slacks.into_iter().for_each(|s| mc.slack(s));
    out.push(mc.detail("50 unitaries, 4000 shots each").finish());

    let mut rep = Check::new(S, "repeated 4-query tester rejects T at ε = 0.1");
    rep.flag(four_query_repetitions(1.0)? == 24);
    let freq = rejection_frequency(200, opts.seed, |seed| {
        Ok(run_4query_repeated(&t, 0.1, &TesterConfig::new(0.1, 1, seed)?)?.verdict)
    })?;
    rep.le(2.0 / 3.0, freq, 0.0);
    out.push(rep.detail(format!("rejection frequency {freq:.3} over 200 runs")).finish());

    let mut sc_complete = Check::new(S, "single-copy tester accepts Cliffords");
    for i in 0..10u64 {
        let c = random_clifford(2, &mut rng).matrix()?;
        let cfg = TesterConfig::new(0.05, 1, opts.seed.wrapping_add(i))?;
        sc_complete.flag(run_aux_free_single_copy(&c, &cfg, &OracleStabTester::default())?.verdict.is_accept());
    }
    out.push(sc_complete.finish());

    let mut sc_sound = Check::new(S, "single-copy tester rejects T⊗I at ε = 0.05");
    let ti = t_tensor_identity(2);
    let freq = rejection_frequency(200, opts.seed ^ 0x2, |seed| {
        Ok(run_aux_free_single_copy(&ti, &TesterConfig::new(0.05, 1, seed)?, &OracleStabTester::default())?.verdict)
    })?;
    sc_sound.le(2.0 / 3.0, freq, 0.0);
    let p = detection_probability(&ti, 0.05)?;
    out.push(
        sc_sound
            .detail(format!("rejection frequency {freq:.3}; per-trial detection probability {p:.4}"))
            .finish(),
    );

    let mut avg = Check::new(S, "F_Cliff ≤ E_S F_Stab(U|S⟩) ≤ ((F_Stab(|U⟩⟩)+7)/8 + 9·2⁻ⁿ)^{1/4}");
    let avg_samples: Vec<DenseUnitary> = opts
        .qubits(&[1, 2], 2)?
        .into_iter()
        .flat_map(|n| haar_samples(n, opts.count(if n == 1 { 100 } else { 10 }), opts.seed ^ 0xa5))
        .collect();
    let rows = avg_samples
        .par_iter()
        .map(|u| Ok((f_cliff(u)?, avg_stab_fidelity_exact(u)?, avg_fidelity_upper_bound(u)?)))
        .collect::<Result<Vec<_>>>()?;
    for (fc, v, ub) in rows {
        avg.le(fc, v, 1e-9);
        avg.le(v, ub, 1e-9);
    }
    out.push(avg.finish());

    let mut leaf = Check::new(S, "leaf distributions: group average equals Weingarten expansion");
    for t in 1..=3 {
        for _ in 0..5 {
            let s = random_strategy(t, &mut rng);
            let a = leaf_distribution(&s, Ensemble::Clifford, t)?;
            let b = leaf_distribution(&s, Ensemble::CliffordWeingarten, t)?;
            let worst = a.probs.iter().zip(&b.probs).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            leaf.slack(1e-8 - worst);
            leaf.slack(1e-9 - (a.probs.iter().sum::<f64>() - 1.0).abs());
            leaf.flag(tv_distance(&a.probs, &a.probs)? == 0.0);
        }
    }
    out.push(leaf.finish());
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for name in Suite::NAMES {
            let s: Suite = name.parse().unwrap();
            assert_eq!(s.to_string(), name);
            assert_eq!(serde_json::to_string(&s).unwrap(), format!("\"{name}\""));
        }
        assert!("".parse::<Suite>().is_err());
        assert!("everything".parse::<Suite>().is_err());
    }

    #[test]
    fn checks_track_margins() {
        let mut c = Check::new("x", "y");
        c.le(1.0, 2.0, 0.0);
        c.close(1.0, 1.0 + 1e-12, 1e-9);
        let r = c.finish();
        assert!(r.passed);
        assert_eq!(r.cases, 2);
        let mut c = Check::new("x", "y");
        c.le(3.0, 2.0, 0.0);
        let r = c.finish();
        assert!(!r.passed);
        assert_eq!(r.margin, Some(-1.0));
        assert!(!Check::new("x", "empty").finish().passed);
        assert!(Check::new("x", "r").recorded().finish().passed);
    }

    #[test]
    fn appendix_suite_passes() {
        let r = run_suite(Suite::AppendixA, &VerifyOptions::default()).unwrap();
        assert!(r.passed, "{:?}", r.first_failure());
        assert!(r.checks[0].detail.contains("154"));
    }

    #[test]
    fn fidelity_suite_small() {
        let opts = VerifyOptions {
            n: Some(1),
            seeds: Some(10),
            seed: 1,
        };
        let r = run_suite(Suite::Fidelity, &opts).unwrap();
        assert!(r.passed, "{:?}", r.first_failure());
        let eq = r.check("F_Cliff = F_Stab(|U⟩⟩) when F_Stab(|U⟩⟩) > 1/2").unwrap();
        assert!(eq.cases > 0);
    }

    #[test]
    fn qubit_override_is_guarded() {
        let opts = VerifyOptions {
            n: Some(5),
            ..VerifyOptions::default()
        };
        assert!(matches!(run_suite(Suite::Fidelity, &opts), Err(Error::Budget { .. })));
    }

    #[test]
    fn near_clifford_is_close() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let u = near_clifford(1, 0.05, &mut rng).unwrap();
        assert!(f_cliff(&u).unwrap() > 0.99);
    }
}
