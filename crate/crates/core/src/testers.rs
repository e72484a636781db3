//! The 4-query tester, the auxiliary-free single-copy tester and a toy
//! discrimination harness for fixed single-copy strategies.
//!
//! Stochastic runs draw one ChaCha stream per shot (or trial, or meta-run)
//! from the master seed, so results do not depend on thread scheduling.

use num_complex::Complex64;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::commutant::{gram_weingarten, kron_power, pi4, r_support};
use crate::densesim::{
    bell_probabilities, bell_state, choi_state, clifford_matrices, f_stab, stabilizer_vectors,
    unitary_moments, CMatrix, DenseUnitary, StateVector,
};
use crate::error::{budget, Error, Result};
use crate::pauli::{random_stabilizer_state, WeylLabel};

pub const MAX_4QUERY_QUBITS: usize = 3;
pub const MAX_SINGLE_COPY_QUBITS: usize = 2;
pub const MAX_LEAF_ROUNDS: usize = 3;
const LEAF_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Accept,
    Reject,
}

impl Verdict {
    pub fn from_bool(accept: bool) -> Self {
        if accept {
            Verdict::Accept
        } else {
            Verdict::Reject
        }
    }

    pub fn is_accept(self) -> bool {
        self == Verdict::Accept
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TesterConfig {
    pub epsilon: f64,
    /// Shots for the 4-query tester. The single-copy tester derives its trial count instead.
    pub shots: usize,
    /// Per-trial failure budget of the stabilizer subroutine; `1/(3m)` if unset.
    pub delta: Option<f64>,
    pub seed: u64,
    /// Per-trial detection floor for the single-copy tester; `ε/16` if unset.
    pub p_floor: Option<f64>,
}

impl TesterConfig {
    pub fn new(epsilon: f64, shots: usize, seed: u64) -> Result<Self> {
        let cfg = Self {
            epsilon,
            shots,
            delta: None,
            seed,
            p_floor: None,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::InvalidInput(format!("epsilon must lie in (0,1), got {}", self.epsilon)));
        }
        if self.shots == 0 {
            return Err(Error::InvalidInput("shots must be positive".into()));
        }
        if let Some(d) = self.delta {
            if !(d > 0.0 && d < 1.0) {
                return Err(Error::InvalidInput(format!("delta must lie in (0,1), got {d}")));
            }
        }
        if let Some(p) = self.p_floor {
            if !(p > 0.0 && p <= 1.0) {
                return Err(Error::InvalidInput(format!("p_floor must lie in (0,1], got {p}")));
            }
        }
        Ok(())
    }

    pub fn p_floor(&self) -> f64 {
        self.p_floor.unwrap_or(self.epsilon / 16.0)
    }
}

/// RNG for stream `index` under `seed`.
pub fn stream_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Seed of meta-run `index`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master ^ 0x6d65_7461_7275_6e73);
    rng.set_stream(index);
    rng.next_u64()
}

/// One shot of the 4-query tester.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShotRecord {
    pub x: String,
    pub y: String,
    pub y_prime: String,
    pub accepted: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TesterReport {
    pub verdict: Verdict,
    pub shots_used: usize,
    pub accepted: usize,
    pub acceptance_rate: f64,
    pub exact_reference: Option<f64>,
    pub log: Vec<ShotRecord>,
}

impl TesterReport {
    /// Binomial standard deviation of the rate around `p`.
    pub fn sigma(&self, p: f64) -> f64 {
        (p * (1.0 - p) / self.shots_used as f64).sqrt()
    }
}

/// `p_acc = 2^{2n} Σ_{x,y} p_U(x,y)²`.
pub fn pacc_exact(u: &DenseUnitary) -> Result<f64> {
    budget("qubits for 4-query acceptance", u.n(), MAX_4QUERY_QUBITS)?;
    let m = unitary_moments(u)?;
    Ok((1u64 << (2 * u.n())) as f64 * m.l2_squared)
}

/// `2^{−2n} tr(Π₄ U^{⊗4} Π₄ U^{†⊗4})`.
pub fn pacc_pi4(u: &DenseUnitary) -> Result<f64> {
    let p = pi4(u.n())?;
    let u4 = kron_power(u.matrix(), 4);
    let v = (&p * &u4 * &p * u4.adjoint()).trace();
    Ok(v.re / (1u64 << (2 * u.n())) as f64)
}

/// `(1 + 2^{4n} Σ p_U³)/2`, the 6-copy Bell-difference acceptance on `|U⟩⟩`.
pub fn pacc_gnw_choi(u: &DenseUnitary) -> Result<f64> {
    budget("qubits for 4-query acceptance", u.n(), MAX_4QUERY_QUBITS)?;
    let m = unitary_moments(u)?;
    Ok((1.0 + (1u64 << (4 * u.n())) as f64 * m.l3_cubed) / 2.0)
}

/// Row `x` holds the Bell outcome distribution of `U^{⊗2}|P_x⟩⟩`.
pub fn four_query_outcomes(u: &DenseUnitary) -> Result<Vec<Vec<f64>>> {
    let n = u.n();
    budget("qubits for 4-query tester", n, MAX_4QUERY_QUBITS)?;
    let u2 = u.kron(u);
    (0..1u64 << (2 * n))
        .into_par_iter()
        .map(|x| bell_probabilities(&bell_state(&WeylLabel::from_index(n, x)).apply(&u2)?))
        .collect()
}

/// Acceptance probability of one shot, from the outcome table.
pub fn pacc_from_outcomes(q: &[Vec<f64>]) -> f64 {
    let s: f64 = q.iter().flat_map(|row| row.iter().map(|p| p * p)).sum();
    s / q.len() as f64
}

fn shot_log(u: &DenseUnitary, shots: usize, seed: u64) -> Result<Vec<ShotRecord>> {
    let n = u.n();
    let q = four_query_outcomes(u)?;
    let dists = q
        .iter()
        .map(|row| WeightedIndex::new(row).map_err(|e| Error::Internal(e.to_string())))
        .collect::<Result<Vec<_>>>()?;
    let count = q.len() as u64;
    Ok((0..shots as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(seed, i);
            let x = rng.random_range(0..count);
            let y = dists[x as usize].sample(&mut rng) as u64;
            let y2 = dists[x as usize].sample(&mut rng) as u64;
            ShotRecord {
                x: WeylLabel::from_index(n, x).to_string(),
                y: WeylLabel::from_index(n, y).to_string(),
                y_prime: WeylLabel::from_index(n, y2).to_string(),
                accepted: y == y2,
            }
        })
        .collect())
}

fn report_from_log(log: Vec<ShotRecord>, exact: Option<f64>) -> TesterReport {
    let accepted = log.iter().filter(|r| r.accepted).count();
    TesterReport {
        verdict: Verdict::from_bool(accepted == log.len()),
        shots_used: log.len(),
        accepted,
        acceptance_rate: accepted as f64 / log.len() as f64,
        exact_reference: exact,
        log,
    }
}

/// `cfg.shots` independent runs of the 4-query tester. The verdict accepts iff every shot does.
pub fn run_4query(u: &DenseUnitary, cfg: &TesterConfig) -> Result<TesterReport> {
    cfg.validate()?;
    let log = shot_log(u, cfg.shots, cfg.seed)?;
    Ok(report_from_log(log, Some(pacc_exact(u)?)))
}

/// `⌈6 / min(1/4, ε/2)⌉`.
pub fn four_query_repetitions(epsilon: f64) -> Result<usize> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::InvalidInput(format!("epsilon must lie in (0,1], got {epsilon}")));
    }
    Ok((6.0 / (0.25f64).min(epsilon / 2.0)).ceil() as usize)
}

/// The 4-query tester repeated `four_query_repetitions(ε)` times; `cfg.shots` is ignored.
pub fn run_4query_repeated(u: &DenseUnitary, epsilon: f64, cfg: &TesterConfig) -> Result<TesterReport> {
    let reps = four_query_repetitions(epsilon)?;
    let log = shot_log(u, reps, cfg.seed)?;
    Ok(report_from_log(log, Some(pacc_exact(u)?)))
}

/// Fraction of `runs` meta-runs, seeded from `master`, whose verdict is reject.
pub fn rejection_frequency<F>(runs: usize, master: u64, run: F) -> Result<f64>
where
    F: Fn(u64) -> Result<Verdict> + Sync,
{
    let rejects = (0..runs as u64)
        .into_par_iter()
        .map(|i| run(derive_seed(master, i)).map(|v| usize::from(!v.is_accept())))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .sum::<usize>();
    Ok(rejects as f64 / runs as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StabTestOutcome {
    pub verdict: Verdict,
    pub copies: u64,
}

/// Single-copy stabilizer testing. Contract: accept stabilizer states with
/// probability ≥ 1−δ and reject states with `F_Stab ≤ 1−ε` with probability ≥ 1−δ.
pub trait StabilizerTester: Sync {
    fn test(&self, psi: &StateVector, epsilon: f64, delta: f64, rng: &mut dyn RngCore) -> Result<StabTestOutcome>;
}

/// `⌈(n/ε²) ln(1/δ)⌉` copies per call.
pub fn stab_tester_copies(n: usize, epsilon: f64, delta: f64) -> u64 {
    ((n as f64 / (epsilon * epsilon)) * (1.0 / delta).ln()).ceil() as u64
}

/// Thresholds the exact stabilizer fidelity at `1−ε`. With `failure_prob > 0`
/// the verdict is flipped with that probability.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct OracleStabTester {
    pub failure_prob: f64,
}

impl StabilizerTester for OracleStabTester {
    fn test(&self, psi: &StateVector, epsilon: f64, delta: f64, rng: &mut dyn RngCore) -> Result<StabTestOutcome> {
        let honest = f_stab(psi)? > 1.0 - epsilon;
        let flip = self.failure_prob > 0.0 && rng.random::<f64>() < self.failure_prob;
        Ok(StabTestOutcome {
            verdict: Verdict::from_bool(honest != flip),
            copies: stab_tester_copies(psi.n(), epsilon, delta),
        })
    }
}

/// `⌈ln 3 / p⌉ + 1`.
pub fn single_copy_trials(p_floor: f64) -> usize {
    (3f64.ln() / p_floor).ceil() as usize + 1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    /// Generators of the sampled stabilizer state.
    pub stabilizer: Vec<String>,
    pub verdict: Verdict,
    pub copies: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingleCopyReport {
    pub verdict: Verdict,
    pub trials: usize,
    pub rejected_trials: usize,
    pub delta: f64,
    pub p_floor: f64,
    pub copies_per_trial: u64,
    pub total_copies: u64,
    /// `E_S F_Stab(U|S⟩)` when it is computable.
    pub exact_reference: Option<f64>,
    pub log: Vec<TrialRecord>,
}

/// Single-copy tester: test `U|S⟩` for fresh random stabilizer states `|S⟩`; accept iff all trials accept.
pub fn run_aux_free_single_copy(
    u: &DenseUnitary,
    cfg: &TesterConfig,
    tester: &dyn StabilizerTester,
) -> Result<SingleCopyReport> {
    cfg.validate()?;
    let n = u.n();
    budget("qubits for single-copy tester", n, MAX_SINGLE_COPY_QUBITS)?;
    let p_floor = cfg.p_floor();
    let m = single_copy_trials(p_floor);
    let delta = cfg.delta.unwrap_or(1.0 / (3.0 * m as f64));
    let log = (0..m as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(cfg.seed, i);
            let s = random_stabilizer_state(n, &mut rng);
            let psi = s.state_vector()?.apply(u)?;
            let out = tester.test(&psi, cfg.epsilon, delta, &mut rng)?;
            Ok(TrialRecord {
                stabilizer: s.generators().iter().map(|g| g.to_string()).collect(),
                verdict: out.verdict,
                copies: out.copies,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let rejected = log.iter().filter(|r| !r.verdict.is_accept()).count();
    let total: u64 = log.iter().map(|r| r.copies).sum();
    Ok(SingleCopyReport {
        verdict: Verdict::from_bool(rejected == 0),
        trials: m,
        rejected_trials: rejected,
        delta,
        p_floor,
        copies_per_trial: stab_tester_copies(n, cfg.epsilon, delta),
        total_copies: total,
        exact_reference: Some(avg_stab_fidelity_exact(u)?),
        log,
    })
}

/// Fidelities `F_Stab(U|S⟩)` over all of Stab(n), in enumeration order.
pub fn stab_fidelity_profile(u: &DenseUnitary) -> Result<Vec<f64>> {
    let n = u.n();
    budget("qubits for average stabilizer fidelity", n, MAX_SINGLE_COPY_QUBITS)?;
    stabilizer_vectors(n)?
        .iter()
        .map(|s| {
            let psi = StateVector::new(n, u.matrix() * s)?;
            f_stab(&psi)
        })
        .collect()
}

/// `E_{S ∈ Stab(n)} F_Stab(U|S⟩)`.
pub fn avg_stab_fidelity_exact(u: &DenseUnitary) -> Result<f64> {
    let f = stab_fidelity_profile(u)?;
    Ok(f.iter().sum::<f64>() / f.len() as f64)
}

/// Probability over `|S⟩` that `F_Stab(U|S⟩) ≤ 1−ε`: one honest trial's rejection chance.
pub fn detection_probability(u: &DenseUnitary, epsilon: f64) -> Result<f64> {
    let f = stab_fidelity_profile(u)?;
    Ok(f.iter().filter(|&&v| v <= 1.0 - epsilon).count() as f64 / f.len() as f64)
}

/// `((F_Stab(|U⟩⟩) + 7)/8 + 9·2⁻ⁿ)^{1/4}`.
pub fn avg_fidelity_upper_bound(u: &DenseUnitary) -> Result<f64> {
    let fs = f_stab(&choi_state(u)?)?;
    Ok(((fs + 7.0) / 8.0 + 9.0 * 2f64.powi(-(u.n() as i32))).powf(0.25))
}

/// One prepare-and-measure round of a fixed single-qubit strategy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Round {
    #[serde(with = "crate::io::cmatrix")]
    pub state: CMatrix,
    #[serde(with = "crate::io::cmatrix_vec")]
    pub povm: Vec<CMatrix>,
}

/// A non-adaptive, auxiliary-free strategy: one round per query.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Strategy {
    pub rounds: Vec<Round>,
}

fn is_psd(m: &CMatrix) -> bool {
    let h = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    if (m - &h).camax() > LEAF_TOL {
        return false;
    }
    h.symmetric_eigenvalues().iter().all(|&v| v > -LEAF_TOL)
}

impl Strategy {
    /// Computational-basis preparation `|0⟩` and measurement in every round.
    pub fn computational(t: usize) -> Self {
        let p0 = CMatrix::from_diagonal(&nalgebra::dvector![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]);
        let p1 = CMatrix::identity(2, 2) - &p0;
        Self {
            rounds: (0..t)
                .map(|_| Round {
                    state: p0.clone(),
                    povm: vec![p0.clone(), p1.clone()],
                })
                .collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (i, r) in self.rounds.iter().enumerate() {
            let bad = |what: &str| Err(Error::InvalidInput(format!("round {i}: {what}")));
            if r.state.shape() != (2, 2) || r.povm.iter().any(|m| m.shape() != (2, 2)) {
                return bad("strategies act on one qubit (2×2 matrices)");
            }
            if !is_psd(&r.state) || (r.state.trace().re - 1.0).abs() > LEAF_TOL || r.state.trace().im.abs() > LEAF_TOL {
                return bad("state is not a density matrix");
            }
            if r.povm.is_empty() || r.povm.iter().any(|m| !is_psd(m)) {
                return bad("POVM elements must be positive semidefinite");
            }
            let sum = r.povm.iter().fold(CMatrix::zeros(2, 2), |a, m| a + m);
            if (sum - CMatrix::identity(2, 2)).camax() > LEAF_TOL {
                return bad("POVM elements do not sum to the identity");
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Ensemble {
    /// Exact average over the 24 elements of Cl(1).
    Clifford,
    /// The Clifford average through the commutant (Weingarten) expansion.
    CliffordWeingarten,
    /// The completely depolarizing channel.
    Depolarizing,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeafDistribution {
    /// Outcome index per round, first round first.
    pub leaves: Vec<Vec<usize>>,
    pub probs: Vec<f64>,
}

fn leaves(strategy: &Strategy) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for r in &strategy.rounds {
        out = out
            .into_iter()
            .flat_map(|l: Vec<usize>| {
                (0..r.povm.len()).map(move |k| {
                    let mut next = l.clone();
                    next.push(k);
                    next
                })
            })
            .collect();
    }
    out
}

fn tr_prod(a: &CMatrix, b: &CMatrix) -> Complex64 {
    (a * b).trace()
}

/// `p(ℓ) = tr[M_ℓ (E ⊗ … ⊗ E)(ρ₁ ⊗ … ⊗ ρ_t)]` for every leaf `ℓ`.
pub fn leaf_distribution(strategy: &Strategy, ensemble: Ensemble, t: usize) -> Result<LeafDistribution> {
    budget("rounds for leaf distribution", t, MAX_LEAF_ROUNDS)?;
    if strategy.rounds.len() != t {
        return Err(Error::LengthMismatch {
            left: strategy.rounds.len(),
            right: t,
        });
    }
    strategy.validate()?;
    let leaves = leaves(strategy);
    let rounds = &strategy.rounds;
    let probs: Vec<f64> = match ensemble {
        Ensemble::Depolarizing => leaves
            .iter()
            .map(|l| l.iter().zip(rounds).map(|(&k, r)| r.povm[k].trace().re / 2.0).product())
            .collect(),
        Ensemble::Clifford => {
            let cliffs = clifford_matrices(1)?;
            let mut acc = vec![0.0; leaves.len()];
            for c in cliffs {
                let per_round: Vec<Vec<f64>> = rounds
                    .iter()
                    .map(|r| {
                        let out = c * &r.state * c.adjoint();
                        r.povm.iter().map(|m| tr_prod(m, &out).re).collect()
                    })
                    .collect();
                for (a, l) in acc.iter_mut().zip(&leaves) {
                    *a += l.iter().enumerate().map(|(i, &k)| per_round[i][k]).product::<f64>();
                }
            }
            acc.into_iter().map(|a| a / cliffs.len() as f64).collect()
        }
        Ensemble::CliffordWeingarten => {
            let gw = gram_weingarten(1, t)?;
            let rho = rounds
                .iter()
                .fold(CMatrix::identity(1, 1), |acc, r| acc.kronecker(&r.state));
            let coeffs = gw.coefficients(&rho)?;
            let supports: Vec<Vec<(usize, usize)>> = gw.labels.iter().map(|s| r_support(s.code(), 1)).collect();
            leaves
                .iter()
                .map(|l| {
                    let factors: Vec<&CMatrix> = l.iter().zip(rounds).map(|(&k, r)| &r.povm[k]).collect();
                    let p: Complex64 = supports
                        .iter()
                        .zip(coeffs.iter())
                        .map(|(supp, c)| {
                            let tr: Complex64 = supp
                                .iter()
                                .map(|&(row, col)| {
                                    factors
                                        .iter()
                                        .enumerate()
                                        .map(|(i, f)| {
                                            let sh = t - 1 - i;
                                            f[((col >> sh) & 1, (row >> sh) & 1)]
                                        })
                                        .product::<Complex64>()
                                })
                                .sum();
                            c * tr
                        })
                        .sum();
                    p.re
                })
                .collect()
        }
    };
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > LEAF_TOL {
        return Err(Error::Internal(format!("leaf probabilities sum to {total}")));
    }
    Ok(LeafDistribution { leaves, probs })
}

/// `½ Σ |p − q|`.
pub fn tv_distance(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::LengthMismatch {
            left: p.len(),
            right: q.len(),
        });
    }
    Ok(0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>())
}

// Used by tests and the verify suite to build T ⊗ I.
pub(crate) fn t_tensor_identity(n: usize) -> DenseUnitary {
    DenseUnitary::t_gate().kron(&DenseUnitary::identity(n - 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::densesim::{f_cliff, haar_unitary, unitary_moments};
    use crate::pauli::{enumerate_cliffords, random_clifford};

    #[test]
    fn pacc_examples() {
        let t = DenseUnitary::t_gate();
        assert!((pacc_exact(&t).unwrap() - 0.75).abs() < 1e-12);
        // Direct summation of the p_T table.
        let p = crate::densesim::char_dist_unitary(&t).unwrap();
        let direct: f64 = 4.0 * p.table.iter().map(|v| v * v).sum::<f64>();
        assert!((direct - 0.75).abs() < 1e-12);
        for n in 1..=3 {
            assert!((pacc_exact(&DenseUnitary::identity(n)).unwrap() - 1.0).abs() < 1e-12);
        }
        for c in enumerate_cliffords(1).unwrap() {
            assert!((pacc_exact(&c.matrix().unwrap()).unwrap() - 1.0).abs() < 1e-10);
        }
        assert!(matches!(pacc_exact(&DenseUnitary::identity(4)), Err(Error::Budget { .. })));
    }

    #[test]
    fn pacc_paths_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 1..=2 {
            for _ in 0..4 {
                let u = haar_unitary(n, &mut rng);
                let exact = pacc_exact(&u).unwrap();
                assert!((pacc_pi4(&u).unwrap() - exact).abs() < 1e-9);
                let q = four_query_outcomes(&u).unwrap();
                assert!((pacc_from_outcomes(&q) - exact).abs() < 1e-10);
            }
        }
        let u = haar_unitary(3, &mut rng);
        let q = four_query_outcomes(&u).unwrap();
        assert!((pacc_from_outcomes(&q) - pacc_exact(&u).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn gnw_values() {
        let t = DenseUnitary::t_gate();
        assert!((pacc_gnw_choi(&t).unwrap() - 13.0 / 16.0).abs() < 1e-12);
        assert!((pacc_gnw_choi(&DenseUnitary::identity(2)).unwrap() - 1.0).abs() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let c = random_clifford(2, &mut rng).matrix().unwrap();
        assert!((pacc_gnw_choi(&c).unwrap() - 1.0).abs() < 1e-10);
        let m = unitary_moments(&t).unwrap();
        assert!((m.l3_cubed - 5.0 / 128.0).abs() < 1e-15);
    }

    #[test]
    fn cliffords_always_pass() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let c = random_clifford(2, &mut rng).matrix().unwrap();
        let cfg = TesterConfig::new(0.1, 1000, 9).unwrap();
        let r = run_4query(&c, &cfg).unwrap();
        assert_eq!(r.accepted, 1000);
        assert_eq!(r.log.len(), 1000);
        assert!(r.verdict.is_accept());
        assert!(run_4query_repeated(&c, 0.01, &cfg).unwrap().verdict.is_accept());
    }

    #[test]
    fn t_gate_rate_and_determinism() {
        let t = DenseUnitary::t_gate();
        let cfg = TesterConfig::new(0.1, 100_000, 42).unwrap();
        let r = run_4query(&t, &cfg).unwrap();
        assert!((r.acceptance_rate - 0.75).abs() <= 4.0 * r.sigma(0.75));
        assert_eq!(r, run_4query(&t, &cfg).unwrap());
        let other = run_4query(&t, &TesterConfig { seed: 43, ..cfg.clone() }).unwrap();
        assert_ne!(r.log, other.log);
    }

    #[test]
    fn repetitions() {
        assert_eq!(four_query_repetitions(1.0).unwrap(), 24);
        assert_eq!(four_query_repetitions(0.1).unwrap(), 120);
        for e in [0.01, 0.1, 0.3, 0.5, 0.9] {
            let reps = four_query_repetitions(e).unwrap() as i32;
            assert!((1.0 - (0.25f64).min(e / 2.0)).powi(reps) <= 1.0 / 3.0);
        }
        let t = DenseUnitary::t_gate();
        let freq = rejection_frequency(200, 1, |seed| {
            let cfg = TesterConfig::new(0.1, 1, seed)?;
            Ok(run_4query_repeated(&t, 0.1, &cfg)?.verdict)
        })
        .unwrap();
        assert!(freq >= 2.0 / 3.0);
    }

    #[test]
    fn config_validation() {
        assert!(TesterConfig::new(0.0, 1, 0).is_err());
        assert!(TesterConfig::new(1.0, 1, 0).is_err());
        assert!(TesterConfig::new(0.5, 0, 0).is_err());
        let mut c = TesterConfig::new(0.5, 1, 0).unwrap();
        c.delta = Some(1.5);
        assert!(c.validate().is_err());
        assert!((TesterConfig::new(0.32, 1, 0).unwrap().p_floor() - 0.02).abs() < 1e-15);
    }

    #[test]
    fn oracle_tester_contract() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let oracle = OracleStabTester::default();
        let stab = StateVector::basis(2, 3);
        assert!(oracle.test(&stab, 0.1, 0.01, &mut rng).unwrap().verdict.is_accept());
        // |T⟩ = T|+⟩ has F_Stab = cos²(π/8) ≈ 0.854.
        let plus = StateVector::normalized(1, nalgebra::dvector![Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)]).unwrap();
        let magic = plus.apply(&DenseUnitary::t_gate()).unwrap();
        let f = f_stab(&magic).unwrap();
        assert!((f - (std::f64::consts::PI / 8.0).cos().powi(2)).abs() < 1e-12);
        let eps = (1.0 - f) / 2.0;
        assert!(!oracle.test(&magic, eps, 0.01, &mut rng).unwrap().verdict.is_accept());
        assert!(oracle.test(&magic, 0.2, 0.01, &mut rng).unwrap().verdict.is_accept());
        let always_wrong = OracleStabTester { failure_prob: 1.0 };
        assert!(!always_wrong.test(&stab, 0.1, 0.01, &mut rng).unwrap().verdict.is_accept());
        assert_eq!(stab_tester_copies(2, 0.5, (-1.0f64).exp()), 8);
    }

    #[test]
    fn single_copy_completeness_and_accounting() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let c = random_clifford(2, &mut rng).matrix().unwrap();
        let cfg = TesterConfig::new(0.05, 1, 3).unwrap();
        let r = run_aux_free_single_copy(&c, &cfg, &OracleStabTester::default()).unwrap();
        assert!(r.verdict.is_accept());
        assert_eq!(r.trials, 353);
        assert!((r.delta - 1.0 / 1059.0).abs() < 1e-15);
        let per = stab_tester_copies(2, 0.05, r.delta);
        assert_eq!(r.copies_per_trial, per);
        assert_eq!(r.total_copies, 353 * per);
        assert_eq!(r.log.len(), 353);
        assert!((r.exact_reference.unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn single_copy_rejects_t_tensor_identity() {
        let u = t_tensor_identity(2);
        let eps = 0.05;
        let p = detection_probability(&u, eps).unwrap();
        assert!(p > 0.0);
        let freq = rejection_frequency(200, 17, |seed| {
            let cfg = TesterConfig::new(eps, 1, seed)?;
            Ok(run_aux_free_single_copy(&u, &cfg, &OracleStabTester::default())?.verdict)
        })
        .unwrap();
        assert!(freq >= 2.0 / 3.0);
    }

    #[test]
    fn average_fidelity_bounds() {
        let t = DenseUnitary::t_gate();
        let v = avg_stab_fidelity_exact(&t).unwrap();
        // T fixes |0⟩ and |1⟩ and sends the other four to F_Stab = cos²(π/8).
        let c2 = (std::f64::consts::PI / 8.0).cos().powi(2);
        assert!((v - (2.0 + 4.0 * c2) / 6.0).abs() < 1e-12);
        assert!(c2 <= v);
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for n in 1..=2 {
            for _ in 0..(if n == 1 { 20 } else { 2 }) {
                let u = haar_unitary(n, &mut rng);
                let v = avg_stab_fidelity_exact(&u).unwrap();
                assert!(f_cliff(&u).unwrap() <= v + 1e-9);
                assert!(v <= avg_fidelity_upper_bound(&u).unwrap() + 1e-9);
            }
        }
        assert!(matches!(avg_stab_fidelity_exact(&DenseUnitary::identity(3)), Err(Error::Budget { .. })));
    }

    fn random_density<R: Rng>(rng: &mut R) -> CMatrix {
        let psi = crate::densesim::random_state(1, rng);
        psi.density() * Complex64::new(0.7, 0.0) + CMatrix::identity(2, 2) * Complex64::new(0.15, 0.0)
    }

    fn random_povm<R: Rng>(rng: &mut R) -> Vec<CMatrix> {
        // Rank-one projectors of a random basis, one of them split in two.
        let u = haar_unitary(1, rng);
        let col = |j: usize| {
            let v = u.matrix().column(j).clone_owned();
            &v * v.adjoint()
        };
        let w = rng.random::<f64>();
        vec![col(0) * Complex64::new(w, 0.0), col(0) * Complex64::new(1.0 - w, 0.0), col(1)]
    }

    #[test]
    fn leaf_distribution_paths() {
        for t in 1..=3 {
            let s = Strategy::computational(t);
            let dep = leaf_distribution(&s, Ensemble::Depolarizing, t).unwrap();
            assert!(dep.probs.iter().all(|p| (p - 0.5f64.powi(t as i32)).abs() < 1e-12));
            assert_eq!(tv_distance(&dep.probs, &dep.probs).unwrap(), 0.0);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for t in 1..=3 {
            for _ in 0..3 {
                let s = Strategy {
                    rounds: (0..t)
                        .map(|_| Round {
                            state: random_density(&mut rng),
                            povm: random_povm(&mut rng),
                        })
                        .collect(),
                };
                let a = leaf_distribution(&s, Ensemble::Clifford, t).unwrap();
                let b = leaf_distribution(&s, Ensemble::CliffordWeingarten, t).unwrap();
                assert_eq!(a.leaves, b.leaves);
                assert_eq!(a.leaves.len(), 3usize.pow(t as u32));
                assert!(tv_distance(&a.probs, &b.probs).unwrap() < 1e-8);
                for (x, y) in a.probs.iter().zip(&b.probs) {
                    assert!((x - y).abs() < 1e-8);
                }
            }
        }
        // At t = 1 the Clifford average is a 1-design, so it equals depolarizing.
        let s = Strategy {
            rounds: vec![Round {
                state: random_density(&mut rng),
                povm: random_povm(&mut rng),
            }],
        };
        let a = leaf_distribution(&s, Ensemble::Clifford, 1).unwrap();
        let d = leaf_distribution(&s, Ensemble::Depolarizing, 1).unwrap();
        assert!(tv_distance(&a.probs, &d.probs).unwrap() < 1e-12);
    }

    #[test]
    fn strategy_validation_and_serde() {
        let mut s = Strategy::computational(2);
        let json = serde_json::to_string(&s).unwrap();
        let back: Strategy = serde_json::from_str(&json).unwrap();
        assert_eq!(back, s);
        s.rounds[0].povm.pop();
        assert!(s.validate().is_err());
        assert!(leaf_distribution(&Strategy::computational(4), Ensemble::Clifford, 4).is_err());
        assert!(leaf_distribution(&Strategy::computational(2), Ensemble::Clifford, 3).is_err());
    }
}
