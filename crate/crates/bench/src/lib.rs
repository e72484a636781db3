//! Seeded fixtures shared by the benchmarks.

use clifftest::densesim::{haar_unitary, random_state, DenseUnitary, StateVector};
use clifftest::BitMatrix;
use clifftest::BitVec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const SEED: u64 = 0x5eed;

pub fn rng(salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(SEED ^ salt)
}

/// Uniformly random `rows × cols` matrix over F₂.
pub fn bit_matrix(rows: usize, cols: usize) -> BitMatrix {
    let mut r = rng((rows * 1000 + cols) as u64);
    let rows = (0..rows)
        .map(|_| BitVec::from_bools(&(0..cols).map(|_| r.random::<bool>()).collect::<Vec<_>>()))
        .collect();
    BitMatrix::from_rows(cols, rows).expect("rows have equal length")
}

pub fn unitary(n: usize) -> DenseUnitary {
    haar_unitary(n, &mut rng(n as u64))
}

pub fn state(n: usize) -> StateVector {
    random_state(n, &mut rng(100 + n as u64))
}
