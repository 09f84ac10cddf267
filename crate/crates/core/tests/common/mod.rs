#![allow(dead_code)]

use lowrank::DenseMatrix;
use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rows: usize, cols: usize, rng: &mut impl Rng) -> DenseMatrix {
    DenseMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

pub fn low_rank(m: usize, n: usize, r: usize, rng: &mut impl Rng) -> DenseMatrix {
    gaussian(m, r, rng)
        .matmul_transposed(&gaussian(n, r, rng))
        .unwrap()
}

/// Singular values from the eigenvalues of MᵀM (or MMᵀ), descending.
/// Independent of the crate's SVD backend.
pub fn singular_values_oracle(m: &DenseMatrix) -> Vec<f64> {
    let a = m.as_nalgebra();
    let gram: DMatrix<f64> = if a.nrows() >= a.ncols() {
        a.transpose() * a
    } else {
        a * a.transpose()
    };
    let mut ev: Vec<f64> = SymmetricEigen::new(gram)
        .eigenvalues
        .iter()
        .map(|&l| l.max(0.0).sqrt())
        .collect();
    ev.sort_by(|x, y| y.total_cmp(x));
    ev
}

/// ‖M‖_* via nalgebra's own SVD.
pub fn nuclear_oracle(m: &DenseMatrix) -> f64 {
    m.as_nalgebra()
        .clone()
        .svd(false, false)
        .singular_values
        .sum()
}

pub fn rel(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
    (a - b).frobenius_norm() / b.frobenius_norm().max(f64::MIN_POSITIVE)
}
