//! Matrix completion: recover a low-rank matrix from the entries on Ω.
//!
//! Nuclear-norm solvers ([`soft_impute`], [`apg_mcn`], [`ialm_mc`]) and
//! factorization / projection solvers ([`als_complete`],
//! [`mmmf_complete`], [`svp_complete`]). All are deterministic: identical
//! inputs give bit-identical estimates.

mod als;
mod apg;
mod ialm;
mod mmmf;
mod soft_impute;
mod svp;

pub use als::als_complete;
pub use apg::{apg_mcn, next_momentum_weight, ApgState};
pub use ialm::ialm_mc;
pub use mmmf::{mmmf_complete, mmmf_objective};
pub use soft_impute::{lambda_ladder, soft_impute};
pub use svp::svp_complete;

use nalgebra::{DMatrix, DVector};

use crate::error::{invalid, LowRankError, Result};
use crate::linalg::{merge_on_mask, project_omega, svd, DenseMatrix, ObservationMask};

/// Default target λ for the nuclear-norm solvers, as a fraction of
/// σ₁(𝒫_Ω(D)).
pub const DEFAULT_LAMBDA_FRACTION: f64 = 3e-5;

/// Observed entries of `D` together with Ω.
#[derive(Clone, Debug)]
pub struct McProblem {
    observed_values: DenseMatrix,
    mask: ObservationMask,
}

impl McProblem {
    /// Builds a problem from a matrix whose entries on Ω are the
    /// observations; entries outside Ω are discarded.
    pub fn new(data: &DenseMatrix, mask: ObservationMask) -> Result<Self> {
        let observed_values = project_omega(data, &mask)?;
        observed_values.ensure_finite()?;
        Ok(Self {
            observed_values,
            mask,
        })
    }

    pub fn from_entries(
        rows: usize,
        cols: usize,
        entries: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self> {
        let mut values = DMatrix::zeros(rows, cols);
        let mut idx = Vec::new();
        for (i, j, v) in entries {
            if i < rows && j < cols {
                values[(i, j)] = v;
            }
            idx.push((i, j));
        }
        let mask = ObservationMask::from_indices(rows, cols, idx)?;
        Self::new(&DenseMatrix(values), mask)
    }

    /// 𝒫_Ω(D).
    pub fn observed_values(&self) -> &DenseMatrix {
        &self.observed_values
    }

    pub fn mask(&self) -> &ObservationMask {
        &self.mask
    }

    pub fn shape(&self) -> (usize, usize) {
        self.mask.shape()
    }

    /// ½‖𝒫_Ω(X − D)‖_F².
    pub fn data_fit(&self, x: &DenseMatrix) -> f64 {
        x.as_slice()
            .iter()
            .zip(self.observed_values.as_slice())
            .zip(self.mask.bitmap())
            .filter(|(_, &keep)| keep)
            .map(|((&xv, &dv), _)| (xv - dv) * (xv - dv))
            .sum::<f64>()
            * 0.5
    }

    /// 𝒫_Ω(D) + 𝒫_Ω⊥(X).
    pub fn fill(&self, x: &DenseMatrix) -> DenseMatrix {
        merge_on_mask(&self.observed_values, x, &self.mask)
    }

    /// σ₁(𝒫_Ω(D)).
    pub fn top_singular_value(&self) -> Result<f64> {
        Ok(svd(&self.observed_values)?
            .singular_values
            .first()
            .copied()
            .unwrap_or(0.0))
    }

    pub(crate) fn check_truth(&self, truth: Option<&DenseMatrix>) -> Result<()> {
        match truth {
            Some(t) if t.shape() != self.shape() => Err(LowRankError::DimensionMismatch {
                expected: self.shape(),
                found: t.shape(),
            }),
            _ => Ok(()),
        }
    }
}

/// `A·Bᵀ` factorization with shared inner dimension `r`.
#[derive(Clone, Debug, PartialEq)]
pub struct FactorPair {
    pub a: DenseMatrix,
    pub b: DenseMatrix,
}

impl FactorPair {
    pub fn new(a: DenseMatrix, b: DenseMatrix) -> Result<Self> {
        if a.cols() != b.cols() || a.cols() == 0 {
            return invalid(format!(
                "factor inner dimensions differ or are zero: {} vs {}",
                a.cols(),
                b.cols()
            ));
        }
        Ok(Self { a, b })
    }

    /// Balanced factors `A = U_r Σ_r^{1/2}`, `B = V_r Σ_r^{1/2}` of the
    /// rank-`r` truncation of `m`.
    pub fn balanced_from(m: &DenseMatrix, r: usize) -> Result<Self> {
        let k = m.rows().min(m.cols());
        if r == 0 || r > k {
            return invalid(format!("rank {r} outside 1..={k}"));
        }
        let f = svd(m)?;
        let a = DenseMatrix::from_fn(m.rows(), r, |i, j| {
            f.u.get(i, j) * f.singular_values[j].sqrt()
        });
        let b = DenseMatrix::from_fn(m.cols(), r, |i, j| {
            f.v.get(i, j) * f.singular_values[j].sqrt()
        });
        Self::new(a, b)
    }

    pub fn rank(&self) -> usize {
        self.a.cols()
    }

    /// `A·Bᵀ`.
    pub fn product(&self) -> DenseMatrix {
        self.a
            .matmul_transposed(&self.b)
            .expect("inner dimensions checked at construction")
    }

    /// ½(‖A‖_F² + ‖B‖_F²).
    pub fn half_frobenius_energy(&self) -> f64 {
        0.5 * (self.a.frobenius_norm_squared() + self.b.frobenius_norm_squared())
    }
}

/// Rank-`r` SVD approximation of 𝒫_Ω(D) when a rank is given, else zero.
pub(crate) fn initial_guess(problem: &McProblem, rank: Option<usize>) -> Result<DenseMatrix> {
    let (m, n) = problem.shape();
    match rank {
        Some(r) => crate::linalg::truncate_rank(problem.observed_values(), r.min(m.min(n))),
        None => Ok(DenseMatrix::zeros(m, n)),
    }
}

/// Solves `(G + ridge·I) x = rhs` for symmetric positive (semi)definite `G`.
pub(crate) fn solve_spd(mut g: DMatrix<f64>, rhs: DVector<f64>, ridge: f64) -> DVector<f64> {
    let rhs_len = rhs.len();
    for d in 0..g.nrows() {
        g[(d, d)] += ridge;
    }
    match g.clone().cholesky() {
        Some(ch) => ch.solve(&rhs),
        // Ridge too small for a numerically singular Gram matrix; fall back
        // to the pseudo-inverse.
        None => g
            .pseudo_inverse(1e-12)
            .map(|p| p * rhs)
            .unwrap_or_else(|_| DVector::zeros(rhs_len)),
    }
}
