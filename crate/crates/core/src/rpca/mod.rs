//! Robust PCA: split a fully observed `D` into low-rank `X` plus sparse `E`.

mod godec;
mod pcp;
mod spcp;

pub use godec::godec;
pub use pcp::{pcp_ialm, pcp_ialm_with_observer, PcpIterate};
pub use spcp::{spcp_bcd, spcp_objective};

use crate::error::{LowRankError, Result};
use crate::linalg::{svd, truncate_rank, DenseMatrix};
use crate::solver::{SolverConfig, SolverTrace};

/// Fully observed data matrix `D`.
#[derive(Clone, Debug)]
pub struct RpcaProblem {
    data: DenseMatrix,
}

impl RpcaProblem {
    pub fn new(data: DenseMatrix) -> Result<Self> {
        data.ensure_finite()?;
        Ok(Self { data })
    }

    pub fn data(&self) -> &DenseMatrix {
        &self.data
    }

    pub fn shape(&self) -> (usize, usize) {
        self.data.shape()
    }

    /// `1/√max(m, n)`.
    pub fn default_lambda(&self) -> f64 {
        let (m, n) = self.shape();
        1.0 / (m.max(n) as f64).sqrt()
    }

    pub(crate) fn top_singular_value(&self) -> Result<f64> {
        Ok(svd(&self.data)?
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

    /// Rank-`r` truncation of `D` when a rank is configured, else zero.
    pub(crate) fn initial_low_rank(&self, config: &SolverConfig) -> Result<DenseMatrix> {
        let (m, n) = self.shape();
        match config.rank {
            Some(r) => truncate_rank(&self.data, r.min(m.min(n))),
            None => Ok(DenseMatrix::zeros(m, n)),
        }
    }
}

/// Estimated `X` and `E` with the iteration trace.
#[derive(Clone, Debug)]
pub struct RpcaSolution {
    pub low_rank: DenseMatrix,
    pub sparse: DenseMatrix,
    pub trace: SolverTrace,
}

impl RpcaSolution {
    /// `‖X + E − D‖_F / ‖D‖_F`, or `‖X + E‖_F` when `D = 0`.
    pub fn relative_residual(&self, problem: &RpcaProblem) -> f64 {
        let r = &(&self.low_rank + &self.sparse) - problem.data();
        let d = problem.data().frobenius_norm();
        if d == 0.0 {
            r.frobenius_norm()
        } else {
            r.frobenius_norm() / d
        }
    }
}

pub(crate) fn resolve_lambda(
    problem: &RpcaProblem,
    config: &SolverConfig,
    who: &str,
) -> Result<f64> {
    let lambda = config.lambda.unwrap_or_else(|| problem.default_lambda());
    if !(lambda > 0.0) {
        return crate::error::invalid(format!("{who} requires lambda > 0, got {lambda}"));
    }
    Ok(lambda)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_finite_data() {
        let d = DenseMatrix::from_fn(2, 2, |i, _| if i == 0 { f64::NAN } else { 0.0 });
        assert!(RpcaProblem::new(d).is_err());
    }

    #[test]
    fn default_lambda_uses_larger_side() {
        let p = RpcaProblem::new(DenseMatrix::zeros(4, 16)).unwrap();
        assert_eq!(p.default_lambda(), 0.25);
    }
}
