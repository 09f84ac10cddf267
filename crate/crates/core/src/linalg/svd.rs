use nalgebra::DMatrix;

use super::DenseMatrix;
use crate::error::{LowRankError, Result};

/// Relative cutoff under which a singular value counts as zero for rank
/// reporting.
pub const RANK_TOLERANCE: f64 = 1e-12;

/// Thin singular value decomposition `M = U·diag(σ)·Vᵀ`.
///
/// Singular values are sorted nonincreasing and the sign of each singular
/// pair is fixed so that the first nonzero entry of every left singular
/// vector is nonnegative.
#[derive(Clone, Debug)]
pub struct SvdFactors {
    pub u: DenseMatrix,
    pub singular_values: Vec<f64>,
    pub v: DenseMatrix,
}

impl SvdFactors {
    pub fn k(&self) -> usize {
        self.singular_values.len()
    }

    /// Number of singular values above `RANK_TOLERANCE · σ₁`.
    pub fn numerical_rank(&self) -> usize {
        let top = self.singular_values.first().copied().unwrap_or(0.0);
        if top == 0.0 {
            return 0;
        }
        self.singular_values
            .iter()
            .filter(|&&s| s > RANK_TOLERANCE * top)
            .count()
    }

    /// `Σ_{i<r} wᵢ uᵢ vᵢᵀ` for the given per-component weights; components
    /// with zero weight are skipped.
    pub fn reconstruct_with(&self, weights: &[f64]) -> DenseMatrix {
        let (m, n) = (self.u.rows(), self.v.rows());
        let keep: Vec<usize> = weights
            .iter()
            .enumerate()
            .filter(|(_, &w)| w != 0.0)
            .map(|(i, _)| i)
            .collect();
        if keep.is_empty() {
            return DenseMatrix::zeros(m, n);
        }
        let r = keep.len();
        let mut us = DMatrix::zeros(m, r);
        let mut vr = DMatrix::zeros(n, r);
        for (c, &i) in keep.iter().enumerate() {
            us.column_mut(c)
                .copy_from(&(self.u.0.column(i) * weights[i]));
            vr.column_mut(c).copy_from(&self.v.0.column(i));
        }
        let mut out = DMatrix::zeros(m, n);
        out.gemm(1.0, &us, &vr.transpose(), 0.0);
        DenseMatrix(out)
    }

    pub fn reconstruct(&self) -> DenseMatrix {
        self.reconstruct_with(&self.singular_values)
    }

    /// Keeps the leading `k` triplets.
    pub(super) fn truncate(mut self, k: usize) -> Self {
        self.singular_values.truncate(k);
        self.u = DenseMatrix(self.u.0.columns(0, k).into_owned());
        self.v = DenseMatrix(self.v.0.columns(0, k).into_owned());
        self
    }

    /// Applies the sign convention of [`svd`] to every pair.
    pub(super) fn fix_signs(&mut self) {
        for c in 0..self.k() {
            let flip = self
                .u
                .0
                .column(c)
                .iter()
                .find(|x| x.abs() > RANK_TOLERANCE)
                .is_some_and(|&x| x < 0.0);
            if flip {
                self.u.0.column_mut(c).neg_mut();
                self.v.0.column_mut(c).neg_mut();
            }
        }
    }
}

/// Full thin SVD with `k = min(rows, cols)`, computed by faer's
/// sequential dense SVD.
pub fn svd(m: &DenseMatrix) -> Result<SvdFactors> {
    m.ensure_finite()?;
    let (rows, cols) = m.shape();
    let k = rows.min(cols);
    let view = faer::MatRef::from_column_major_slice(m.as_slice(), rows, cols);
    let raw = view
        .thin_svd()
        .map_err(|_| LowRankError::NotConverged("svd"))?;
    let (u_raw, v_raw) = (raw.U(), raw.V());
    let sv: Vec<f64> = (0..k).map(|i| raw.S()[i]).collect();

    let mut order: Vec<usize> = (0..k).collect();
    // Stable sort keeps the backend's order among exact ties.
    order.sort_by(|&a, &b| sv[b].total_cmp(&sv[a]));

    let mut u = DMatrix::zeros(rows, k);
    let mut v = DMatrix::zeros(cols, k);
    let mut singular_values = Vec::with_capacity(k);
    for (c, &i) in order.iter().enumerate() {
        for r in 0..rows {
            u[(r, c)] = u_raw[(r, i)];
        }
        for r in 0..cols {
            v[(r, c)] = v_raw[(r, i)];
        }
        singular_values.push(sv[i].max(0.0));
    }
    let mut f = SvdFactors {
        u: DenseMatrix(u),
        singular_values,
        v: DenseMatrix(v),
    };
    f.fix_signs();
    Ok(f)
}
