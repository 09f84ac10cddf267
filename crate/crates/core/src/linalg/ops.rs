//! Thresholding and projection operators shared by every solver.

use super::{svd, DenseMatrix, ObservationMask};
use crate::error::{invalid, LowRankError, Result};

/// Best rank-`r` approximation `Σ_{i≤r} σᵢ uᵢ vᵢᵀ` (Eckart–Young).
pub fn truncate_rank(m: &DenseMatrix, r: usize) -> Result<DenseMatrix> {
    let k = m.rows().min(m.cols());
    if r == 0 || r > k {
        return invalid(format!("rank {r} outside 1..={k}"));
    }
    let f = svd(m)?;
    let weights: Vec<f64> = f
        .singular_values
        .iter()
        .enumerate()
        .map(|(i, &s)| if i < r { s } else { 0.0 })
        .collect();
    Ok(f.reconstruct_with(&weights))
}

/// ‖M‖_* = Σ σᵢ.
pub fn nuclear_norm(m: &DenseMatrix) -> Result<f64> {
    Ok(svd(m)?.singular_values.iter().sum())
}

/// Result of singular value thresholding with the shrunk spectrum kept
/// around so callers can evaluate ‖X‖_* for free.
#[derive(Clone, Debug)]
pub struct SvtOutput {
    pub matrix: DenseMatrix,
    /// (σᵢ − λ)₊, nonincreasing; trailing zeros included.
    pub shrunk_singular_values: Vec<f64>,
}

impl SvtOutput {
    pub fn nuclear_norm(&self) -> f64 {
        self.shrunk_singular_values.iter().sum()
    }

    pub fn rank(&self) -> usize {
        self.shrunk_singular_values
            .iter()
            .filter(|&&s| s > 0.0)
            .count()
    }
}

/// Singular value thresholding `D_λ(Z) = Σ (σᵢ − λ)₊ uᵢ vᵢᵀ`, the proximal
/// operator of `λ‖·‖_*`.
pub fn svt(z: &DenseMatrix, lambda: f64) -> Result<DenseMatrix> {
    Ok(svt_detailed(z, lambda)?.matrix)
}

pub fn svt_detailed(z: &DenseMatrix, lambda: f64) -> Result<SvtOutput> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return invalid(format!(
            "svt threshold must be finite and >= 0, got {lambda}"
        ));
    }
    let f = svd(z)?;
    let shrunk: Vec<f64> = f
        .singular_values
        .iter()
        .map(|&s| (s - lambda).max(0.0))
        .collect();
    let matrix = f.reconstruct_with(&shrunk);
    Ok(SvtOutput {
        matrix,
        shrunk_singular_values: shrunk,
    })
}

/// Entrywise `sign(x)·max(|x| − λ, 0)`, the proximal operator of `λ‖·‖₁`.
pub fn soft_threshold(m: &DenseMatrix, lambda: f64) -> Result<DenseMatrix> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return invalid(format!(
            "soft threshold must be finite and >= 0, got {lambda}"
        ));
    }
    Ok(m.map(|x| soft_scalar(x, lambda)))
}

#[inline]
pub(crate) fn soft_scalar(x: f64, lambda: f64) -> f64 {
    if x > lambda {
        x - lambda
    } else if x < -lambda {
        x + lambda
    } else {
        0.0
    }
}

/// Keeps the `k` largest-magnitude entries and zeroes the rest.
///
/// Ties are broken by column-major index, earlier entries winning.
pub fn hard_threshold_entries(m: &DenseMatrix, k: usize) -> Result<DenseMatrix> {
    let total = m.rows() * m.cols();
    if k > total {
        return invalid(format!("cardinality {k} exceeds {total} entries"));
    }
    let data = m.as_slice();
    let mut order: Vec<usize> = (0..total).collect();
    // select_nth is unstable, so break ties on the index explicitly.
    let by_magnitude = |a: &usize, b: &usize| {
        data[*b]
            .abs()
            .total_cmp(&data[*a].abs())
            .then_with(|| a.cmp(b))
    };
    if k > 0 && k < total {
        order.select_nth_unstable_by(k - 1, by_magnitude);
    }
    let mut out = vec![0.0; total];
    for &idx in &order[..k] {
        out[idx] = data[idx];
    }
    DenseMatrix::from_column_major(m.rows(), m.cols(), out)
}

fn check_mask(m: &DenseMatrix, mask: &ObservationMask) -> Result<()> {
    if m.shape() != mask.shape() {
        return Err(LowRankError::DimensionMismatch {
            expected: mask.shape(),
            found: m.shape(),
        });
    }
    Ok(())
}

/// 𝒫_Ω: keeps entries in Ω, zeroes the rest.
pub fn project_omega(m: &DenseMatrix, mask: &ObservationMask) -> Result<DenseMatrix> {
    check_mask(m, mask)?;
    let data: Vec<f64> = m
        .as_slice()
        .iter()
        .zip(mask.bitmap())
        .map(|(&x, &keep)| if keep { x } else { 0.0 })
        .collect();
    Ok(DenseMatrix(nalgebra::DMatrix::from_vec(
        m.rows(),
        m.cols(),
        data,
    )))
}

/// 𝒫_Ω⊥: keeps entries outside Ω.
pub fn project_omega_complement(m: &DenseMatrix, mask: &ObservationMask) -> Result<DenseMatrix> {
    check_mask(m, mask)?;
    let data: Vec<f64> = m
        .as_slice()
        .iter()
        .zip(mask.bitmap())
        .map(|(&x, &keep)| if keep { 0.0 } else { x })
        .collect();
    Ok(DenseMatrix(nalgebra::DMatrix::from_vec(
        m.rows(),
        m.cols(),
        data,
    )))
}

/// 𝒫_Ω(observed) + 𝒫_Ω⊥(fill): entries of `observed` on Ω, of `fill` elsewhere.
pub(crate) fn merge_on_mask(
    observed: &DenseMatrix,
    fill: &DenseMatrix,
    mask: &ObservationMask,
) -> DenseMatrix {
    let data: Vec<f64> = observed
        .as_slice()
        .iter()
        .zip(fill.as_slice())
        .zip(mask.bitmap())
        .map(|((&o, &f), &keep)| if keep { o } else { f })
        .collect();
    DenseMatrix(nalgebra::DMatrix::from_vec(
        observed.rows(),
        observed.cols(),
        data,
    ))
}

/// ‖estimate − truth‖_F / ‖truth‖_F.
pub fn relative_distance(estimate: &DenseMatrix, truth: &DenseMatrix) -> Result<f64> {
    truth.ensure_same_shape(estimate)?;
    let denom = truth.frobenius_norm();
    if denom == 0.0 {
        return invalid("relative distance against a zero matrix is undefined");
    }
    Ok((estimate - truth).frobenius_norm() / denom)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(d: &[f64]) -> DenseMatrix {
        DenseMatrix::from_diagonal(d)
    }

    fn close(a: &DenseMatrix, b: &DenseMatrix, tol: f64) -> bool {
        (a - b).frobenius_norm() <= tol
    }

    #[test]
    fn truncate_keeps_leading_components() {
        let out = truncate_rank(&diag(&[3.0, 2.0, 1.0]), 2).unwrap();
        assert!(close(&out, &diag(&[3.0, 2.0, 0.0]), 1e-12));
        assert!(truncate_rank(&diag(&[1.0, 1.0]), 0).is_err());
        assert!(truncate_rank(&diag(&[1.0, 1.0]), 3).is_err());
    }

    #[test]
    fn truncate_is_identity_when_rank_already_low() {
        let a = DenseMatrix::from_fn(5, 1, |i, _| i as f64 + 1.0);
        let b = DenseMatrix::from_fn(4, 1, |i, _| 2.0 - i as f64);
        let m = a.matmul_transposed(&b).unwrap();
        let out = truncate_rank(&m, 2).unwrap();
        assert!(close(&out, &m, 1e-10 * m.frobenius_norm()));
    }

    #[test]
    fn nuclear_norm_examples() {
        assert!((nuclear_norm(&diag(&[3.0, 1.0])).unwrap() - 4.0).abs() < 1e-12);
        assert!((nuclear_norm(&DenseMatrix::identity(5)).unwrap() - 5.0).abs() < 1e-12);
        // a bᵀ has a single singular value ‖a‖·‖b‖.
        let a = DenseMatrix::from_row_major(3, 1, &[1.0, 2.0, 2.0]).unwrap();
        let b = DenseMatrix::from_row_major(2, 1, &[3.0, 4.0]).unwrap();
        let nn = nuclear_norm(&a.matmul_transposed(&b).unwrap()).unwrap();
        assert!((nn - 15.0).abs() < 1e-10);
    }

    #[test]
    fn svt_examples() {
        let out = svt(&diag(&[3.0, 1.0]), 2.0).unwrap();
        assert!(close(&out, &diag(&[1.0, 0.0]), 1e-12));
        let z = DenseMatrix::from_row_major(2, 3, &[1.0, -2.0, 0.5, 4.0, 0.0, 1.0]).unwrap();
        assert!(close(&svt(&z, 0.0).unwrap(), &z, 1e-12));
        assert!(svt(&z, -1.0).is_err());
        assert!(svt(&z, f64::NAN).is_err());
    }

    #[test]
    fn soft_threshold_examples() {
        let m = DenseMatrix::from_row_major(1, 3, &[3.0, -3.0, 0.5]).unwrap();
        let out = soft_threshold(&m, 2.0).unwrap();
        assert_eq!(out.as_slice(), &[1.0, -1.0, 0.0]);
        assert_eq!(soft_threshold(&m, 0.0).unwrap(), m);
        assert!(soft_threshold(&m, -0.1).is_err());
    }

    #[test]
    fn hard_threshold_examples() {
        let m = DenseMatrix::from_row_major(2, 2, &[5.0, -1.0, 2.0, 0.0]).unwrap();
        let out = hard_threshold_entries(&m, 2).unwrap();
        assert_eq!(
            out,
            DenseMatrix::from_row_major(2, 2, &[5.0, 0.0, 2.0, 0.0]).unwrap()
        );
        assert_eq!(
            hard_threshold_entries(&m, 0).unwrap(),
            DenseMatrix::zeros(2, 2)
        );
        assert_eq!(hard_threshold_entries(&m, 4).unwrap(), m);
        assert!(hard_threshold_entries(&m, 5).is_err());
    }

    #[test]
    fn hard_threshold_ties_prefer_earlier_column_major_index() {
        // Column-major order: (0,0)=1, (1,0)=-1, (0,1)=1, (1,1)=1.
        let m = DenseMatrix::from_row_major(2, 2, &[1.0, 1.0, -1.0, 1.0]).unwrap();
        let out = hard_threshold_entries(&m, 2).unwrap();
        assert_eq!(out.as_slice(), &[1.0, -1.0, 0.0, 0.0]);
    }

    #[test]
    fn projection_examples() {
        let m = DenseMatrix::from_fn(3, 2, |i, j| (i * 2 + j) as f64 + 1.0);
        assert_eq!(project_omega(&m, &ObservationMask::full(3, 2)).unwrap(), m);
        assert_eq!(
            project_omega(&m, &ObservationMask::empty(3, 2)).unwrap(),
            DenseMatrix::zeros(3, 2)
        );
        let mask = ObservationMask::from_indices(3, 2, [(0, 1), (2, 0)]).unwrap();
        let sum =
            &project_omega(&m, &mask).unwrap() + &project_omega_complement(&m, &mask).unwrap();
        assert_eq!(sum, m);
        assert!(project_omega(&m, &ObservationMask::full(2, 3)).is_err());
    }

    #[test]
    fn relative_distance_examples() {
        let t = DenseMatrix::from_fn(3, 3, |i, j| (i + j) as f64 - 1.5);
        assert_eq!(relative_distance(&t, &t).unwrap(), 0.0);
        assert!((relative_distance(&DenseMatrix::zeros(3, 3), &t).unwrap() - 1.0).abs() < 1e-15);
        assert!((relative_distance(&t.scale(2.0), &t).unwrap() - 1.0).abs() < 1e-15);
        assert!(relative_distance(&t, &DenseMatrix::zeros(3, 3)).is_err());
    }
}
