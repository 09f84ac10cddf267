//! Closed-form maximum-likelihood probabilistic PCA.
//!
//! Columns of the data matrix are points `dᵢ ∈ ℝᵐ` drawn from
//! `dᵢ = A·zᵢ + mean + εᵢ` with `zᵢ ~ 𝒩(0, I_r)` and `εᵢ ~ 𝒩(0, β⁻¹I_m)`.

use crate::error::{invalid, LowRankError, Result};
use crate::linalg::{svd, DenseMatrix, RANK_TOLERANCE};

/// Fitted or hand-built PPCA model.
#[derive(Clone, Debug, PartialEq)]
pub struct PpcaModel {
    /// `m×r` loading matrix `Â`.
    pub a_hat: DenseMatrix,
    /// β⁻¹, the isotropic noise variance.
    pub noise_variance: f64,
    pub mean: Vec<f64>,
    /// Eigenvalues of the centered `(1/n)` sample covariance, descending,
    /// padded with zeros to length `m`. Empty for hand-built models.
    pub covariance_eigenvalues: Vec<f64>,
    /// Set when `λ_r ≤ β⁻¹`; the affected columns of `Â` are zero.
    pub below_noise_floor: bool,
}

impl PpcaModel {
    pub fn new(a_hat: DenseMatrix, noise_precision: f64, mean: Vec<f64>) -> Result<Self> {
        if !(noise_precision > 0.0) || !noise_precision.is_finite() {
            return invalid(format!(
                "noise precision must be finite and positive, got {noise_precision}"
            ));
        }
        if mean.len() != a_hat.rows() {
            return Err(LowRankError::DimensionMismatch {
                expected: (a_hat.rows(), 1),
                found: (mean.len(), 1),
            });
        }
        a_hat.ensure_finite()?;
        Ok(Self {
            a_hat,
            noise_variance: 1.0 / noise_precision,
            mean,
            covariance_eigenvalues: Vec::new(),
            below_noise_floor: false,
        })
    }

    pub fn dim(&self) -> usize {
        self.a_hat.rows()
    }

    pub fn latent_dim(&self) -> usize {
        self.a_hat.cols()
    }

    /// β.
    pub fn noise_precision(&self) -> f64 {
        1.0 / self.noise_variance
    }

    /// `ÂÂᵀ + β⁻¹I`.
    pub fn covariance(&self) -> DenseMatrix {
        let aat = self
            .a_hat
            .matmul_transposed(&self.a_hat)
            .expect("same factor");
        let s2 = self.noise_variance;
        DenseMatrix::from_fn(self.dim(), self.dim(), |i, j| {
            aat.get(i, j) + if i == j { s2 } else { 0.0 }
        })
    }
}

/// Fits PPCA to the columns of `data` with latent dimension `r`.
///
/// `β⁻¹` is the mean of the trailing `m − r` covariance eigenvalues and
/// `Â = U_r(Σ_r − β⁻¹I)^{1/2}` with the rotation fixed to the identity.
/// When the trailing eigenvalues vanish, β⁻¹ is floored at
/// `ε·λ₁` so that β stays finite.
pub fn ppca_fit(data: &DenseMatrix, r: usize) -> Result<PpcaModel> {
    let (m, n) = data.shape();
    if r == 0 || r >= m.min(n) {
        return invalid(format!("latent dimension {r} outside 1..{}", m.min(n)));
    }
    data.ensure_finite()?;
    let mean: Vec<f64> = (0..m)
        .map(|i| (0..n).map(|j| data.get(i, j)).sum::<f64>() / n as f64)
        .collect();
    let scale = 1.0 / (n as f64).sqrt();
    let centered = DenseMatrix::from_fn(m, n, |i, j| (data.get(i, j) - mean[i]) * scale);
    let f = svd(&centered)?;

    // Eigenvalues of (1/n)·CCᵀ are the squared singular values of C/√n.
    let mut eig: Vec<f64> = f.singular_values.iter().map(|s| s * s).collect();
    eig.resize(m, 0.0);
    let trailing = eig[r..].iter().sum::<f64>() / (m - r) as f64;
    let floor = (f64::EPSILON * eig[0]).max(f64::MIN_POSITIVE);
    let noise_variance = trailing.max(floor);

    let below_noise_floor = eig[r - 1] <= noise_variance;
    let a_hat = DenseMatrix::from_fn(m, r, |i, j| {
        f.u.get(i, j) * (eig[j] - noise_variance).max(0.0).sqrt()
    });
    Ok(PpcaModel {
        a_hat,
        noise_variance,
        mean,
        covariance_eigenvalues: eig,
        below_noise_floor,
    })
}

/// `Σᵢ log 𝒩(dᵢ | mean, ÂÂᵀ + β⁻¹I)` over the columns of `data`.
///
/// Uses the SVD `Â = P·S·Wᵀ`: the covariance has eigenvalues `s_j² + β⁻¹`
/// along `P` and `β⁻¹` on its orthogonal complement.
pub fn ppca_log_likelihood(model: &PpcaModel, data: &DenseMatrix) -> Result<f64> {
    let m = model.dim();
    if data.rows() != m {
        return Err(LowRankError::DimensionMismatch {
            expected: (m, data.cols()),
            found: data.shape(),
        });
    }
    let s2 = model.noise_variance;
    let f = svd(&model.a_hat)?;
    let k = f.singular_values.len();
    let spectrum: Vec<f64> = f.singular_values.iter().map(|s| s * s + s2).collect();
    let log_det = spectrum.iter().map(|l| l.ln()).sum::<f64>() + (m - k) as f64 * s2.ln();
    if !log_det.is_finite() {
        return invalid("covariance is not positive definite");
    }
    let weights: Vec<f64> = spectrum.iter().map(|l| 1.0 / s2 - 1.0 / l).collect();
    let const_term = m as f64 * (2.0 * std::f64::consts::PI).ln() + log_det;

    let mut total = 0.0;
    let mut x = vec![0.0; m];
    for col in 0..data.cols() {
        for (i, xi) in x.iter_mut().enumerate() {
            *xi = data.get(i, col) - model.mean[i];
        }
        let norm2: f64 = x.iter().map(|v| v * v).sum();
        let mut quad = norm2 / s2;
        for (j, w) in weights.iter().enumerate() {
            if f.singular_values[j] <= RANK_TOLERANCE * f.singular_values[0] {
                continue;
            }
            let proj: f64 = (0..m).map(|i| f.u.get(i, j) * x[i]).sum();
            quad -= w * proj * proj;
        }
        total += -0.5 * (const_term + quad);
    }
    Ok(total)
}
