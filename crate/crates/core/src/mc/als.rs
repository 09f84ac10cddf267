use nalgebra::DMatrix;

use super::{FactorPair, McProblem};
use crate::error::Result;
use crate::linalg::DenseMatrix;
use crate::solver::{relative_change, SolverConfig, SolverTrace, TraceRecorder};

/// Tikhonov term added to every normal-equation Gram matrix.
const RIDGE: f64 = 1e-10;

/// `argmin_A ‖Z − A·Bᵀ‖_F = Z·B·(BᵀB + εI)⁻¹`.
fn least_squares_factor(z: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let r = b.ncols();
    let mut gram = b.transpose() * b;
    for d in 0..r {
        gram[(d, d)] += RIDGE;
    }
    let zb = z * b;
    match gram.clone().cholesky() {
        // (Gram⁻¹ (ZB)ᵀ)ᵀ
        Some(ch) => ch.solve(&zb.transpose()).transpose(),
        None => {
            let pinv = gram
                .pseudo_inverse(1e-12)
                .unwrap_or_else(|_| DMatrix::zeros(r, r));
            zb * pinv
        }
    }
}

/// Alternating least squares on the auxiliary-variable split
///
/// ```text
/// min ½‖Z − A·Bᵀ‖_F²  s.t. 𝒫_Ω(Z) = 𝒫_Ω(D)
/// ```
///
/// Each round solves for `A`, then `B`, in closed form and resets
/// `Z = A·Bᵀ + 𝒫_Ω(D − A·Bᵀ)`. Starts from the balanced factors of the
/// rank-`r` SVD of 𝒫_Ω(D). The recorded objective,
/// `½‖𝒫_Ω(D − A·Bᵀ)‖_F²`, is nonincreasing.
pub fn als_complete(
    problem: &McProblem,
    config: &SolverConfig,
    truth: Option<&DenseMatrix>,
) -> Result<(FactorPair, SolverTrace)> {
    config.validate()?;
    problem.check_truth(truth)?;
    let (m, n) = problem.shape();
    let r = config.require_rank(m, n)?;
    let mut rec = TraceRecorder::start(truth, (m, n))?;

    let init = FactorPair::balanced_from(problem.observed_values(), r)?;
    let mut a = init.a.0;
    let mut b = init.b.0;
    let mut x = DenseMatrix(&a * b.transpose());
    rec.record(0, problem.data_fit(&x), &x)?;
    let mut z = problem.fill(&x).0;

    for iter in 1..=config.max_iters {
        a = least_squares_factor(&z, &b);
        b = least_squares_factor(&z.transpose(), &a);
        let next = DenseMatrix(&a * b.transpose());
        let change = relative_change(&next, &x);
        x = next;
        z = problem.fill(&x).0;
        rec.record(iter, problem.data_fit(&x), &x)?;
        if change < config.tol {
            break;
        }
    }
    Ok((
        FactorPair::new(DenseMatrix(a), DenseMatrix(b))?,
        rec.finish(),
    ))
}
