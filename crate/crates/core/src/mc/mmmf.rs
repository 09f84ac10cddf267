use nalgebra::{DMatrix, DVector};

use super::{solve_spd, FactorPair, McProblem, DEFAULT_LAMBDA_FRACTION};
use crate::error::{invalid, Result};
use crate::linalg::DenseMatrix;
use crate::solver::{relative_change, SolverConfig, SolverTrace, TraceRecorder};

/// `½‖𝒫_Ω(D − A·Bᵀ)‖_F² + (λ/2)(‖A‖_F² + ‖B‖_F²)`.
pub fn mmmf_objective(problem: &McProblem, factors: &FactorPair, lambda: f64) -> f64 {
    let a = factors.a.as_nalgebra();
    let b = factors.b.as_nalgebra();
    let d = problem.observed_values();
    let fit: f64 = problem
        .mask()
        .iter()
        .map(|(i, j)| {
            let pred = a.row(i).dot(&b.row(j));
            let r = d.get(i, j) - pred;
            r * r
        })
        .sum();
    0.5 * fit + lambda * factors.half_frobenius_energy()
}

/// Ridge-regression update of every row of `target` given the fixed
/// factor and the observed (index, value) pairs per row.
fn ridge_rows(
    target: &mut DMatrix<f64>,
    fixed: &DMatrix<f64>,
    observed: &[Vec<(usize, f64)>],
    lambda: f64,
) {
    let r = fixed.ncols();
    for (row, obs) in observed.iter().enumerate() {
        let mut gram = DMatrix::zeros(r, r);
        let mut rhs = DVector::zeros(r);
        for &(k, value) in obs {
            let f = fixed.row(k);
            gram.ger(1.0, &f.transpose(), &f.transpose(), 1.0);
            rhs.axpy(value, &f.transpose(), 1.0);
        }
        let sol = solve_spd(gram, rhs, lambda);
        target.row_mut(row).copy_from(&sol.transpose());
    }
}

/// Maximum margin matrix factorization by alternating ridge regression.
///
/// Minimises [`mmmf_objective`] over rank-`r` factors; each half-step is an
/// exact minimisation, so the recorded objective is nonincreasing. Starts
/// from the balanced rank-`r` SVD factors of 𝒫_Ω(D). λ defaults to
/// `1e-4·σ₁(𝒫_Ω(D))`.
pub fn mmmf_complete(
    problem: &McProblem,
    config: &SolverConfig,
    truth: Option<&DenseMatrix>,
) -> Result<(FactorPair, SolverTrace)> {
    config.validate()?;
    problem.check_truth(truth)?;
    let (m, n) = problem.shape();
    let r = config.require_rank(m, n)?;
    let lambda = match config.lambda {
        Some(l) => l,
        None => DEFAULT_LAMBDA_FRACTION * problem.top_singular_value()?,
    };
    if !(lambda > 0.0) {
        return invalid(format!("mmmf requires lambda > 0, got {lambda}"));
    }
    let mut rec = TraceRecorder::start(truth, (m, n))?;

    let d = problem.observed_values();
    let by_row: Vec<Vec<(usize, f64)>> = problem
        .mask()
        .observed_per_row()
        .into_iter()
        .enumerate()
        .map(|(i, cols)| cols.into_iter().map(|j| (j, d.get(i, j))).collect())
        .collect();
    let by_col: Vec<Vec<(usize, f64)>> = problem
        .mask()
        .observed_per_col()
        .into_iter()
        .enumerate()
        .map(|(j, rows)| rows.into_iter().map(|i| (i, d.get(i, j))).collect())
        .collect();

    let mut factors = FactorPair::balanced_from(d, r)?;
    let mut x = factors.product();
    rec.record(0, mmmf_objective(problem, &factors, lambda), &x)?;

    for iter in 1..=config.max_iters {
        ridge_rows(&mut factors.a.0, &factors.b.0, &by_row, lambda);
        ridge_rows(&mut factors.b.0, &factors.a.0, &by_col, lambda);
        let next = factors.product();
        let change = relative_change(&next, &x);
        x = next;
        rec.record(iter, mmmf_objective(problem, &factors, lambda), &x)?;
        if change < config.tol {
            break;
        }
    }
    Ok((factors, rec.finish()))
}
