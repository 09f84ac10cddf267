use super::{initial_guess, McProblem};
use crate::error::{invalid, Result};
use crate::linalg::{nuclear_norm, project_omega_complement, svt_warm, DenseMatrix, WarmStart};
use crate::solver::{PenaltySchedule, SolverConfig, SolverTrace, TraceRecorder};

/// Inexact ALM for `min ‖X‖_* s.t. 𝒫_Ω(X) = 𝒫_Ω(D)`.
///
/// The constraint is rewritten as `X = D + E` with `𝒫_Ω(E) = 0`, so the
/// X-step is a plain SVT:
///
/// ```text
/// X ← D_{1/μ}(D + E + Y/μ)
/// E ← 𝒫_Ω⊥(X − D − Y/μ)
/// Y ← Y + μ(D + E − X)
/// ```
///
/// μ starts at `1/σ₁(𝒫_Ω(D))` unless configured and follows residual
/// balancing between the primal residual `‖D + E − X‖_F/‖D‖_F` and the
/// dual residual `μ‖Eᵏ⁺¹ − Eᵏ‖_F/‖D‖_F`, growing by `mu_growth` up to
/// `mu_max`. Stops when both fall below `tol`. The recorded objective is
/// `‖X‖_*`.
pub fn ialm_mc(
    problem: &McProblem,
    config: &SolverConfig,
    truth: Option<&DenseMatrix>,
) -> Result<(DenseMatrix, SolverTrace)> {
    config.validate()?;
    problem.check_truth(truth)?;
    if problem.mask().is_empty() {
        return invalid("matrix completion needs at least one observed entry");
    }
    let mut rec = TraceRecorder::start(truth, problem.shape())?;
    let d = problem.observed_values();
    let d_norm = d.frobenius_norm();

    let x0 = initial_guess(problem, config.rank)?;
    rec.record(0, nuclear_norm(&x0)?, &x0)?;
    if d_norm == 0.0 {
        let zero = DenseMatrix::zeros(d.rows(), d.cols());
        rec.record(1, 0.0, &zero)?;
        return Ok((zero, rec.finish()));
    }

    let mu0 = match config.mu {
        Some(mu) => mu,
        None => 1.0 / problem.top_singular_value()?,
    };
    let mut penalty = PenaltySchedule::new(mu0, config);
    let mut e = project_omega_complement(&x0, problem.mask())?;
    let mut y = DenseMatrix::zeros(d.rows(), d.cols());
    let mut x = x0;

    let mut warm = WarmStart::new();
    for iter in 1..=config.max_iters {
        let mu = penalty.mu;
        let inv_mu = 1.0 / mu;
        let target = &(d + &e) + &y.scale(inv_mu);
        let step = svt_warm(&target, inv_mu, &mut warm)?;
        x = step.matrix;
        let shifted = &(&x - d) - &y.scale(inv_mu);
        let e_next = project_omega_complement(&shifted, problem.mask())?;
        let residual_mat = &(d + &e_next) - &x;
        y = &y + &residual_mat.scale(mu);

        let primal = residual_mat.frobenius_norm() / d_norm;
        let dual = mu * (&e_next - &e).frobenius_norm() / d_norm;
        e = e_next;
        rec.record(iter, step.shrunk_singular_values.iter().sum(), &x)?;
        if primal < config.tol && dual < config.tol {
            break;
        }
        penalty.update(primal, dual);
    }
    Ok((x, rec.finish()))
}
