use super::{resolve_lambda, RpcaProblem, RpcaSolution};
use crate::error::Result;
use crate::linalg::{soft_threshold, svt_warm, DenseMatrix, WarmStart};
use crate::solver::{PenaltySchedule, SolverConfig, TraceRecorder};

/// State handed to the observer after each PCP iteration.
#[derive(Debug)]
pub struct PcpIterate<'a> {
    pub iteration: usize,
    /// Penalty used by this iteration's updates.
    pub mu: f64,
    pub low_rank: &'a DenseMatrix,
    pub sparse: &'a DenseMatrix,
    pub dual_previous: &'a DenseMatrix,
    pub dual: &'a DenseMatrix,
}

/// Principal component pursuit by inexact ALM.
///
/// Solves `min ‖X‖_* + λ‖E‖₁ s.t. X + E = D` from `E⁰ = Y⁰ = 0`:
///
/// ```text
/// X ← D_{1/μ}(D − E + Y/μ)
/// E ← S_{λ/μ}(D − X + Y/μ)
/// Y ← Y + μ(D − X − E)
/// ```
///
/// λ defaults to `1/√max(m, n)` and μ to `1/σ₁(D)`. μ follows residual
/// balancing between the primal residual `‖D − X − E‖_F/‖D‖_F` and the
/// dual residual `μ‖Eᵏ⁺¹ − Eᵏ‖_F/‖D‖_F`, growing by `mu_growth` up to
/// `mu_max`. Stops when both fall below `tol`.
/// The recorded objective is `‖X‖_* + λ‖E‖₁`.
pub fn pcp_ialm(
    problem: &RpcaProblem,
    config: &SolverConfig,
    truth: Option<&DenseMatrix>,
) -> Result<RpcaSolution> {
    pcp_ialm_with_observer(problem, config, truth, |_| {})
}

/// [`pcp_ialm`] calling `observer` after every iteration.
pub fn pcp_ialm_with_observer(
    problem: &RpcaProblem,
    config: &SolverConfig,
    truth: Option<&DenseMatrix>,
    mut observer: impl FnMut(&PcpIterate<'_>),
) -> Result<RpcaSolution> {
    config.validate()?;
    problem.check_truth(truth)?;
    let lambda = resolve_lambda(problem, config, "pcp")?;
    let mut rec = TraceRecorder::start(truth, problem.shape())?;
    let d = problem.data();
    let (m, n) = d.shape();
    let d_norm = d.frobenius_norm();

    let x0 = problem.initial_low_rank(config)?;
    rec.record(0, crate::linalg::nuclear_norm(&x0)?, &x0)?;
    if d_norm == 0.0 {
        let zero = DenseMatrix::zeros(m, n);
        rec.record(1, 0.0, &zero)?;
        return Ok(RpcaSolution {
            low_rank: zero.clone(),
            sparse: zero,
            trace: rec.finish(),
        });
    }

    let mu0 = match config.mu {
        Some(mu) => mu,
        None => 1.0 / problem.top_singular_value()?,
    };
    let mut penalty = PenaltySchedule::new(mu0, config);
    let mut x = x0;
    let mut e = DenseMatrix::zeros(m, n);
    let mut y = DenseMatrix::zeros(m, n);

    let mut warm = WarmStart::new();
    for iter in 1..=config.max_iters {
        let mu = penalty.mu;
        let inv_mu = 1.0 / mu;
        let y_scaled = y.scale(inv_mu);
        let step = svt_warm(&(&(d - &e) + &y_scaled), inv_mu, &mut warm)?;
        let nuclear = step.nuclear_norm();
        x = step.matrix;
        let e_next = soft_threshold(&(&(d - &x) + &y_scaled), lambda * inv_mu)?;
        let dual_residual = mu * (&e_next - &e).frobenius_norm() / d_norm;
        e = e_next;
        let residual_mat = &(d - &x) - &e;
        let y_next = &y + &residual_mat.scale(mu);

        observer(&PcpIterate {
            iteration: iter,
            mu,
            low_rank: &x,
            sparse: &e,
            dual_previous: &y,
            dual: &y_next,
        });
        y = y_next;

        let objective = nuclear + lambda * e.l1_norm();
        rec.record(iter, objective, &x)?;
        let primal = residual_mat.frobenius_norm() / d_norm;
        if primal < config.tol && dual_residual < config.tol {
            break;
        }
        penalty.update(primal, dual_residual);
    }
    Ok(RpcaSolution {
        low_rank: x,
        sparse: e,
        trace: rec.finish(),
    })
}
