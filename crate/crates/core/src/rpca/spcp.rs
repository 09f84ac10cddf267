use super::{resolve_lambda, RpcaProblem, RpcaSolution};
use crate::error::{invalid, Result};
use crate::linalg::{nuclear_norm, soft_threshold, svt_warm, DenseMatrix, WarmStart};
use crate::solver::{SolverConfig, TraceRecorder};

/// `‖X‖_* + λ‖E‖₁ + (μ/2)‖X + E − D‖_F²`.
pub fn spcp_objective(
    problem: &RpcaProblem,
    low_rank: &DenseMatrix,
    sparse: &DenseMatrix,
    lambda: f64,
    mu: f64,
) -> Result<f64> {
    let fit = (&(low_rank + sparse) - problem.data()).frobenius_norm_squared();
    Ok(nuclear_norm(low_rank)? + lambda * sparse.l1_norm() + 0.5 * mu * fit)
}

/// Default penalty: `1/(√(2·max(m, n))·σ)` for a known noise level σ > 0,
/// else 1.
fn default_mu(problem: &RpcaProblem, config: &SolverConfig) -> f64 {
    let (m, n) = problem.shape();
    match config.noise_level {
        Some(sigma) if sigma > 0.0 => 1.0 / ((2.0 * m.max(n) as f64).sqrt() * sigma),
        _ => 1.0,
    }
}

/// Stable PCP by block coordinate descent on [`spcp_objective`].
///
/// Alternates the two exact block minimisations `X ← D_{1/μ}(D − E)` and
/// `E ← S_{λ/μ}(D − X)` from `E⁰ = 0`, so the recorded objective is
/// nonincreasing. λ defaults to `1/√max(m, n)`. Stops when the relative
/// objective change drops below `tol`.
pub fn spcp_bcd(
    problem: &RpcaProblem,
    config: &SolverConfig,
    truth: Option<&DenseMatrix>,
) -> Result<RpcaSolution> {
    config.validate()?;
    problem.check_truth(truth)?;
    let lambda = resolve_lambda(problem, config, "spcp")?;
    let mu = config.mu.unwrap_or_else(|| default_mu(problem, config));
    if !(mu > 0.0) || !mu.is_finite() {
        return invalid(format!("spcp requires finite mu > 0, got {mu}"));
    }
    let mut rec = TraceRecorder::start(truth, problem.shape())?;
    let d = problem.data();
    let (m, n) = d.shape();

    let mut x = problem.initial_low_rank(config)?;
    let mut e = DenseMatrix::zeros(m, n);
    let mut objective = spcp_objective(problem, &x, &e, lambda, mu)?;
    rec.record(0, objective, &x)?;

    let mut warm = WarmStart::new();
    for iter in 1..=config.max_iters {
        let step = svt_warm(&(d - &e), 1.0 / mu, &mut warm)?;
        let nuclear = step.nuclear_norm();
        x = step.matrix;
        let residual = d - &x;
        e = soft_threshold(&residual, lambda / mu)?;
        let fit = (&residual - &e).frobenius_norm_squared();
        let next = nuclear + lambda * e.l1_norm() + 0.5 * mu * fit;
        rec.record(iter, next, &x)?;
        let change = (objective - next).abs() / objective.abs().max(f64::MIN_POSITIVE);
        objective = next;
        if change < config.tol || next == 0.0 {
            break;
        }
    }
    Ok(RpcaSolution {
        low_rank: x,
        sparse: e,
        trace: rec.finish(),
    })
}
