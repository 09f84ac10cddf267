use super::{initial_guess, McProblem};
use crate::error::Result;
use crate::linalg::{truncate_rank_warm, DenseMatrix, WarmStart};
use crate::solver::{relative_change, SolverConfig, SolverTrace, TraceRecorder};

/// Isometry slack in the default step size.
const DEFAULT_DELTA: f64 = 1.0 / 3.0;

/// Singular value projection: projected gradient with a hard rank
/// constraint, `X ← P_r(X − η·𝒫_Ω(X − D))`.
///
/// The step η is `config.mu`, by default `1/((1 + δ)·p̂)` with `δ = 1/3`
/// and `p̂ = |Ω|/(mn)` the observed fraction. The recorded objective is
/// `½‖𝒫_Ω(X − D)‖_F²`.
pub fn svp_complete(
    problem: &McProblem,
    config: &SolverConfig,
    truth: Option<&DenseMatrix>,
) -> Result<(DenseMatrix, SolverTrace)> {
    config.validate()?;
    problem.check_truth(truth)?;
    let (m, n) = problem.shape();
    let r = config.require_rank(m, n)?;
    let step = match config.mu {
        Some(eta) => eta,
        None if problem.mask().is_empty() => 1.0,
        None => (m * n) as f64 / ((1.0 + DEFAULT_DELTA) * problem.mask().len() as f64),
    };
    let mut rec = TraceRecorder::start(truth, (m, n))?;

    let d = problem.observed_values();
    let mut x = initial_guess(problem, Some(r))?;
    rec.record(0, problem.data_fit(&x), &x)?;

    let mut warm = WarmStart::new();
    for iter in 1..=config.max_iters {
        let grad_step: Vec<f64> = x
            .as_slice()
            .iter()
            .zip(d.as_slice())
            .zip(problem.mask().bitmap())
            .map(|((&xv, &dv), &obs)| if obs { xv - step * (xv - dv) } else { xv })
            .collect();
        let g = DenseMatrix::from_column_major(m, n, grad_step)?;
        let next = truncate_rank_warm(&g, r, &mut warm)?;
        let change = relative_change(&next, &x);
        x = next;
        rec.record(iter, problem.data_fit(&x), &x)?;
        if change < config.tol {
            break;
        }
    }
    Ok((x, rec.finish()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ObservationMask;

    #[test]
    fn full_rank_full_mask_lands_on_data() {
        let d = DenseMatrix::from_fn(4, 3, |i, j| (i * 3 + j) as f64 - 4.0);
        let p = McProblem::new(&d, ObservationMask::full(4, 3)).unwrap();
        let cfg = SolverConfig::default()
            .with_rank(3)
            .with_mu(1.0)
            .with_max_iters(1);
        let (x, _) = svp_complete(&p, &cfg, None).unwrap();
        assert!((&x - &d).frobenius_norm() < 1e-10);
    }

    #[test]
    fn rank_out_of_range_is_rejected() {
        let p = McProblem::new(&DenseMatrix::identity(3), ObservationMask::full(3, 3)).unwrap();
        assert!(svp_complete(&p, &SolverConfig::default().with_rank(4), None).is_err());
        assert!(svp_complete(&p, &SolverConfig::default(), None).is_err());
    }
}
