use super::{initial_guess, McProblem, DEFAULT_LAMBDA_FRACTION};
use crate::error::Result;
use crate::linalg::{nuclear_norm, svt_warm, DenseMatrix, WarmStart};
use crate::solver::{relative_change, SolverConfig, SolverTrace, TraceRecorder};

/// First rung of the λ ladder, as a fraction of σ₁(𝒫_Ω(D)).
const LADDER_START: f64 = 0.5;
/// Geometric ratio between consecutive rungs.
const LADDER_RATIO: f64 = 0.5;
/// Intermediate rungs stop at `max(tol, RUNG_TOL_FLOOR, RUNG_TOL_SLOPE·λ/σ₁)`;
/// only the last rung runs to `tol`.
const RUNG_TOL_FLOOR: f64 = 1e-6;
const RUNG_TOL_SLOPE: f64 = 1e-2;

/// Stopping threshold for rung `lambda` of a ladder ending at `last`.
pub(super) fn rung_tol(lambda: f64, sigma1: f64, tol: f64, last: bool) -> f64 {
    if last {
        tol
    } else {
        tol.max(RUNG_TOL_FLOOR)
            .max(RUNG_TOL_SLOPE * lambda / sigma1)
    }
}

/// Geometric λ ladder from `LADDER_START·σ₁` down to `target` (inclusive).
/// A single rung when continuation is off or the target is already large.
pub fn lambda_ladder(sigma1: f64, target: f64, continuation: bool) -> Vec<f64> {
    let mut rungs = Vec::new();
    if continuation && target > 0.0 {
        let mut lam = LADDER_START * sigma1;
        while lam > target {
            rungs.push(lam);
            lam *= LADDER_RATIO;
        }
    }
    rungs.push(target);
    rungs
}

/// SOFT-IMPUTE: `X ← D_λ(𝒫_Ω(D) + 𝒫_Ω⊥(X))`.
///
/// Starts from the rank-`r` SVD approximation of 𝒫_Ω(D) when a rank is
/// configured. The recorded objective is
/// `½‖𝒫_Ω(D − X)‖_F² + λ‖X‖_*` at the λ in force for that iteration.
pub fn soft_impute(
    problem: &McProblem,
    config: &SolverConfig,
    truth: Option<&DenseMatrix>,
) -> Result<(DenseMatrix, SolverTrace)> {
    config.validate()?;
    problem.check_truth(truth)?;
    let mut rec = TraceRecorder::start(truth, problem.shape())?;

    let sigma1 = problem.top_singular_value()?;
    let target = config.lambda.unwrap_or(DEFAULT_LAMBDA_FRACTION * sigma1);
    let ladder = lambda_ladder(sigma1, target, config.continuation);

    let mut x = initial_guess(problem, config.rank)?;
    let x_nuclear = nuclear_norm(&x)?;
    rec.record(0, problem.data_fit(&x) + ladder[0] * x_nuclear, &x)?;

    let mut warm = WarmStart::new();
    let mut iter = 0;
    'ladder: for (rung, &lambda) in ladder.iter().enumerate() {
        let last_rung = rung + 1 == ladder.len();
        let stop_tol = rung_tol(lambda, sigma1, config.tol, last_rung);
        loop {
            if iter >= config.max_iters {
                break 'ladder;
            }
            iter += 1;
            let next = svt_warm(&problem.fill(&x), lambda, &mut warm)?;
            let change = relative_change(&next.matrix, &x);
            x = next.matrix;
            rec.record(
                iter,
                problem.data_fit(&x) + lambda * next.shrunk_singular_values.iter().sum::<f64>(),
                &x,
            )?;
            if change < stop_tol {
                break;
            }
        }
    }
    Ok((x, rec.finish()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{svt, ObservationMask};

    fn sample() -> DenseMatrix {
        DenseMatrix::from_fn(6, 5, |i, j| ((i * 3 + j * 5) % 7) as f64 - 3.0)
    }

    #[test]
    fn ladder_shape() {
        assert_eq!(lambda_ladder(10.0, 1.0, false), vec![1.0]);
        assert_eq!(lambda_ladder(10.0, 0.0, true), vec![0.0]);
        let l = lambda_ladder(8.0, 0.1, true);
        assert_eq!(l.first(), Some(&4.0));
        assert_eq!(l.last(), Some(&0.1));
        assert!(l.windows(2).all(|w| w[0] > w[1]));
    }

    #[test]
    fn fully_observed_first_step_is_svt_and_then_fixed() {
        let d = sample();
        let p = McProblem::new(&d, ObservationMask::full(6, 5)).unwrap();
        let cfg = SolverConfig::default()
            .with_lambda(2.0)
            .with_continuation(false)
            .with_max_iters(3);
        let (x, trace) = soft_impute(&p, &cfg, None).unwrap();
        let expect = svt(&d, 2.0).unwrap();
        assert!((&x - &expect).frobenius_norm() < 1e-10);
        // Converged after the second (no-op) step.
        assert_eq!(trace.len(), 3);
    }

    #[test]
    fn fully_observed_zero_lambda_returns_data() {
        let d = sample();
        let p = McProblem::new(&d, ObservationMask::full(6, 5)).unwrap();
        let cfg = SolverConfig::default().with_lambda(0.0);
        let (x, _) = soft_impute(&p, &cfg, Some(&d)).unwrap();
        assert!((&x - &d).frobenius_norm() < 1e-10);
    }

    #[test]
    fn invalid_config_is_rejected() {
        let p = McProblem::new(&sample(), ObservationMask::full(6, 5)).unwrap();
        assert!(soft_impute(&p, &SolverConfig::default().with_lambda(-1.0), None).is_err());
        assert!(soft_impute(&p, &SolverConfig::default().with_tol(0.0), None).is_err());
    }
}
