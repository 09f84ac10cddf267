use super::{RpcaProblem, RpcaSolution};
use crate::error::{invalid, Result};
use crate::linalg::{hard_threshold_entries, truncate_rank, DenseMatrix};
use crate::solver::{SolverConfig, TraceRecorder};

/// GoDec: `min ‖D − X − E‖_F² s.t. rank(X) ≤ r, ‖E‖₀ ≤ k`.
///
/// Alternates `X ← P_r(D − E)` (exact truncated SVD) and
/// `E ← H_k(D − X)` from `X⁰ = P_r(D)`, `E⁰ = 0`. Both steps are exact
/// projections, so the recorded objective `‖D − X − E‖_F²` is
/// nonincreasing. Stops when the relative objective change drops below
/// `tol` or the residual reaches `tol·‖D‖_F`.
pub fn godec(
    problem: &RpcaProblem,
    config: &SolverConfig,
    truth: Option<&DenseMatrix>,
) -> Result<RpcaSolution> {
    config.validate()?;
    problem.check_truth(truth)?;
    let d = problem.data();
    let (m, n) = d.shape();
    let r = config.require_rank(m, n)?;
    let k = match config.cardinality {
        Some(k) if k <= m * n => k,
        Some(k) => return invalid(format!("cardinality {k} exceeds {} entries", m * n)),
        None => return invalid("godec requires a cardinality"),
    };
    let mut rec = TraceRecorder::start(truth, (m, n))?;
    let floor = (config.tol * d.frobenius_norm()).powi(2);

    let mut x = truncate_rank(d, r)?;
    let mut e = DenseMatrix::zeros(m, n);
    let mut objective = (d - &x).frobenius_norm_squared();
    rec.record(0, objective, &x)?;

    for iter in 1..=config.max_iters {
        x = truncate_rank(&(d - &e), r)?;
        let residual = d - &x;
        e = hard_threshold_entries(&residual, k)?;
        let next = (&residual - &e).frobenius_norm_squared();
        rec.record(iter, next, &x)?;
        let change = (objective - next).abs() / objective.max(f64::MIN_POSITIVE);
        objective = next;
        if change < config.tol || next <= floor {
            break;
        }
    }
    Ok(RpcaSolution {
        low_rank: x,
        sparse: e,
        trace: rec.finish(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn data() -> DenseMatrix {
        DenseMatrix::from_fn(7, 6, |i, j| ((i * 5 + j * 3) % 11) as f64 - 5.0)
    }

    #[test]
    fn zero_budget_is_plain_truncation() {
        let d = data();
        let p = RpcaProblem::new(d.clone()).unwrap();
        let sol = godec(
            &p,
            &SolverConfig::default().with_rank(2).with_cardinality(0),
            None,
        )
        .unwrap();
        assert_eq!(sol.low_rank, truncate_rank(&d, 2).unwrap());
        assert_eq!(sol.sparse, DenseMatrix::zeros(7, 6));
        assert_eq!(sol.trace.last().unwrap().iteration, 1);
    }

    #[test]
    fn full_rank_reproduces_data() {
        let d = data();
        let p = RpcaProblem::new(d.clone()).unwrap();
        let sol = godec(
            &p,
            &SolverConfig::default().with_rank(6).with_cardinality(0),
            None,
        )
        .unwrap();
        assert!((&sol.low_rank - &d).frobenius_norm() < 1e-10);
    }

    #[test]
    fn out_of_range_parameters_are_rejected() {
        let p = RpcaProblem::new(data()).unwrap();
        assert!(godec(
            &p,
            &SolverConfig::default().with_rank(7).with_cardinality(0),
            None
        )
        .is_err());
        assert!(godec(
            &p,
            &SolverConfig::default().with_rank(2).with_cardinality(43),
            None
        )
        .is_err());
        assert!(godec(&p, &SolverConfig::default().with_rank(2), None).is_err());
    }

    #[test]
    fn objective_is_nonincreasing() {
        let p = RpcaProblem::new(data()).unwrap();
        let cfg = SolverConfig::default()
            .with_rank(2)
            .with_cardinality(5)
            .with_max_iters(100);
        let sol = godec(&p, &cfg, None).unwrap();
        for w in sol.trace.objectives().windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-12) + 1e-12);
        }
    }
}
