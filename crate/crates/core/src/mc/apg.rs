use super::soft_impute::rung_tol;
use super::{initial_guess, lambda_ladder, McProblem, DEFAULT_LAMBDA_FRACTION};
use crate::error::{invalid, Result};
use crate::linalg::{nuclear_norm, svt_warm, DenseMatrix, WarmStart};
use crate::solver::{relative_change, SolverConfig, SolverTrace, TraceRecorder};

/// `t_{k+1} = (1 + √(1 + 4 t_k²)) / 2`.
pub fn next_momentum_weight(t: f64) -> f64 {
    (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0
}

/// Iterate pair and momentum weights of accelerated proximal gradient.
#[derive(Clone, Debug)]
pub struct ApgState {
    pub x_current: DenseMatrix,
    pub x_previous: DenseMatrix,
    pub t_current: f64,
    pub t_previous: f64,
}

impl ApgState {
    /// `X⁰ = X⁻¹ = x0`, `t⁰ = t⁻¹ = 1`.
    pub fn new(x0: DenseMatrix) -> Self {
        Self {
            x_previous: x0.clone(),
            x_current: x0,
            t_current: 1.0,
            t_previous: 1.0,
        }
    }

    /// `(t^{k−1} − 1) / t^k`.
    pub fn momentum(&self) -> f64 {
        (self.t_previous - 1.0) / self.t_current
    }

    /// `Yᵏ = Xᵏ + momentum·(Xᵏ − Xᵏ⁻¹)`.
    pub fn extrapolate(&self) -> DenseMatrix {
        let beta = self.momentum();
        if beta == 0.0 {
            return self.x_current.clone();
        }
        self.x_current
            .zip_map(&self.x_previous, |c, p| c + beta * (c - p))
    }

    pub fn advance(&mut self, x_next: DenseMatrix) {
        self.x_previous = std::mem::replace(&mut self.x_current, x_next);
        self.t_previous = self.t_current;
        self.t_current = next_momentum_weight(self.t_current);
    }

    /// Drops the momentum: `t = 1` and `X_previous = X_current`.
    pub fn restart(&mut self) {
        self.x_previous = self.x_current.clone();
        self.t_current = 1.0;
        self.t_previous = 1.0;
    }
}

/// Accelerated proximal gradient for `½‖𝒫_Ω(D − X)‖_F² + λ‖X‖_*`.
///
/// `∇f(X) = 𝒫_Ω(X − D)` is 1-Lipschitz, so the step is 1 and the prox step
/// is `D_λ(𝒫_Ω(D) + 𝒫_Ω⊥(Y))`. Function-value restart: when a step would
/// raise the objective, the momentum is dropped and a plain proximal step
/// from `Xᵏ` is taken instead, so recorded objectives never increase within
/// a λ rung.
pub fn apg_mcn(
    problem: &McProblem,
    config: &SolverConfig,
    truth: Option<&DenseMatrix>,
) -> Result<(DenseMatrix, SolverTrace)> {
    config.validate()?;
    problem.check_truth(truth)?;
    let sigma1 = problem.top_singular_value()?;
    let target = config.lambda.unwrap_or(DEFAULT_LAMBDA_FRACTION * sigma1);
    if !(target > 0.0) {
        return invalid(format!("apg requires lambda > 0, got {target}"));
    }
    let mut rec = TraceRecorder::start(truth, problem.shape())?;
    let ladder = lambda_ladder(sigma1, target, config.continuation);

    let x0 = initial_guess(problem, config.rank)?;
    let mut nuclear = nuclear_norm(&x0)?;
    let mut state = ApgState::new(x0);
    rec.record(
        0,
        problem.data_fit(&state.x_current) + ladder[0] * nuclear,
        &state.x_current,
    )?;

    let mut warm = WarmStart::new();
    let mut iter = 0;
    'ladder: for (rung, &lambda) in ladder.iter().enumerate() {
        let last_rung = rung + 1 == ladder.len();
        let stop_tol = rung_tol(lambda, sigma1, config.tol, last_rung);
        state.restart();
        let mut objective = problem.data_fit(&state.x_current) + lambda * nuclear;
        loop {
            if iter >= config.max_iters {
                break 'ladder;
            }
            iter += 1;
            let y = state.extrapolate();
            let mut step = svt_warm(&problem.fill(&y), lambda, &mut warm)?;
            let mut next_obj = problem.data_fit(&step.matrix) + lambda * step.nuclear_norm();
            if next_obj > objective && state.momentum() != 0.0 {
                state.restart();
                step = svt_warm(&problem.fill(&state.x_current), lambda, &mut warm)?;
                next_obj = problem.data_fit(&step.matrix) + lambda * step.nuclear_norm();
            }
            let change = relative_change(&step.matrix, &state.x_current);
            nuclear = step.nuclear_norm();
            objective = next_obj;
            state.advance(step.matrix);
            rec.record(iter, objective, &state.x_current)?;
            if change < stop_tol {
                break;
            }
        }
    }
    Ok((state.x_current, rec.finish()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ObservationMask;

    #[test]
    fn first_momentum_is_zero_and_t_follows_recurrence() {
        let s = ApgState::new(DenseMatrix::identity(2));
        assert_eq!(s.momentum(), 0.0);
        assert_eq!(s.extrapolate(), DenseMatrix::identity(2));
        let t1 = next_momentum_weight(1.0);
        assert!((t1 - 1.618_034).abs() < 1e-6);
        assert!((t1 - (1.0 + 5f64.sqrt()) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn advance_and_restart() {
        let mut s = ApgState::new(DenseMatrix::zeros(1, 1));
        s.advance(DenseMatrix::identity(1));
        assert_eq!(s.t_previous, 1.0);
        assert!(s.t_current > 1.6);
        s.advance(DenseMatrix::identity(1).scale(2.0));
        assert!(s.momentum() > 0.0);
        // Y = 2 + β(2 − 1)
        assert!((s.extrapolate().get(0, 0) - (2.0 + s.momentum())).abs() < 1e-15);
        s.restart();
        assert_eq!(s.t_current, 1.0);
        assert_eq!(s.x_previous, s.x_current);
    }

    #[test]
    fn first_step_equals_plain_proximal_gradient() {
        let d = DenseMatrix::from_fn(5, 4, |i, j| (i as f64 - j as f64).sin());
        let mask =
            ObservationMask::from_indices(5, 4, [(0, 0), (1, 2), (3, 1), (4, 3), (2, 2)]).unwrap();
        let p = McProblem::new(&d, mask).unwrap();
        let cfg = SolverConfig::default()
            .with_lambda(0.1)
            .with_continuation(false)
            .with_max_iters(1);
        let (x, _) = apg_mcn(&p, &cfg, None).unwrap();
        let pg = crate::linalg::svt(&p.fill(&DenseMatrix::zeros(5, 4)), 0.1).unwrap();
        assert_eq!(x, pg);
    }

    #[test]
    fn non_positive_lambda_is_rejected() {
        let p = McProblem::new(&DenseMatrix::identity(3), ObservationMask::full(3, 3)).unwrap();
        let cfg = SolverConfig::default().with_lambda(0.0);
        assert!(apg_mcn(&p, &cfg, None).is_err());
    }
}
