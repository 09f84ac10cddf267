//! Configuration and iteration traces shared by all iterative solvers.

use std::time::Instant;

use crate::error::{invalid, Result};
use crate::linalg::{relative_distance, DenseMatrix};

/// Tuning knobs shared by every solver. Fields a solver does not use are
/// ignored; `None` selects that solver's data-driven default.
#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    /// Regularisation weight (nuclear-norm weight for MC, ℓ1 weight for RPCA).
    pub lambda: Option<f64>,
    /// Target rank for factorization and projection methods.
    pub rank: Option<usize>,
    /// Penalty parameter (ALM, SPCP) or step size (SVP).
    pub mu: Option<f64>,
    pub mu_growth: f64,
    pub mu_max: f64,
    pub max_iters: usize,
    /// Relative-change stopping threshold.
    pub tol: f64,
    /// Outlier budget `k` for GoDec.
    pub cardinality: Option<usize>,
    /// Gaussian noise level, when known.
    pub noise_level: Option<f64>,
    /// Warm-started λ ladder for SOFT-IMPUTE and APG.
    pub continuation: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            lambda: None,
            rank: None,
            mu: None,
            mu_growth: 1.5,
            mu_max: 1e7,
            max_iters: 500,
            tol: 1e-7,
            cardinality: None,
            noise_level: None,
            continuation: true,
        }
    }
}

impl SolverConfig {
    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = Some(lambda);
        self
    }

    pub fn with_rank(mut self, rank: usize) -> Self {
        self.rank = Some(rank);
        self
    }

    pub fn with_mu(mut self, mu: f64) -> Self {
        self.mu = Some(mu);
        self
    }

    pub fn with_max_iters(mut self, max_iters: usize) -> Self {
        self.max_iters = max_iters;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_cardinality(mut self, k: usize) -> Self {
        self.cardinality = Some(k);
        self
    }

    pub fn with_noise_level(mut self, sigma: f64) -> Self {
        self.noise_level = Some(sigma);
        self
    }

    pub fn with_continuation(mut self, on: bool) -> Self {
        self.continuation = on;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) || !self.tol.is_finite() {
            return invalid(format!("tol must be positive, got {}", self.tol));
        }
        if !(self.mu_growth >= 1.0) || !self.mu_growth.is_finite() {
            return invalid(format!("mu_growth must be >= 1, got {}", self.mu_growth));
        }
        if !(self.mu_max > 0.0) {
            return invalid(format!("mu_max must be positive, got {}", self.mu_max));
        }
        if self.max_iters == 0 {
            return invalid("max_iters must be positive");
        }
        if let Some(l) = self.lambda {
            if !(l >= 0.0) || !l.is_finite() {
                return invalid(format!("lambda must be finite and >= 0, got {l}"));
            }
        }
        if let Some(mu) = self.mu {
            if !(mu > 0.0) || !mu.is_finite() {
                return invalid(format!("mu must be finite and positive, got {mu}"));
            }
        }
        if self.rank == Some(0) {
            return invalid("rank must be positive");
        }
        if let Some(s) = self.noise_level {
            if !(s >= 0.0) || !s.is_finite() {
                return invalid(format!("noise level must be >= 0, got {s}"));
            }
        }
        Ok(())
    }

    pub(crate) fn require_rank(&self, rows: usize, cols: usize) -> Result<usize> {
        let k = rows.min(cols);
        match self.rank {
            Some(r) if r >= 1 && r <= k => Ok(r),
            Some(r) => invalid(format!("rank {r} outside 1..={k}")),
            None => invalid("this solver requires a rank"),
        }
    }
}

/// One iteration snapshot.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceRecord {
    pub iteration: usize,
    pub elapsed_seconds: f64,
    pub objective: f64,
    /// Present only when ground truth was supplied.
    pub relative_distance: Option<f64>,
}

/// Per-iteration history of a solver run. Iteration 0 is the initial guess.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SolverTrace {
    pub records: Vec<TraceRecord>,
}

impl SolverTrace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&TraceRecord> {
        self.records.last()
    }

    pub fn objectives(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.objective).collect()
    }

    pub fn final_relative_distance(&self) -> Option<f64> {
        self.last().and_then(|r| r.relative_distance)
    }

    pub fn total_seconds(&self) -> f64 {
        self.last().map_or(0.0, |r| r.elapsed_seconds)
    }

    /// Equality ignoring wall-clock timestamps.
    pub fn same_modulo_time(&self, other: &SolverTrace) -> bool {
        self.records.len() == other.records.len()
            && self.records.iter().zip(&other.records).all(|(a, b)| {
                a.iteration == b.iteration
                    && a.objective.to_bits() == b.objective.to_bits()
                    && a.relative_distance.map(f64::to_bits)
                        == b.relative_distance.map(f64::to_bits)
            })
    }
}

pub(crate) struct TraceRecorder<'a> {
    start: Instant,
    truth: Option<&'a DenseMatrix>,
    trace: SolverTrace,
}

impl<'a> TraceRecorder<'a> {
    /// Starts the clock. `truth` must match `shape` and be nonzero.
    pub fn start(truth: Option<&'a DenseMatrix>, shape: (usize, usize)) -> Result<Self> {
        if let Some(t) = truth {
            if t.shape() != shape {
                return Err(crate::LowRankError::DimensionMismatch {
                    expected: shape,
                    found: t.shape(),
                });
            }
            if t.frobenius_norm() == 0.0 {
                return invalid("ground truth must be nonzero");
            }
        }
        Ok(Self {
            start: Instant::now(),
            truth,
            trace: SolverTrace::default(),
        })
    }

    pub fn record(
        &mut self,
        iteration: usize,
        objective: f64,
        estimate: &DenseMatrix,
    ) -> Result<()> {
        let relative_distance = match self.truth {
            Some(t) => Some(relative_distance(estimate, t)?),
            None => None,
        };
        self.trace.records.push(TraceRecord {
            iteration,
            elapsed_seconds: self.start.elapsed().as_secs_f64(),
            objective,
            relative_distance,
        });
        Ok(())
    }

    pub fn finish(self) -> SolverTrace {
        self.trace
    }
}

/// ‖new − old‖_F / max(1, ‖old‖_F).
pub(crate) fn relative_change(new: &DenseMatrix, old: &DenseMatrix) -> f64 {
    (new - old).frobenius_norm() / old.frobenius_norm().max(1.0)
}

/// Residual balancing for augmented-Lagrangian penalties.
///
/// μ grows by `growth` (capped at `max`) while the primal residual exceeds
/// ten times the dual residual, and shrinks by the same factor in the
/// opposite case.
#[derive(Clone, Debug)]
pub(crate) struct PenaltySchedule {
    pub mu: f64,
    growth: f64,
    max: f64,
}

impl PenaltySchedule {
    pub fn new(mu0: f64, config: &SolverConfig) -> Self {
        Self {
            mu: mu0.min(config.mu_max),
            growth: config.mu_growth,
            max: config.mu_max,
        }
    }

    pub fn update(&mut self, primal: f64, dual: f64) {
        if primal > BALANCE_RATIO * dual {
            self.mu = (self.mu * self.growth).min(self.max);
        } else if dual > BALANCE_RATIO * primal {
            self.mu /= self.growth;
        }
    }
}

const BALANCE_RATIO: f64 = 10.0;
