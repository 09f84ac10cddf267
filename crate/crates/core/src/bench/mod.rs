//! Synthetic benchmark harness: instance generation, solver dispatch,
//! trace collection and aggregation, CSV and SVG output, named presets.

mod emit;
mod presets;
mod report;
pub mod synth;

pub use emit::{emit_csv, emit_plot, parse_csv, CsvRow};
pub use presets::{preset, preset_config, scaled_rank, Preset, PRESET_NAMES};
pub use report::{run_benchmark, BenchReport, Cell, Curve, TimeGrid};

use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, LowRankError, Result};
use crate::linalg::{DenseMatrix, ObservationMask};
use crate::mc::{
    als_complete, apg_mcn, ialm_mc, mmmf_complete, soft_impute, svp_complete, McProblem,
};
use crate::rpca::{godec, pcp_ialm, spcp_bcd, RpcaProblem};
use crate::solver::{SolverConfig, SolverTrace};
use synth::{
    add_noise_from, gen_lowrank_from, gen_mask_from, gen_outliers_from, rng_stream, MaskMode,
    Purpose,
};

/// Problem family and its corruption rate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Family {
    /// Matrix completion with the given over-sampling ratio.
    Completion { oversampling: f64 },
    /// Robust PCA with the given outlier fraction.
    Robust { outlier_fraction: f64 },
}

/// Parameters of a family of `m×m` synthetic instances.
#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticSpec {
    pub m: usize,
    pub r: usize,
    pub family: Family,
    pub sigma: f64,
    pub seed: u64,
    pub repeats: usize,
}

impl SyntheticSpec {
    pub fn completion(m: usize, r: usize, oversampling: f64) -> Self {
        Self {
            m,
            r,
            family: Family::Completion { oversampling },
            sigma: 0.0,
            seed: 0,
            repeats: 5,
        }
    }

    pub fn robust(m: usize, r: usize, outlier_fraction: f64) -> Self {
        Self {
            m,
            r,
            family: Family::Robust { outlier_fraction },
            sigma: 0.0,
            seed: 0,
            repeats: 5,
        }
    }

    pub fn with_sigma(mut self, sigma: f64) -> Self {
        self.sigma = sigma;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_repeats(mut self, repeats: usize) -> Self {
        self.repeats = repeats;
        self
    }

    /// `r ≤ m/4`, `OS ≥ 1` with `p ≤ 1`, `0 ≤ ρ ≤ 1`, `σ ≥ 0`, `repeats ≥ 1`.
    pub fn validate(&self) -> Result<()> {
        if self.r == 0 || 4 * self.r > self.m {
            return invalid(format!(
                "rank {} must satisfy 1 <= r <= m/4 (m = {})",
                self.r, self.m
            ));
        }
        if self.repeats == 0 {
            return invalid("repeats must be positive");
        }
        if !(self.sigma >= 0.0) || !self.sigma.is_finite() {
            return invalid(format!(
                "noise level must be finite and >= 0, got {}",
                self.sigma
            ));
        }
        match self.family {
            Family::Completion { oversampling } => {
                if !(oversampling >= 1.0) {
                    return invalid(format!(
                        "over-sampling ratio must be >= 1, got {oversampling}"
                    ));
                }
                self.sampling_probability()?;
            }
            Family::Robust { outlier_fraction } => {
                if !(0.0..=1.0).contains(&outlier_fraction) {
                    return invalid(format!(
                        "outlier fraction {outlier_fraction} outside [0, 1]"
                    ));
                }
            }
        }
        Ok(())
    }

    /// Observation probability of a completion instance, outlier
    /// probability of a robust one.
    pub fn sampling_probability(&self) -> Result<f64> {
        match self.family {
            Family::Completion { oversampling } => {
                synth::sampling_probability(self.m, oversampling, self.r, MaskMode::Oversampling)
            }
            Family::Robust { outlier_fraction } => Ok(outlier_fraction),
        }
    }

    pub fn is_completion(&self) -> bool {
        matches!(self.family, Family::Completion { .. })
    }
}

/// The data handed to a solver.
#[derive(Clone, Debug)]
pub enum BenchProblem {
    Completion(McProblem),
    Robust(RpcaProblem),
}

/// One generated instance with its ground truth.
#[derive(Clone, Debug)]
pub struct BenchInstance {
    /// `X*`.
    pub truth: DenseMatrix,
    /// Planted `E*` for robust instances.
    pub outliers: Option<DenseMatrix>,
    pub problem: BenchProblem,
    pub spec: SyntheticSpec,
    pub instance_index: usize,
}

impl BenchInstance {
    /// Instance `index` of `spec`. Each quantity draws from its own stream.
    pub fn generate(spec: &SyntheticSpec, index: usize) -> Result<Self> {
        spec.validate()?;
        let (m, seed, idx) = (spec.m, spec.seed, index as u64);
        let truth = gen_lowrank_from(m, spec.r, &mut rng_stream(seed, idx, Purpose::LowRank))?;
        let noise = |x: &DenseMatrix| {
            add_noise_from(x, spec.sigma, &mut rng_stream(seed, idx, Purpose::Noise))
        };
        let (problem, outliers) = match spec.family {
            Family::Completion { oversampling } => {
                let mask = gen_mask_from(
                    m,
                    oversampling,
                    spec.r,
                    MaskMode::Oversampling,
                    &mut rng_stream(seed, idx, Purpose::Mask),
                )?;
                let data = noise(&truth)?;
                (BenchProblem::Completion(McProblem::new(&data, mask)?), None)
            }
            Family::Robust { outlier_fraction } => {
                let e = gen_outliers_from(
                    m,
                    outlier_fraction,
                    &mut rng_stream(seed, idx, Purpose::Outliers),
                )?;
                let data = noise(&(&truth + &e))?;
                (BenchProblem::Robust(RpcaProblem::new(data)?), Some(e))
            }
        };
        Ok(Self {
            truth,
            outliers,
            problem,
            spec: spec.clone(),
            instance_index: index,
        })
    }

    pub fn mask(&self) -> Option<&ObservationMask> {
        match &self.problem {
            BenchProblem::Completion(p) => Some(p.mask()),
            BenchProblem::Robust(_) => None,
        }
    }

    /// `|Ω| / ((2m − r)·r)` of a completion instance.
    pub fn realized_oversampling(&self) -> Option<f64> {
        self.mask().map(|m| m.oversampling_ratio(self.spec.r))
    }

    /// Fills unset fields of `config` from the instance: the true rank, the
    /// planted outlier count, the noise level, and for noisy completion a
    /// regularisation weight `2σ√(p·m)` matched to the noise spectrum.
    pub fn complete_config(&self, kind: SolverKind, config: &SolverConfig) -> SolverConfig {
        let mut c = config.clone();
        c.rank.get_or_insert(self.spec.r);
        if c.cardinality.is_none() {
            c.cardinality = self.outliers.as_ref().map(|e| e.count_nonzero(0.0));
        }
        if c.noise_level.is_none() && self.spec.sigma > 0.0 {
            c.noise_level = Some(self.spec.sigma);
        }
        let regularised = matches!(
            kind,
            SolverKind::SoftImpute | SolverKind::Apg | SolverKind::Mmmf
        );
        if regularised && c.lambda.is_none() && self.spec.sigma > 0.0 {
            if let Some(mask) = self.mask() {
                let m = self.spec.m as f64;
                let p = mask.len() as f64 / (m * m);
                c.lambda = Some(2.0 * self.spec.sigma * (p * m).sqrt());
            }
        }
        c
    }
}

/// Solver identifiers accepted by the harness and the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SolverKind {
    SoftImpute,
    Apg,
    IalmMc,
    Als,
    Mmmf,
    Svp,
    Pcp,
    Spcp,
    Godec,
}

impl SolverKind {
    pub const COMPLETION: [SolverKind; 6] = [
        SolverKind::SoftImpute,
        SolverKind::Apg,
        SolverKind::IalmMc,
        SolverKind::Als,
        SolverKind::Mmmf,
        SolverKind::Svp,
    ];
    pub const ROBUST: [SolverKind; 3] = [SolverKind::Pcp, SolverKind::Spcp, SolverKind::Godec];

    pub fn id(self) -> &'static str {
        match self {
            SolverKind::SoftImpute => "soft-impute",
            SolverKind::Apg => "apg",
            SolverKind::IalmMc => "ialm-mc",
            SolverKind::Als => "als",
            SolverKind::Mmmf => "mmmf",
            SolverKind::Svp => "svp",
            SolverKind::Pcp => "pcp",
            SolverKind::Spcp => "spcp",
            SolverKind::Godec => "godec",
        }
    }

    pub fn is_completion(self) -> bool {
        Self::COMPLETION.contains(&self)
    }

    /// Runs the solver and returns the low-rank estimate and its trace.
    pub fn run(
        self,
        problem: &BenchProblem,
        config: &SolverConfig,
        truth: Option<&DenseMatrix>,
    ) -> Result<(DenseMatrix, SolverTrace)> {
        match (self, problem) {
            (SolverKind::SoftImpute, BenchProblem::Completion(p)) => soft_impute(p, config, truth),
            (SolverKind::Apg, BenchProblem::Completion(p)) => apg_mcn(p, config, truth),
            (SolverKind::IalmMc, BenchProblem::Completion(p)) => ialm_mc(p, config, truth),
            (SolverKind::Als, BenchProblem::Completion(p)) => {
                als_complete(p, config, truth).map(|(f, t)| (f.product(), t))
            }
            (SolverKind::Mmmf, BenchProblem::Completion(p)) => {
                mmmf_complete(p, config, truth).map(|(f, t)| (f.product(), t))
            }
            (SolverKind::Svp, BenchProblem::Completion(p)) => svp_complete(p, config, truth),
            (SolverKind::Pcp, BenchProblem::Robust(p)) => {
                pcp_ialm(p, config, truth).map(|s| (s.low_rank, s.trace))
            }
            (SolverKind::Spcp, BenchProblem::Robust(p)) => {
                spcp_bcd(p, config, truth).map(|s| (s.low_rank, s.trace))
            }
            (SolverKind::Godec, BenchProblem::Robust(p)) => {
                godec(p, config, truth).map(|s| (s.low_rank, s.trace))
            }
            (kind, _) => invalid(format!(
                "solver {} does not apply to this problem family",
                kind.id()
            )),
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for SolverKind {
    type Err = LowRankError;

    fn from_str(s: &str) -> Result<Self> {
        Self::COMPLETION
            .iter()
            .chain(Self::ROBUST.iter())
            .copied()
            .find(|k| k.id() == s)
            .ok_or_else(|| LowRankError::InvalidArgument(format!("unknown solver `{s}`")))
    }
}

/// A solver together with the configuration it runs under.
#[derive(Clone, Debug, PartialEq)]
pub struct SolverSpec {
    pub kind: SolverKind,
    pub config: SolverConfig,
}

impl SolverSpec {
    pub fn new(kind: SolverKind, config: SolverConfig) -> Self {
        Self { kind, config }
    }
}
