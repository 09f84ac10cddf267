use super::{BenchInstance, SolverSpec, SyntheticSpec};
use crate::error::Result;
use crate::solver::SolverTrace;

/// Logarithmic time grid on which per-instance curves are averaged.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeGrid {
    pub points: usize,
    /// Explicit `[t_min, t_max]` in seconds; derived from the traces when unset.
    pub range: Option<(f64, f64)>,
}

impl Default for TimeGrid {
    fn default() -> Self {
        Self {
            points: 64,
            range: None,
        }
    }
}

impl TimeGrid {
    /// `points` log-spaced times from `lo` to `hi` inclusive.
    pub fn times(&self, lo: f64, hi: f64) -> Vec<f64> {
        let n = self.points.max(2);
        let (a, b) = (lo.log10(), hi.max(lo).log10());
        (0..n)
            .map(|i| 10f64.powf(a + (b - a) * i as f64 / (n - 1) as f64))
            .collect()
    }
}

/// The outcome of one solver on one instance.
#[derive(Clone, Debug)]
pub struct Cell {
    pub solver: String,
    pub instance: usize,
    /// The trace, or the error message of a failed run.
    pub outcome: std::result::Result<SolverTrace, String>,
}

/// Relative distance averaged over the successful instances of one solver.
#[derive(Clone, Debug, PartialEq)]
pub struct Curve {
    pub solver: String,
    pub times: Vec<f64>,
    pub mean_relative_distance: Vec<f64>,
    pub instances: usize,
}

#[derive(Clone, Debug)]
pub struct BenchReport {
    pub spec: SyntheticSpec,
    /// Sorted by (solver, instance).
    pub cells: Vec<Cell>,
    pub curves: Vec<Curve>,
    /// `|Ω| / ((2m − r)·r)` per instance for completion specs.
    pub realized_oversampling: Vec<f64>,
}

impl BenchReport {
    pub fn traces_for<'a>(&'a self, solver: &'a str) -> impl Iterator<Item = &'a SolverTrace> + 'a {
        self.cells
            .iter()
            .filter(move |c| c.solver == solver)
            .filter_map(|c| c.outcome.as_ref().ok())
    }

    pub fn failed_cells(&self) -> usize {
        self.cells.iter().filter(|c| c.outcome.is_err()).count()
    }
}

/// Last-value-carried-forward sample of a trace at time `t`; before the
/// first record the initial value is used.
fn sample_at(trace: &SolverTrace, t: f64) -> Option<f64> {
    let first = trace.records.first()?.relative_distance?;
    let idx = trace.records.partition_point(|r| r.elapsed_seconds <= t);
    if idx == 0 {
        Some(first)
    } else {
        trace.records[idx - 1].relative_distance
    }
}

/// Runs every solver on `spec.repeats` fresh instances.
///
/// Each solver receives the instance's true rank (and, for GoDec, the
/// planted outlier count) unless its configuration sets them. A failing
/// run becomes a failed cell; the report is produced regardless.
pub fn run_benchmark(
    spec: &SyntheticSpec,
    solvers: &[SolverSpec],
    grid: &TimeGrid,
) -> Result<BenchReport> {
    spec.validate()?;
    let mut cells = Vec::new();
    let mut realized_oversampling = Vec::new();
    for index in 0..spec.repeats {
        let instance = BenchInstance::generate(spec, index)?;
        realized_oversampling.extend(instance.realized_oversampling());
        for s in solvers {
            let config = instance.complete_config(s.kind, &s.config);
            let outcome = s
                .kind
                .run(&instance.problem, &config, Some(&instance.truth))
                .map(|(_, trace)| trace)
                .map_err(|e| e.to_string());
            cells.push(Cell {
                solver: s.kind.id().to_string(),
                instance: index,
                outcome,
            });
        }
    }
    cells.sort_by(|a, b| a.solver.cmp(&b.solver).then(a.instance.cmp(&b.instance)));

    let traces = || cells.iter().filter_map(|c| c.outcome.as_ref().ok());
    let positive_times = || {
        traces()
            .flat_map(|t| t.records.iter().map(|r| r.elapsed_seconds))
            .filter(|&t| t > 0.0)
    };
    let (lo, hi) = grid.range.unwrap_or_else(|| {
        let lo = positive_times().fold(f64::INFINITY, f64::min);
        let hi = positive_times().fold(0.0, f64::max);
        if lo.is_finite() {
            (lo, hi)
        } else {
            (1e-6, 1e-6)
        }
    });
    let times = grid.times(lo, hi);

    let mut solver_ids: Vec<&str> = cells.iter().map(|c| c.solver.as_str()).collect();
    solver_ids.dedup();
    let mut curves = Vec::new();
    for id in solver_ids {
        let runs: Vec<&SolverTrace> = cells
            .iter()
            .filter(|c| c.solver == id)
            .filter_map(|c| c.outcome.as_ref().ok())
            .collect();
        if runs.is_empty() {
            continue;
        }
        let mean = times
            .iter()
            .map(|&t| {
                let vals: Vec<f64> = runs.iter().filter_map(|r| sample_at(r, t)).collect();
                vals.iter().sum::<f64>() / vals.len().max(1) as f64
            })
            .collect();
        curves.push(Curve {
            solver: id.to_string(),
            times: times.clone(),
            mean_relative_distance: mean,
            instances: runs.len(),
        });
    }
    Ok(BenchReport {
        spec: spec.clone(),
        cells,
        curves,
        realized_oversampling,
    })
}
