use super::{SolverKind, SolverSpec, SyntheticSpec};
use crate::error::{invalid, Result};
use crate::solver::SolverConfig;

/// Size at which the preset ranks are stated.
const REFERENCE_SIZE: usize = 1000;

pub const PRESET_NAMES: [&str; 8] = [
    "fig1a", "fig1b", "fig1c", "fig1d", "fig2a", "fig2b", "fig2c", "fig2d",
];

/// A named benchmark setting.
#[derive(Clone, Debug, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    pub spec: SyntheticSpec,
    pub solvers: Vec<SolverSpec>,
}

/// `max(1, round(r·m/1000))`: keeps `r/m`, and with it the sampling
/// probability at a fixed over-sampling ratio, independent of `m`.
pub fn scaled_rank(reference_rank: usize, m: usize) -> usize {
    ((reference_rank * m) as f64 / REFERENCE_SIZE as f64)
        .round()
        .max(1.0) as usize
}

/// Solver configuration used by the presets.
pub fn preset_config(kind: SolverKind) -> SolverConfig {
    let base = SolverConfig::default();
    match kind {
        SolverKind::SoftImpute | SolverKind::Apg => base.with_max_iters(2000).with_tol(1e-9),
        SolverKind::IalmMc => base.with_max_iters(1000).with_tol(1e-10),
        SolverKind::Als | SolverKind::Svp => base.with_max_iters(2000).with_tol(1e-10),
        SolverKind::Mmmf => base.with_max_iters(1000).with_tol(1e-9),
        SolverKind::Pcp => base.with_max_iters(1000).with_tol(1e-9),
        SolverKind::Spcp => base.with_max_iters(500).with_tol(1e-7),
        SolverKind::Godec => base.with_max_iters(1000).with_tol(1e-10),
    }
}

/// Preset `name` at size `m`, with ranks scaled by [`scaled_rank`].
pub fn preset(name: &str, m: usize, seed: u64, repeats: usize) -> Result<Preset> {
    // (name, rank at m = 1000, OS or ρ, σ)
    let table: [(&'static str, usize, f64, f64); 8] = [
        ("fig1a", 20, 6.0, 0.0),
        ("fig1b", 50, 6.0, 0.0),
        ("fig1c", 50, 6.0, 0.1),
        ("fig1d", 50, 3.0, 0.0),
        ("fig2a", 20, 0.1, 0.0),
        ("fig2b", 50, 0.1, 0.0),
        ("fig2c", 50, 0.1, 0.1),
        ("fig2d", 50, 0.3, 0.0),
    ];
    let Some(&(name, r_ref, rate, sigma)) = table.iter().find(|row| row.0 == name) else {
        return invalid(format!(
            "unknown preset `{name}`; expected one of {}",
            PRESET_NAMES.join(", ")
        ));
    };
    let r = scaled_rank(r_ref, m);
    let completion = name.starts_with("fig1");
    let spec = if completion {
        SyntheticSpec::completion(m, r, rate)
    } else {
        SyntheticSpec::robust(m, r, rate)
    }
    .with_sigma(sigma)
    .with_seed(seed)
    .with_repeats(repeats);
    spec.validate()?;
    let kinds: &[SolverKind] = if completion {
        &SolverKind::COMPLETION
    } else {
        &SolverKind::ROBUST
    };
    Ok(Preset {
        name,
        spec,
        solvers: kinds
            .iter()
            .map(|&k| SolverSpec::new(k, preset_config(k)))
            .collect(),
    })
}
