//! End-to-end solver behaviour on generated instances.

mod common;

use common::{gaussian, rng};
use lowrank::bench::{BenchInstance, BenchProblem, SolverKind, SyntheticSpec};
use lowrank::linalg::{project_omega, svt};
use lowrank::mc::{als_complete, ialm_mc, mmmf_complete, soft_impute, McProblem};
use lowrank::ppca::{ppca_fit, ppca_log_likelihood, PpcaModel};
use lowrank::{DenseMatrix, SolverConfig, SolverTrace};
use nalgebra::{DMatrix, DVector};
use rand::Rng;

fn completion_instance(m: usize, r: usize, os: f64, seed: u64) -> BenchInstance {
    BenchInstance::generate(&SyntheticSpec::completion(m, r, os).with_seed(seed), 0).unwrap()
}

fn robust_instance(m: usize, r: usize, rho: f64, seed: u64) -> BenchInstance {
    BenchInstance::generate(&SyntheticSpec::robust(m, r, rho).with_seed(seed), 0).unwrap()
}

fn mc_problem(inst: &BenchInstance) -> &McProblem {
    match &inst.problem {
        BenchProblem::Completion(p) => p,
        BenchProblem::Robust(_) => unreachable!("completion instance"),
    }
}

fn assert_well_formed(trace: &SolverTrace, what: &str) {
    assert!(trace.len() >= 2, "{what}: trace too short");
    for (i, r) in trace.records.iter().enumerate() {
        assert_eq!(r.iteration, i, "{what}: iteration numbering");
        assert!(r.objective.is_finite(), "{what}: objective at {i}");
    }
    for w in trace.records.windows(2) {
        assert!(
            w[1].elapsed_seconds >= w[0].elapsed_seconds,
            "{what}: time went backwards"
        );
    }
}

#[test]
fn every_completion_solver_recovers_a_small_instance() {
    let inst = completion_instance(100, 3, 4.0, 21);
    for kind in SolverKind::COMPLETION {
        let config = inst.complete_config(kind, &SolverConfig::default());
        let (x, trace) = kind.run(&inst.problem, &config, Some(&inst.truth)).unwrap();
        assert_well_formed(&trace, kind.id());
        let rd = common::rel(&x, &inst.truth);
        assert_eq!(trace.final_relative_distance(), Some(rd), "{kind}");
        assert!(rd <= 1e-2, "{kind}: relative distance {rd}");
    }
}

#[test]
fn every_rpca_solver_recovers_a_small_instance() {
    let inst = robust_instance(80, 2, 0.05, 22);
    for kind in SolverKind::ROBUST {
        let config = inst.complete_config(kind, &SolverConfig::default());
        let (x, trace) = kind.run(&inst.problem, &config, Some(&inst.truth)).unwrap();
        assert_well_formed(&trace, kind.id());
        let rd = common::rel(&x, &inst.truth);
        // SPCP trades exact recovery for noise tolerance, so it stops short.
        let bound = if kind == SolverKind::Spcp { 5e-2 } else { 1e-4 };
        assert!(rd <= bound, "{kind}: relative distance {rd}");
    }
}

#[test]
fn solvers_are_deterministic() {
    let mc = completion_instance(50, 2, 4.0, 23);
    let rp = robust_instance(40, 2, 0.05, 23);
    for kind in SolverKind::COMPLETION.into_iter().chain(SolverKind::ROBUST) {
        let inst = if kind.is_completion() { &mc } else { &rp };
        let config = inst.complete_config(kind, &SolverConfig::default().with_max_iters(100));
        let (x1, t1) = kind.run(&inst.problem, &config, Some(&inst.truth)).unwrap();
        let (x2, t2) = kind.run(&inst.problem, &config, Some(&inst.truth)).unwrap();
        assert_eq!(x1, x2, "{kind}");
        assert!(t1.same_modulo_time(&t2), "{kind}");
    }
}

#[test]
fn factor_objectives_never_increase() {
    let inst = completion_instance(60, 3, 3.0, 24);
    let p = mc_problem(&inst);
    let cfg = SolverConfig::default()
        .with_rank(3)
        .with_lambda(0.1)
        .with_max_iters(200);
    let (_, als) = als_complete(p, &cfg, None).unwrap();
    let (_, mmmf) = mmmf_complete(p, &cfg, None).unwrap();
    for (name, t) in [("als", als), ("mmmf", mmmf)] {
        for w in t.objectives().windows(2) {
            assert!(
                w[1] <= w[0] * (1.0 + 1e-10),
                "{name}: {} after {}",
                w[1],
                w[0]
            );
        }
    }
}

#[test]
fn soft_impute_stops_at_a_fixed_point() {
    let inst = completion_instance(60, 2, 3.0, 25);
    let p = mc_problem(&inst);
    let (lambda, tol) = (0.5, 1e-7);
    let cfg = SolverConfig::default()
        .with_lambda(lambda)
        .with_tol(tol)
        .with_continuation(false)
        .with_max_iters(20_000);
    let (x, _) = soft_impute(p, &cfg, None).unwrap();
    let next = svt(&p.fill(&x), lambda).unwrap();
    let change = common::rel(&next, &x);
    assert!(
        change <= 10.0 * tol,
        "one more step moves the iterate by {change}"
    );
}

#[test]
fn ialm_matches_the_observations() {
    let inst = completion_instance(60, 2, 3.0, 26);
    let p = mc_problem(&inst);
    let tol = 1e-7;
    let max_iters = 5000;
    let (x, trace) = ialm_mc(
        p,
        &SolverConfig::default()
            .with_tol(tol)
            .with_max_iters(max_iters),
        None,
    )
    .unwrap();
    assert!(trace.len() - 1 < max_iters, "ialm did not converge");
    let gap = &project_omega(&x, p.mask()).unwrap() - p.observed_values();
    let rel = gap.frobenius_norm() / p.observed_values().frobenius_norm();
    assert!(rel <= 10.0 * tol, "observed residual {rel}");
}

/// `Σᵢ log 𝒩(dᵢ | μ, ÂÂᵀ + σ²I)` through a dense Cholesky factor.
fn log_likelihood_oracle(model: &PpcaModel, data: &DenseMatrix) -> f64 {
    let a = model.a_hat.as_nalgebra();
    let m = a.nrows();
    let cov = a * a.transpose() + DMatrix::identity(m, m) * model.noise_variance;
    let chol = cov.cholesky().unwrap();
    let log_det = 2.0 * chol.l().diagonal().iter().map(|v| v.ln()).sum::<f64>();
    let mean = DVector::from_vec(model.mean.clone());
    (0..data.cols())
        .map(|j| {
            let x = data.as_nalgebra().column(j) - &mean;
            let quad = x.dot(&chol.solve(&x));
            -0.5 * (m as f64 * (2.0 * std::f64::consts::PI).ln() + log_det + quad)
        })
        .sum()
}

#[test]
fn ppca_likelihood_matches_dense_oracle_and_is_locally_maximal() {
    let (m, r, n) = (8, 2, 400);
    let mut g = rng(27);
    let data = &gaussian(m, r, &mut g)
        .matmul(&gaussian(r, n, &mut g))
        .unwrap()
        + &gaussian(m, n, &mut g).scale(0.3);
    let model = ppca_fit(&data, r).unwrap();
    let ll = ppca_log_likelihood(&model, &data).unwrap();
    let oracle = log_likelihood_oracle(&model, &data);
    assert!(
        (ll - oracle).abs() <= 1e-10 * oracle.abs(),
        "{ll} vs {oracle}"
    );

    for _ in 0..200 {
        let eps = 10f64.powf(g.random_range(-5.0..-2.0));
        let a = &model.a_hat + &gaussian(m, r, &mut g).scale(eps);
        let var = model.noise_variance * (1.0 + eps * g.random_range(-1.0..1.0));
        let mean: Vec<f64> = model
            .mean
            .iter()
            .map(|v| v + eps * g.random_range(-1.0..1.0))
            .collect();
        let other = PpcaModel::new(a, 1.0 / var, mean).unwrap();
        assert!(ppca_log_likelihood(&other, &data).unwrap() <= ll + 1e-9 * ll.abs());
    }
}
