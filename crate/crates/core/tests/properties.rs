//! Property tests for the stated invariants.

mod common;

use common::{gaussian, low_rank, rng};
use lowrank::bench::{
    emit_csv, parse_csv, run_benchmark, SolverKind, SolverSpec, SyntheticSpec, TimeGrid,
};
use lowrank::imaging::{read_pgm, to_pixel, write_pgm, FrameStack, GrayImage};
use lowrank::linalg::{
    nuclear_norm, project_omega, svd, svt, svt_detailed, svt_warm, truncate_rank,
    truncate_rank_warm, WarmStart,
};
use lowrank::rpca::{godec, pcp_ialm, pcp_ialm_with_observer, spcp_bcd, RpcaProblem};
use lowrank::{DenseMatrix, ObservationMask, SolverConfig};
use proptest::prelude::*;
use rand::Rng;

fn random_mask(m: usize, n: usize, p: f64, g: &mut impl Rng) -> ObservationMask {
    ObservationMask::from_bitmap(m, n, (0..m * n).map(|_| g.random_bool(p)).collect()).unwrap()
}

fn sparse_outliers(m: usize, n: usize, rho: f64, g: &mut impl Rng) -> DenseMatrix {
    DenseMatrix::from_fn(m, n, |_, _| {
        if g.random_bool(rho) {
            g.random_range(-10.0..10.0)
        } else {
            0.0
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn truncation_error_is_tail_energy(m in 2usize..12, n in 2usize..12, seed in any::<u64>()) {
        let a = gaussian(m, n, &mut rng(seed));
        let sv = svd(&a).unwrap().singular_values;
        for r in 1..=m.min(n) {
            let err = (&a - &truncate_rank(&a, r).unwrap()).frobenius_norm_squared();
            let tail: f64 = sv[r..].iter().map(|s| s * s).sum();
            prop_assert!((err - tail).abs() <= 1e-8 * tail.max(1e-300) + 1e-20 * a.frobenius_norm_squared());
        }
    }

    #[test]
    fn svt_is_shrunk_svd_and_satisfies_subgradient(m in 2usize..10, n in 2usize..10, seed in any::<u64>(), lambda in 0.0f64..3.0) {
        let z = gaussian(m, n, &mut rng(seed));
        let x = svt(&z, lambda).unwrap();
        let f = svd(&z).unwrap();
        let shrunk: Vec<f64> = f.singular_values.iter().map(|s| (s - lambda).max(0.0)).collect();
        prop_assert!((&x - &f.reconstruct_with(&shrunk)).frobenius_norm() <= 1e-12 * z.frobenius_norm());
        // Z − X ∈ λ·∂‖X‖_*: spectral norm ≤ λ and ⟨Z − X, X⟩ = λ‖X‖_*.
        let g = &z - &x;
        let spectral = svd(&g).unwrap().singular_values[0];
        prop_assert!(spectral <= lambda * (1.0 + 1e-9) + 1e-12);
        let inner = g.dot(&x);
        prop_assert!((inner - lambda * nuclear_norm(&x).unwrap()).abs() <= 1e-9 * (1.0 + inner.abs()));
    }

    #[test]
    fn svt_is_monotone_in_lambda(m in 2usize..10, n in 2usize..10, seed in any::<u64>(), l1 in 0.0f64..3.0, dl in 0.0f64..3.0) {
        let z = gaussian(m, n, &mut rng(seed));
        let a = nuclear_norm(&svt(&z, l1).unwrap()).unwrap();
        let b = nuclear_norm(&svt(&z, l1 + dl).unwrap()).unwrap();
        prop_assert!(a >= b - 1e-12);
    }

    #[test]
    fn norm_ordering(m in 1usize..10, n in 1usize..10, seed in any::<u64>()) {
        let a = gaussian(m, n, &mut rng(seed));
        let top = svd(&a).unwrap().singular_values[0];
        let fro = a.frobenius_norm();
        let nuc = nuclear_norm(&a).unwrap();
        prop_assert!(nuc >= fro * (1.0 - 1e-12));
        prop_assert!(fro >= top * (1.0 - 1e-12));
    }

    #[test]
    fn projection_is_linear_and_idempotent(m in 1usize..10, n in 1usize..10, seed in any::<u64>(), alpha in -3.0f64..3.0, beta in -3.0f64..3.0) {
        let mut g = rng(seed);
        let (a, b) = (gaussian(m, n, &mut g), gaussian(m, n, &mut g));
        let mask = random_mask(m, n, 0.5, &mut g);
        let lhs = project_omega(&(&a.scale(alpha) + &b.scale(beta)), &mask).unwrap();
        let rhs = &project_omega(&a, &mask).unwrap().scale(alpha) + &project_omega(&b, &mask).unwrap().scale(beta);
        prop_assert!((&lhs - &rhs).frobenius_norm() <= 1e-12 * (1.0 + lhs.frobenius_norm()));
        let once = project_omega(&a, &mask).unwrap();
        prop_assert_eq!(project_omega(&once, &mask).unwrap(), once);
    }

    #[test]
    fn warm_operators_match_exact_ones(m in 30usize..60, r in 1usize..5, seed in any::<u64>()) {
        let mut g = rng(seed);
        let z = &low_rank(m, m - 3, r, &mut g) + &gaussian(m, m - 3, &mut g).scale(1e-3);
        let mut warm = WarmStart::new();
        let exact = truncate_rank(&z, r).unwrap();
        let fast = truncate_rank_warm(&z, r, &mut warm).unwrap();
        prop_assert!((&fast - &exact).frobenius_norm() <= 1e-9 * exact.frobenius_norm());
        let lambda = 0.1;
        let exact = svt_detailed(&z, lambda).unwrap();
        let fast = svt_warm(&z, lambda, &mut WarmStart::new()).unwrap();
        prop_assert_eq!(fast.rank(), exact.rank());
        prop_assert!((&fast.matrix - &exact.matrix).frobenius_norm() <= 1e-9 * exact.matrix.frobenius_norm());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn pcp_dual_update_holds_every_iteration(seed in any::<u64>()) {
        let mut g = rng(seed);
        let d = &low_rank(25, 20, 2, &mut g) + &sparse_outliers(25, 20, 0.05, &mut g);
        let p = RpcaProblem::new(d.clone()).unwrap();
        let mut worst = 0.0_f64;
        let mut seen = 0;
        pcp_ialm_with_observer(&p, &SolverConfig::default().with_max_iters(200), None, |it| {
            let residual = &(&d - it.low_rank) - it.sparse;
            let step = it.dual - it.dual_previous;
            let gap = (&step - &residual.scale(it.mu)).frobenius_norm();
            worst = worst.max(gap / (1.0 + step.frobenius_norm()));
            seen += 1;
        }).unwrap();
        prop_assert!(seen > 0);
        prop_assert!(worst <= 1e-12, "dual update off by {}", worst);
    }

    #[test]
    fn pcp_is_scale_equivariant(seed in any::<u64>(), c in 0.1f64..10.0) {
        let mut g = rng(seed);
        let d = &low_rank(25, 20, 2, &mut g) + &sparse_outliers(25, 20, 0.05, &mut g);
        let tol = 1e-9;
        let cfg = SolverConfig::default().with_lambda(1.0 / 25f64.sqrt()).with_tol(tol).with_max_iters(2000);
        let base = pcp_ialm(&RpcaProblem::new(d.clone()).unwrap(), &cfg, None).unwrap();
        let scaled = pcp_ialm(&RpcaProblem::new(d.scale(c)).unwrap(), &cfg, None).unwrap();
        let dn = d.frobenius_norm();
        prop_assert!((&scaled.low_rank.scale(1.0 / c) - &base.low_rank).frobenius_norm() <= 10.0 * tol * dn * 100.0);
        prop_assert!((&scaled.sparse.scale(1.0 / c) - &base.sparse).frobenius_norm() <= 10.0 * tol * dn * 100.0);
    }

    #[test]
    fn spcp_and_godec_objectives_never_increase(seed in any::<u64>()) {
        let mut g = rng(seed);
        let truth = low_rank(20, 18, 2, &mut g);
        let outliers = sparse_outliers(20, 18, 0.05, &mut g);
        let d = &(&truth + &outliers) + &gaussian(20, 18, &mut g).scale(0.01);
        let p = RpcaProblem::new(d).unwrap();
        let s = spcp_bcd(&p, &SolverConfig::default().with_noise_level(0.01).with_max_iters(300), Some(&truth)).unwrap();
        for w in s.trace.objectives().windows(2) {
            prop_assert!(w[1] <= w[0] * (1.0 + 1e-12));
        }
        let k = outliers.count_nonzero(0.0);
        let gd = godec(&p, &SolverConfig::default().with_rank(2).with_cardinality(k), Some(&truth)).unwrap();
        for w in gd.trace.objectives().windows(2) {
            prop_assert!(w[1] <= w[0] * (1.0 + 1e-12));
        }
    }

    #[test]
    fn pgm_round_trips(w in 1usize..20, h in 1usize..20, seed in any::<u64>()) {
        let mut g = rng(seed);
        let img = GrayImage::from_fn(w, h, |_, _| g.random()).unwrap();
        let bytes = write_pgm(&img);
        prop_assert_eq!(&read_pgm(&bytes).unwrap(), &img);
        prop_assert_eq!(write_pgm(&read_pgm(&bytes).unwrap()), bytes);
    }

    #[test]
    fn frames_round_trip_through_columns(w in 1usize..8, h in 1usize..8, frames in 1usize..5, seed in any::<u64>()) {
        let mut g = rng(seed);
        let stack = FrameStack::new((0..frames).map(|_| GrayImage::from_fn(w, h, |_, _| g.random()).unwrap()).collect()).unwrap();
        prop_assert_eq!(FrameStack::from_matrix(&stack.to_matrix(), w, h).unwrap(), stack);
    }

    #[test]
    fn pixels_are_always_in_range(v in any::<f64>()) {
        let p = to_pixel(v);
        if v.is_finite() && (0.0..=255.0).contains(&v) {
            prop_assert!((p as f64 - v).abs() <= 0.5);
        }
    }
}

#[test]
fn benchmark_csv_round_trips_and_is_deterministic() {
    let spec = SyntheticSpec::completion(30, 2, 4.0)
        .with_seed(9)
        .with_repeats(2);
    let solvers = [
        SolverSpec::new(SolverKind::Als, SolverConfig::default().with_max_iters(50)),
        SolverSpec::new(
            SolverKind::SoftImpute,
            SolverConfig::default().with_max_iters(50),
        ),
    ];
    let a = run_benchmark(&spec, &solvers, &TimeGrid::default()).unwrap();
    let b = run_benchmark(&spec, &solvers, &TimeGrid::default()).unwrap();
    for (x, y) in a.cells.iter().zip(&b.cells) {
        assert_eq!((&x.solver, x.instance), (&y.solver, y.instance));
        assert!(x
            .outcome
            .as_ref()
            .unwrap()
            .same_modulo_time(y.outcome.as_ref().unwrap()));
    }
    let mut buf = Vec::new();
    emit_csv(&a, &mut buf).unwrap();
    let rows = parse_csv(buf.as_slice()).unwrap();
    let expected: Vec<_> = a
        .cells
        .iter()
        .flat_map(|c| {
            c.outcome
                .as_ref()
                .unwrap()
                .records
                .iter()
                .map(move |r| (c.solver.clone(), c.instance, r.clone()))
        })
        .collect();
    assert_eq!(rows.len(), expected.len());
    for (row, (solver, instance, record)) in rows.iter().zip(expected) {
        assert_eq!((&row.solver, row.instance), (&solver, instance));
        assert_eq!(row.record, record);
    }
}
