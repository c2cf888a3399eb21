use super::*;
use crate::linalg::{project_psd, rel_error, rel_error_factored, LowRankFactor, SymMatrix};
use crate::model::{
    make_instance, CorruptionMode, GroundTruth, Instance, InstanceParams, NoiseModel,
    OutlierModel, SeedTriple, TruthKind,
};
use crate::rng::CounterRng;
use crate::Error;

fn clean_params(n: usize, m: usize, r: usize, seed: u64) -> InstanceParams {
    InstanceParams {
        n,
        m,
        r,
        kind: TruthKind::GaussianFactor,
        outlier_fraction: 0.0,
        outlier_model: OutlierModel::AdditiveGaussian { sigma: 1.0 },
        noise_model: NoiseModel::None,
        mode: CorruptionMode::Additive,
        seeds: SeedTriple::derive(seed),
    }
}

fn rand_factor(n: usize, r: usize, seed: u64) -> LowRankFactor<f64> {
    let mut rng = CounterRng::new(seed);
    LowRankFactor::new(n, r, (0..n * r).map(|_| rng.normal()).collect()).unwrap()
}

#[test]
fn step_schedule_matches_the_formula() {
    let cfg = NonconvexConfig::new(1);
    assert_eq!(step_schedule(&cfg, 0), 0.05);
    assert_eq!(step_schedule(&cfg, 1000), 0.025);
    // Far past the floor: 0.05 * 1e-6.
    let far = step_schedule(&cfg, 1_000_000_000);
    assert!((far - 5e-8).abs() < 1e-22, "floor engaged: {far}");
    // Positive and non-increasing.
    let mut prev = f64::INFINITY;
    for t in (0..50_000).step_by(500) {
        let mu = step_schedule(&cfg, t);
        assert!(mu > 0.0 && mu <= prev);
        prev = mu;
    }
}

#[test]
fn subgradient_is_zero_at_zero_residuals() {
    // z regenerates bit for bit from the truth factor, so residuals vanish
    // exactly and sgn(0) = 0 gives an exactly zero subgradient.
    let inst = make_instance::<f64>(&clean_params(8, 40, 2, 1)).unwrap();
    let g = l1_subgradient(&inst.ensemble, &inst.z, inst.truth.factor().unwrap()).unwrap();
    assert!(g.iter().all(|&v| v == 0.0));
}

#[test]
fn subgradient_single_measurement_formula() {
    let inst = make_instance::<f64>(&clean_params(4, 1, 1, 2)).unwrap();
    let u = rand_factor(4, 1, 3);
    let a = inst.ensemble.row(0).to_vec();
    let ua: f64 = (0..4).map(|i| u.get(i, 0) * a[i]).sum();
    // Force z_1 > |U'a_1|^2 so the sign is +1.
    let z = vec![ua * ua + 5.0];
    let g = l1_subgradient(&inst.ensemble, &z, &u).unwrap();
    for i in 0..4 {
        let expect = -a[i] * ua; // -(1/m) a a' U with m = 1
        assert!((g[i] - expect).abs() <= 1e-12 * expect.abs().max(1.0));
    }
}

#[test]
fn subgradient_matches_finite_differences() {
    // At points with no zero residuals f is locally smooth; central
    // differences with h = 1e-6 should match to 1e-5 relative.
    let inst = make_instance::<f64>(&clean_params(6, 30, 2, 4)).unwrap();
    let mut rng = CounterRng::new(99);
    let mut checked = 0;
    'outer: for attempt in 0..40 {
        let u = rand_factor(6, 2, 1000 + attempt);
        // Keep away from kinks.
        let mut p = vec![0.0; 2];
        for i in 0..30 {
            crate::linalg::project_row(&u, inst.ensemble.row(i), &mut p);
            let q: f64 = p.iter().map(|v| v * v).sum();
            if (inst.z[i] - q).abs() < 1e-3 {
                continue 'outer;
            }
        }
        let g = l1_subgradient(&inst.ensemble, &inst.z, &u).unwrap();
        let h = 1e-6;
        let entry = (rng.below(12)) as usize;
        let mut up = u.clone();
        up.data_mut()[entry] += h;
        let mut dn = u.clone();
        dn.data_mut()[entry] -= h;
        let fd = (l1_objective(&inst.ensemble, &inst.z, &up)
            - l1_objective(&inst.ensemble, &inst.z, &dn))
            / (2.0 * h);
        let scale = g[entry].abs().max(1e-6);
        assert!(
            (g[entry] - fd).abs() <= 1e-5 * scale,
            "entry {entry}: {} vs {fd}",
            g[entry]
        );
        checked += 1;
        if checked >= 10 {
            break;
        }
    }
    assert!(checked >= 10, "not enough smooth points found");
}

#[test]
fn objective_is_rotation_invariant() {
    let inst = make_instance::<f64>(&clean_params(8, 50, 3, 5)).unwrap();
    for seed in 0..5 {
        let u = rand_factor(8, 3, 2000 + seed);
        let q = crate::linalg::tests::rand_orthonormal(3, 3000 + seed);
        let uq = u.rotated(&q).unwrap();
        let f1 = l1_objective(&inst.ensemble, &inst.z, &u);
        let f2 = l1_objective(&inst.ensemble, &inst.z, &uq);
        assert!((f1 - f2).abs() <= 1e-12 * f1.max(1.0), "{f1} vs {f2}");
    }
}

#[test]
fn objective_histories_match_under_rotation() {
    let inst = make_instance::<f64>(&clean_params(10, 60, 2, 6)).unwrap();
    let cfg = NonconvexConfig {
        t_max: 200,
        history_stride: 1,
        ..NonconvexConfig::new(2)
    };
    let u0 = spectral_init(&inst, 2).unwrap();
    let q = crate::linalg::tests::rand_orthonormal(2, 7);
    let u0q = u0.rotated(&q).unwrap();
    let a = solve_nonconvex_from(&inst, &cfg, u0).unwrap();
    let b = solve_nonconvex_from(&inst, &cfg, u0q).unwrap();
    assert_eq!(a.objective_history.len(), b.objective_history.len());
    for (fa, fb) in a
        .objective_history
        .iter()
        .zip(b.objective_history.iter())
    {
        assert!((fa - fb).abs() <= 1e-9 * fa.max(1.0), "{fa} vs {fb}");
    }
}

#[test]
fn spectral_init_of_zero_measurements_is_zero() {
    let mut inst = make_instance::<f64>(&clean_params(6, 30, 1, 8)).unwrap();
    inst.z = vec![0.0; 30];
    let u = spectral_init(&inst, 1).unwrap();
    assert_eq!(u.fro_norm(), 0.0);
}

#[test]
fn spectral_init_is_homogeneous() {
    let inst = make_instance::<f64>(&clean_params(6, 40, 1, 9)).unwrap();
    let base = spectral_init(&inst, 1).unwrap().materialize();
    let mut scaled_inst = inst.clone();
    for z in &mut scaled_inst.z {
        *z *= 4.0;
    }
    let scaled = spectral_init(&scaled_inst, 1).unwrap().materialize();
    let err = scaled.sub(&base.scaled(4.0)).unwrap().fro_norm();
    assert!(err <= 1e-10 * scaled.fro_norm());
}

#[test]
fn zero_truth_yields_zero_estimate() {
    // All-zero measurements: the initializer is zero and every subgradient
    // vanishes, so the iterate never moves.
    let ens = crate::model::gen_ensemble::<f64>(6, 30, 10).unwrap();
    let inst = Instance {
        ensemble: ens,
        truth: GroundTruth::Gaussian {
            factor: LowRankFactor::zeros(6, 1),
            seed: 0,
        },
        z: vec![0.0; 30],
        clean_z: vec![0.0; 30],
        beta_support: vec![],
        beta_values: vec![],
        w: vec![0.0; 30],
        seeds: SeedTriple::derive(10),
        corruption: crate::model::CorruptionSpec::clean(0),
    };
    let result = solve_nonconvex(&inst, &NonconvexConfig::new(1).with_t_max(500)).unwrap();
    match result.estimate {
        Estimate::Factor(u) => assert!(u.fro_norm() <= 1e-8),
        _ => panic!("expected a factor"),
    }
    assert!(result.rel_error_vs_truth.is_none());
}

#[test]
fn tmax_zero_returns_the_initializer() {
    let inst = make_instance::<f64>(&clean_params(8, 40, 2, 11)).unwrap();
    let init = spectral_init(&inst, 2).unwrap();
    let result = solve_nonconvex(&inst, &NonconvexConfig::new(2).with_t_max(0)).unwrap();
    match result.estimate {
        Estimate::Factor(u) => assert_eq!(u, init),
        _ => panic!("expected a factor"),
    }
    assert_eq!(result.iterations_run, 0);
    assert_eq!(result.objective_history.len(), 1);
}

#[test]
fn wf_keeps_a_clean_fixed_point() {
    let inst = make_instance::<f64>(&clean_params(8, 40, 2, 12)).unwrap();
    let truth = inst.truth.factor().unwrap().clone();
    let cfg = WfConfig::new(2).with_t_max(100);
    let result = solve_wf_from(&inst, &cfg, truth.clone()).unwrap();
    match result.estimate {
        // Zero residuals bit for bit: the iterate never moves.
        Estimate::Factor(u) => assert_eq!(u, truth),
        _ => panic!("expected a factor"),
    }
    assert_eq!(result.step_source, Some(StepSource::TruthNorm));
}

#[test]
fn wf_step_source_falls_back_to_the_initializer() {
    let inst = make_instance::<f64>(&clean_params(8, 40, 1, 13)).unwrap();
    let cfg = WfConfig {
        use_truth_norm: false,
        ..WfConfig::new(1).with_t_max(10)
    };
    let result = solve_wf(&inst, &cfg).unwrap();
    assert_eq!(result.step_source, Some(StepSource::InitNorm));
}

#[test]
fn nonconvex_divergence_guard_reports_iteration() {
    let inst = make_instance::<f64>(&clean_params(6, 30, 1, 14)).unwrap();
    let cfg = NonconvexConfig {
        step_base: 1e9,
        ..NonconvexConfig::new(1).with_t_max(2000)
    };
    match solve_nonconvex(&inst, &cfg) {
        Err(Error::Diverged { iteration }) => assert!(iteration < 2000),
        other => panic!("expected divergence, got {other:?}"),
    }
}

#[test]
fn convex_objective_satisfies_the_subgradient_inequality() {
    // g(Y) >= g(X) + <D, Y - X> for D = A*(sgn(A(X) - z)) with the sign
    // convention of the solver (the subgradient of X -> ||A(X) - z||_1).
    let inst = make_instance::<f64>(&clean_params(6, 40, 2, 15)).unwrap();
    let ens = &inst.ensemble;
    let g = |x: &SymMatrix<f64>| -> f64 {
        ens.measure(x)
            .unwrap()
            .iter()
            .zip(inst.z.iter())
            .map(|(a, b)| (a - b).abs())
            .sum()
    };
    for seed in 0..10 {
        let x = crate::linalg::tests::rand_sym(6, 4000 + seed);
        let y = crate::linalg::tests::rand_sym(6, 5000 + seed);
        let ax = ens.measure(&x).unwrap();
        let signs: Vec<f64> = ax
            .iter()
            .zip(inst.z.iter())
            .map(|(a, b)| {
                let r = a - b;
                if r > 0.0 {
                    1.0
                } else if r < 0.0 {
                    -1.0
                } else {
                    0.0
                }
            })
            .collect();
        let d = ens.adjoint(&signs).unwrap();
        let gap = g(&y) - g(&x) - y.sub(&x).unwrap().inner(&d);
        assert!(gap >= -1e-9 * g(&x).max(1.0), "gap {gap}");
    }
}

#[test]
fn convex_best_objective_history_is_monotone() {
    let inst = make_instance::<f64>(&clean_params(8, 60, 1, 16)).unwrap();
    let cfg = ConvexConfig {
        history_stride: 10,
        ..ConvexConfig::new().with_t_max(500)
    };
    let result = solve_phaselift(&inst, &cfg).unwrap();
    for w in result.objective_history.windows(2) {
        assert!(w[1] <= w[0] + 1e-12, "{} then {}", w[0], w[1]);
    }
}

#[test]
fn convex_solver_keeps_the_optimum() {
    // With z = A(X0) and the iteration started at X0, no iterate can beat
    // the zero objective, so the best-objective estimate stays at X0.
    let inst = make_instance::<f64>(&clean_params(6, 60, 1, 17)).unwrap();
    let x0 = inst.truth.x0();
    let cfg = ConvexConfig::new().with_t_max(200);
    let result = solve_phaselift_from(&inst, &cfg, x0.clone()).unwrap();
    match &result.estimate {
        Estimate::Full(x) => {
            assert!(rel_error(x, &x0).unwrap() <= 1e-10);
        }
        _ => panic!("expected a full matrix"),
    }
    assert!(*result.objective_history.last().unwrap() <= 1e-9);
}

#[test]
fn dykstra_fixes_feasible_points() {
    // A PSD Toeplitz matrix is already in the intersection.
    let truth =
        crate::model::gen_ground_truth::<num_complex::Complex64>(
            8,
            2,
            TruthKind::ToeplitzVandermonde,
            18,
        )
        .unwrap();
    let x0 = truth.x0();
    let mut warm = None;
    let fixed = dykstra_psd_toeplitz(&x0, 20, &mut warm).unwrap();
    assert!(fixed.sub(&x0).unwrap().fro_norm() <= 1e-9 * x0.fro_norm());
}

#[test]
fn dykstra_output_is_toeplitz_and_approaches_the_cone() {
    // The final half-step is the Toeplitz projection, so the output is
    // exactly Toeplitz at any round count; PSD infeasibility decays
    // linearly with the rounds (the solver feeds near-feasible points, so
    // its per-step budget of ~50 rounds suffices there).
    let x = crate::linalg::tests::rand_sym_c(8, 19);
    let min_eig_after = |iters: usize| -> f64 {
        let mut warm = None;
        let out = dykstra_psd_toeplitz(&x, iters, &mut warm).unwrap();
        for d in 0..8usize {
            for i in 0..(8 - d).saturating_sub(1) {
                let diff = out.get(i, i + d) - out.get(i + 1, i + 1 + d);
                assert!(diff.abs() <= 1e-12 * out.fro_norm().max(1.0));
            }
        }
        crate::linalg::eig_sym(&out).unwrap().eigenvalues[7] / out.fro_norm()
    };
    let coarse = min_eig_after(20);
    let fine = min_eig_after(800);
    assert!(fine >= coarse - 1e-15, "{fine} vs {coarse}");
    assert!(fine >= -1e-9, "800 rounds should reach the cone: {fine}");
}

#[test]
fn default_step_base_matches_the_formula() {
    let inst = make_instance::<f64>(&clean_params(6, 40, 1, 20)).unwrap();
    let eta0 = default_step_base(&inst.ensemble, &inst.z).unwrap();
    let m = inst.m() as f64;
    let z_l1: f64 = inst.z.iter().map(|v| v.abs()).sum();
    let ones = vec![1.0; inst.m()];
    let denom = inst.ensemble.adjoint(&ones).unwrap().scaled(1.0 / m).fro_norm();
    assert!((eta0 - z_l1 / (m * denom)).abs() <= 1e-12 * eta0);
}

#[test]
fn per_iteration_cost_scales_linearly_in_m() {
    // Doubling m at fixed (n, r) should double the per-iteration time
    // within +-30%. Repetitions are interleaved and minima compared, so
    // contention from concurrently running tests cancels out.
    let run = |m: usize| -> f64 {
        let inst = make_instance::<f64>(&clean_params(16, m, 2, 21)).unwrap();
        let cfg = NonconvexConfig::new(2).with_t_max(300);
        solve_nonconvex(&inst, &cfg).unwrap().wall_time / 300.0
    };
    let mut t1 = f64::INFINITY;
    let mut t2 = f64::INFINITY;
    for _ in 0..5 {
        t1 = t1.min(run(1500));
        t2 = t2.min(run(3000));
    }
    let ratio = t2 / t1;
    assert!(
        (1.4..=2.6).contains(&ratio),
        "per-iteration time ratio {ratio} (t1 = {t1:.2e}s, t2 = {t2:.2e}s)"
    );
}

#[test]
fn result_json_round_trips() {
    let inst = make_instance::<f64>(&clean_params(6, 30, 1, 22)).unwrap();
    let result = solve_nonconvex(&inst, &NonconvexConfig::new(1).with_t_max(100)).unwrap();
    let json = result.to_json(
        SolverId::Nonconvex,
        &inst,
        1,
        serde_json::json!({"t_max": 100}),
    );
    let text = serde_json::to_string(&json).unwrap();
    let parsed: ResultJson = serde_json::from_str(&text).unwrap();
    assert_eq!(parsed.solver, SolverId::Nonconvex);
    assert_eq!(parsed.estimate_kind, "factor");
    assert_eq!(parsed.estimate_cols, 1);
    assert_eq!(parsed.estimate_entries.len(), 6);
    assert_eq!(parsed.rel_error, result.rel_error_vs_truth);
}

#[test]
fn projection_composes_with_solver_types() {
    // project_psd of an estimate stays close for a well-recovered factor.
    let inst = make_instance::<f64>(&clean_params(10, 120, 1, 23)).unwrap();
    let cfg = NonconvexConfig::new(1).with_t_max(20_000);
    let result = solve_nonconvex(&inst, &cfg).unwrap();
    assert!(result.rel_error_vs_truth.unwrap() <= 1e-4);
    if let Estimate::Factor(u) = &result.estimate {
        let x = u.materialize();
        let p = project_psd(&x).unwrap();
        assert!(p.sub(&x).unwrap().fro_norm() <= 1e-9 * x.fro_norm());
        assert!(rel_error_factored(u, inst.truth.factor().unwrap()).unwrap() <= 1e-4);
    }
}
