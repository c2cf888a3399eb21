use super::*;
use crate::model::gen_ground_truth;

fn quick_params(solver: SolverId) -> TrialParams {
    TrialParams {
        n: 8,
        m: 80,
        truth_rank: 1,
        kind: TruthKind::GaussianFactor,
        rank_guess: None,
        solver,
        corruption: CorruptionTemplate::clean(),
        tau: Some(1e-4),
        t_max: Some(3000),
        dykstra_iters: 20,
    }
}

fn quick_spec() -> SweepSpec {
    SweepSpec {
        axis1: Axis {
            name: AxisName::M,
            values: vec![40.0, 80.0],
        },
        axis2: Axis {
            name: AxisName::R,
            values: vec![1.0, 2.0],
        },
        fixed: SweepFixed {
            n: 8,
            m: None,
            kind: TruthKind::GaussianFactor,
            solver: SolverId::Nonconvex,
            corruption: CorruptionTemplate::clean(),
            rank: 1,
            rank_guess: None,
            tau: Some(1e-3),
            trials: 3,
            base_seed: 7,
            t_max: Some(2000),
            dykstra_iters: 50,
        },
    }
}

#[test]
fn trial_is_deterministic() {
    let params = quick_params(SolverId::Nonconvex);
    let a = run_trial(&params, 11).unwrap();
    let b = run_trial(&params, 11).unwrap();
    assert_eq!(a.success, b.success);
    assert_eq!(a.rel_error, b.rel_error);
}

#[test]
fn infinite_tau_always_succeeds() {
    let params = TrialParams {
        tau: Some(f64::INFINITY),
        t_max: Some(50),
        ..quick_params(SolverId::Nonconvex)
    };
    for seed in 0..5 {
        assert!(run_trial(&params, seed).unwrap().success);
    }
}

#[test]
fn generous_clean_trial_succeeds() {
    // Covered at experiment scale by the acceptance suite; smoke here.
    let params = TrialParams {
        m: 120,
        t_max: Some(20_000),
        tau: Some(1e-5),
        ..quick_params(SolverId::Nonconvex)
    };
    assert!(run_trial(&params, 3).unwrap().success);
}

#[test]
fn one_cell_grid_rates_are_multiples_of_a_tenth() {
    let spec = SweepSpec {
        axis1: Axis {
            name: AxisName::M,
            values: vec![60.0],
        },
        axis2: Axis {
            name: AxisName::R,
            values: vec![1.0],
        },
        fixed: SweepFixed {
            trials: 10,
            ..quick_spec().fixed
        },
    };
    let grid = run_sweep(&spec).unwrap();
    assert_eq!(grid.cells.len(), 1);
    let rate = grid.cells[0].success_rate() * 10.0;
    assert!((rate - rate.round()).abs() < 1e-12);
}

#[test]
fn sweep_replays_identically() {
    let spec = quick_spec();
    let a = run_sweep(&spec).unwrap();
    let b = run_sweep(&spec).unwrap();
    for (ca, cb) in a.cells.iter().zip(b.cells.iter()) {
        assert_eq!(ca.successes, cb.successes);
        assert_eq!(ca.mean_rel_error.to_bits(), cb.mean_rel_error.to_bits());
        assert_eq!(ca.diverged, cb.diverged);
    }
}

#[test]
fn sweep_is_threadcount_invariant() {
    let spec = quick_spec();
    let serial = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(|| run_sweep(&spec))
        .unwrap();
    let parallel = rayon::ThreadPoolBuilder::new()
        .num_threads(4)
        .build()
        .unwrap()
        .install(|| run_sweep(&spec))
        .unwrap();
    for (ca, cb) in serial.cells.iter().zip(parallel.cells.iter()) {
        assert_eq!(ca.successes, cb.successes);
        assert_eq!(ca.mean_rel_error.to_bits(), cb.mean_rel_error.to_bits());
    }
}

#[test]
fn cells_are_independent() {
    let full = run_sweep(&quick_spec()).unwrap();
    let mut reduced_spec = quick_spec();
    reduced_spec.axis1.values = vec![80.0]; // drop the first axis1 value
    let reduced = run_sweep(&reduced_spec).unwrap();
    for (i2, _) in reduced_spec.axis2.values.iter().enumerate() {
        let a = full.cell(1, i2);
        let b = reduced.cell(0, i2);
        assert_eq!(a.successes, b.successes);
        assert_eq!(a.mean_rel_error.to_bits(), b.mean_rel_error.to_bits());
    }
}

#[test]
fn success_rate_grows_with_oversampling() {
    // Non-strict monotonicity smoke: m = 10nr beats m = 2nr without
    // corruption.
    let spec = SweepSpec {
        axis1: Axis {
            name: AxisName::M,
            values: vec![20.0, 100.0],
        },
        axis2: Axis {
            name: AxisName::R,
            values: vec![1.0],
        },
        fixed: SweepFixed {
            n: 10,
            m: None,
            kind: TruthKind::GaussianFactor,
            solver: SolverId::Nonconvex,
            corruption: CorruptionTemplate::clean(),
            rank: 1,
            rank_guess: None,
            tau: Some(1e-5),
            trials: 20,
            base_seed: 5,
            t_max: Some(30_000),
            dykstra_iters: 50,
        },
    };
    let grid = run_sweep(&spec).unwrap();
    assert!(grid.cell(1, 0).success_rate() >= grid.cell(0, 0).success_rate());
    assert!(grid.cell(1, 0).success_rate() >= 0.9);
}

#[test]
fn invalid_specs_are_rejected() {
    let mut spec = quick_spec();
    spec.axis2.name = AxisName::M;
    assert!(run_sweep(&spec).is_err());

    let mut spec = quick_spec();
    spec.axis1.values = vec![80.0, 40.0];
    assert!(spec.validate().is_err());

    let mut spec = quick_spec();
    spec.fixed.trials = 0;
    assert!(spec.validate().is_err());

    let mut spec = quick_spec();
    spec.fixed.corruption.outlier_fraction = 0.2; // no model given
    assert!(spec.validate().is_err());
}

#[test]
fn csv_zeroes_timing_by_default() {
    let grid = run_sweep(&quick_spec()).unwrap();
    let csv = output::sweep_csv(&grid, false);
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with('#'));
    assert_eq!(
        lines.next().unwrap(),
        "axis1,axis2,trials,successes,success_rate,mean_rel_error,mean_time_s,diverged"
    );
    let data: Vec<&str> = lines.collect();
    assert_eq!(data.len(), 4);
    for row in &data {
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields.len(), 8);
        assert_eq!(fields[6], "0.000000");
    }
    // Rerun gives identical bytes.
    let again = output::sweep_csv(&run_sweep(&quick_spec()).unwrap(), false);
    assert_eq!(csv, again);
    // Timing opt-in fills the column.
    let timed = output::sweep_csv(&grid, true);
    assert_ne!(timed.lines().nth(2).unwrap().split(',').nth(6), Some("0.000000"));
}

#[test]
fn pgm_layout_matches_grid() {
    let grid = run_sweep(&quick_spec()).unwrap();
    let pgm = output::sweep_pgm(&grid);
    let text_end = pgm
        .windows(4)
        .position(|w| w == b"255\n")
        .map(|p| p + 4)
        .unwrap();
    let header = std::str::from_utf8(&pgm[..text_end]).unwrap();
    assert!(header.starts_with("P5\n"));
    assert!(header.contains("2 2\n255\n"));
    let pixels = &pgm[text_end..];
    assert_eq!(pixels.len(), 4);
    // Row-major with axis2 as rows: pixel (row j, col i) = cell (i, j).
    for j in 0..2 {
        for i in 0..2 {
            let want = (255.0 * grid.cell(i, j).success_rate()).round() as u8;
            assert_eq!(pixels[j * 2 + i], want);
        }
    }
}

#[test]
fn l1_probe_concentrates_and_improves_with_m() {
    let coarse = rip_l1_probe(8, 200, 30, 2, 1);
    let fine = rip_l1_probe(8, 800, 30, 2, 1);
    assert!(coarse.max_dev < 0.5);
    assert!(fine.mean_dev <= coarse.mean_dev);
    // Determinism.
    let again = rip_l1_probe(8, 200, 30, 2, 1);
    assert_eq!(coarse.max_dev, again.max_dev);
    assert_eq!(coarse.mean_dev, again.mean_dev);
}

#[test]
fn l2l1_probe_requires_even_m() {
    assert!(rip_l2l1_probe(8, 201, 5, 1, 1).is_err());
}

#[test]
fn l2l1_probe_concentrates_for_rank_one() {
    // m = 200 n r with n = 8, r = 1.
    let stats = rip_l2l1_probe(8, 1600, 50, 1, 2).unwrap();
    assert!(stats.spread <= 0.3, "spread {}", stats.spread);
    assert!(stats.lower_dev >= 0.0 && stats.upper_dev >= 0.0);
    assert!((stats.mean_ratio - 1.0).abs() < 0.3);
}

#[test]
fn single_trial_probe_has_zero_spread() {
    let stats = rip_l2l1_probe(8, 100, 1, 1, 3).unwrap();
    assert_eq!(stats.spread, 0.0);
    assert_eq!(stats.min_ratio, stats.max_ratio);
}

#[test]
fn paired_difference_is_antisymmetric_and_scale_invariant() {
    let ens = crate::model::gen_ensemble::<f64>(6, 40, 9).unwrap();
    let truth = gen_ground_truth::<f64>(6, 2, TruthKind::GaussianFactor, 10).unwrap();
    let x = truth.x0();
    let z_pos = ens.measure(&x).unwrap();
    let z_neg = ens.measure(&x.scaled(-1.0)).unwrap();
    let z_scaled = ens.measure(&x.scaled(3.0)).unwrap();
    let diff = |z: &[f64]| -> Vec<f64> { z.chunks_exact(2).map(|p| p[0] - p[1]).collect() };
    let (b_pos, b_neg, b_scaled) = (diff(&z_pos), diff(&z_neg), diff(&z_scaled));
    let mut ratio_sum = 0.0;
    for i in 0..b_pos.len() {
        assert!((b_neg[i] + b_pos[i]).abs() <= 1e-10 * b_pos[i].abs().max(1.0));
        ratio_sum += (b_scaled[i] - 3.0 * b_pos[i]).abs();
    }
    // |B(cX)|_1 / |cX|_F equals |B(X)|_1 / |X|_F for c > 0.
    assert!(ratio_sum <= 1e-8);
    let l1 = |b: &[f64]| b.iter().map(|v| v.abs()).sum::<f64>();
    let r1 = l1(&b_pos) / x.fro_norm();
    let r3 = l1(&b_scaled) / x.scaled(3.0).fro_norm();
    assert!((r1 - r3).abs() <= 1e-10 * r1);
}

#[test]
fn mse_curve_layout_and_labels() {
    let rows = mse_curve(
        8,
        2,
        TruthKind::GaussianFactor,
        &CorruptionTemplate::clean(),
        &[60, 120],
        &[SolverId::Nonconvex, SolverId::Wf],
        2,
        3,
        Some(1500),
    )
    .unwrap();
    // Nonconvex expands to rank guesses 1, 2, 3; WF adds one more variant.
    assert_eq!(rows.len(), 4 * 2);
    assert!(rows.iter().any(|r| r.solver == "nonconvex(rank=1)"));
    assert!(rows.iter().any(|r| r.solver == "nonconvex(rank=3)"));
    assert!(rows.iter().any(|r| r.solver == "wf"));
    for row in &rows {
        assert!(row.mean_sq_error.is_finite());
    }
}
