// Temporary calibration probes; run with --ignored. Deleted before release.

use ranklift::harness::{run_trial, CorruptionTemplate, TrialParams};
use ranklift::model::{
    make_instance, InstanceParams, NoiseModel, OutlierModel, SeedTriple, TruthKind,
};
use ranklift::rng::fold;
use ranklift::solvers::{
    default_step_base, solve_nonconvex, solve_phaselift, solve_toeplitz, ConvexConfig,
    NonconvexConfig, SolverId,
};

fn params(solver: SolverId, n: usize, m: usize, r: usize) -> TrialParams {
    TrialParams {
        n,
        m,
        truth_rank: r,
        kind: TruthKind::GaussianFactor,
        rank_guess: None,
        solver,
        corruption: CorruptionTemplate::clean(),
        tau: None,
        t_max: None,
        dykstra_iters: 50,
    }
}

fn summarize(label: &str, mut rels: Vec<f64>, time: f64) {
    let seeds = rels.len();
    rels.sort_by(|a, b| {
        a.partial_cmp(b)
            .unwrap_or_else(|| a.is_nan().cmp(&b.is_nan()))
    });
    let diverged = rels.iter().filter(|v| v.is_nan()).count();
    println!(
        "{label}: median {:.3e} worst {:.3e} best {:.3e} diverged {diverged} ({:.2}s/seed)",
        rels[seeds / 2],
        rels[seeds - 1 - diverged],
        rels[0],
        time / seeds as f64
    );
}

fn run_seeds(p: &TrialParams, label: &str, seeds: u64) {
    let mut rels: Vec<f64> = Vec::new();
    let mut time = 0.0;
    for s in 0..seeds {
        let out = run_trial(p, fold(1234, s)).unwrap();
        rels.push(out.rel_error);
        time += out.wall_time;
    }
    summarize(label, rels, time);
}

#[test]
#[ignore]
fn probe_wf_median_20() {
    let mut q = params(SolverId::Wf, 20, 400, 1);
    q.corruption.outlier_fraction = 0.10;
    q.corruption.outlier_model = Some(OutlierModel::RademacherScaled { amplitude: 10.0 });
    run_seeds(&q, "wf s=0.10 amp10 n20 m400 r1 (20 seeds)", 20);
}

fn convex_at_scale(
    n: usize,
    m: usize,
    r: usize,
    outliers: bool,
    scale: f64,
    t_max: usize,
    seeds: u64,
    label: &str,
) {
    let mut rels = Vec::new();
    let mut time = 0.0;
    for s in 0..seeds {
        let ip = InstanceParams {
            n,
            m,
            r,
            kind: TruthKind::GaussianFactor,
            outlier_fraction: if outliers { 0.05 } else { 0.0 },
            outlier_model: OutlierModel::AdditiveGaussian { sigma: 1.0 },
            noise_model: NoiseModel::None,
            mode: Default::default(),
            seeds: SeedTriple::derive(fold(99, s)),
        };
        let inst = make_instance::<f64>(&ip).unwrap();
        let eta0 = default_step_base(&inst.ensemble, &inst.z).unwrap();
        let cfg = ConvexConfig {
            step_base: Some(eta0 * scale),
            ..ConvexConfig::new().with_t_max(t_max)
        };
        let out = solve_phaselift(&inst, &cfg).unwrap();
        rels.push(out.rel_error_vs_truth.unwrap());
        time += out.wall_time;
    }
    summarize(label, rels, time);
}

#[test]
#[ignore]
fn probe_convex_step_scale() {
    for scale in [1.0, 0.5, 0.25, 0.125] {
        convex_at_scale(
            20,
            300,
            1,
            false,
            scale,
            50_000,
            5,
            &format!("phaselift clean m300 scale={scale}"),
        );
    }
    convex_at_scale(20, 400, 1, true, 0.25, 50_000, 5, "phaselift outliers m400 scale=0.25");
}

#[test]
#[ignore]
fn probe_toeplitz_step_scale() {
    use ranklift::num_complex::Complex64;
    for (scale, t_max, dyk) in [(0.25, 10_000, 20), (0.5, 10_000, 20), (0.25, 20_000, 20)] {
        let mut rels = Vec::new();
        let mut time = 0.0;
        for s in 0..3u64 {
            let ip = InstanceParams {
                n: 16,
                m: 48,
                r: 2,
                kind: TruthKind::ToeplitzVandermonde,
                outlier_fraction: 0.0,
                outlier_model: OutlierModel::AdditiveGaussian { sigma: 1.0 },
                noise_model: NoiseModel::None,
                mode: Default::default(),
                seeds: SeedTriple::derive(fold(7, s)),
            };
            let inst = make_instance::<Complex64>(&ip).unwrap();
            let eta0 = default_step_base(&inst.ensemble, &inst.z).unwrap();
            let cfg = ConvexConfig {
                step_base: Some(eta0 * scale),
                dykstra_iters: dyk,
                ..ConvexConfig::new().toeplitz().with_t_max(t_max)
            };
            let out = solve_toeplitz(&inst, &cfg).unwrap();
            rels.push(out.rel_error_vs_truth.unwrap());
            time += out.wall_time;
        }
        summarize(
            &format!("toeplitz clean scale={scale} tmax={t_max} dyk={dyk}"),
            rels,
            time,
        );
    }
}

#[test]
#[ignore]
fn probe_rank4_floor() {
    for (floor, t_max) in [(1e-6, 30_000), (1e-8, 30_000), (1e-6, 60_000), (1e-8, 60_000)] {
        let mut rels = Vec::new();
        let mut time = 0.0;
        for s in 0..5u64 {
            let ip = InstanceParams {
                n: 20,
                m: 800,
                r: 3,
                kind: TruthKind::GaussianFactor,
                outlier_fraction: 0.05,
                outlier_model: OutlierModel::AdditiveGaussian { sigma: 1.0 },
                noise_model: NoiseModel::UniformEntrywise {
                    half_width: 4.0 / 800.0,
                },
                mode: Default::default(),
                seeds: SeedTriple::derive(fold(55, s)),
            };
            let inst = make_instance::<f64>(&ip).unwrap();
            let cfg = NonconvexConfig {
                step_floor: floor,
                ..NonconvexConfig::new(4).with_t_max(t_max)
            };
            let out = solve_nonconvex(&inst, &cfg).unwrap();
            rels.push(out.rel_error_vs_truth.unwrap());
            time += out.wall_time;
        }
        summarize(
            &format!("nonconvex guess4 floor={floor:.0e} tmax={t_max}"),
            rels,
            time,
        );
    }
    // Reference: exact-rank floor under the same corruption.
    let mut rels = Vec::new();
    for s in 0..5u64 {
        let ip = InstanceParams {
            n: 20,
            m: 800,
            r: 3,
            kind: TruthKind::GaussianFactor,
            outlier_fraction: 0.05,
            outlier_model: OutlierModel::AdditiveGaussian { sigma: 1.0 },
            noise_model: NoiseModel::UniformEntrywise {
                half_width: 4.0 / 800.0,
            },
            mode: Default::default(),
            seeds: SeedTriple::derive(fold(55, s)),
        };
        let inst = make_instance::<f64>(&ip).unwrap();
        let out = solve_nonconvex(&inst, &NonconvexConfig::new(3)).unwrap();
        rels.push(out.rel_error_vs_truth.unwrap());
    }
    summarize("nonconvex guess3 reference", rels, 0.0);
}
