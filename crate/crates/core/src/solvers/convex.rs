//! Projected subgradient solvers for the convex program
//! `min ||z - A(X)||_1 over X >= 0`, and the variant that additionally
//! constrains X to the Hermitian Toeplitz subspace via Dykstra's
//! alternating projections.
//!
//! The iteration is `X <- P(X - (eta_t/m) A*(sgn(A(X) - z)))` with
//! `eta_t = eta_0 / sqrt(t + 1)`; the returned estimate is the
//! best-objective iterate, not the last. PSD projections are warm-started
//! with the previous eigenvector matrix, which cuts the Jacobi sweeps on
//! slowly-moving iterates.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::linalg::{project_psd_warm, project_toeplitz, SensingEnsemble, SymMatrix};
use crate::model::Instance;
use crate::scalar::Scalar;
use crate::solvers::{errors_vs_truth, ConvexConfig, Estimate, RecoveryResult};

const DIVERGENCE_FACTOR: f64 = 1e6;

/// Default base step `||z||_1 / (m ||A*(1)/m||_F)`: the residual scale over
/// the subgradient scale, so early steps move a constant fraction of the
/// iterate.
pub fn default_step_base<S: Scalar>(ens: &SensingEnsemble<S>, z: &[f64]) -> Result<f64> {
    let m = ens.m() as f64;
    let z_l1: f64 = z.iter().map(|v| v.abs()).sum();
    let ones = vec![1.0; ens.m()];
    let scale = ens.adjoint(&ones)?.scaled(1.0 / m).fro_norm();
    if scale == 0.0 || z_l1 == 0.0 {
        return Ok(0.0);
    }
    Ok(z_l1 / (m * scale))
}

/// `iters` rounds of Dykstra's alternating projections between the PSD cone
/// and the Toeplitz subspace. The final half-step is the Toeplitz
/// projection, so the output is exactly Toeplitz and PSD up to the
/// alternation residual. `warm` carries the eigenvector matrix between PSD
/// projections.
pub fn dykstra_psd_toeplitz<S: Scalar>(
    x: &SymMatrix<S>,
    iters: usize,
    warm: &mut Option<Vec<S>>,
) -> Result<SymMatrix<S>> {
    let n = x.n();
    let mut cur = x.clone();
    let mut p = SymMatrix::<S>::zeros(n);
    let mut q = SymMatrix::<S>::zeros(n);
    for _ in 0..iters {
        let mut arg = cur.clone();
        arg.add_scaled(&p, 1.0);
        let (psd, vecs) = project_psd_warm(&arg, warm.as_deref())?;
        *warm = Some(vecs);
        p = arg.sub(&psd)?;

        let mut arg2 = psd.clone();
        arg2.add_scaled(&q, 1.0);
        let toep = project_toeplitz(&arg2);
        q = arg2.sub(&toep)?;
        cur = toep;
    }
    Ok(cur)
}

/// Robust recovery through the convex residual-l1 program over the PSD cone.
pub fn solve_phaselift<S: Scalar>(
    inst: &Instance<S>,
    cfg: &ConvexConfig,
) -> Result<RecoveryResult<S>> {
    let m = inst.m() as f64;
    let x0 = inst.ensemble.adjoint(&inst.z)?.scaled(1.0 / m);
    solve_phaselift_from(inst, cfg, x0)
}

/// Toeplitz-constrained variant; expects a complex instance in practice but
/// is generic over the scalar.
pub fn solve_toeplitz<S: Scalar>(
    inst: &Instance<S>,
    cfg: &ConvexConfig,
) -> Result<RecoveryResult<S>> {
    let cfg = ConvexConfig {
        toeplitz: true,
        ..*cfg
    };
    let m = inst.m() as f64;
    let x0 = inst.ensemble.adjoint(&inst.z)?.scaled(1.0 / m);
    solve_phaselift_from(inst, &cfg, x0)
}

/// Projected subgradient from an explicit starting matrix (projected onto
/// the feasible set before the first step).
pub fn solve_phaselift_from<S: Scalar>(
    inst: &Instance<S>,
    cfg: &ConvexConfig,
    start: SymMatrix<S>,
) -> Result<RecoveryResult<S>> {
    if start.n() != inst.n() {
        return Err(Error::DimensionMismatch(
            "starting matrix size differs from the instance".into(),
        ));
    }
    let clock = Instant::now();
    let ens = &inst.ensemble;
    let z = &inst.z;
    let m = ens.m() as f64;
    let eta0 = match cfg.step_base {
        Some(v) => v,
        None => default_step_base(ens, z)?,
    };

    let mut warm: Option<Vec<S>> = None;
    let mut x = if cfg.toeplitz {
        dykstra_psd_toeplitz(&start, cfg.dykstra_iters, &mut warm)?
    } else {
        let (proj, vecs) = project_psd_warm(&start, None)?;
        warm = Some(vecs);
        proj
    };
    let init_norm = x.fro_norm();
    let guard = DIVERGENCE_FACTOR * init_norm;

    let mut best_obj = f64::INFINITY;
    let mut best_x = x.clone();
    let mut history = Vec::new();
    let mut signs = vec![0.0f64; ens.m()];
    for t in 0..cfg.t_max {
        let ax = ens.measure(&x)?;
        let mut obj = 0.0;
        for i in 0..ens.m() {
            let res = ax[i] - z[i];
            obj += res.abs();
            signs[i] = if res > 0.0 {
                1.0
            } else if res < 0.0 {
                -1.0
            } else {
                0.0
            };
        }
        if obj < best_obj {
            best_obj = obj;
            best_x.clone_from(&x);
        }
        if t % cfg.history_stride == 0 {
            history.push(best_obj);
        }

        let direction = ens.adjoint(&signs)?;
        let eta = eta0 / ((t + 1) as f64).sqrt();
        x.add_scaled(&direction, -eta / m);
        x = if cfg.toeplitz {
            dykstra_psd_toeplitz(&x, cfg.dykstra_iters, &mut warm)?
        } else {
            let (proj, vecs) = project_psd_warm(&x, warm.as_deref())?;
            warm = Some(vecs);
            proj
        };
        if !x.is_finite() || x.fro_norm() > guard {
            return Err(Error::Diverged { iteration: t });
        }
    }
    // Final iterate may beat the recorded best.
    let ax = ens.measure(&x)?;
    let final_obj: f64 = ax.iter().zip(z.iter()).map(|(a, b)| (a - b).abs()).sum();
    if final_obj < best_obj {
        best_obj = final_obj;
        best_x = x;
    }
    history.push(best_obj);

    let estimate = Estimate::Full(best_x);
    let errors = errors_vs_truth(&estimate, &inst.truth)?;
    Ok(RecoveryResult {
        estimate,
        objective_history: history,
        iterations_run: cfg.t_max,
        rel_error_vs_truth: errors.map(|e| e.0),
        sq_error_vs_truth: errors.map(|e| e.1),
        wall_time: clock.elapsed().as_secs_f64(),
        step_source: None,
    })
}
