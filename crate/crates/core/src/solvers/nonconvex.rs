//! Factored first-order solvers: l1 subgradient descent and the
//! Wirtinger-flow l2 baseline. Both start from the spectral initializer and
//! keep the iterate in thin n-by-r form throughout; per-iteration cost is
//! O(m n r).

use std::time::Instant;

use crate::error::{Error, Result};
use crate::linalg::{best_rank_r, project_row, LowRankFactor, SensingEnsemble};
use crate::model::Instance;
use crate::scalar::Scalar;
use crate::solvers::{
    errors_vs_truth, step_schedule, Estimate, NonconvexConfig, RecoveryResult, StepSource,
    WfConfig,
};

const DIVERGENCE_FACTOR: f64 = 1e6;

#[inline]
fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Best rank-r factor of the measurement-weighted covariance
/// `(1/m) sum_i z_i a_i a_i'`.
pub fn spectral_init<S: Scalar>(inst: &Instance<S>, r: usize) -> Result<LowRankFactor<S>> {
    let m = inst.m() as f64;
    let surrogate = inst.ensemble.adjoint(&inst.z)?.scaled(1.0 / m);
    best_rank_r(&surrogate, r)
}

/// `f(U) = (1/2m) sum_i | z_i - |U' a_i|^2 |`.
pub fn l1_objective<S: Scalar>(ens: &SensingEnsemble<S>, z: &[f64], u: &LowRankFactor<S>) -> f64 {
    let mut p = vec![S::ZERO; u.r()];
    let mut l1 = 0.0;
    for i in 0..ens.m() {
        project_row(u, ens.row(i), &mut p);
        let q: f64 = p.iter().map(|v| v.abs2()).sum();
        l1 += (z[i] - q).abs();
    }
    l1 / (2.0 * ens.m() as f64)
}

/// `g(U) = (1/4m) sum_i (z_i - |U' a_i|^2)^2`, the WF loss.
pub fn l2_objective<S: Scalar>(ens: &SensingEnsemble<S>, z: &[f64], u: &LowRankFactor<S>) -> f64 {
    let mut p = vec![S::ZERO; u.r()];
    let mut sq = 0.0;
    for i in 0..ens.m() {
        project_row(u, ens.row(i), &mut p);
        let q: f64 = p.iter().map(|v| v.abs2()).sum();
        sq += (z[i] - q) * (z[i] - q);
    }
    sq / (4.0 * ens.m() as f64)
}

struct SweepStats {
    l1: f64,
    sq: f64,
}

/// One pass over the measurements: returns the residual norms and
/// accumulates `sum_i weight(res_i) a_i a_i' U` into `acc` (n-by-r
/// row-major), where `res_i = z_i - |U' a_i|^2`.
fn weighted_accumulate<S: Scalar>(
    ens: &SensingEnsemble<S>,
    z: &[f64],
    u: &LowRankFactor<S>,
    acc: &mut [S],
    p: &mut [S],
    weight: fn(f64) -> f64,
) -> SweepStats {
    let n = u.n();
    let r = u.r();
    acc.fill(S::ZERO);
    let mut stats = SweepStats { l1: 0.0, sq: 0.0 };
    for i in 0..ens.m() {
        let a = ens.row(i);
        project_row(u, a, p);
        let q: f64 = p.iter().map(|v| v.abs2()).sum();
        let res = z[i] - q;
        stats.l1 += res.abs();
        stats.sq += res * res;
        let w = weight(res);
        if w == 0.0 {
            continue;
        }
        for k in 0..n {
            let ak = a[k].scale(w);
            let row = &mut acc[k * r..(k + 1) * r];
            for (dst, pj) in row.iter_mut().zip(p.iter()) {
                *dst += ak * pj.conj();
            }
        }
    }
    stats
}

/// Subgradient of `f` at `U`:
/// `-(1/m) sum_i sgn(z_i - |U' a_i|^2) a_i a_i' U`, with `sgn(0) = 0`.
/// Returned as a flat n-by-r row-major array.
pub fn l1_subgradient<S: Scalar>(
    ens: &SensingEnsemble<S>,
    z: &[f64],
    u: &LowRankFactor<S>,
) -> Result<Vec<S>> {
    if u.n() != ens.n() || z.len() != ens.m() {
        return Err(Error::DimensionMismatch(
            "subgradient inputs disagree with the ensemble".into(),
        ));
    }
    let mut acc = vec![S::ZERO; u.n() * u.r()];
    let mut p = vec![S::ZERO; u.r()];
    weighted_accumulate(ens, z, u, &mut acc, &mut p, sgn);
    let scale = -1.0 / ens.m() as f64;
    for v in &mut acc {
        *v = v.scale(scale);
    }
    Ok(acc)
}

/// Subgradient descent on the factored l1 objective, initialized spectrally.
pub fn solve_nonconvex<S: Scalar>(
    inst: &Instance<S>,
    cfg: &NonconvexConfig,
) -> Result<RecoveryResult<S>> {
    let u0 = spectral_init(inst, cfg.rank)?;
    solve_nonconvex_from(inst, cfg, u0)
}

/// Same, from an explicit starting factor (its width overrides `cfg.rank`).
pub fn solve_nonconvex_from<S: Scalar>(
    inst: &Instance<S>,
    cfg: &NonconvexConfig,
    u0: LowRankFactor<S>,
) -> Result<RecoveryResult<S>> {
    if u0.n() != inst.n() {
        return Err(Error::DimensionMismatch(
            "starting factor height differs from the instance".into(),
        ));
    }
    let start = Instant::now();
    let ens = &inst.ensemble;
    let z = &inst.z;
    let m = ens.m() as f64;
    let mut u = u0;
    let init_norm = u.fro_norm();
    let guard = DIVERGENCE_FACTOR * init_norm;

    let mut history = Vec::new();
    let mut acc = vec![S::ZERO; u.n() * u.r()];
    let mut p = vec![S::ZERO; u.r()];
    for t in 0..cfg.t_max {
        let stats = weighted_accumulate(ens, z, &u, &mut acc, &mut p, sgn);
        if t % cfg.history_stride == 0 {
            history.push(stats.l1 / (2.0 * m));
        }
        // U <- U - mu * (-(1/m) acc) = U + (mu/m) acc.
        let coeff = step_schedule(cfg, t) / m;
        for (dst, g) in u.data_mut().iter_mut().zip(acc.iter()) {
            *dst += g.scale(coeff);
        }
        if !u.is_finite() || u.fro_norm() > guard {
            return Err(Error::Diverged { iteration: t });
        }
    }
    history.push(l1_objective(ens, z, &u));

    let estimate = Estimate::Factor(u);
    let errors = errors_vs_truth(&estimate, &inst.truth)?;
    Ok(RecoveryResult {
        estimate,
        objective_history: history,
        iterations_run: cfg.t_max,
        rel_error_vs_truth: errors.map(|e| e.0),
        sq_error_vs_truth: errors.map(|e| e.1),
        wall_time: start.elapsed().as_secs_f64(),
        step_source: None,
    })
}

/// Wirtinger-flow extension: gradient descent on the squared-l2 residual,
/// `U <- U + mu (1/m) sum_i (z_i - |U' a_i|^2) a_i a_i' U`, same spectral
/// initialization, constant step `step_scale / ||U0||_F^2`.
pub fn solve_wf<S: Scalar>(inst: &Instance<S>, cfg: &WfConfig) -> Result<RecoveryResult<S>> {
    let u0 = spectral_init(inst, cfg.rank)?;
    solve_wf_from(inst, cfg, u0)
}

/// WF from an explicit starting factor (its width overrides `cfg.rank`).
pub fn solve_wf_from<S: Scalar>(
    inst: &Instance<S>,
    cfg: &WfConfig,
    u0: LowRankFactor<S>,
) -> Result<RecoveryResult<S>> {
    if u0.n() != inst.n() {
        return Err(Error::DimensionMismatch(
            "starting factor height differs from the instance".into(),
        ));
    }
    let start = Instant::now();
    let ens = &inst.ensemble;
    let z = &inst.z;
    let m = ens.m() as f64;
    let mut u = u0;
    let init_norm = u.fro_norm();
    let guard = DIVERGENCE_FACTOR * init_norm;

    // ||U0||_F^2 = tr(X0) for any factored truth.
    let (denom, source) = if cfg.use_truth_norm {
        (inst.truth.trace(), StepSource::TruthNorm)
    } else {
        (init_norm * init_norm, StepSource::InitNorm)
    };
    let (denom, source) = if denom > 0.0 {
        (denom, source)
    } else {
        let fallback = init_norm * init_norm;
        (fallback, StepSource::InitNorm)
    };
    let mu = if denom > 0.0 {
        cfg.step_scale / denom
    } else {
        0.0
    };

    let mut history = Vec::new();
    let mut acc = vec![S::ZERO; u.n() * u.r()];
    let mut p = vec![S::ZERO; u.r()];
    for t in 0..cfg.t_max {
        let stats = weighted_accumulate(ens, z, &u, &mut acc, &mut p, |res| res);
        if t % cfg.history_stride == 0 {
            history.push(stats.sq / (4.0 * m));
        }
        let coeff = mu / m;
        for (dst, g) in u.data_mut().iter_mut().zip(acc.iter()) {
            *dst += g.scale(coeff);
        }
        if !u.is_finite() || u.fro_norm() > guard {
            return Err(Error::Diverged { iteration: t });
        }
    }
    history.push(l2_objective(ens, z, &u));

    let estimate = Estimate::Factor(u);
    let errors = errors_vs_truth(&estimate, &inst.truth)?;
    Ok(RecoveryResult {
        estimate,
        objective_history: history,
        iterations_run: cfg.t_max,
        rel_error_vs_truth: errors.map(|e| e.0),
        sq_error_vs_truth: errors.map(|e| e.1),
        wall_time: start.elapsed().as_secs_f64(),
        step_source: Some(source),
    })
}
