//! Recovery algorithms: spectral initialization, l1 subgradient descent on
//! the thin factor, the Wirtinger-flow l2 baseline, and projected
//! subgradient solvers for the convex residual-l1 program (plain PSD cone
//! and the Toeplitz-constrained variant).

mod convex;
mod nonconvex;

pub use convex::{
    default_step_base, dykstra_psd_toeplitz, solve_phaselift, solve_phaselift_from,
    solve_toeplitz,
};
pub use nonconvex::{
    l1_objective, l1_subgradient, l2_objective, solve_nonconvex, solve_nonconvex_from, solve_wf,
    solve_wf_from, spectral_init,
};

use serde::{Deserialize, Serialize};

use crate::linalg::{LowRankFactor, SymMatrix};
use crate::scalar::Scalar;
use crate::SCHEMA_VERSION;

/// Identifier shared by the CLI, the harness, and result files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
pub enum SolverId {
    /// l1 subgradient descent on the rank-r factor.
    #[serde(rename = "nonconvex")]
    Nonconvex,
    /// Wirtinger-flow style l2 gradient descent (outlier-sensitive baseline).
    #[serde(rename = "wf")]
    Wf,
    /// Projected subgradient for the convex residual-l1 program over the
    /// PSD cone.
    #[serde(rename = "phaselift")]
    Phaselift,
    /// Same with the PSD-and-Toeplitz constraint via Dykstra projections.
    #[serde(rename = "toeplitz")]
    Toeplitz,
}

impl SolverId {
    pub fn as_str(self) -> &'static str {
        match self {
            SolverId::Nonconvex => "nonconvex",
            SolverId::Wf => "wf",
            SolverId::Phaselift => "phaselift",
            SolverId::Toeplitz => "toeplitz",
        }
    }

    /// Default iteration budget.
    pub fn default_t_max(self) -> usize {
        match self {
            SolverId::Nonconvex | SolverId::Wf => 30_000,
            SolverId::Phaselift | SolverId::Toeplitz => 50_000,
        }
    }

    /// Default success threshold for Monte-Carlo trials. The first-order
    /// convex solvers carry a coarser threshold than the factored solvers;
    /// outputs record whichever value was used.
    pub fn default_tau(self) -> f64 {
        match self {
            SolverId::Nonconvex | SolverId::Wf => 1e-6,
            SolverId::Phaselift | SolverId::Toeplitz => 1e-3,
        }
    }
}

/// Configuration of the non-convex subgradient solver.
///
/// The step size decays as
/// `step_base * max(2^(-t / step_halving_period), step_floor)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NonconvexConfig {
    pub rank: usize,
    pub t_max: usize,
    pub step_base: f64,
    pub step_halving_period: f64,
    pub step_floor: f64,
    /// Record the objective every this many iterations.
    pub history_stride: usize,
}

impl NonconvexConfig {
    pub fn new(rank: usize) -> Self {
        Self {
            rank,
            t_max: 30_000,
            step_base: 0.05,
            step_halving_period: 1000.0,
            step_floor: 1e-6,
            history_stride: 100,
        }
    }

    pub fn with_t_max(mut self, t_max: usize) -> Self {
        self.t_max = t_max;
        self
    }
}

/// The decayed step size at iteration t.
pub fn step_schedule(cfg: &NonconvexConfig, t: usize) -> f64 {
    let decay = (-(t as f64) / cfg.step_halving_period).exp2();
    cfg.step_base * decay.max(cfg.step_floor)
}

/// Configuration of the Wirtinger-flow baseline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WfConfig {
    pub rank: usize,
    pub t_max: usize,
    /// Numerator of the step size `step_scale / ||U0||_F^2`.
    pub step_scale: f64,
    /// Use the ground-truth norm for the step when available (the
    /// experiment protocol); fall back to the initializer norm otherwise.
    pub use_truth_norm: bool,
    pub history_stride: usize,
}

impl WfConfig {
    pub fn new(rank: usize) -> Self {
        Self {
            rank,
            t_max: 30_000,
            step_scale: 0.1,
            use_truth_norm: true,
            history_stride: 100,
        }
    }

    pub fn with_t_max(mut self, t_max: usize) -> Self {
        self.t_max = t_max;
        self
    }
}

/// Configuration of the convex projected-subgradient solvers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvexConfig {
    pub t_max: usize,
    /// Base step; `None` selects `||z||_1 / (m ||A*(1)/m||_F)`. The step at
    /// iteration t is `base / sqrt(t + 1)`.
    pub step_base: Option<f64>,
    pub toeplitz: bool,
    /// Dykstra rounds per outer iteration when `toeplitz` is set.
    pub dykstra_iters: usize,
    pub history_stride: usize,
}

impl ConvexConfig {
    pub fn new() -> Self {
        Self {
            t_max: 50_000,
            step_base: None,
            toeplitz: false,
            dykstra_iters: 50,
            history_stride: 100,
        }
    }

    pub fn toeplitz(mut self) -> Self {
        self.toeplitz = true;
        self
    }

    pub fn with_t_max(mut self, t_max: usize) -> Self {
        self.t_max = t_max;
        self
    }
}

impl Default for ConvexConfig {
    fn default() -> Self {
        Self::new()
    }
}

/// Which norm fed the WF step size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StepSource {
    #[serde(rename = "truth-norm")]
    TruthNorm,
    #[serde(rename = "init-norm")]
    InitNorm,
}

/// Estimate returned by a solver: thin factor (non-convex solvers) or full
/// matrix (convex solvers).
#[derive(Debug, Clone)]
pub enum Estimate<S: Scalar> {
    Factor(LowRankFactor<S>),
    Full(SymMatrix<S>),
}

impl<S: Scalar> Estimate<S> {
    pub fn fro_norm(&self) -> f64 {
        match self {
            Estimate::Factor(u) => u.materialize().fro_norm(),
            Estimate::Full(x) => x.fro_norm(),
        }
    }
}

/// Outcome of one solve.
#[derive(Debug, Clone)]
pub struct RecoveryResult<S: Scalar> {
    pub estimate: Estimate<S>,
    /// Objective values at recorded iterates. The non-convex solvers record
    /// `f(U^(t))` every `history_stride` iterations plus the final iterate;
    /// the convex solvers record the best objective seen so far, which is
    /// non-increasing by construction.
    pub objective_history: Vec<f64>,
    pub iterations_run: usize,
    pub rel_error_vs_truth: Option<f64>,
    /// Squared Frobenius error `||Xhat - X0||_F^2`.
    pub sq_error_vs_truth: Option<f64>,
    /// Seconds spent iterating.
    pub wall_time: f64,
    /// WF only: which norm fed the step size.
    pub step_source: Option<StepSource>,
}

/// On-disk schema of a recovery result. Estimate entries are stored as a
/// flat row-major array; complex entries interleave (re, im) pairs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResultJson {
    pub schema_version: String,
    pub solver: SolverId,
    pub n: usize,
    pub m: usize,
    pub truth_rank: usize,
    pub rank_guess: usize,
    pub is_complex: bool,
    pub seeds: crate::model::SeedTriple,
    pub diverged: bool,
    pub iterations_run: usize,
    pub rel_error: Option<f64>,
    pub sq_error: Option<f64>,
    pub wall_time_s: f64,
    pub step_source: Option<StepSource>,
    pub objective_history: Vec<f64>,
    pub estimate_kind: String,
    /// Columns of the factor (or n for a full matrix).
    pub estimate_cols: usize,
    pub estimate_entries: Vec<f64>,
    /// Echo of the fully resolved solve configuration.
    pub config: serde_json::Value,
}

fn interleave<S: Scalar>(data: &[S]) -> Vec<f64> {
    if S::IS_COMPLEX {
        let mut out = Vec::with_capacity(2 * data.len());
        for v in data {
            out.push(v.re());
            out.push(v.im());
        }
        out
    } else {
        data.iter().map(|v| v.re()).collect()
    }
}

impl<S: Scalar> RecoveryResult<S> {
    pub fn to_json(
        &self,
        solver: SolverId,
        inst: &crate::model::Instance<S>,
        rank_guess: usize,
        config: serde_json::Value,
    ) -> ResultJson {
        let (kind, cols, entries) = match &self.estimate {
            Estimate::Factor(u) => ("factor", u.r(), interleave(u.data())),
            Estimate::Full(x) => ("full", x.n(), interleave(x.data())),
        };
        ResultJson {
            schema_version: SCHEMA_VERSION.to_string(),
            solver,
            n: inst.n(),
            m: inst.m(),
            truth_rank: inst.rank(),
            rank_guess,
            is_complex: S::IS_COMPLEX,
            seeds: inst.seeds,
            diverged: false,
            iterations_run: self.iterations_run,
            rel_error: self.rel_error_vs_truth,
            sq_error: self.sq_error_vs_truth,
            wall_time_s: self.wall_time,
            step_source: self.step_source,
            objective_history: self.objective_history.clone(),
            estimate_kind: kind.to_string(),
            estimate_cols: cols,
            estimate_entries: entries,
            config,
        }
    }
}

/// Relative and squared error of an estimate against the ground truth,
/// factor-aware (Gram route when both sides are thin). Returns `None` for a
/// zero ground truth, where the relative error is undefined.
pub fn errors_vs_truth<S: Scalar>(
    estimate: &Estimate<S>,
    truth: &crate::model::GroundTruth<S>,
) -> crate::Result<Option<(f64, f64)>> {
    use crate::linalg::{rel_error, rel_error_factored, rel_error_mixed};
    use crate::Error;
    let rel = match (estimate, truth.factor()) {
        (Estimate::Factor(u), Some(u0)) => rel_error_factored(u, u0),
        (Estimate::Factor(u), None) => rel_error(&u.materialize(), &truth.x0()),
        (Estimate::Full(x), Some(u0)) => rel_error_mixed(x, u0),
        (Estimate::Full(x), None) => rel_error(x, &truth.x0()),
    };
    let rel = match rel {
        Ok(v) => v,
        Err(Error::ZeroReference) => return Ok(None),
        Err(e) => return Err(e),
    };
    let truth_norm = match truth.factor() {
        Some(u0) => {
            let g = u0.gram();
            g.iter().map(|v| v.abs2()).sum::<f64>().sqrt()
        }
        None => truth.x0().fro_norm(),
    };
    let abs = rel * truth_norm;
    Ok(Some((rel, abs * abs)))
}

#[cfg(test)]
mod tests;
