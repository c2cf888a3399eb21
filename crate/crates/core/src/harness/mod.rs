//! Monte-Carlo experiment harness: phase-transition sweeps over two axes,
//! MSE-vs-m curves, and empirical restricted-isometry probes.
//!
//! Trial seeds are derived from the sweep's base seed and the cell
//! coordinates with the canonical combiner ([`crate::rng::fold`]), so cells
//! are independent of each other and of execution order: trials can run
//! serially or in parallel with identical results.

pub mod output;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    make_instance, CorruptionMode, CorruptionSpec, Instance, InstanceParams, NoiseModel,
    OutlierModel, SeedTriple, TruthKind,
};
use crate::rng::fold;
use crate::scalar::Scalar;
use crate::solvers::{
    solve_nonconvex, solve_phaselift, solve_toeplitz, solve_wf, ConvexConfig, NonconvexConfig,
    SolverId, WfConfig,
};
use crate::SCHEMA_VERSION;

/// Corruption model without a seed; the harness derives per-trial seeds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorruptionTemplate {
    #[serde(default)]
    pub outlier_fraction: f64,
    /// Required whenever `outlier_fraction > 0`; sweep configurations must
    /// state the model explicitly.
    #[serde(default)]
    pub outlier_model: Option<OutlierModel>,
    #[serde(default)]
    pub noise_model: NoiseModel,
    #[serde(default)]
    pub mode: CorruptionMode,
}

impl CorruptionTemplate {
    pub fn clean() -> Self {
        Self {
            outlier_fraction: 0.0,
            outlier_model: None,
            noise_model: NoiseModel::None,
            mode: CorruptionMode::Additive,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.outlier_fraction) {
            return Err(Error::InvalidSpec(format!(
                "outlier fraction {} must lie in [0, 1)",
                self.outlier_fraction
            )));
        }
        if self.outlier_fraction > 0.0 && self.outlier_model.is_none() {
            return Err(Error::InvalidSpec(
                "outlier fraction is positive but no outlier model is given".into(),
            ));
        }
        Ok(())
    }

    /// Bind a seed. With a zero fraction the placeholder model is never
    /// sampled.
    pub fn with_seed(&self, seed: u64) -> CorruptionSpec {
        CorruptionSpec {
            outlier_fraction: self.outlier_fraction,
            outlier_model: self
                .outlier_model
                .unwrap_or(OutlierModel::AdditiveGaussian { sigma: 1.0 }),
            noise_model: self.noise_model,
            mode: self.mode,
            seed,
        }
    }
}

/// Everything needed to run one trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialParams {
    pub n: usize,
    pub m: usize,
    pub truth_rank: usize,
    pub kind: TruthKind,
    /// Rank prior handed to the factored solvers; defaults to the truth
    /// rank.
    pub rank_guess: Option<usize>,
    pub solver: SolverId,
    pub corruption: CorruptionTemplate,
    /// Success threshold; defaults to the solver's.
    pub tau: Option<f64>,
    /// Iteration budget; defaults to the solver's.
    pub t_max: Option<usize>,
    pub dykstra_iters: usize,
}

impl TrialParams {
    pub fn resolved_tau(&self) -> f64 {
        self.tau.unwrap_or_else(|| self.solver.default_tau())
    }

    pub fn resolved_t_max(&self) -> usize {
        self.t_max.unwrap_or_else(|| self.solver.default_t_max())
    }

    pub fn resolved_rank_guess(&self) -> usize {
        self.rank_guess.unwrap_or(self.truth_rank)
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 || self.m == 0 {
            return Err(Error::InvalidSpec("n and m must be positive".into()));
        }
        if self.truth_rank == 0 || self.truth_rank > self.n {
            return Err(Error::InvalidSpec(format!(
                "truth rank {} out of range 1..={}",
                self.truth_rank, self.n
            )));
        }
        let guess = self.resolved_rank_guess();
        if guess == 0 || guess > self.n {
            return Err(Error::InvalidSpec(format!(
                "rank guess {guess} out of range 1..={}",
                self.n
            )));
        }
        if self.solver == SolverId::Toeplitz && self.kind != TruthKind::ToeplitzVandermonde {
            return Err(Error::InvalidSpec(
                "the toeplitz solver needs a toeplitz-vandermonde instance".into(),
            ));
        }
        self.corruption.validate()
    }
}

/// Outcome of one trial. `rel_error` is NaN when the solver aborted
/// (divergence guard or a numerical failure); such trials count as failures
/// and are tallied separately.
#[derive(Debug, Clone, Copy)]
pub struct TrialOutcome {
    pub success: bool,
    pub rel_error: f64,
    pub wall_time: f64,
    pub diverged: bool,
}

/// Per-trial seed: fold the base seed with both cell coordinates (as f64
/// bits) and the trial index.
pub fn trial_seed(base_seed: u64, axis1: f64, axis2: f64, trial: usize) -> u64 {
    fold(
        fold(fold(base_seed, axis1.to_bits()), axis2.to_bits()),
        trial as u64,
    )
}

fn solve_generic<S: Scalar>(params: &TrialParams, inst: &Instance<S>) -> Result<(f64, f64)> {
    let t_max = params.resolved_t_max();
    let guess = params.resolved_rank_guess();
    let result = match params.solver {
        SolverId::Nonconvex => {
            solve_nonconvex(inst, &NonconvexConfig::new(guess).with_t_max(t_max))?
        }
        SolverId::Wf => solve_wf(inst, &WfConfig::new(guess).with_t_max(t_max))?,
        SolverId::Phaselift => solve_phaselift(inst, &ConvexConfig::new().with_t_max(t_max))?,
        SolverId::Toeplitz => {
            let cfg = ConvexConfig {
                t_max,
                dykstra_iters: params.dykstra_iters,
                ..ConvexConfig::new().toeplitz()
            };
            solve_toeplitz(inst, &cfg)?
        }
    };
    Ok((
        result.rel_error_vs_truth.unwrap_or(f64::NAN),
        result.sq_error_vs_truth.unwrap_or(f64::NAN),
    ))
}

fn run_trial_inner(params: &TrialParams, seed: u64) -> Result<(f64, f64)> {
    let instance_params = InstanceParams {
        n: params.n,
        m: params.m,
        r: params.truth_rank,
        kind: params.kind,
        outlier_fraction: params.corruption.outlier_fraction,
        outlier_model: params
            .corruption
            .outlier_model
            .unwrap_or(OutlierModel::AdditiveGaussian { sigma: 1.0 }),
        noise_model: params.corruption.noise_model,
        mode: params.corruption.mode,
        seeds: SeedTriple::derive(seed),
    };
    if params.kind.is_complex() {
        let inst = make_instance::<Complex64>(&instance_params)?;
        solve_generic(params, &inst)
    } else {
        let inst = make_instance::<f64>(&instance_params)?;
        solve_generic(params, &inst)
    }
}

/// Generate the instance for `(params, seed)`, run the configured solver,
/// and evaluate success at the resolved threshold. Solver aborts are data
/// (failed trials), not errors; parameter errors propagate.
pub fn run_trial(params: &TrialParams, seed: u64) -> Result<TrialOutcome> {
    params.validate()?;
    let start = std::time::Instant::now();
    match run_trial_inner(params, seed) {
        Ok((rel, _sq)) => Ok(TrialOutcome {
            success: rel <= params.resolved_tau(),
            rel_error: rel,
            wall_time: start.elapsed().as_secs_f64(),
            diverged: false,
        }),
        Err(Error::Diverged { .. }) | Err(Error::EigenNonConvergence { .. }) => Ok(TrialOutcome {
            success: false,
            rel_error: f64::NAN,
            wall_time: start.elapsed().as_secs_f64(),
            diverged: true,
        }),
        Err(e) => Err(e),
    }
}

/// Sweep axis selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AxisName {
    #[serde(rename = "m")]
    M,
    #[serde(rename = "r")]
    R,
    #[serde(rename = "outlier_fraction")]
    OutlierFraction,
}

impl AxisName {
    pub fn as_str(self) -> &'static str {
        match self {
            AxisName::M => "m",
            AxisName::R => "r",
            AxisName::OutlierFraction => "outlier_fraction",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub name: AxisName,
    pub values: Vec<f64>,
}

impl Axis {
    fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::InvalidSpec(format!(
                "axis {} has no values",
                self.name.as_str()
            )));
        }
        for w in self.values.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::InvalidSpec(format!(
                    "axis {} values must be strictly increasing",
                    self.name.as_str()
                )));
            }
        }
        match self.name {
            AxisName::M | AxisName::R => {
                for &v in &self.values {
                    if v < 1.0 || v.fract() != 0.0 {
                        return Err(Error::InvalidSpec(format!(
                            "axis {} values must be positive integers",
                            self.name.as_str()
                        )));
                    }
                }
            }
            AxisName::OutlierFraction => {
                for &v in &self.values {
                    if !(0.0..1.0).contains(&v) {
                        return Err(Error::InvalidSpec(
                            "outlier fractions must lie in [0, 1)".into(),
                        ));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Cell-independent parameters of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepFixed {
    pub n: usize,
    /// Measurement count when `m` is not an axis.
    #[serde(default)]
    pub m: Option<usize>,
    #[serde(default = "default_kind")]
    pub kind: TruthKind,
    pub solver: SolverId,
    #[serde(default = "CorruptionTemplate::clean")]
    pub corruption: CorruptionTemplate,
    /// Truth rank when `r` is not an axis.
    #[serde(default = "default_rank")]
    pub rank: usize,
    #[serde(default)]
    pub rank_guess: Option<usize>,
    #[serde(default)]
    pub tau: Option<f64>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    pub base_seed: u64,
    #[serde(default)]
    pub t_max: Option<usize>,
    #[serde(default = "default_dykstra")]
    pub dykstra_iters: usize,
}

fn default_kind() -> TruthKind {
    TruthKind::GaussianFactor
}
fn default_rank() -> usize {
    1
}
fn default_trials() -> usize {
    100
}
fn default_dykstra() -> usize {
    50
}

/// A two-axis Monte-Carlo sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub axis1: Axis,
    pub axis2: Axis,
    pub fixed: SweepFixed,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.axis1.name == self.axis2.name {
            return Err(Error::InvalidSpec("axis names must be distinct".into()));
        }
        self.axis1.validate()?;
        self.axis2.validate()?;
        if self.fixed.trials == 0 {
            return Err(Error::InvalidSpec("trials must be at least 1".into()));
        }
        // Validate one representative cell per coordinate pair.
        for &a1 in &self.axis1.values {
            for &a2 in &self.axis2.values {
                self.cell_params(a1, a2).validate()?;
            }
        }
        Ok(())
    }

    /// Trial parameters of the cell at axis coordinates `(a1, a2)`.
    pub fn cell_params(&self, a1: f64, a2: f64) -> TrialParams {
        let mut params = TrialParams {
            n: self.fixed.n,
            m: self.fixed.m.unwrap_or(0),
            truth_rank: self.fixed.rank,
            kind: self.fixed.kind,
            rank_guess: self.fixed.rank_guess,
            solver: self.fixed.solver,
            corruption: self.fixed.corruption,
            tau: self.fixed.tau,
            t_max: self.fixed.t_max,
            dykstra_iters: self.fixed.dykstra_iters,
        };
        for (axis, value) in [(&self.axis1, a1), (&self.axis2, a2)] {
            match axis.name {
                AxisName::M => params.m = value as usize,
                AxisName::R => params.truth_rank = value as usize,
                AxisName::OutlierFraction => params.corruption.outlier_fraction = value,
            }
        }
        params
    }

    pub fn resolved_tau(&self) -> f64 {
        self.fixed
            .tau
            .unwrap_or_else(|| self.fixed.solver.default_tau())
    }
}

/// Aggregates of one sweep cell. `mean_rel_error` averages the non-aborted
/// trials (NaN if every trial aborted); aborted trials are counted in
/// `diverged` and as failures.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepCell {
    pub axis1: f64,
    pub axis2: f64,
    pub trials: usize,
    pub successes: usize,
    pub mean_rel_error: f64,
    pub mean_wall_time: f64,
    pub diverged: usize,
}

impl SweepCell {
    pub fn success_rate(&self) -> f64 {
        self.successes as f64 / self.trials as f64
    }
}

/// Completed sweep: spec echo plus one cell per coordinate pair, axis1-major
/// (all axis2 values for the first axis1 value first).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepGrid {
    pub spec: SweepSpec,
    pub cells: Vec<SweepCell>,
}

impl SweepGrid {
    pub fn cell(&self, i1: usize, i2: usize) -> &SweepCell {
        &self.cells[i1 * self.spec.axis2.values.len() + i2]
    }
}

/// Run every trial of every cell. Trials are independent work items
/// scheduled by rayon; seeds come from coordinates, so the grid does not
/// depend on thread count or execution order.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepGrid> {
    spec.validate()?;
    let trials = spec.fixed.trials;
    let mut work = Vec::new();
    for (i1, &a1) in spec.axis1.values.iter().enumerate() {
        for (i2, &a2) in spec.axis2.values.iter().enumerate() {
            for t in 0..trials {
                work.push((i1, i2, a1, a2, t));
            }
        }
    }

    let outcomes: Vec<Result<TrialOutcome>> = work
        .par_iter()
        .map(|&(_i1, _i2, a1, a2, t)| {
            let params = spec.cell_params(a1, a2);
            run_trial(&params, trial_seed(spec.fixed.base_seed, a1, a2, t))
        })
        .collect();

    let len2 = spec.axis2.values.len();
    let mut cells: Vec<SweepCell> = spec
        .axis1
        .values
        .iter()
        .flat_map(|&a1| {
            spec.axis2.values.iter().map(move |&a2| SweepCell {
                axis1: a1,
                axis2: a2,
                trials,
                successes: 0,
                mean_rel_error: 0.0,
                mean_wall_time: 0.0,
                diverged: 0,
            })
        })
        .collect();

    let mut completed = vec![0usize; cells.len()];
    for ((i1, i2, _a1, _a2, _t), outcome) in work.iter().zip(outcomes) {
        let outcome = outcome?;
        let cell = &mut cells[i1 * len2 + i2];
        cell.mean_wall_time += outcome.wall_time;
        if outcome.diverged {
            cell.diverged += 1;
            continue;
        }
        completed[i1 * len2 + i2] += 1;
        cell.mean_rel_error += outcome.rel_error;
        if outcome.success {
            cell.successes += 1;
        }
    }
    for (cell, &done) in cells.iter_mut().zip(completed.iter()) {
        cell.mean_wall_time /= cell.trials as f64;
        cell.mean_rel_error = if done > 0 {
            cell.mean_rel_error / done as f64
        } else {
            f64::NAN
        };
    }

    Ok(SweepGrid {
        spec: spec.clone(),
        cells,
    })
}

/// One row of an MSE-vs-m comparison table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MseRow {
    pub solver: String,
    pub m: usize,
    pub trials: usize,
    pub diverged: usize,
    pub mean_sq_error: f64,
    pub mean_rel_error: f64,
}

/// Mean squared Frobenius error per (solver, m) over seeded trials. The
/// non-convex solver runs with rank priors r-1, r, and r+1 (clipped to the
/// valid range), matching the comparison protocol; other solvers run once.
#[allow(clippy::too_many_arguments)]
pub fn mse_curve(
    n: usize,
    truth_rank: usize,
    kind: TruthKind,
    corruption: &CorruptionTemplate,
    m_values: &[usize],
    solvers: &[SolverId],
    trials: usize,
    base_seed: u64,
    t_max: Option<usize>,
) -> Result<Vec<MseRow>> {
    corruption.validate()?;
    let mut variants: Vec<(SolverId, usize, String)> = Vec::new();
    for &solver in solvers {
        match solver {
            SolverId::Nonconvex => {
                let mut guesses = vec![truth_rank];
                if truth_rank > 1 {
                    guesses.insert(0, truth_rank - 1);
                }
                if truth_rank < n {
                    guesses.push(truth_rank + 1);
                }
                for guess in guesses {
                    variants.push((solver, guess, format!("nonconvex(rank={guess})")));
                }
            }
            _ => variants.push((solver, truth_rank, solver.as_str().to_string())),
        }
    }

    let mut work = Vec::new();
    for (vi, &(solver, guess, _)) in variants.iter().enumerate() {
        for &m in m_values {
            for t in 0..trials {
                work.push((vi, solver, guess, m, t));
            }
        }
    }
    let outcomes: Vec<Result<(f64, f64, bool)>> = work
        .par_iter()
        .map(|&(_vi, solver, guess, m, t)| {
            let params = TrialParams {
                n,
                m,
                truth_rank,
                kind,
                rank_guess: Some(guess),
                solver,
                corruption: *corruption,
                tau: None,
                t_max,
                dykstra_iters: default_dykstra(),
            };
            params.validate()?;
            let variant_tag = fold(solver as u64 + 1, guess as u64);
            let seed = fold(fold(fold(base_seed, variant_tag), m as u64), t as u64);
            match run_trial_inner(&params, seed) {
                Ok((rel, sq)) => Ok((rel, sq, false)),
                Err(Error::Diverged { .. }) | Err(Error::EigenNonConvergence { .. }) => {
                    Ok((f64::NAN, f64::NAN, true))
                }
                Err(e) => Err(e),
            }
        })
        .collect();

    let mut rows: Vec<MseRow> = Vec::new();
    for (_, _, label) in &variants {
        for &m in m_values {
            rows.push(MseRow {
                solver: label.clone(),
                m,
                trials,
                diverged: 0,
                mean_sq_error: 0.0,
                mean_rel_error: 0.0,
            });
        }
    }
    let m_count = m_values.len();
    let mut completed = vec![0usize; rows.len()];
    for ((vi, _, _, m, _t), outcome) in work.iter().zip(outcomes) {
        let (rel, sq, diverged) = outcome?;
        let mi = m_values.iter().position(|v| v == m).unwrap();
        let row = &mut rows[vi * m_count + mi];
        if diverged {
            row.diverged += 1;
            continue;
        }
        completed[vi * m_count + mi] += 1;
        row.mean_sq_error += sq;
        row.mean_rel_error += rel;
    }
    for (row, &done) in rows.iter_mut().zip(completed.iter()) {
        if done > 0 {
            row.mean_sq_error /= done as f64;
            row.mean_rel_error /= done as f64;
        } else {
            row.mean_sq_error = f64::NAN;
            row.mean_rel_error = f64::NAN;
        }
    }
    Ok(rows)
}

/// Statistics of the l1 isometry probe: deviation of `(1/m) ||A(X)||_1`
/// from `tr(X)` (the nuclear norm of a PSD matrix), relative to `tr(X)`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct L1ProbeStats {
    pub max_dev: f64,
    pub mean_dev: f64,
}

/// Statistics of the paired-difference isometry probe: the ratio
/// `(2/m) ||B(X)||_1 / ||X||_F` with `B_i(X) = <a_{2i-1} a_{2i-1}' -
/// a_{2i} a_{2i}', X>`; deviations are measured from 1.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct L2L1ProbeStats {
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub mean_ratio: f64,
    pub lower_dev: f64,
    pub upper_dev: f64,
    pub spread: f64,
}

/// Probe report, serialized as JSON.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProbeReport {
    pub schema_version: String,
    pub n: usize,
    pub m: usize,
    pub trials: usize,
    pub rank: usize,
    pub seed: u64,
    pub l1: Option<L1ProbeStats>,
    pub l2l1: Option<L2L1ProbeStats>,
}

impl ProbeReport {
    pub fn new(n: usize, m: usize, trials: usize, rank: usize, seed: u64) -> Self {
        Self {
            schema_version: SCHEMA_VERSION.to_string(),
            n,
            m,
            trials,
            rank,
            seed,
            l1: None,
            l2l1: None,
        }
    }
}

const PROBE_TAG: u64 = 0x5249_5031; // "RIP1"

/// Fresh ensemble and random rank-`rank` PSD matrix per trial; a zero truth
/// is regenerated (degenerate denominator guard).
fn probe_trial(n: usize, m: usize, rank: usize, seed: u64) -> (Vec<f64>, f64, f64) {
    let ens = crate::model::gen_ensemble::<f64>(n, m, fold(seed, 1)).expect("probe ensemble");
    let mut attempt = 0u64;
    let x = loop {
        let truth = crate::model::gen_ground_truth::<f64>(
            n,
            rank,
            TruthKind::GaussianFactor,
            fold(seed, 2 + attempt),
        )
        .expect("probe truth");
        let x = truth.x0();
        if x.trace() > 0.0 {
            break x;
        }
        attempt += 1;
    };
    let z = ens.measure(&x).expect("probe measurement");
    let trace = x.trace();
    let fro = x.fro_norm();
    (z, trace, fro)
}

/// Empirical l1 restricted-isometry deviations over `trials` random
/// rank-`rank` PSD matrices.
pub fn rip_l1_probe(n: usize, m: usize, trials: usize, rank: usize, seed: u64) -> L1ProbeStats {
    let mut max_dev = 0.0f64;
    let mut sum_dev = 0.0f64;
    for t in 0..trials {
        let (z, trace, _fro) = probe_trial(n, m, rank, fold(fold(seed, PROBE_TAG), t as u64));
        let l1: f64 = z.iter().map(|v| v.abs()).sum();
        let dev = (l1 / m as f64 - trace).abs() / trace;
        max_dev = max_dev.max(dev);
        sum_dev += dev;
    }
    L1ProbeStats {
        max_dev,
        mean_dev: sum_dev / trials as f64,
    }
}

/// Empirical mixed l2/l1 isometry of the paired-difference operator;
/// requires even m.
pub fn rip_l2l1_probe(
    n: usize,
    m: usize,
    trials: usize,
    rank: usize,
    seed: u64,
) -> Result<L2L1ProbeStats> {
    if m % 2 != 0 {
        return Err(Error::InvalidSpec(
            "the paired-difference probe needs an even m".into(),
        ));
    }
    let mut min_ratio = f64::INFINITY;
    let mut max_ratio = f64::NEG_INFINITY;
    let mut sum_ratio = 0.0;
    for t in 0..trials {
        let (z, _trace, fro) = probe_trial(n, m, rank, fold(fold(seed, PROBE_TAG + 1), t as u64));
        let mut l1 = 0.0;
        for pair in z.chunks_exact(2) {
            l1 += (pair[0] - pair[1]).abs();
        }
        let ratio = (2.0 / m as f64) * l1 / fro;
        min_ratio = min_ratio.min(ratio);
        max_ratio = max_ratio.max(ratio);
        sum_ratio += ratio;
    }
    Ok(L2L1ProbeStats {
        min_ratio,
        max_ratio,
        mean_ratio: sum_ratio / trials as f64,
        lower_dev: (1.0 - min_ratio).max(0.0),
        upper_dev: (max_ratio - 1.0).max(0.0),
        spread: max_ratio - min_ratio,
    })
}

#[cfg(test)]
mod tests;
