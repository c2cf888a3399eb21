//! Command-line front end: instance generation, single solves, Monte-Carlo
//! sweeps, isometry probes, and result aggregation.
//!
//! Exit codes: 0 = ran to completion (a failed recovery is still data),
//! 1 = I/O or data error, 2 = usage error. All randomness flows through
//! explicit `--seed` flags; progress goes to standard error, leaving
//! standard output machine-parsable.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

use ranklift::harness::{
    self, output, Axis, AxisName, CorruptionTemplate, ProbeReport, SweepFixed, SweepSpec,
};
use ranklift::model::{
    AnyInstance, CorruptionMode, Instance, InstanceParams, NoiseModel, OutlierModel, SeedTriple,
    TruthKind,
};
use ranklift::solvers::{
    solve_nonconvex, solve_phaselift, solve_toeplitz, solve_wf, ConvexConfig, NonconvexConfig,
    RecoveryResult, ResultJson, SolverId, WfConfig,
};
use ranklift::{Error, Scalar, SCHEMA_VERSION};

#[derive(Parser)]
#[command(name = "ranklift", version, about = "Low-rank PSD matrix recovery from corrupted rank-one measurements")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a problem instance and write it as JSON.
    Gen(GenArgs),
    /// Run one solver on an instance file and write the result as JSON.
    Solve(SolveArgs),
    /// Run a two-axis Monte-Carlo sweep; writes a CSV grid and a PGM heatmap.
    Sweep(SweepArgs),
    /// Run the restricted-isometry probes and write a JSON report.
    Probe(ProbeArgs),
    /// Merge result files into a solver-by-m comparison table.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum KindArg {
    Gaussian,
    Toeplitz,
}

impl From<KindArg> for TruthKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Gaussian => TruthKind::GaussianFactor,
            KindArg::Toeplitz => TruthKind::ToeplitzVandermonde,
        }
    }
}

#[derive(Args)]
struct GenArgs {
    /// JSON file with the same fields as the flags; flags win.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    r: Option<usize>,
    #[arg(long, value_enum)]
    kind: Option<KindArg>,
    /// Fraction of measurements hit by outliers, in [0, 1).
    #[arg(long)]
    outlier_frac: Option<f64>,
    /// rademacher:AMP | gaussian:SIGMA | uniform:LO:HI (default gaussian:1).
    #[arg(long)]
    outlier_model: Option<String>,
    /// Half-width of the uniform entrywise noise (0 = none).
    #[arg(long)]
    noise_halfwidth: Option<f64>,
    /// Replace corrupted entries instead of adding to them.
    #[arg(long)]
    replace: bool,
    /// Master seed; the ensemble/truth/corruption streams derive from it.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "instance.json")]
    out: PathBuf,
}

#[derive(Args)]
struct SolveArgs {
    /// Instance JSON produced by `gen`.
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, value_enum)]
    solver: SolverId,
    /// Rank prior for the factored solvers (default: the instance rank).
    #[arg(long)]
    rank_guess: Option<usize>,
    #[arg(long)]
    tmax: Option<usize>,
    #[arg(long, default_value_t = 50)]
    dykstra_iters: usize,
    #[arg(long, default_value = "result.json")]
    out: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    /// Sweep specification JSON (axes plus fixed parameters).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Axis override, e.g. "m=200,400,600".
    #[arg(long)]
    axis1: Option<String>,
    /// Axis override, e.g. "r=1,2,3".
    #[arg(long)]
    axis2: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, value_enum)]
    solver: Option<SolverId>,
    #[arg(long, value_enum)]
    kind: Option<KindArg>,
    #[arg(long)]
    rank: Option<usize>,
    #[arg(long)]
    rank_guess: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    tmax: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    outlier_frac: Option<f64>,
    #[arg(long)]
    outlier_model: Option<String>,
    #[arg(long)]
    noise_halfwidth: Option<f64>,
    #[arg(long)]
    dykstra_iters: Option<usize>,
    /// Worker threads (0 = all available; 1 = serial reference execution).
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// Fill the mean_time_s column with measured times. Measured times are
    /// not reproducible run to run, so the default writes zeros.
    #[arg(long)]
    timing: bool,
    /// Output prefix; writes PREFIX.csv and PREFIX.pgm.
    #[arg(long, default_value = "sweep")]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ProbeKind {
    L1,
    L2l1,
    Both,
}

#[derive(Args)]
struct ProbeArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    /// Rank of the random PSD matrices driving the probe.
    #[arg(long)]
    rank: Option<usize>,
    #[arg(long, value_enum, default_value_t = ProbeKind::Both)]
    probe: ProbeKind,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "probe.json")]
    out: PathBuf,
}

#[derive(Args)]
struct ReportArgs {
    /// Result JSON files to merge.
    #[arg(required = true)]
    files: Vec<PathBuf>,
    /// Write the table here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }

    fn data(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::InvalidSpec(_) | Error::DimensionMismatch(_) => 2,
            _ => 1,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::data(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        Self::data(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(args) => cmd_gen(args),
        Command::Solve(args) => cmd_solve(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Probe(args) => cmd_probe(args),
        Command::Report(args) => cmd_report(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

/// Parse "rademacher:AMP" | "gaussian:SIGMA" | "uniform:LO:HI" | "none".
fn parse_outlier_model(text: &str) -> Result<Option<OutlierModel>, CliError> {
    let parts: Vec<&str> = text.split(':').collect();
    let bad = || CliError::usage(format!("unrecognized outlier model '{text}'"));
    let num = |s: &str| s.parse::<f64>().map_err(|_| bad());
    match parts.as_slice() {
        ["none"] => Ok(None),
        ["rademacher", amp] => Ok(Some(OutlierModel::RademacherScaled {
            amplitude: num(amp)?,
        })),
        ["gaussian", sigma] => Ok(Some(OutlierModel::AdditiveGaussian { sigma: num(sigma)? })),
        ["uniform", lo, hi] => Ok(Some(OutlierModel::UniformAmplitude {
            lo: num(lo)?,
            hi: num(hi)?,
        })),
        _ => Err(bad()),
    }
}

fn read_json_file<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
    Ok(serde_json::from_str(&text)?)
}

// ---- gen ----

/// File form of the gen parameters; flags override these.
#[derive(Debug, Default, serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct GenConfig {
    n: Option<usize>,
    m: Option<usize>,
    r: Option<usize>,
    kind: Option<TruthKind>,
    outlier_frac: Option<f64>,
    outlier_model: Option<OutlierModel>,
    noise_halfwidth: Option<f64>,
    replace: Option<bool>,
    seed: Option<u64>,
}

fn cmd_gen(args: GenArgs) -> Result<(), CliError> {
    let file: GenConfig = match &args.config {
        Some(path) => read_json_file(path)?,
        None => GenConfig::default(),
    };
    let n = args
        .n
        .or(file.n)
        .ok_or_else(|| CliError::usage("--n is required"))?;
    let m = args
        .m
        .or(file.m)
        .ok_or_else(|| CliError::usage("--m is required"))?;
    let r = args
        .r
        .or(file.r)
        .ok_or_else(|| CliError::usage("--r is required"))?;
    let seed = args
        .seed
        .or(file.seed)
        .ok_or_else(|| CliError::usage("--seed is required"))?;
    let kind: TruthKind = args.kind.map(TruthKind::from).or(file.kind).unwrap_or(TruthKind::GaussianFactor);
    let outlier_fraction = args.outlier_frac.or(file.outlier_frac).unwrap_or(0.0);
    let outlier_model = match &args.outlier_model {
        Some(text) => parse_outlier_model(text)?,
        None => file.outlier_model,
    }
    .unwrap_or(OutlierModel::AdditiveGaussian { sigma: 1.0 });
    let half_width = args.noise_halfwidth.or(file.noise_halfwidth).unwrap_or(0.0);
    let noise_model = if half_width > 0.0 {
        NoiseModel::UniformEntrywise { half_width }
    } else {
        NoiseModel::None
    };
    let mode = if args.replace || file.replace.unwrap_or(false) {
        CorruptionMode::Replace
    } else {
        CorruptionMode::Additive
    };

    let params = InstanceParams {
        n,
        m,
        r,
        kind,
        outlier_fraction,
        outlier_model,
        noise_model,
        mode,
        seeds: SeedTriple::derive(seed),
    };
    let instance = if kind.is_complex() {
        AnyInstance::Complex(ranklift::model::make_instance::<Complex64>(&params)?)
    } else {
        AnyInstance::Real(ranklift::model::make_instance::<f64>(&params)?)
    };
    instance.save(&args.out)?;
    let w_l1 = match &instance {
        AnyInstance::Real(i) => i.w_l1(),
        AnyInstance::Complex(i) => i.w_l1(),
    };
    println!("{}\tw_l1={:.6e}", args.out.display(), w_l1);
    Ok(())
}

// ---- solve ----

fn solve_instance<S: Scalar>(
    inst: &Instance<S>,
    args: &SolveArgs,
) -> Result<(Option<RecoveryResult<S>>, ResultJson), CliError> {
    let rank_guess = args.rank_guess.unwrap_or_else(|| inst.rank());
    let t_max = args.tmax.unwrap_or_else(|| args.solver.default_t_max());
    let config_echo = serde_json::json!({
        "solver": args.solver.as_str(),
        "rank_guess": rank_guess,
        "t_max": t_max,
        "dykstra_iters": args.dykstra_iters,
    });
    let solved = match args.solver {
        SolverId::Nonconvex => {
            solve_nonconvex(inst, &NonconvexConfig::new(rank_guess).with_t_max(t_max))
        }
        SolverId::Wf => solve_wf(inst, &WfConfig::new(rank_guess).with_t_max(t_max)),
        SolverId::Phaselift => solve_phaselift(inst, &ConvexConfig::new().with_t_max(t_max)),
        SolverId::Toeplitz => {
            let cfg = ConvexConfig {
                t_max,
                dykstra_iters: args.dykstra_iters,
                ..ConvexConfig::new().toeplitz()
            };
            solve_toeplitz(inst, &cfg)
        }
    };
    match solved {
        Ok(result) => {
            let json = result.to_json(args.solver, inst, rank_guess, config_echo);
            Ok((Some(result), json))
        }
        Err(Error::Diverged { iteration }) => {
            // Recovery failure is data: report it in the result file.
            let json = ResultJson {
                schema_version: SCHEMA_VERSION.to_string(),
                solver: args.solver,
                n: inst.n(),
                m: inst.m(),
                truth_rank: inst.rank(),
                rank_guess,
                is_complex: S::IS_COMPLEX,
                seeds: inst.seeds,
                diverged: true,
                iterations_run: iteration,
                rel_error: None,
                sq_error: None,
                wall_time_s: 0.0,
                step_source: None,
                objective_history: vec![],
                estimate_kind: "none".to_string(),
                estimate_cols: 0,
                estimate_entries: vec![],
                config: config_echo,
            };
            Ok((None, json))
        }
        Err(e) => Err(e.into()),
    }
}

fn cmd_solve(args: SolveArgs) -> Result<(), CliError> {
    let any = AnyInstance::load(&args.instance).map_err(|e| match e {
        Error::InvalidSpec(m) => CliError::data(m),
        other => other.into(),
    })?;
    if args.solver == SolverId::Toeplitz && !matches!(any, AnyInstance::Complex(_)) {
        return Err(CliError::usage(
            "the toeplitz solver needs a complex toeplitz-vandermonde instance",
        ));
    }
    let json = match &any {
        AnyInstance::Real(inst) => solve_instance(inst, &args)?.1,
        AnyInstance::Complex(inst) => solve_instance(inst, &args)?.1,
    };
    std::fs::write(&args.out, serde_json::to_string_pretty(&json)?)?;
    match json.rel_error {
        Some(rel) => println!(
            "rel_error={rel:.6e} wall_time_s={:.3} out={}",
            json.wall_time_s,
            args.out.display()
        ),
        None => println!(
            "rel_error=NaN diverged_at={} out={}",
            json.iterations_run,
            args.out.display()
        ),
    }
    Ok(())
}

// ---- sweep ----

fn parse_axis(text: &str) -> Result<Axis, CliError> {
    let bad = || CliError::usage(format!("malformed axis '{text}' (expected name=v1,v2,...)"));
    let (name, values) = text.split_once('=').ok_or_else(bad)?;
    let name = match name {
        "m" => AxisName::M,
        "r" => AxisName::R,
        "outlier_fraction" | "outlier-frac" => AxisName::OutlierFraction,
        _ => return Err(bad()),
    };
    let values = values
        .split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<Vec<f64>, CliError>>()?;
    Ok(Axis { name, values })
}

#[derive(Debug, Default, serde::Deserialize)]
struct SweepConfigFile {
    axis1: Option<Axis>,
    axis2: Option<Axis>,
    fixed: Option<SweepFixed>,
}

fn cmd_sweep(args: SweepArgs) -> Result<(), CliError> {
    let file: SweepConfigFile = match &args.config {
        Some(path) => read_json_file(path)?,
        None => SweepConfigFile::default(),
    };
    let axis1 = match &args.axis1 {
        Some(text) => parse_axis(text)?,
        None => file
            .axis1
            .ok_or_else(|| CliError::usage("--axis1 or a config file is required"))?,
    };
    let axis2 = match &args.axis2 {
        Some(text) => parse_axis(text)?,
        None => file
            .axis2
            .ok_or_else(|| CliError::usage("--axis2 or a config file is required"))?,
    };
    let mut fixed = file.fixed.unwrap_or(SweepFixed {
        n: 0,
        m: None,
        kind: TruthKind::GaussianFactor,
        solver: SolverId::Nonconvex,
        corruption: CorruptionTemplate::clean(),
        rank: 1,
        rank_guess: None,
        tau: None,
        trials: 20,
        base_seed: 0,
        t_max: None,
        dykstra_iters: 50,
    });
    if let Some(n) = args.n {
        fixed.n = n;
    }
    if let Some(m) = args.m {
        fixed.m = Some(m);
    }
    if let Some(solver) = args.solver {
        fixed.solver = solver;
    }
    if let Some(kind) = args.kind {
        fixed.kind = kind.into();
    }
    if let Some(rank) = args.rank {
        fixed.rank = rank;
    }
    if args.rank_guess.is_some() {
        fixed.rank_guess = args.rank_guess;
    }
    if let Some(trials) = args.trials {
        fixed.trials = trials;
    }
    if args.tau.is_some() {
        fixed.tau = args.tau;
    }
    if args.tmax.is_some() {
        fixed.t_max = args.tmax;
    }
    if let Some(seed) = args.seed {
        fixed.base_seed = seed;
    }
    if let Some(frac) = args.outlier_frac {
        fixed.corruption.outlier_fraction = frac;
    }
    if let Some(text) = &args.outlier_model {
        fixed.corruption.outlier_model = parse_outlier_model(text)?;
    }
    if let Some(hw) = args.noise_halfwidth {
        fixed.corruption.noise_model = if hw > 0.0 {
            NoiseModel::UniformEntrywise { half_width: hw }
        } else {
            NoiseModel::None
        };
    }
    if let Some(d) = args.dykstra_iters {
        fixed.dykstra_iters = d;
    }
    if fixed.n == 0 {
        return Err(CliError::usage("--n or a config file is required"));
    }

    let spec = SweepSpec {
        axis1,
        axis2,
        fixed,
    };
    spec.validate()?;

    let grid = if args.jobs == 0 {
        harness::run_sweep(&spec)?
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(args.jobs)
            .build()
            .map_err(|e| CliError::data(e.to_string()))?
            .install(|| harness::run_sweep(&spec))?
    };

    let csv_path = args.out.with_extension("csv");
    let pgm_path = args.out.with_extension("pgm");
    std::fs::write(&csv_path, output::sweep_csv(&grid, args.timing))?;
    std::fs::write(&pgm_path, output::sweep_pgm(&grid))?;

    let total_trials: usize = grid.cells.iter().map(|c| c.trials).sum();
    let total_success: usize = grid.cells.iter().map(|c| c.successes).sum();
    eprintln!(
        "sweep: {} cells, {} trials, overall success rate {:.3}",
        grid.cells.len(),
        total_trials,
        total_success as f64 / total_trials as f64
    );
    println!("{}\t{}", csv_path.display(), pgm_path.display());
    Ok(())
}

// ---- probe ----

#[derive(Debug, Default, serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct ProbeConfigFile {
    n: Option<usize>,
    m: Option<usize>,
    trials: Option<usize>,
    rank: Option<usize>,
    seed: Option<u64>,
}

fn cmd_probe(args: ProbeArgs) -> Result<(), CliError> {
    let file: ProbeConfigFile = match &args.config {
        Some(path) => read_json_file(path)?,
        None => ProbeConfigFile::default(),
    };
    let n = args
        .n
        .or(file.n)
        .ok_or_else(|| CliError::usage("--n is required"))?;
    let m = args
        .m
        .or(file.m)
        .ok_or_else(|| CliError::usage("--m is required"))?;
    let trials = args.trials.or(file.trials).unwrap_or(50);
    let rank = args.rank.or(file.rank).unwrap_or(1);
    let seed = args
        .seed
        .or(file.seed)
        .ok_or_else(|| CliError::usage("--seed is required"))?;
    if n == 0 || m == 0 || trials == 0 || rank == 0 || rank > n {
        return Err(CliError::usage("probe parameters out of range"));
    }
    let want_l2l1 = matches!(args.probe, ProbeKind::L2l1 | ProbeKind::Both);
    if want_l2l1 && m % 2 != 0 {
        return Err(CliError::usage(
            "the l2l1 probe pairs measurements and needs an even m",
        ));
    }

    let mut report = ProbeReport::new(n, m, trials, rank, seed);
    if matches!(args.probe, ProbeKind::L1 | ProbeKind::Both) {
        report.l1 = Some(harness::rip_l1_probe(n, m, trials, rank, seed));
    }
    if want_l2l1 {
        report.l2l1 = Some(harness::rip_l2l1_probe(n, m, trials, rank, seed)?);
    }
    std::fs::write(&args.out, serde_json::to_string_pretty(&report)?)?;
    println!("{}", args.out.display());
    Ok(())
}

// ---- report ----

fn result_label(json: &ResultJson) -> String {
    match json.solver {
        SolverId::Nonconvex => format!("nonconvex(rank={})", json.rank_guess),
        other => other.as_str().to_string(),
    }
}

fn cmd_report(args: ReportArgs) -> Result<(), CliError> {
    #[derive(Default)]
    struct Bucket {
        count: usize,
        diverged: usize,
        sum_sq: f64,
        sum_rel: f64,
    }
    let mut buckets: BTreeMap<(String, usize), Bucket> = BTreeMap::new();
    for path in &args.files {
        let json: ResultJson = read_json_file(path)?;
        if json.schema_version != SCHEMA_VERSION {
            return Err(CliError::data(format!(
                "{}: schema version mismatch (expected {SCHEMA_VERSION}, found {})",
                path.display(),
                json.schema_version
            )));
        }
        let bucket = buckets
            .entry((result_label(&json), json.m))
            .or_default();
        if json.diverged {
            bucket.diverged += 1;
            continue;
        }
        let sq = json
            .sq_error
            .ok_or_else(|| CliError::data(format!("{}: missing sq_error", path.display())))?;
        bucket.count += 1;
        bucket.sum_sq += sq;
        bucket.sum_rel += json.rel_error.unwrap_or(f64::NAN);
    }

    let mut table = String::from("solver,m,count,diverged,mean_sq_error,mean_rel_error\n");
    for ((label, m), bucket) in &buckets {
        let (mean_sq, mean_rel) = if bucket.count > 0 {
            (
                bucket.sum_sq / bucket.count as f64,
                bucket.sum_rel / bucket.count as f64,
            )
        } else {
            (f64::NAN, f64::NAN)
        };
        table.push_str(&format!(
            "{label},{m},{},{},{mean_sq:.6e},{mean_rel:.6e}\n",
            bucket.count, bucket.diverged
        ));
    }
    match &args.out {
        Some(path) => std::fs::write(path, table)?,
        None => print!("{table}"),
    }
    Ok(())
}
