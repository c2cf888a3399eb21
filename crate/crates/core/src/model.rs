//! Seeded generation of ground truths, sensing ensembles, and the corrupted
//! measurement model `z = A(X0) + beta + w`.
//!
//! Every generator is a pure function of its seed, and an instance records
//! the full seed triple (ensemble, truth, corruption) so any run replays bit
//! for bit. Instances serialize to a documented JSON schema for replay and
//! cross-implementation comparison.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{LowRankFactor, SensingEnsemble, SymMatrix};
use crate::rng::{fold, CounterRng};
use crate::scalar::Scalar;
use crate::SCHEMA_VERSION;

/// Ground-truth family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TruthKind {
    /// `X0 = U0 U0'` with i.i.d. standard Gaussian `U0` (real).
    #[serde(rename = "gaussian-factor")]
    GaussianFactor,
    /// Hermitian Toeplitz PSD `X0 = V diag(powers) V'` with a Vandermonde
    /// `V` built from uniform frequencies (complex).
    #[serde(rename = "toeplitz-vandermonde")]
    ToeplitzVandermonde,
}

impl TruthKind {
    pub fn is_complex(self) -> bool {
        matches!(self, TruthKind::ToeplitzVandermonde)
    }
}

/// A factored rank-r PSD ground truth.
#[derive(Debug, Clone)]
pub enum GroundTruth<S: Scalar> {
    Gaussian {
        factor: LowRankFactor<S>,
        seed: u64,
    },
    Toeplitz {
        n: usize,
        /// Frequencies in [0, 1), one per rank component.
        freqs: Vec<f64>,
        /// Component powers (diagonal of Sigma), in [0, 1).
        powers: Vec<f64>,
        seed: u64,
    },
}

impl<S: Scalar> GroundTruth<S> {
    pub fn n(&self) -> usize {
        match self {
            GroundTruth::Gaussian { factor, .. } => factor.n(),
            GroundTruth::Toeplitz { n, .. } => *n,
        }
    }

    pub fn rank(&self) -> usize {
        match self {
            GroundTruth::Gaussian { factor, .. } => factor.r(),
            GroundTruth::Toeplitz { freqs, .. } => freqs.len(),
        }
    }

    pub fn kind(&self) -> TruthKind {
        match self {
            GroundTruth::Gaussian { .. } => TruthKind::GaussianFactor,
            GroundTruth::Toeplitz { .. } => TruthKind::ToeplitzVandermonde,
        }
    }

    pub fn seed(&self) -> u64 {
        match self {
            GroundTruth::Gaussian { seed, .. } | GroundTruth::Toeplitz { seed, .. } => *seed,
        }
    }

    /// The factor, when the truth is stored factored.
    pub fn factor(&self) -> Option<&LowRankFactor<S>> {
        match self {
            GroundTruth::Gaussian { factor, .. } => Some(factor),
            GroundTruth::Toeplitz { .. } => None,
        }
    }

    /// `tr(X0)`, computed without materializing for the factored kind.
    pub fn trace(&self) -> f64 {
        match self {
            GroundTruth::Gaussian { factor, .. } => factor.fro_norm_sq(),
            GroundTruth::Toeplitz { n, powers, .. } => {
                powers.iter().sum::<f64>() * (*n as f64)
            }
        }
    }

    /// Materialize `X0`. The Toeplitz kind is built from its first-row
    /// autocorrelation so the diagonals are constant bit for bit.
    pub fn x0(&self) -> SymMatrix<S> {
        match self {
            GroundTruth::Gaussian { factor, .. } => factor.materialize(),
            GroundTruth::Toeplitz {
                n, freqs, powers, ..
            } => {
                let n = *n;
                // t[d] = sum_i powers[i] * exp(j 2 pi f_i d); X[k][l] = t[k - l].
                let taps: Vec<(f64, f64)> = (0..n)
                    .map(|d| {
                        let mut re = 0.0;
                        let mut im = 0.0;
                        for (f, p) in freqs.iter().zip(powers.iter()) {
                            let phase = 2.0 * std::f64::consts::PI * f * d as f64;
                            re += p * phase.cos();
                            im += p * phase.sin();
                        }
                        (re, im)
                    })
                    .collect();
                let mut x = SymMatrix::zeros(n);
                for d in 0..n {
                    let (re, im) = taps[d];
                    for i in 0..(n - d) {
                        // Row k = i + d, column l = i: exponent k - l = d.
                        x.set_sym(i, i + d, S::from_re_im(re, -im));
                    }
                }
                x
            }
        }
    }
}

/// Generate the sensing ensemble (m i.i.d. standard Gaussian rows).
pub fn gen_ensemble<S: Scalar>(n: usize, m: usize, seed: u64) -> Result<SensingEnsemble<S>> {
    if n == 0 || m == 0 {
        return Err(Error::InvalidSpec("n and m must be positive".into()));
    }
    Ok(SensingEnsemble::generate(n, m, seed))
}

/// Generate a rank-r ground truth of the requested kind.
///
/// Draw order is documented for replay: the Gaussian kind fills the factor
/// row-major with standard normals; the Toeplitz kind draws `r` frequencies
/// then `r` powers, all Unif[0, 1).
pub fn gen_ground_truth<S: Scalar>(
    n: usize,
    r: usize,
    kind: TruthKind,
    seed: u64,
) -> Result<GroundTruth<S>> {
    if r == 0 || r > n {
        return Err(Error::InvalidSpec(format!("rank {r} out of range 1..={n}")));
    }
    let mut rng = CounterRng::new(seed);
    match kind {
        TruthKind::GaussianFactor => {
            if S::IS_COMPLEX {
                return Err(Error::InvalidSpec(
                    "gaussian-factor ground truth is real-valued".into(),
                ));
            }
            let data: Vec<S> = (0..n * r).map(|_| S::from_re(rng.normal())).collect();
            Ok(GroundTruth::Gaussian {
                factor: LowRankFactor::new(n, r, data)?,
                seed,
            })
        }
        TruthKind::ToeplitzVandermonde => {
            if !S::IS_COMPLEX {
                return Err(Error::InvalidSpec(
                    "toeplitz-vandermonde ground truth is complex-valued".into(),
                ));
            }
            let freqs: Vec<f64> = (0..r).map(|_| rng.uniform()).collect();
            let powers: Vec<f64> = (0..r).map(|_| rng.uniform()).collect();
            Ok(GroundTruth::Toeplitz {
                n,
                freqs,
                powers,
                seed,
            })
        }
    }
}

/// Outlier value model for the corrupted entries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum OutlierModel {
    /// `beta_i = +-amplitude`, signs equiprobable.
    #[serde(rename = "rademacher-scaled")]
    RademacherScaled { amplitude: f64 },
    /// `beta_i ~ N(0, sigma^2)`.
    #[serde(rename = "additive-gaussian")]
    AdditiveGaussian { sigma: f64 },
    /// `|beta_i| ~ Unif[lo, hi]` with a Rademacher sign.
    #[serde(rename = "uniform-amplitude")]
    UniformAmplitude { lo: f64, hi: f64 },
}

/// Dense bounded-noise model.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum NoiseModel {
    #[default]
    #[serde(rename = "none")]
    None,
    /// `w_i ~ Unif[-half_width, half_width]`, so `||w||_1 <= m * half_width`.
    #[serde(rename = "uniform-entrywise")]
    UniformEntrywise { half_width: f64 },
}

/// Whether outliers add to the clean measurement or replace it. Replacement
/// is stored as an effective additive outlier (`beta_i = value - clean_i`),
/// so `z = clean + beta + w` holds either way.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum CorruptionMode {
    #[default]
    #[serde(rename = "additive")]
    Additive,
    #[serde(rename = "replace")]
    Replace,
}

/// Full corruption specification, including its seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorruptionSpec {
    pub outlier_fraction: f64,
    pub outlier_model: OutlierModel,
    #[serde(default = "default_noise")]
    pub noise_model: NoiseModel,
    #[serde(default)]
    pub mode: CorruptionMode,
    pub seed: u64,
}

fn default_noise() -> NoiseModel {
    NoiseModel::None
}

impl CorruptionSpec {
    /// Outlier-free, noise-free spec (the model field is never sampled).
    pub fn clean(seed: u64) -> Self {
        Self {
            outlier_fraction: 0.0,
            outlier_model: OutlierModel::AdditiveGaussian { sigma: 1.0 },
            noise_model: NoiseModel::None,
            mode: CorruptionMode::Additive,
            seed,
        }
    }

    pub fn validate(&self, m: usize) -> Result<usize> {
        if !(0.0..1.0).contains(&self.outlier_fraction) {
            return Err(Error::InvalidSpec(format!(
                "outlier fraction {} must lie in [0, 1)",
                self.outlier_fraction
            )));
        }
        let k = (self.outlier_fraction * m as f64).round() as usize;
        if k >= m {
            return Err(Error::InvalidSpec(format!(
                "outlier support {k} must be smaller than m = {m}"
            )));
        }
        Ok(k)
    }
}

/// Result of applying a [`CorruptionSpec`] to clean measurements.
#[derive(Debug, Clone, PartialEq)]
pub struct Corruption {
    pub z: Vec<f64>,
    pub beta_support: Vec<usize>,
    pub beta_values: Vec<f64>,
    pub w: Vec<f64>,
}

impl Corruption {
    /// Empirical `||w||_1`, the realized noise budget.
    pub fn w_l1(&self) -> f64 {
        self.w.iter().map(|v| v.abs()).sum()
    }
}

/// Corrupt clean measurements: pick `round(s m)` support indices uniformly
/// without replacement, draw outlier values, then dense noise.
///
/// One sequential stream drives everything, in a fixed order: support
/// selection, then one value per support index in ascending index order
/// (uniform-amplitude draws magnitude before sign), then the m noise
/// entries. `z_i = (clean_i + beta_i) + w_i` with that exact association
/// order.
pub fn corrupt(clean_z: &[f64], spec: &CorruptionSpec) -> Result<Corruption> {
    let m = clean_z.len();
    let k = spec.validate(m)?;
    let mut rng = CounterRng::new(spec.seed);

    let beta_support = rng.distinct_indices(m, k);
    let mut beta_values = Vec::with_capacity(k);
    for &idx in &beta_support {
        let raw = match spec.outlier_model {
            OutlierModel::RademacherScaled { amplitude } => rng.rademacher() * amplitude,
            OutlierModel::AdditiveGaussian { sigma } => sigma * rng.normal(),
            OutlierModel::UniformAmplitude { lo, hi } => {
                let mag = rng.uniform_in(lo, hi);
                rng.rademacher() * mag
            }
        };
        let value = match spec.mode {
            CorruptionMode::Additive => raw,
            CorruptionMode::Replace => raw - clean_z[idx],
        };
        beta_values.push(value);
    }

    let w: Vec<f64> = match spec.noise_model {
        NoiseModel::None => vec![0.0; m],
        NoiseModel::UniformEntrywise { half_width } => (0..m)
            .map(|_| rng.uniform_in(-half_width, half_width))
            .collect(),
    };

    let mut z = clean_z.to_vec();
    for (&idx, &val) in beta_support.iter().zip(beta_values.iter()) {
        z[idx] += val;
    }
    for (zi, wi) in z.iter_mut().zip(w.iter()) {
        *zi += *wi;
    }

    Ok(Corruption {
        z,
        beta_support,
        beta_values,
        w,
    })
}

/// Seeds of the three independent streams backing an instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedTriple {
    pub ensemble: u64,
    pub truth: u64,
    pub corruption: u64,
}

impl SeedTriple {
    /// Derive the triple from one master seed with the canonical combiner.
    pub fn derive(master: u64) -> Self {
        Self {
            ensemble: fold(master, 1),
            truth: fold(master, 2),
            corruption: fold(master, 3),
        }
    }
}

/// A fully realized problem instance.
#[derive(Debug, Clone)]
pub struct Instance<S: Scalar> {
    pub ensemble: SensingEnsemble<S>,
    pub truth: GroundTruth<S>,
    pub z: Vec<f64>,
    pub clean_z: Vec<f64>,
    pub beta_support: Vec<usize>,
    pub beta_values: Vec<f64>,
    pub w: Vec<f64>,
    pub seeds: SeedTriple,
    pub corruption: CorruptionSpec,
}

impl<S: Scalar> Instance<S> {
    pub fn n(&self) -> usize {
        self.ensemble.n()
    }

    pub fn m(&self) -> usize {
        self.ensemble.m()
    }

    pub fn rank(&self) -> usize {
        self.truth.rank()
    }

    pub fn w_l1(&self) -> f64 {
        self.w.iter().map(|v| v.abs()).sum()
    }
}

/// Parameters for [`make_instance`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceParams {
    pub n: usize,
    pub m: usize,
    pub r: usize,
    pub kind: TruthKind,
    pub outlier_fraction: f64,
    pub outlier_model: OutlierModel,
    #[serde(default = "default_noise")]
    pub noise_model: NoiseModel,
    #[serde(default)]
    pub mode: CorruptionMode,
    pub seeds: SeedTriple,
}

/// Compose ensemble, truth, and corruption into an instance.
pub fn make_instance<S: Scalar>(params: &InstanceParams) -> Result<Instance<S>> {
    if params.kind.is_complex() != S::IS_COMPLEX {
        return Err(Error::InvalidSpec(format!(
            "{:?} ground truth does not match the scalar type",
            params.kind
        )));
    }
    let ensemble = gen_ensemble::<S>(params.n, params.m, params.seeds.ensemble)?;
    let truth = gen_ground_truth::<S>(params.n, params.r, params.kind, params.seeds.truth)?;
    let clean_z = match truth.factor() {
        Some(factor) => ensemble.measure_factored(factor)?,
        None => ensemble.measure(&truth.x0())?,
    };
    let spec = CorruptionSpec {
        outlier_fraction: params.outlier_fraction,
        outlier_model: params.outlier_model,
        noise_model: params.noise_model,
        mode: params.mode,
        seed: params.seeds.corruption,
    };
    let corruption = corrupt(&clean_z, &spec)?;
    Ok(Instance {
        ensemble,
        truth,
        z: corruption.z,
        clean_z,
        beta_support: corruption.beta_support,
        beta_values: corruption.beta_values,
        w: corruption.w,
        seeds: params.seeds,
        corruption: spec,
    })
}

/// Instance with the scalar type erased, as read back from disk.
#[derive(Debug, Clone)]
pub enum AnyInstance {
    Real(Instance<f64>),
    Complex(Instance<Complex64>),
}

impl AnyInstance {
    pub fn n(&self) -> usize {
        match self {
            AnyInstance::Real(i) => i.n(),
            AnyInstance::Complex(i) => i.n(),
        }
    }

    pub fn m(&self) -> usize {
        match self {
            AnyInstance::Real(i) => i.m(),
            AnyInstance::Complex(i) => i.m(),
        }
    }

    pub fn rank(&self) -> usize {
        match self {
            AnyInstance::Real(i) => i.rank(),
            AnyInstance::Complex(i) => i.rank(),
        }
    }
}

/// On-disk schema of an instance. The ensemble and ground truth are stored
/// by their seeds (regenerated on load, bit for bit); the measurement and
/// corruption vectors are stored verbatim.
#[derive(Debug, Serialize, Deserialize)]
pub struct InstanceJson {
    pub schema_version: String,
    pub n: usize,
    pub m: usize,
    pub r: usize,
    pub kind: TruthKind,
    pub is_complex: bool,
    pub seeds: SeedTriple,
    pub corruption: CorruptionSpec,
    pub z: Vec<f64>,
    pub beta_support: Vec<usize>,
    pub beta_values: Vec<f64>,
    pub w: Vec<f64>,
}

impl<S: Scalar> Instance<S> {
    pub fn to_json(&self) -> InstanceJson {
        InstanceJson {
            schema_version: SCHEMA_VERSION.to_string(),
            n: self.n(),
            m: self.m(),
            r: self.rank(),
            kind: self.truth.kind(),
            is_complex: S::IS_COMPLEX,
            seeds: self.seeds,
            corruption: self.corruption.clone(),
            z: self.z.clone(),
            beta_support: self.beta_support.clone(),
            beta_values: self.beta_values.clone(),
            w: self.w.clone(),
        }
    }
}

fn check_schema(found: &str) -> Result<()> {
    if found != SCHEMA_VERSION {
        return Err(Error::SchemaVersion {
            expected: SCHEMA_VERSION.to_string(),
            found: found.to_string(),
        });
    }
    Ok(())
}

fn rebuild_instance<S: Scalar>(json: &InstanceJson) -> Result<Instance<S>> {
    let ensemble = gen_ensemble::<S>(json.n, json.m, json.seeds.ensemble)?;
    let truth = gen_ground_truth::<S>(json.n, json.r, json.kind, json.seeds.truth)?;
    let clean_z = match truth.factor() {
        Some(factor) => ensemble.measure_factored(factor)?,
        None => ensemble.measure(&truth.x0())?,
    };
    if json.z.len() != json.m || json.w.len() != json.m {
        return Err(Error::MalformedData(
            "measurement vectors do not match m".into(),
        ));
    }
    if json.beta_support.len() != json.beta_values.len() {
        return Err(Error::MalformedData(
            "outlier support and values differ in length".into(),
        ));
    }
    // Replay integrity: the stored z must recompose from the regenerated
    // clean measurements and the stored corruption, bitwise.
    let mut recomposed = clean_z.clone();
    for (&idx, &val) in json.beta_support.iter().zip(json.beta_values.iter()) {
        if idx >= json.m {
            return Err(Error::MalformedData(format!(
                "outlier index {idx} out of range"
            )));
        }
        recomposed[idx] += val;
    }
    for (zi, wi) in recomposed.iter_mut().zip(json.w.iter()) {
        *zi += *wi;
    }
    if recomposed != json.z {
        return Err(Error::MalformedData(
            "stored z does not recompose from seeds and corruption".into(),
        ));
    }
    Ok(Instance {
        ensemble,
        truth,
        z: json.z.clone(),
        clean_z,
        beta_support: json.beta_support.clone(),
        beta_values: json.beta_values.clone(),
        w: json.w.clone(),
        seeds: json.seeds,
        corruption: json.corruption.clone(),
    })
}

impl AnyInstance {
    pub fn from_json(json: &InstanceJson) -> Result<Self> {
        check_schema(&json.schema_version)?;
        if json.is_complex != json.kind.is_complex() {
            return Err(Error::MalformedData(
                "is_complex flag contradicts the truth kind".into(),
            ));
        }
        if json.is_complex {
            Ok(AnyInstance::Complex(rebuild_instance(json)?))
        } else {
            Ok(AnyInstance::Real(rebuild_instance(json)?))
        }
    }

    pub fn to_json(&self) -> InstanceJson {
        match self {
            AnyInstance::Real(i) => i.to_json(),
            AnyInstance::Complex(i) => i.to_json(),
        }
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let json: InstanceJson = serde_json::from_str(&text)?;
        Self::from_json(&json)
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        let json = self.to_json();
        std::fs::write(path, serde_json::to_string_pretty(&json)?)?;
        Ok(())
    }
}
