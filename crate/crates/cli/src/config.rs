//! TOML configuration files.
//!
//! Every file carries `schema_version = 1`; unknown keys are rejected.

use std::path::{Path, PathBuf};

use adrkit::adr::{AdrParams, ProblemParams, Regime, StopRule};
use adrkit::demiclosedness::TrendTolerance;
use adrkit::operators::{OperatorSpec, Property, SamplingConfig};
use adrkit::vecspace::Vector;
use adrkit::{AdrOperator, ResolventHandle};
use nalgebra::DMatrix;
use rand::rngs::StdRng;
use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer, Serialize};

use crate::UsageError;

pub const SCHEMA_VERSION: u32 = 1;

pub fn load<T: DeserializeOwned>(path: &Path) -> anyhow::Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| UsageError(format!("cannot read {}: {e}", path.display())))?;
    parse(&text).map_err(|e| UsageError(format!("{}: {e}", path.display())).into())
}

pub fn parse<T: DeserializeOwned>(text: &str) -> Result<T, String> {
    #[derive(Deserialize)]
    struct Version {
        schema_version: Option<u32>,
    }
    let table: toml::Table = toml::from_str(text).map_err(|e| e.to_string())?;
    let version: Version = toml::Value::Table(table.clone())
        .try_into()
        .map_err(|e: toml::de::Error| e.to_string())?;
    match version.schema_version {
        Some(SCHEMA_VERSION) => {}
        Some(v) => {
            return Err(format!(
                "unsupported schema_version {v}, expected {SCHEMA_VERSION}"
            ))
        }
        None => return Err("missing schema_version".into()),
    }
    toml::Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| e.to_string())
}

/// An operator from the zoo, tagged by `kind`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum OperatorConfig {
    Affine {
        matrix: Vec<Vec<f64>>,
        shift: Option<Vec<f64>>,
    },
    ScaledIdentity {
        scale: f64,
        shift: Option<Vec<f64>>,
    },
    Zero,
    Rotation2d {
        degrees: f64,
    },
    ScaledIdentityPlusRotation {
        scale: f64,
        degrees: f64,
        shift: Option<Vec<f64>>,
    },
    NormalConeBox {
        lower: Vec<f64>,
        upper: Vec<f64>,
    },
    NormalConeBall {
        center: Vec<f64>,
        radius: f64,
    },
    Sum {
        a: Box<OperatorConfig>,
        b: Box<OperatorConfig>,
    },
}

fn shift_vector(shift: &Option<Vec<f64>>, dim: usize) -> Vector {
    shift
        .as_ref()
        .map_or_else(|| Vector::zeros(dim), |s| Vector::from_row_slice(s))
}

impl OperatorConfig {
    pub fn build(&self, dim: usize) -> anyhow::Result<OperatorSpec> {
        let spec = match self {
            OperatorConfig::Affine { matrix, shift } => {
                let rows = matrix.len();
                if rows != dim || matrix.iter().any(|r| r.len() != dim) {
                    return Err(UsageError(format!("affine matrix must be {dim}x{dim}")).into());
                }
                let flat: Vec<f64> = matrix.iter().flatten().copied().collect();
                OperatorSpec::affine(
                    DMatrix::from_row_slice(dim, dim, &flat),
                    shift_vector(shift, dim),
                )
            }
            OperatorConfig::ScaledIdentity { scale, shift } => {
                OperatorSpec::scaled_identity(*scale, shift_vector(shift, dim))
            }
            OperatorConfig::Zero => OperatorSpec::zero(dim),
            OperatorConfig::Rotation2d { degrees } => OperatorSpec::rotation2d(*degrees),
            OperatorConfig::ScaledIdentityPlusRotation {
                scale,
                degrees,
                shift,
            } => OperatorSpec::scaled_identity_plus_rotation(
                *scale,
                *degrees,
                shift_vector(shift, dim),
            ),
            OperatorConfig::NormalConeBox { lower, upper } => OperatorSpec::normal_cone_box(
                Vector::from_row_slice(lower),
                Vector::from_row_slice(upper),
            ),
            OperatorConfig::NormalConeBall { center, radius } => {
                OperatorSpec::normal_cone_ball(Vector::from_row_slice(center), *radius)
            }
            OperatorConfig::Sum { a, b } => OperatorSpec::sum(a.build(dim)?, b.build(dim)?),
        }
        .map_err(|e| UsageError(format!("operator {}: {e}", self.kind())))?;
        if spec.dim() != dim {
            return Err(UsageError(format!(
                "operator {} has dim {}, problem dim is {dim}",
                self.kind(),
                spec.dim()
            ))
            .into());
        }
        Ok(spec)
    }

    fn kind(&self) -> &'static str {
        match self {
            OperatorConfig::Affine { .. } => "affine",
            OperatorConfig::ScaledIdentity { .. } => "scaled_identity",
            OperatorConfig::Zero => "zero",
            OperatorConfig::Rotation2d { .. } => "rotation2d",
            OperatorConfig::ScaledIdentityPlusRotation { .. } => "scaled_identity_plus_rotation",
            OperatorConfig::NormalConeBox { .. } => "normal_cone_box",
            OperatorConfig::NormalConeBall { .. } => "normal_cone_ball",
            OperatorConfig::Sum { .. } => "sum",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub dim: usize,
    pub a: OperatorConfig,
    pub b: OperatorConfig,
}

impl ProblemConfig {
    pub fn build(&self) -> anyhow::Result<(OperatorSpec, OperatorSpec)> {
        if self.dim == 0 {
            return Err(UsageError("problem.dim must be positive".into()).into());
        }
        Ok((self.a.build(self.dim)?, self.b.build(self.dim)?))
    }
}

/// `kappa = 0.5` or `kappa = "auto"` (the midpoint of `(0, κ̄)`).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum KappaSpec {
    #[default]
    Auto,
    Value(f64),
}

impl<'de> Deserialize<'de> for KappaSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(KappaSpec::Value(v)),
            Raw::Text(s) if s == "auto" => Ok(KappaSpec::Auto),
            Raw::Text(s) => Err(serde::de::Error::custom(format!(
                "kappa must be a number or \"auto\", got {s:?}"
            ))),
        }
    }
}

impl Serialize for KappaSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            KappaSpec::Auto => s.serialize_str("auto"),
            KappaSpec::Value(v) => s.serialize_f64(*v),
        }
    }
}

impl KappaSpec {
    pub fn value(self) -> Option<f64> {
        match self {
            KappaSpec::Auto => None,
            KappaSpec::Value(v) => Some(v),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    pub gamma: f64,
    pub delta: f64,
    pub alpha: f64,
    pub beta: f64,
    #[serde(default)]
    pub kappa: KappaSpec,
    pub regime: Regime,
    #[serde(default)]
    pub shadow_mode: bool,
}

impl ParamsConfig {
    pub fn problem(&self) -> ProblemParams {
        ProblemParams::new(self.gamma, self.delta, self.alpha, self.beta, self.regime)
            .with_shadow_mode(self.shadow_mode)
    }
}

/// `x0 = "zeros"`, `x0 = "random"` (standard normal, seeded) or an explicit
/// list.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum StartSpec {
    #[default]
    Zeros,
    Random,
    Explicit(Vec<f64>),
}

impl<'de> Deserialize<'de> for StartSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            List(Vec<f64>),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::List(v) => Ok(StartSpec::Explicit(v)),
            Raw::Text(s) if s == "zeros" => Ok(StartSpec::Zeros),
            Raw::Text(s) if s == "random" => Ok(StartSpec::Random),
            Raw::Text(s) => Err(serde::de::Error::custom(format!(
                "x0 must be \"zeros\", \"random\" or a list, got {s:?}"
            ))),
        }
    }
}

impl Serialize for StartSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            StartSpec::Zeros => s.serialize_str("zeros"),
            StartSpec::Random => s.serialize_str("random"),
            StartSpec::Explicit(v) => v.serialize(s),
        }
    }
}

impl StartSpec {
    pub fn build(&self, dim: usize, seed: u64) -> anyhow::Result<Vector> {
        match self {
            StartSpec::Zeros => Ok(Vector::zeros(dim)),
            StartSpec::Random => {
                let mut rng = StdRng::seed_from_u64(seed);
                Ok(Vector::from_fn(dim, |_, _| {
                    Distribution::<f64>::sample(&StandardNormal, &mut rng)
                }))
            }
            StartSpec::Explicit(v) if v.len() == dim => Ok(Vector::from_row_slice(v)),
            StartSpec::Explicit(v) => {
                Err(UsageError(format!("x0 has {} entries, problem dim is {dim}", v.len())).into())
            }
        }
    }
}

fn default_max_iters() -> usize {
    StopRule::default().max_iters
}

fn default_step_tol() -> f64 {
    StopRule::default().step_tol
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub x0: StartSpec,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    #[serde(default = "default_step_tol")]
    pub step_tol: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            x0: StartSpec::Zeros,
            seed: 0,
            max_iters: default_max_iters(),
            step_tol: default_step_tol(),
        }
    }
}

fn default_trace() -> PathBuf {
    "trace.jsonl".into()
}

fn default_summary() -> PathBuf {
    "summary.csv".into()
}

fn default_dim_cap() -> usize {
    StopRule::default().dim_cap
}

/// Output paths are relative to `--out`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputsConfig {
    #[serde(default = "default_trace")]
    pub trace: PathBuf,
    #[serde(default = "default_summary")]
    pub summary: PathBuf,
    #[serde(default = "default_dim_cap")]
    pub dim_cap: usize,
}

impl Default for OutputsConfig {
    fn default() -> Self {
        Self {
            trace: default_trace(),
            summary: default_summary(),
            dim_cap: default_dim_cap(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub problem: ProblemConfig,
    pub params: ParamsConfig,
    #[serde(default)]
    pub run: RunConfig,
    #[serde(default)]
    pub outputs: OutputsConfig,
}

impl ExperimentConfig {
    pub fn stop_rule(&self) -> StopRule {
        StopRule {
            max_iters: self.run.max_iters,
            step_tol: self.run.step_tol,
            dim_cap: self.outputs.dim_cap,
        }
    }

    /// Validated parameters and the splitting operator.
    pub fn build(&self) -> anyhow::Result<AdrOperator> {
        let (a, b) = self.problem.build()?;
        let params = AdrParams::new(self.params.problem(), self.params.kappa.value())?;
        Ok(AdrOperator::new(params, a, b)?)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub gamma: Option<Vec<f64>>,
    pub delta: Option<Vec<f64>>,
    /// Absolute relaxation values.
    pub kappa: Option<Vec<f64>>,
    /// Relaxations as fractions of each cell's `κ̄`.
    pub kappa_fraction: Option<Vec<f64>>,
}

fn default_max_cells() -> usize {
    10_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    /// Base seed; cell `i` uses `base_seed ^ i`. Defaults to `run.seed`.
    pub base_seed: Option<u64>,
    #[serde(default = "default_max_cells")]
    pub max_cells: usize,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            base_seed: None,
            max_cells: default_max_cells(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub schema_version: u32,
    pub problem: ProblemConfig,
    pub params: ParamsConfig,
    #[serde(default)]
    pub run: RunConfig,
    #[serde(default)]
    pub outputs: OutputsConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub sweep: SweepSection,
}

impl SweepConfig {
    pub fn base(&self) -> ExperimentConfig {
        ExperimentConfig {
            schema_version: self.schema_version,
            problem: self.problem.clone(),
            params: self.params,
            run: self.run.clone(),
            outputs: self.outputs.clone(),
        }
    }
}

/// What `certify` probes: a zoo operator itself or its (relaxed) resolvent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "map", rename_all = "snake_case", deny_unknown_fields)]
pub enum TargetConfig {
    Operator {
        dim: usize,
        operator: OperatorConfig,
    },
    Resolvent {
        dim: usize,
        gamma: f64,
        #[serde(default = "one")]
        relaxation: f64,
        operator: OperatorConfig,
    },
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingSection {
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_radius")]
    pub radius: f64,
}

fn default_samples() -> usize {
    SamplingConfig::default().samples
}

fn default_radius() -> f64 {
    SamplingConfig::default().radius
}

impl Default for SamplingSection {
    fn default() -> Self {
        Self {
            samples: default_samples(),
            seed: 0,
            radius: default_radius(),
        }
    }
}

impl SamplingSection {
    pub fn sampling(&self) -> SamplingConfig {
        SamplingConfig {
            samples: self.samples,
            seed: self.seed,
            radius: self.radius,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertifyConfig {
    pub schema_version: u32,
    pub target: TargetConfig,
    pub claim: Property,
    #[serde(default)]
    pub sampling: SamplingSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DemiMode {
    /// Cocoercive premises with the raw aggregate sum.
    CocoerciveRaw,
    /// Cocoercive premises with the balanced aggregate sum.
    CocoerciveBalanced,
    /// Averaged premises for any number of maps.
    AveragedGeneral,
    /// Averaged premises for two maps with balanced constants.
    AveragedTwoBalanced,
    /// Single-operator premises in the weighted product space.
    Product,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckSection {
    /// A trace written by `run`.
    pub trace: PathBuf,
    pub mode: DemiMode,
    /// The claimed limit of the iterates.
    pub x_star: Vec<f64>,
    /// Overrides the claimed `y = J₁(x*)`.
    pub y: Option<Vec<f64>>,
    /// Overrides for `ρ`, `τ` and `θ`; by default they follow from the
    /// parameters.
    pub rho: Option<Vec<f64>>,
    pub tau: Option<Vec<f64>>,
    pub theta: Option<Vec<f64>>,
    #[serde(default = "default_atol")]
    pub atol: f64,
    #[serde(default = "default_rtol")]
    pub rtol: f64,
    /// Tolerance for the limit identities checked after the premises.
    #[serde(default = "default_conclusion_tol")]
    pub conclusion_tol: f64,
}

fn default_conclusion_tol() -> f64 {
    1e-8
}

fn default_atol() -> f64 {
    TrendTolerance::default().atol
}

fn default_rtol() -> f64 {
    TrendTolerance::default().rtol
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DemiCheckConfig {
    pub schema_version: u32,
    pub problem: ProblemConfig,
    pub params: ParamsConfig,
    pub check: CheckSection,
}

impl DemiCheckConfig {
    pub fn tolerance(&self) -> TrendTolerance {
        TrendTolerance {
            atol: self.check.atol,
            rtol: self.check.rtol,
        }
    }
}

impl TargetConfig {
    pub fn operator(&self) -> anyhow::Result<OperatorSpec> {
        match self {
            TargetConfig::Operator { dim, operator }
            | TargetConfig::Resolvent { dim, operator, .. } => operator.build(*dim),
        }
    }

    pub fn resolvent(&self) -> anyhow::Result<Option<(ResolventHandle, f64)>> {
        match self {
            TargetConfig::Operator { .. } => Ok(None),
            TargetConfig::Resolvent {
                gamma, relaxation, ..
            } => Ok(Some((
                ResolventHandle::new(self.operator()?, *gamma)?,
                *relaxation,
            ))),
        }
    }
}
