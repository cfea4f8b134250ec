//! Experiment configuration documents.

use std::path::PathBuf;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use scout_core::divergence::DmHyperparams;
use scout_core::samplers::{
    ArwmParams, FiniteParams, MalaParams, PtParams, RwmParams, SamplerConfig, SamplerKind, ScoutParams,
};
use scout_core::targets::{
    generate_horseshoe_data, Banana, BananaMixture, BananaParams, BasisVector, Gaussian, Horseshoe, Target,
};

use crate::HarnessError;

/// A target usable from several replicate threads.
pub type SharedTarget = Box<dyn Target + Send + Sync>;

/// Target identifier plus its parameter object.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetSpec {
    pub id: String,
    #[serde(default, skip_serializing_if = "Map::is_empty")]
    pub params: Map<String, Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DoubleBananaParams {
    /// Upper component; the lower one is its reflection through `y = reflection_y`.
    pub component: BananaParams,
    pub reflection_y: f64,
}

impl Default for DoubleBananaParams {
    fn default() -> Self {
        Self {
            component: BananaMixture::double_banana_component(),
            reflection_y: -25.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BasisVectorParams {
    pub dim: usize,
    pub radius: f64,
}

impl Default for BasisVectorParams {
    fn default() -> Self {
        Self { dim: 4, radius: 10.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HorseshoeParams {
    pub n: usize,
    pub p: usize,
    pub data_seed: u64,
}

impl Default for HorseshoeParams {
    fn default() -> Self {
        Self {
            n: 1000,
            p: 20,
            data_seed: 7,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoParams {}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianParams {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

pub const TARGET_IDS: [&str; 6] = [
    "banana",
    "double_banana",
    "basis_vector_4d",
    "banana_bunch",
    "horseshoe",
    "gaussian",
];

fn parse_params<P: DeserializeOwned>(id: &str, params: &Map<String, Value>) -> Result<P, HarnessError> {
    serde_json::from_value(Value::Object(params.clone()))
        .map_err(|e| HarnessError::Config(format!("target `{id}` params: {e}")))
}

impl TargetSpec {
    pub fn new(id: &str) -> Self {
        Self {
            id: id.to_string(),
            params: Map::new(),
        }
    }

    pub fn with_params<P: Serialize>(id: &str, params: &P) -> Self {
        let params = match serde_json::to_value(params) {
            Ok(Value::Object(m)) => m,
            _ => Map::new(),
        };
        Self {
            id: id.to_string(),
            params,
        }
    }

    /// Constructs the target, rejecting unknown ids and malformed params.
    pub fn build(&self) -> Result<SharedTarget, HarnessError> {
        let id = self.id.as_str();
        let core = |e: scout_core::Error| HarnessError::Config(format!("target `{id}`: {e}"));
        Ok(match id {
            "banana" => {
                let p: BananaParams = parse_params(id, &self.params)?;
                Box::new(Banana::new(p).map_err(core)?)
            }
            "double_banana" => {
                let p: DoubleBananaParams = parse_params(id, &self.params)?;
                Box::new(BananaMixture::double_banana(p.component, p.reflection_y).map_err(core)?)
            }
            "basis_vector_4d" => {
                let p: BasisVectorParams = parse_params(id, &self.params)?;
                if p.dim == 0 || !(p.radius > 0.0) {
                    return Err(HarnessError::Config("basis_vector_4d needs dim ≥ 1 and radius > 0".into()));
                }
                Box::new(BasisVector::new(p.dim, p.radius))
            }
            "banana_bunch" => {
                let _: NoParams = parse_params(id, &self.params)?;
                Box::new(BananaMixture::default_banana_bunch())
            }
            "horseshoe" => {
                let p: HorseshoeParams = parse_params(id, &self.params)?;
                let data = generate_horseshoe_data(p.data_seed, p.n, p.p).map_err(core)?;
                Box::new(Horseshoe::new(data).map_err(core)?)
            }
            "gaussian" => {
                let p: GaussianParams = parse_params(id, &self.params)?;
                Box::new(Gaussian::new(p.mean, p.std).map_err(core)?)
            }
            other => {
                return Err(HarnessError::Config(format!(
                    "unknown target id `{other}` (expected one of {})",
                    TARGET_IDS.join(", ")
                )))
            }
        })
    }
}

/// One sampler row of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplerSpec {
    pub id: SamplerKind,
    /// Row name in reports and output paths; defaults to the sampler id.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default)]
    pub dm: DmHyperparams,
    #[serde(default)]
    pub scout: ScoutParams,
    #[serde(default)]
    pub finite: FiniteParams,
    #[serde(default)]
    pub pt: PtParams,
    #[serde(default)]
    pub mala: MalaParams,
    #[serde(default)]
    pub rwm: RwmParams,
    #[serde(default)]
    pub arwm: ArwmParams,
}

impl SamplerSpec {
    pub fn new(id: SamplerKind) -> Self {
        Self {
            id,
            label: None,
            dm: DmHyperparams::default(),
            scout: ScoutParams::default(),
            finite: FiniteParams::default(),
            pt: PtParams::default(),
            mala: MalaParams::default(),
            rwm: RwmParams::default(),
            arwm: ArwmParams::default(),
        }
    }

    pub fn labelled(mut self, label: &str) -> Self {
        self.label = Some(label.to_string());
        self
    }

    pub fn label(&self) -> String {
        self.label.clone().unwrap_or_else(|| self.id.id().to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExportOptions {
    /// Write every `sample_stride`-th row to the CSV exports.
    pub sample_stride: usize,
    /// Record the DM factor every `n` adaptive iterations.
    pub cholesky_stride: Option<usize>,
    /// Axis pairs for scatter projections of the retained samples.
    pub projections: Vec<(usize, usize)>,
    /// Write a per-coordinate trace of the retained samples.
    pub trace: bool,
    pub plot_script: bool,
}

impl Default for ExportOptions {
    fn default() -> Self {
        Self {
            sample_stride: 1,
            cholesky_stride: None,
            projections: Vec::new(),
            trace: false,
            plot_script: true,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiagnosticsOptions {
    /// Radius for mode-visit counts; omitted means no counts.
    pub mode_radius: Option<f64>,
    pub left_fraction: bool,
}

fn default_replicates() -> usize {
    1
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("runs")
}

/// A complete experiment: one target, one or more sampler rows, replicated
/// over consecutive seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub description: String,
    pub target: TargetSpec,
    pub samplers: Vec<SamplerSpec>,
    pub iterations: usize,
    #[serde(default)]
    pub burn_in: usize,
    /// Replicate `i` uses seed `seed + i`.
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    /// Start point; omitted means the origin.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<Vec<f64>>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub export: ExportOptions,
    #[serde(default)]
    pub diagnostics: DiagnosticsOptions,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        serde_json::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn load(path: &std::path::Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn seeds(&self) -> Vec<u64> {
        (0..self.replicates as u64).map(|i| self.seed + i).collect()
    }

    /// Row labels, with a numeric suffix on repeats.
    pub fn labels(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::with_capacity(self.samplers.len());
        for s in &self.samplers {
            let base = s.label();
            let mut label = base.clone();
            let mut k = 2;
            while out.contains(&label) {
                label = format!("{base}_{k}");
                k += 1;
            }
            out.push(label);
        }
        out
    }

    /// Core sampler configuration for row `row` and `seed`.
    pub fn sampler_config(&self, row: usize, dim: usize, seed: u64) -> SamplerConfig {
        let s = &self.samplers[row];
        let mut c = SamplerConfig::new(s.id, self.iterations, self.x0.clone().unwrap_or_else(|| vec![0.0; dim]));
        c.seed = seed;
        c.dm = s.dm.clone();
        c.scout = s.scout.clone();
        c.finite = s.finite.clone();
        c.pt = s.pt.clone();
        c.mala = s.mala.clone();
        c.rwm = s.rwm.clone();
        c.arwm = s.arwm.clone();
        c.cholesky_stride = self.export.cholesky_stride;
        c
    }

    /// Checks everything that can be checked without sampling and returns
    /// the built target.
    pub fn validate(&self) -> Result<SharedTarget, HarnessError> {
        let target = self.target.build()?;
        let dim = target.dim();
        if self.samplers.is_empty() {
            return Err(HarnessError::Config("at least one sampler is required".into()));
        }
        if self.replicates == 0 {
            return Err(HarnessError::Config("replicates must be at least 1".into()));
        }
        if self.seed.checked_add(self.replicates as u64).is_none() {
            return Err(HarnessError::Config("seed range overflows".into()));
        }
        if self.burn_in + 2 > self.iterations {
            return Err(HarnessError::Config("burn_in must leave at least 2 retained rows".into()));
        }
        if self.export.sample_stride == 0 {
            return Err(HarnessError::Config("export.sample_stride must be at least 1".into()));
        }
        for &(a, b) in &self.export.projections {
            if a >= dim || b >= dim || a == b {
                return Err(HarnessError::Config(format!(
                    "projection ({a}, {b}) is invalid for dimension {dim}"
                )));
            }
        }
        if matches!(self.diagnostics.mode_radius, Some(r) if !(r > 0.0)) {
            return Err(HarnessError::Config("diagnostics.mode_radius must be positive".into()));
        }
        if let Some(x0) = &self.x0 {
            if x0.len() != dim {
                return Err(HarnessError::Config(format!(
                    "x0 has {} coordinates, target `{}` has {dim}",
                    x0.len(),
                    self.target.id
                )));
            }
        }
        for (row, label) in self.labels().iter().enumerate() {
            if label.is_empty() || label.contains(['/', '\\']) || label.starts_with('.') {
                return Err(HarnessError::Config(format!("sampler label `{label}` is not a valid directory name")));
            }
            let c = self.sampler_config(row, dim, self.seed);
            c.validate(dim)
                .map_err(|e| HarnessError::Config(format!("sampler `{label}`: {e}")))?;
            if let Some(x0) = &self.x0 {
                let lp = target.log_density(x0);
                if !lp.is_finite() {
                    return Err(HarnessError::Config("x0 has zero or undefined target density".into()));
                }
            }
        }
        Ok(target)
    }
}
