use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sparse_har::dataio::{CsvSchema, SynthConfig};
use sparse_har::harness::{ModelSpec, TrainConfig, DEFAULT_DROP_RATES, DEFAULT_WINDOWS};
use sparse_har::interp::InterpKind;
use sparse_har::model::SetArchitecture;

use crate::InputError;

/// Where segments come from when no archive is given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DataSource {
    Csv {
        path: PathBuf,
        schema: SchemaRef,
    },
    Synthetic {
        generator: SynthConfig,
        /// Independent streams (one per synthetic subject).
        #[serde(default = "one")]
        subjects: usize,
    },
}

fn one() -> usize {
    1
}

/// A named preset (`"wisdm"`) or an explicit column mapping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SchemaRef {
    Preset(String),
    Custom(CsvSchema),
}

impl SchemaRef {
    pub fn resolve(&self) -> Result<CsvSchema, InputError> {
        match self {
            SchemaRef::Custom(s) => Ok(s.clone()),
            SchemaRef::Preset(name) if name.eq_ignore_ascii_case("wisdm") => Ok(CsvSchema::wisdm()),
            SchemaRef::Preset(name) => Err(InputError(format!("unknown schema preset {name:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BaselineSpec {
    pub hidden: Vec<usize>,
    pub interp: InterpKind,
    pub target_rate_hz: f64,
}

impl Default for BaselineSpec {
    fn default() -> Self {
        Self {
            hidden: vec![256, 128],
            interp: InterpKind::Linear,
            target_rate_hz: 20.0,
        }
    }
}

impl BaselineSpec {
    pub fn spec(&self, interp: InterpKind) -> ModelSpec {
        ModelSpec::DenseBaseline {
            hidden: self.hidden.clone(),
            interp,
            target_rate_hz: self.target_rate_hz,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub drop_rates: Vec<f64>,
    /// Also cross-validate every model over `windows × interp_kinds`.
    pub grid: bool,
    pub windows: Vec<f64>,
    pub interp_kinds: Vec<InterpKind>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            drop_rates: DEFAULT_DROP_RATES.to_vec(),
            grid: false,
            windows: DEFAULT_WINDOWS.to_vec(),
            interp_kinds: InterpKind::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LatencyConfig {
    pub repetitions: usize,
    pub batch_size: usize,
    /// Thin the batch before timing.
    pub drop_rate: f64,
}

impl Default for LatencyConfig {
    fn default() -> Self {
        Self {
            repetitions: 30,
            batch_size: 128,
            drop_rate: 0.0,
        }
    }
}

/// Artifacts produced by earlier commands.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Inputs {
    pub segments: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub baseline: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub data: Option<DataSource>,
    pub inputs: Inputs,
    pub train: TrainConfig,
    pub model: ModelSpec,
    pub baseline: BaselineSpec,
    /// `train` also fits the dense baseline.
    pub train_baseline: bool,
    pub folds: usize,
    pub cross_validate: bool,
    pub sweep: SweepConfig,
    pub latency: LatencyConfig,
    pub out: Option<PathBuf>,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            data: None,
            inputs: Inputs::default(),
            train: TrainConfig::default(),
            model: ModelSpec::Set(SetArchitecture::default()),
            baseline: BaselineSpec::default(),
            train_baseline: false,
            folds: 7,
            cross_validate: false,
            sweep: SweepConfig::default(),
            latency: LatencyConfig::default(),
            out: None,
            seed: 0,
        }
    }
}

/// Values given on the command line; each one beats the config file.
#[derive(Debug, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub segments: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub baseline: Option<PathBuf>,
    pub train_baseline: bool,
    pub cross_validate: bool,
    pub grid: bool,
}

/// Reads a config file, which may also be a run manifest (its `config`
/// member is used).
pub fn read_config(path: &Path) -> anyhow::Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| InputError(format!("cannot read config {}: {e}", path.display())))?;
    let mut doc: Value = serde_json::from_str(&text)
        .map_err(|e| InputError(format!("{} is not valid JSON: {e}", path.display())))?;
    if doc.get("command").is_some() {
        if let Some(inner) = doc.get_mut("config") {
            doc = inner.take();
        }
    }
    Ok(serde_json::from_value(doc).map_err(|e| InputError(format!("{}: {e}", path.display())))?)
}

impl RunConfig {
    pub fn resolve(path: Option<&Path>, o: Overrides) -> anyhow::Result<Self> {
        let mut c = match path {
            Some(p) => read_config(p)?,
            None => RunConfig::default(),
        };
        if let Some(out) = o.out {
            c.out = Some(out);
        }
        if let Some(seed) = o.seed {
            c.seed = seed;
        }
        if let Some(p) = o.segments {
            c.inputs.segments = Some(p);
        }
        if let Some(p) = o.model {
            c.inputs.model = Some(p);
        }
        if let Some(p) = o.baseline {
            c.inputs.baseline = Some(p);
        }
        c.train_baseline |= o.train_baseline;
        c.cross_validate |= o.cross_validate;
        c.sweep.grid |= o.grid;
        c.train.seed = c.seed;
        Ok(c)
    }

    pub fn out_dir(&self) -> anyhow::Result<&Path> {
        Ok(self
            .out
            .as_deref()
            .ok_or_else(|| InputError("no output directory: pass --out or set \"out\"".into()))?)
    }

    /// Checks that every referenced input file exists before any work starts.
    pub fn check_paths(&self) -> anyhow::Result<()> {
        let mut paths: Vec<&Path> = Vec::new();
        if let Some(DataSource::Csv { path, .. }) = &self.data {
            paths.push(path);
        }
        paths.extend(
            [&self.inputs.segments, &self.inputs.model, &self.inputs.baseline]
                .into_iter()
                .flatten()
                .map(PathBuf::as_path),
        );
        for p in paths {
            if !p.is_file() {
                return Err(InputError(format!("input file not found: {}", p.display())).into());
            }
        }
        Ok(())
    }
}
