//! JSON run configuration: schema validation (unknown keys rejected) and
//! conversion into the library's model types.

use std::collections::BTreeMap;

use serde::Deserialize;

use brwlab::gw::OffspringLaw;
use brwlab::simulate::{Displacement, Engine, SimConfig, SimModel};
use brwlab::step::{LatticeStepLaw, StepLaw};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfigFile {
    pub model: ModelConfig,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub rates: Option<RatesSection>,
    #[serde(default)]
    pub simulate: Option<SimulateSection>,
    #[serde(default)]
    pub estimate: Option<EstimateSection>,
    #[serde(default)]
    pub oracle: Option<OracleSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    /// Offspring pmf as an object with integer-string keys.
    pub offspring: BTreeMap<String, f64>,
    #[serde(default)]
    pub step: Option<StepConfig>,
    #[serde(default)]
    pub lattice: Option<LatticeConfig>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepConfig {
    pub r: f64,
    pub lambda_plus: f64,
    pub lambda_minus: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeConfig {
    pub h: f64,
    pub pmf: BTreeMap<String, f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RatesSection {
    pub kinds: Vec<String>,
    pub x_min: f64,
    pub x_max: f64,
    pub points: usize,
    #[serde(default)]
    pub scaling_n: Option<u32>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateSection {
    pub engine: String,
    pub horizon_n: u32,
    pub replicas: usize,
    pub population_cap: u64,
    #[serde(default)]
    pub condition_on_survival: bool,
    #[serde(default = "default_true")]
    pub emit_replicas: bool,
    /// When present, also runs both engines side by side and writes the
    /// paired empirical CDFs with their 99% bands.
    #[serde(default)]
    pub domination_grid: Option<GridConfig>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub x_min: f64,
    pub x_max: f64,
    pub points: usize,
}

impl GridConfig {
    pub fn build(&self) -> Result<Vec<f64>, ConfigError> {
        if self.points < 1 || self.x_min.is_nan() || self.x_max.is_nan() || self.x_min > self.x_max
        {
            return Err(ConfigError("invalid grid".into()));
        }
        Ok((0..self.points)
            .map(|i| {
                if self.points == 1 {
                    self.x_min
                } else {
                    self.x_min
                        + (self.x_max - self.x_min) * i as f64 / (self.points - 1) as f64
                }
            })
            .collect())
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimateSection {
    pub engine: String,
    pub horizon_n: u32,
    pub replicas: usize,
    pub population_cap: u64,
    #[serde(default = "default_level")]
    pub level: f64,
    #[serde(default)]
    pub events: Vec<EventConfig>,
    #[serde(default)]
    pub trend: Option<TrendConfig>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrendConfig {
    /// One of "gw_lower", "ind_upper_lattice", "single_walk".
    pub kind: String,
    #[serde(default)]
    pub x: Option<f64>,
    pub n_list: Vec<u32>,
    #[serde(default)]
    pub replicas: Option<u64>,
    #[serde(default)]
    pub conditional: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventConfig {
    pub side: String,
    pub x: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSection {
    pub kind: String,
    pub horizon_n: u32,
    #[serde(default)]
    pub conditional: bool,
    #[serde(default)]
    pub max_points: Option<usize>,
}

fn default_true() -> bool {
    true
}

fn default_level() -> f64 {
    0.99
}

/// Anything wrong with the configuration document itself.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

pub fn parse_config(text: &str) -> Result<RunConfigFile, ConfigError> {
    serde_json::from_str(text).map_err(|e| ConfigError(e.to_string()))
}

fn integer_keys<K: std::str::FromStr>(
    map: &BTreeMap<String, f64>,
) -> Result<Vec<(K, f64)>, ConfigError>
where
    K::Err: std::fmt::Display,
{
    map.iter()
        .map(|(k, &v)| {
            k.parse::<K>()
                .map(|key| (key, v))
                .map_err(|e| ConfigError(format!("bad integer key {k:?}: {e}")))
        })
        .collect()
}

impl ModelConfig {
    pub fn offspring_law(&self) -> Result<OffspringLaw, brwlab::Error> {
        let pairs: Vec<(u32, f64)> = integer_keys(&self.offspring)
            .map_err(|e| brwlab::Error::InvalidOffspring(e.0))?;
        let map: BTreeMap<u32, f64> = pairs.into_iter().collect();
        OffspringLaw::from_pmf(&map)
    }

    pub fn displacement(&self) -> Result<Displacement, ConfigError> {
        match (&self.step, &self.lattice) {
            (Some(s), None) => StepLaw::centered(s.r, s.lambda_plus, s.lambda_minus)
                .map(Displacement::Continuous)
                .map_err(|e| ConfigError(e.to_string())),
            (None, Some(l)) => {
                let pairs: Vec<(i64, f64)> = integer_keys(&l.pmf)?;
                LatticeStepLaw::new(l.h, &pairs)
                    .map(Displacement::Lattice)
                    .map_err(|e| ConfigError(e.to_string()))
            }
            (Some(_), Some(_)) => Err(ConfigError(
                "model must have exactly one of `step` and `lattice`, not both".into(),
            )),
            (None, None) => Err(ConfigError(
                "model needs a `step` or a `lattice` displacement law".into(),
            )),
        }
    }

    pub fn step_law(&self) -> Result<StepLaw, ConfigError> {
        match self.displacement()? {
            Displacement::Continuous(s) => Ok(s),
            Displacement::Lattice(_) => Err(ConfigError(
                "this command needs a continuous `step` law".into(),
            )),
        }
    }

    pub fn lattice_law(&self) -> Result<LatticeStepLaw, ConfigError> {
        match self.displacement()? {
            Displacement::Lattice(l) => Ok(l),
            Displacement::Continuous(_) => Err(ConfigError(
                "this command needs a `lattice` displacement law".into(),
            )),
        }
    }
}

pub fn parse_engine(name: &str) -> Result<Engine, ConfigError> {
    match name {
        "brw" => Ok(Engine::Brw),
        "ind" => Ok(Engine::IndMax),
        other => Err(ConfigError(format!(
            "unknown engine {other:?}: expected \"brw\" or \"ind\""
        ))),
    }
}

pub fn sim_config_from(
    model: &ModelConfig,
    horizon_n: u32,
    population_cap: u64,
    seed: u64,
    condition_on_survival: bool,
) -> Result<SimConfig, CliFailure> {
    let offspring = model.offspring_law().map_err(CliFailure::from_core)?;
    let step = model.displacement().map_err(CliFailure::Config)?;
    Ok(SimConfig {
        model: SimModel { offspring, step },
        horizon_n,
        population_cap,
        seed,
        condition_on_survival,
    })
}

/// Failure classes carrying their process exit code.
#[derive(Debug)]
pub enum CliFailure {
    Config(ConfigError),
    /// Core errors keep their own exit-code mapping.
    Core(brwlab::Error),
    Io(std::io::Error),
}

impl CliFailure {
    pub fn from_core(e: brwlab::Error) -> Self {
        CliFailure::Core(e)
    }

    /// Exit codes: 2 config, 3 simulation abort, 4 resource bound.
    /// A subcritical law counts as a simulation abort for the commands that
    /// simulate (the population dies out almost surely) and as a config
    /// error everywhere else.
    pub fn exit_code(&self, simulation_context: bool) -> i32 {
        match self {
            CliFailure::Config(_) => 2,
            CliFailure::Io(_) => 4,
            CliFailure::Core(e) => match e {
                brwlab::Error::Subcritical { .. } => {
                    if simulation_context {
                        3
                    } else {
                        2
                    }
                }
                brwlab::Error::SimulationAbort(_) => 3,
                brwlab::Error::ResourceBound(_) => 4,
                _ => 2,
            },
        }
    }
}

impl std::fmt::Display for CliFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliFailure::Config(e) => write!(f, "{e}"),
            CliFailure::Core(e) => write!(f, "{e}"),
            CliFailure::Io(e) => write!(f, "io error: {e}"),
        }
    }
}

impl From<std::io::Error> for CliFailure {
    fn from(e: std::io::Error) -> Self {
        CliFailure::Io(e)
    }
}

impl From<ConfigError> for CliFailure {
    fn from(e: ConfigError) -> Self {
        CliFailure::Config(e)
    }
}

impl From<brwlab::Error> for CliFailure {
    fn from(e: brwlab::Error) -> Self {
        CliFailure::Core(e)
    }
}
