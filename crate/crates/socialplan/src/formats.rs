//! JSON and CSV documents: scenarios, paths, models, configs and reports.
//!
//! Every float is written with full round-trip precision, so reading back a
//! written document reproduces the in-memory value bit for bit.

use std::fs;
use std::path::{Path as FsPath, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use socialplan_core::irl::{TrainConfig, TrainReport};
use socialplan_core::metrics::{Aggregate, MetricReport, MetricsConfig};
use socialplan_core::oracle::OracleConfig;
use socialplan_core::planner::PlanTree;
use socialplan_core::scenario::{
    GenerateParams, DEFAULT_BODY_RADIUS, DEFAULT_GOAL_RADIUS, DEFAULT_ROBOT_RADIUS,
};
use socialplan_core::tinynet::Mlp;
use socialplan_core::{
    FeatureConfig, GanPair, OccupancyGrid, Path, Pedestrian, PlannerConfig, Point, Scenario,
};
use thiserror::Error;

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed {what}: {source}")]
    Malformed {
        what: &'static str,
        source: serde_json::Error,
    },
    #[error("occupancy_rle covers {actual} cells, expected {expected}")]
    RleLength { expected: usize, actual: usize },
    #[error("occupancy_rle run {index} has value {value}; only 0 and 1 are allowed")]
    RleValue { index: usize, value: u64 },
    #[error("{field} lies outside the map")]
    OutOfBounds { field: &'static str },
    #[error("unsupported format_version {0}")]
    Version(u32),
    #[error(transparent)]
    Invalid(#[from] socialplan_core::Error),
    #[error("csv output failed: {0}")]
    Csv(#[from] csv::Error),
}

impl FormatError {
    /// Stable identifier for machine-readable error lines.
    pub fn code(&self) -> &'static str {
        match self {
            FormatError::Io { .. } => "io",
            FormatError::Malformed { .. } => "malformed_document",
            FormatError::RleLength { .. } => "rle_length_mismatch",
            FormatError::RleValue { .. } => "rle_bad_value",
            FormatError::OutOfBounds { .. } => "out_of_bounds",
            FormatError::Version(_) => "unsupported_version",
            FormatError::Invalid(e) => core_code(e),
            FormatError::Csv(_) => "csv",
        }
    }

    /// Offending field, when one is known.
    pub fn field(&self) -> Option<&'static str> {
        match self {
            FormatError::RleLength { .. } | FormatError::RleValue { .. } => Some("occupancy_rle"),
            FormatError::OutOfBounds { field } => Some(field),
            FormatError::Invalid(socialplan_core::Error::InvalidScenario { field, .. }) => {
                Some(field)
            }
            FormatError::Invalid(socialplan_core::Error::InvalidConfig { field, .. }) => {
                Some(field)
            }
            FormatError::Invalid(socialplan_core::Error::InvalidPath(_)) => Some("points"),
            _ => None,
        }
    }
}

pub fn core_code(e: &socialplan_core::Error) -> &'static str {
    use socialplan_core::Error as E;
    match e {
        E::InvalidGrid(_) => "invalid_grid",
        E::InvalidScenario { .. } => "invalid_scenario",
        E::InvalidPath(_) => "invalid_path",
        E::Generation { .. } => "generation_failed",
        E::DimensionMismatch { .. } => "dimension_mismatch",
        E::EmptyBatch => "empty_batch",
        E::NonFinite(_) => "non_finite",
        E::InvalidConfig { .. } => "invalid_config",
        E::Infeasible(_) => "infeasible",
        E::OutOfBounds(_) => "out_of_bounds",
        E::EndpointMismatch(_) => "endpoint_mismatch",
        E::Mismatch(_) => "mismatch",
        E::TrainingAborted(_) => "training_aborted",
    }
}

pub type Result<T, E = FormatError> = std::result::Result<T, E>;

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("documents always serialize");
    s.push('\n');
    s
}

pub fn from_json<T: DeserializeOwned>(what: &'static str, text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|source| FormatError::Malformed { what, source })
}

pub fn read_text(path: &FsPath) -> Result<String> {
    fs::read_to_string(path).map_err(|source| FormatError::Io {
        path: path.to_owned(),
        source,
    })
}

/// Writes through a sibling temporary file so readers never see a torn file.
pub fn write_text(path: &FsPath, text: &str) -> Result<()> {
    let io = |source| FormatError::Io {
        path: path.to_owned(),
        source,
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io)?;
    }
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, text).map_err(io)?;
    fs::rename(&tmp, path).map_err(io)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PedestrianDoc {
    pub x: f64,
    pub y: f64,
    pub heading: f64,
    #[serde(default)]
    pub speed: f64,
    #[serde(default = "default_body_radius")]
    pub body_radius: f64,
}

fn default_body_radius() -> f64 {
    DEFAULT_BODY_RADIUS
}
fn default_goal_radius() -> f64 {
    DEFAULT_GOAL_RADIUS
}
fn default_robot_radius() -> f64 {
    DEFAULT_ROBOT_RADIUS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDoc {
    pub id: String,
    pub width: usize,
    pub height: usize,
    pub resolution: f64,
    /// `[value, count]` runs over row-major cells.
    pub occupancy_rle: Vec<[u64; 2]>,
    #[serde(default)]
    pub pedestrians: Vec<PedestrianDoc>,
    pub start: Point,
    pub goal: Point,
    #[serde(default = "default_goal_radius")]
    pub goal_radius: f64,
    #[serde(default = "default_robot_radius")]
    pub robot_radius: f64,
}

pub fn encode_rle(cells: &[u8]) -> Vec<[u64; 2]> {
    let mut runs: Vec<[u64; 2]> = Vec::new();
    for &c in cells {
        match runs.last_mut() {
            Some(r) if r[0] == c as u64 => r[1] += 1,
            _ => runs.push([c as u64, 1]),
        }
    }
    runs
}

pub fn decode_rle(runs: &[[u64; 2]], expected: usize) -> Result<Vec<u8>> {
    let total: u128 = runs.iter().map(|r| r[1] as u128).sum();
    if total != expected as u128 {
        return Err(FormatError::RleLength {
            expected,
            actual: total.min(usize::MAX as u128) as usize,
        });
    }
    let mut cells = Vec::with_capacity(expected);
    for (index, &[value, count]) in runs.iter().enumerate() {
        if value > 1 {
            return Err(FormatError::RleValue { index, value });
        }
        cells.extend(std::iter::repeat_n(value as u8, count as usize));
    }
    Ok(cells)
}

impl ScenarioDoc {
    pub fn from_scenario(s: &Scenario) -> Self {
        Self {
            id: s.id.clone(),
            width: s.grid.width(),
            height: s.grid.height(),
            resolution: s.grid.resolution(),
            occupancy_rle: encode_rle(s.grid.cells()),
            pedestrians: s
                .pedestrians
                .iter()
                .map(|p| PedestrianDoc {
                    x: p.x,
                    y: p.y,
                    heading: p.heading,
                    speed: p.speed,
                    body_radius: p.body_radius,
                })
                .collect(),
            start: s.start,
            goal: s.goal,
            goal_radius: s.goal_radius,
            robot_radius: s.robot_radius,
        }
    }

    /// Builds and fully validates the scenario.
    pub fn into_scenario(self) -> Result<Scenario> {
        let cells = decode_rle(&self.occupancy_rle, self.width.saturating_mul(self.height))?;
        let grid = OccupancyGrid::new(self.width, self.height, self.resolution, cells)?;
        if !grid.contains(self.start) {
            return Err(FormatError::OutOfBounds { field: "start" });
        }
        if !grid.contains(self.goal) {
            return Err(FormatError::OutOfBounds { field: "goal" });
        }
        let s = Scenario {
            id: self.id,
            grid,
            pedestrians: self
                .pedestrians
                .into_iter()
                .map(|p| Pedestrian {
                    x: p.x,
                    y: p.y,
                    heading: p.heading,
                    speed: p.speed,
                    body_radius: p.body_radius,
                })
                .collect(),
            start: self.start,
            goal: self.goal,
            goal_radius: self.goal_radius,
            robot_radius: self.robot_radius,
        };
        s.validate()?;
        Ok(s)
    }
}

pub fn scenario_to_json(s: &Scenario) -> String {
    to_json(&ScenarioDoc::from_scenario(s))
}

pub fn scenario_from_json(text: &str) -> Result<Scenario> {
    from_json::<ScenarioDoc>("scenario", text)?.into_scenario()
}

pub fn read_scenario(path: &FsPath) -> Result<Scenario> {
    scenario_from_json(&read_text(path)?)
}

pub fn path_to_json(p: &Path) -> String {
    to_json(p)
}

/// Parses a path document and checks its shape (≥ 2 finite points).
pub fn path_from_json(text: &str) -> Result<Path> {
    let p: Path = from_json("path", text)?;
    p.check_shape()?;
    Ok(p)
}

pub fn read_path(path: &FsPath) -> Result<Path> {
    path_from_json(&read_text(path)?)
}

/// One network: `weights[l]` is layer `l`'s row-major `out × in` matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDoc {
    pub layers: Vec<usize>,
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
    pub format_version: u32,
}

impl ModelDoc {
    pub fn from_mlp(m: &Mlp) -> Self {
        Self {
            layers: m.sizes().to_vec(),
            weights: m.weights().to_vec(),
            biases: m.biases().to_vec(),
            format_version: MODEL_FORMAT_VERSION,
        }
    }

    pub fn into_mlp(self) -> Result<Mlp> {
        if self.format_version != MODEL_FORMAT_VERSION {
            return Err(FormatError::Version(self.format_version));
        }
        Ok(Mlp::from_parts(self.layers, self.weights, self.biases)?)
    }
}

/// Generator and discriminator checkpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairDoc {
    pub generator: ModelDoc,
    pub discriminator: ModelDoc,
    #[serde(default)]
    pub seed: u64,
    pub format_version: u32,
}

impl PairDoc {
    pub fn from_pair(p: &GanPair) -> Self {
        Self {
            generator: ModelDoc::from_mlp(&p.generator),
            discriminator: ModelDoc::from_mlp(&p.discriminator),
            seed: p.seed,
            format_version: MODEL_FORMAT_VERSION,
        }
    }

    pub fn into_pair(self) -> Result<GanPair> {
        if self.format_version != MODEL_FORMAT_VERSION {
            return Err(FormatError::Version(self.format_version));
        }
        Ok(GanPair::from_nets(
            self.generator.into_mlp()?,
            self.discriminator.into_mlp()?,
            self.seed,
        )?)
    }
}

pub fn read_pair(path: &FsPath) -> Result<GanPair> {
    from_json::<PairDoc>("model", &read_text(path)?)?.into_pair()
}

pub fn write_pair(path: &FsPath, pair: &GanPair) -> Result<()> {
    write_text(path, &to_json(&PairDoc::from_pair(pair)))
}

/// All tunables of a run. Missing blocks and fields take their defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Corpus generation extras; `gen` flags override count, size and pedestrians.
    pub generate: GenerateParams,
    pub train: TrainConfig,
    pub planner: PlannerConfig,
    pub features: FeatureConfig,
    pub oracle: OracleConfig,
    pub metrics: MetricsConfig,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.train.validate()?;
        self.planner.validate()?;
        self.features.validate()?;
        self.oracle.validate()?;
        Ok(())
    }
}

pub fn read_config(path: Option<&FsPath>) -> Result<RunConfig> {
    let cfg = match path {
        Some(p) => from_json("config", &read_text(p)?)?,
        None => RunConfig::default(),
    };
    cfg.validate()?;
    Ok(cfg)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlannerBlock {
    pub planner: String,
    /// Planning attempts that returned no path; they count as non-homotopic.
    pub failures: usize,
    pub reports: Vec<MetricReport>,
    pub aggregate: Aggregate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub planners: Vec<PlannerBlock>,
}

const REPORT_COLUMNS: [&str; 8] = [
    "planner",
    "scenario_id",
    "dissimilarity",
    "feature_difference",
    "homotopic",
    "path_length_demo",
    "path_length_plan",
    "aggregate",
];

/// Per-scenario rows followed by one aggregate row per planner.
pub fn eval_report_csv(report: &EvalReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(REPORT_COLUMNS)?;
    for b in &report.planners {
        for r in &b.reports {
            w.write_record([
                b.planner.clone(),
                r.scenario_id.clone(),
                r.dissimilarity.to_string(),
                r.feature_difference.to_string(),
                r.homotopic.to_string(),
                r.path_length_demo.to_string(),
                r.path_length_plan.to_string(),
                "false".into(),
            ])?;
        }
        w.write_record([
            b.planner.clone(),
            String::new(),
            b.aggregate.mean_dissimilarity.to_string(),
            b.aggregate.feature_difference.to_string(),
            b.aggregate.homotopy_rate.to_string(),
            String::new(),
            String::new(),
            "true".into(),
        ])?;
    }
    Ok(String::from_utf8(
        w.into_inner()
            .map_err(|e| csv::Error::from(e.into_error()))?,
    )
    .expect("csv is utf-8"))
}

pub fn train_report_csv(report: &TrainReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "epoch",
        "d_loss",
        "g_loss",
        "train_homotopy_rate",
        "val_homotopy_rate",
        "mean_dissimilarity",
        "failed_scenarios",
    ])?;
    for r in &report.rows {
        w.write_record([
            r.epoch.to_string(),
            r.d_loss.to_string(),
            r.g_loss.to_string(),
            r.train_homotopy_rate.to_string(),
            r.val_homotopy_rate.to_string(),
            r.mean_dissimilarity
                .map(|v| v.to_string())
                .unwrap_or_default(),
            r.failed_scenarios.to_string(),
        ])?;
    }
    Ok(String::from_utf8(
        w.into_inner()
            .map_err(|e| csv::Error::from(e.into_error()))?,
    )
    .expect("csv is utf-8"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeNodeDoc {
    pub point: Point,
    pub parent: Option<usize>,
    pub cost: f64,
}

pub fn tree_to_json(tree: &PlanTree) -> String {
    let nodes: Vec<TreeNodeDoc> = tree
        .nodes
        .iter()
        .map(|n| TreeNodeDoc {
            point: n.point,
            parent: n.parent,
            cost: n.cost,
        })
        .collect();
    to_json(&nodes)
}
