//! Directory-level operations shared by the command line, the service and
//! the acceptance run.
//!
//! Layout (used by both the CLI and the service state directory):
//! `scenarios/<id>.json`, `demos/<id>.json`, `plans/<id>.<planner>.json`,
//! `models/{epoch-NNNN,best}.json` plus `models/train_report.{json,csv}`.

use std::collections::BTreeMap;
use std::fs;
use std::ops::ControlFlow;
use std::path::{Path as FsPath, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};

use serde::{Deserialize, Serialize};
use socialplan_core::irl::{self, EpochRow, PretrainReport, TrainReport};
use socialplan_core::metrics::{aggregate, evaluate_pair, Aggregate, MetricsConfig};
use socialplan_core::oracle::oracle_demo;
use socialplan_core::planner::{plan, PlannerKind};
use socialplan_core::scenario::GenerateParams;
use socialplan_core::{GanPair, Path, PathSource, PlanResult, Scenario, World};
use thiserror::Error;

use crate::formats::{
    self, core_code, eval_report_csv, read_path, read_scenario, scenario_to_json, to_json,
    train_report_csv, write_pair, write_text, EvalReport, FormatError, PlannerBlock, RunConfig,
};

#[derive(Debug, Error)]
pub enum AppError {
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error(transparent)]
    Core(#[from] socialplan_core::Error),
    #[error("{0}")]
    Usage(String),
    #[error("{what} `{id}` not found")]
    NotFound { what: &'static str, id: String },
    #[error("{0}")]
    Conflict(String),
    #[error("{0}")]
    Timeout(String),
}

impl AppError {
    pub fn code(&self) -> &'static str {
        match self {
            AppError::Format(e) => e.code(),
            AppError::Core(e) => core_code(e),
            AppError::Usage(_) => "usage",
            AppError::NotFound { .. } => "not_found",
            AppError::Conflict(_) => "conflict",
            AppError::Timeout(_) => "planner_timeout",
        }
    }

    pub fn field(&self) -> Option<&'static str> {
        match self {
            AppError::Format(e) => e.field(),
            AppError::Core(e) => FormatError::Invalid(e.clone()).field(),
            _ => None,
        }
    }
}

pub type Result<T, E = AppError> = std::result::Result<T, E>;

pub const SCENARIOS: &str = "scenarios";
pub const DEMOS: &str = "demos";
pub const PLANS: &str = "plans";
pub const MODELS: &str = "models";
pub const BEST: &str = "best.json";

/// Accepts both the short CLI spelling (`rrtstar`) and the snake case one.
pub fn parse_planner(s: &str) -> Result<PlannerKind> {
    match s {
        "rrt" => Ok(PlannerKind::Rrt),
        "rrtstar" | "rrt_star" => Ok(PlannerKind::RrtStar),
        "ganrrtstar" | "gan_rrt_star" => Ok(PlannerKind::GanRrtStar),
        _ => Err(AppError::Usage(format!("unknown planner `{s}`"))),
    }
}

/// Ids double as file names, so they are restricted to a safe alphabet.
pub fn check_id(id: &str) -> Result<()> {
    let ok = !id.is_empty()
        && id.len() <= 128
        && id
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_');
    if ok {
        Ok(())
    } else {
        Err(
            FormatError::Invalid(socialplan_core::Error::InvalidScenario {
                field: "id",
                detail: "use 1-128 ASCII letters, digits, '-' or '_'".into(),
            })
            .into(),
        )
    }
}

/// Sorted `*.json` files of `dir`; a missing directory is an error.
pub fn json_files(dir: &FsPath) -> Result<Vec<PathBuf>> {
    let io = |source| FormatError::Io {
        path: dir.to_owned(),
        source,
    };
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(io)? {
        let p = entry.map_err(io)?.path();
        if p.is_file() && p.extension().is_some_and(|e| e == "json") {
            out.push(p);
        }
    }
    out.sort();
    Ok(out)
}

pub fn load_scenarios(dir: &FsPath) -> Result<Vec<Scenario>> {
    let mut out = Vec::new();
    for p in json_files(dir)? {
        out.push(read_scenario(&p)?);
    }
    out.sort_by(|a, b| a.id.cmp(&b.id));
    if let Some(w) = out.windows(2).find(|w| w[0].id == w[1].id) {
        return Err(AppError::Conflict(format!(
            "duplicate scenario id `{}`",
            w[0].id
        )));
    }
    Ok(out)
}

pub fn demo_file(dir: &FsPath, id: &str) -> PathBuf {
    dir.join(format!("{id}.json"))
}

pub fn plan_file(dir: &FsPath, id: &str, kind: PlannerKind) -> PathBuf {
    dir.join(format!("{id}.{}.json", kind.as_str()))
}

/// One demo per scenario, checked against the scenario.
pub fn load_demos(dir: &FsPath, scenarios: &[Scenario]) -> Result<Vec<Path>> {
    scenarios
        .iter()
        .map(|s| {
            let f = demo_file(dir, &s.id);
            if !f.is_file() {
                return Err(AppError::NotFound {
                    what: "demo",
                    id: s.id.clone(),
                });
            }
            let p = read_path(&f)?;
            p.validate(s, &s.free_space())?;
            Ok(p)
        })
        .collect()
}

pub fn worlds<'a>(scenarios: &'a [Scenario], config: &RunConfig) -> Vec<World<'a>> {
    scenarios
        .iter()
        .map(|s| World::new(s, config.features))
        .collect()
}

pub fn generate(params: &GenerateParams, out: &FsPath) -> Result<Vec<Scenario>> {
    let scenarios = params.generate()?;
    for s in &scenarios {
        write_text(&out.join(format!("{}.json", s.id)), &scenario_to_json(s))?;
    }
    Ok(scenarios)
}

pub fn demonstrate(scenarios_dir: &FsPath, config: &RunConfig, out: &FsPath) -> Result<Vec<Path>> {
    let scenarios = load_scenarios(scenarios_dir)?;
    let mut demos = Vec::with_capacity(scenarios.len());
    for w in worlds(&scenarios, config) {
        let d = oracle_demo(&w, &config.oracle)?;
        write_text(&demo_file(out, &d.scenario_id), &formats::path_to_json(&d))?;
        demos.push(d);
    }
    Ok(demos)
}

/// `"75:25"` → `(75, 25)`.
pub fn parse_split(s: &str) -> Result<(usize, usize)> {
    let bad = || AppError::Usage(format!("split `{s}` must look like 75:25"));
    let (a, b) = s.split_once(':').ok_or_else(bad)?;
    let (a, b): (usize, usize) = (
        a.trim().parse().map_err(|_| bad())?,
        b.trim().parse().map_err(|_| bad())?,
    );
    if a == 0 || b == 0 {
        return Err(bad());
    }
    Ok((a, b))
}

/// Training count for `n` scenarios; both sides keep at least one.
pub fn split_count(n: usize, split: (usize, usize)) -> Result<usize> {
    if n < 2 {
        return Err(AppError::Usage(
            "training needs at least 2 scenarios".into(),
        ));
    }
    Ok((n * split.0 / (split.0 + split.1)).clamp(1, n - 1))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainOutput {
    pub train_ids: Vec<String>,
    pub val_ids: Vec<String>,
    pub pretrain: PretrainReport,
    pub report: TrainReport,
}

/// Pretrains and trains a fresh pair seeded by `config.train.seed`, writing
/// the pretrained state as `epoch-0000.json`, every improving epoch, `best.json`
/// and the report. `cancel` is polled after every epoch.
pub fn train(
    scenarios: &[Scenario],
    demos: &[Path],
    split: (usize, usize),
    config: &RunConfig,
    out: &FsPath,
    cancel: &AtomicBool,
    progress: &mut dyn FnMut(&EpochRow),
) -> Result<(GanPair, TrainOutput)> {
    config.validate()?;
    let n_train = split_count(scenarios.len(), split)?;
    let all = worlds(scenarios, config);
    let (tw, vw) = all.split_at(n_train);
    let (td, vd) = demos.split_at(n_train);
    let mut pair = GanPair::new(config.train.seed);
    let pretrain = irl::pretrain(&mut pair, tw, td, &config.planner, &config.train)?;
    write_pair(&out.join("epoch-0000.json"), &pair)?;
    let mut write_err = None;
    let (best, report) = irl::train(
        &pair,
        tw,
        td,
        vw,
        vd,
        &config.planner,
        &config.train,
        &mut |e| {
            progress(e.row);
            if e.improved {
                if let Err(err) =
                    write_pair(&out.join(format!("epoch-{:04}.json", e.row.epoch)), e.pair)
                {
                    write_err = Some(err);
                    return ControlFlow::Break(());
                }
            }
            if cancel.load(Ordering::Relaxed) {
                ControlFlow::Break(())
            } else {
                ControlFlow::Continue(())
            }
        },
    )?;
    if let Some(err) = write_err {
        return Err(err.into());
    }
    write_pair(&out.join(BEST), &best)?;
    let output = TrainOutput {
        train_ids: scenarios[..n_train].iter().map(|s| s.id.clone()).collect(),
        val_ids: scenarios[n_train..].iter().map(|s| s.id.clone()).collect(),
        pretrain,
        report,
    };
    write_text(&out.join("train_report.json"), &to_json(&output))?;
    write_text(
        &out.join("train_report.csv"),
        &train_report_csv(&output.report)?,
    )?;
    Ok((best, output))
}

pub fn plan_scenario(
    scenario: &Scenario,
    kind: PlannerKind,
    pair: Option<&GanPair>,
    config: &RunConfig,
) -> Result<PlanResult> {
    config.planner.validate()?;
    let world = World::new(scenario, config.features);
    Ok(plan(kind, &world, pair, &config.planner)?)
}

/// Plans every scenario of `scenarios_dir` into `out`. Returns the ids the
/// planner failed on; those get no file.
pub fn plan_dir(
    scenarios_dir: &FsPath,
    kind: PlannerKind,
    pair: Option<&GanPair>,
    config: &RunConfig,
    out: &FsPath,
) -> Result<Vec<String>> {
    let mut failed = Vec::new();
    for s in load_scenarios(scenarios_dir)? {
        match plan_scenario(&s, kind, pair, config)?.path {
            Some(p) => write_text(&plan_file(out, &s.id, kind), &formats::path_to_json(&p))?,
            None => failed.push(s.id.clone()),
        }
    }
    Ok(failed)
}

/// Scores every planned path under `plans_dirs` against the demos. Paths are
/// grouped by their `source`. Each directory is one run: a scenario that has
/// no path of a source present in that directory counts as a failure, which
/// is non-homotopic in the aggregate rate.
pub fn evaluate(
    scenarios_dir: &FsPath,
    demos_dir: &FsPath,
    plans_dirs: &[PathBuf],
    metrics: &MetricsConfig,
    config: &RunConfig,
) -> Result<EvalReport> {
    let scenarios = load_scenarios(scenarios_dir)?;
    let demos = load_demos(demos_dir, &scenarios)?;
    let ws = worlds(&scenarios, config);
    let index: BTreeMap<&str, usize> = scenarios
        .iter()
        .enumerate()
        .map(|(k, s)| (s.id.as_str(), k))
        .collect();
    let mut groups: BTreeMap<PathSource, (Vec<_>, usize)> = BTreeMap::new();
    for dir in plans_dirs {
        let mut found: BTreeMap<PathSource, Vec<Option<Path>>> = BTreeMap::new();
        for f in json_files(dir)? {
            let p = read_path(&f)?;
            let &k = index
                .get(p.scenario_id.as_str())
                .ok_or_else(|| AppError::NotFound {
                    what: "scenario",
                    id: p.scenario_id.clone(),
                })?;
            let slot = found
                .entry(p.source)
                .or_insert_with(|| vec![None; scenarios.len()]);
            if slot[k].is_some() {
                return Err(AppError::Conflict(format!(
                    "{} holds two {} paths for `{}`",
                    dir.display(),
                    p.source.as_str(),
                    p.scenario_id
                )));
            }
            slot[k] = Some(p);
        }
        for (source, paths) in found {
            let g = groups.entry(source).or_default();
            for (k, p) in paths.into_iter().enumerate() {
                match p {
                    Some(p) => {
                        p.validate(&scenarios[k], &ws[k].space)?;
                        g.0.push(evaluate_pair(&ws[k], &demos[k], &p, metrics)?);
                    }
                    None => g.1 += 1,
                }
            }
        }
    }
    let planners = groups
        .into_iter()
        .map(|(source, (reports, failures))| {
            let mut agg = aggregate(&reports).unwrap_or(Aggregate {
                homotopy_rate: 0.0,
                mean_dissimilarity: f64::NAN,
                feature_difference: f64::NAN,
            });
            let hits = reports.iter().filter(|r| r.homotopic).count();
            agg.homotopy_rate = hits as f64 / (reports.len() + failures) as f64;
            PlannerBlock {
                planner: source.as_str().into(),
                failures,
                reports,
                aggregate: agg,
            }
        })
        .collect();
    Ok(EvalReport { planners })
}

/// Writes `out` (JSON) and the CSV next to it.
pub fn write_eval(report: &EvalReport, out: &FsPath) -> Result<()> {
    write_text(out, &to_json(report))?;
    write_text(&out.with_extension("csv"), &eval_report_csv(report)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_parsing() {
        assert_eq!(parse_split("75:25").unwrap(), (75, 25));
        assert!(parse_split("75").is_err());
        assert!(parse_split("0:1").is_err());
        assert_eq!(split_count(100, (75, 25)).unwrap(), 75);
        assert_eq!(split_count(2, (99, 1)).unwrap(), 1);
        assert!(split_count(1, (1, 1)).is_err());
    }

    #[test]
    fn planner_names() {
        assert_eq!(parse_planner("rrtstar").unwrap(), PlannerKind::RrtStar);
        assert_eq!(
            parse_planner("gan_rrt_star").unwrap(),
            PlannerKind::GanRrtStar
        );
        assert!(parse_planner("astar").is_err());
    }

    #[test]
    fn ids_are_file_safe() {
        assert!(check_id("scn-0001").is_ok());
        for bad in ["", "../x", "a b", "a.json"] {
            assert!(check_id(bad).is_err(), "{bad}");
        }
    }
}
