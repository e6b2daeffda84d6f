//! Command line surface. Flags select files, modes and seeds; every numeric
//! hyperparameter comes from the `--config` file.

use std::path::PathBuf;
use std::sync::atomic::AtomicBool;

use clap::{Args, Parser, Subcommand, ValueEnum};
use socialplan_core::planner::PlannerKind;

use crate::formats::{
    self, read_config, read_pair, read_scenario, tree_to_json, write_text, RunConfig,
};
use crate::pipeline::{self, AppError, Result};

#[derive(Debug, Parser)]
#[command(
    name = "socialplan",
    version,
    about = "Socially adaptive path planning workbench"
)]
pub struct Cli {
    /// Suppress progress and summary output; errors are still reported
    #[arg(long, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// JSON config with optional generate/train/planner/features/oracle/metrics blocks
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Overrides every seed of the config
    #[arg(long, value_name = "N")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PlannerArg {
    Rrt,
    Rrtstar,
    Ganrrtstar,
}

impl From<PlannerArg> for PlannerKind {
    fn from(p: PlannerArg) -> Self {
        match p {
            PlannerArg::Rrt => PlannerKind::Rrt,
            PlannerArg::Rrtstar => PlannerKind::RrtStar,
            PlannerArg::Ganrrtstar => PlannerKind::GanRrtStar,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DemoMode {
    Oracle,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a seeded scenario corpus
    Gen {
        #[arg(long, value_name = "N")]
        count: usize,
        #[arg(long, value_name = "CELLS")]
        width: usize,
        #[arg(long, value_name = "CELLS")]
        height: usize,
        #[arg(long, value_name = "P")]
        peds: usize,
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Write one demonstration path per scenario
    Demo {
        #[arg(long, value_name = "DIR")]
        scenarios: PathBuf,
        #[arg(long, value_enum, default_value = "oracle")]
        mode: DemoMode,
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Pretrain and adversarially train the cost model
    Train {
        #[arg(long, value_name = "DIR")]
        scenarios: PathBuf,
        #[arg(long, value_name = "DIR")]
        demos: PathBuf,
        /// Train:validation ratio over scenarios sorted by id
        #[arg(long, default_value = "75:25")]
        split: String,
        #[arg(long, value_name = "MODELDIR")]
        out: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Plan one scenario file, or every scenario of a directory
    Plan {
        #[arg(long, value_name = "FILE|DIR")]
        scenario: PathBuf,
        #[arg(long, value_enum)]
        planner: PlannerArg,
        /// Checkpoint; required by ganrrtstar
        #[arg(long, value_name = "FILE")]
        model: Option<PathBuf>,
        /// Output file, or directory when --scenario is a directory
        #[arg(long, value_name = "FILE|DIR")]
        out: PathBuf,
        /// Also write the search tree (single-scenario mode)
        #[arg(long, value_name = "FILE")]
        dump_tree: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Score planned paths against demonstrations
    Eval {
        #[arg(long, value_name = "DIR")]
        scenarios: PathBuf,
        #[arg(long, value_name = "DIR")]
        demos: PathBuf,
        /// One directory per planning run; repeat to average over seeds
        #[arg(long, value_name = "DIR", required = true, num_args = 1..)]
        plans: Vec<PathBuf>,
        /// report.json; a CSV with the same stem is written next to it
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Serve the HTTP API over a state directory
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, value_name = "DIR")]
        state: PathBuf,
        /// Built UI bundle served at /
        #[arg(long, value_name = "DIR")]
        ui: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
}

pub fn load_config(common: &Common) -> Result<RunConfig> {
    let mut cfg = read_config(common.config.as_deref())?;
    if let Some(seed) = common.seed {
        cfg.generate.seed = seed;
        cfg.train.seed = seed;
        cfg.planner.seed = seed;
    }
    Ok(cfg)
}

fn load_model(
    path: Option<&std::path::Path>,
    kind: PlannerKind,
) -> Result<Option<socialplan_core::GanPair>> {
    match (path, kind) {
        (Some(p), _) => Ok(Some(read_pair(p)?)),
        (None, PlannerKind::GanRrtStar) => {
            Err(AppError::Usage("--model is required for ganrrtstar".into()))
        }
        (None, _) => Ok(None),
    }
}

/// Runs a parsed command; the returned line goes to stdout.
pub fn run(cli: Cli) -> Result<String> {
    let quiet = cli.quiet;
    match cli.command {
        Command::Gen {
            count,
            width,
            height,
            peds,
            out,
            common,
        } => {
            let mut params = load_config(&common)?.generate;
            params.count = count;
            params.width = width;
            params.height = height;
            params.ped_count = peds;
            let s = pipeline::generate(&params, &out)?;
            Ok(format!(
                "generated {} scenarios into {}",
                s.len(),
                out.display()
            ))
        }
        Command::Demo {
            scenarios,
            mode: DemoMode::Oracle,
            out,
            common,
        } => {
            let d = pipeline::demonstrate(&scenarios, &load_config(&common)?, &out)?;
            Ok(format!("wrote {} demos into {}", d.len(), out.display()))
        }
        Command::Train {
            scenarios,
            demos,
            split,
            out,
            common,
        } => {
            let cfg = load_config(&common)?;
            let split = pipeline::parse_split(&split)?;
            let sc = pipeline::load_scenarios(&scenarios)?;
            let dm = pipeline::load_demos(&demos, &sc)?;
            let (_, o) = pipeline::train(
                &sc,
                &dm,
                split,
                &cfg,
                &out,
                &AtomicBool::new(false),
                &mut |row| {
                    if quiet {
                        return;
                    }
                    eprintln!(
                        "epoch {} d_loss {:.6} g_loss {:.6} val_homotopy {:.4}",
                        row.epoch, row.d_loss, row.g_loss, row.val_homotopy_rate
                    );
                },
            )?;
            Ok(format!(
                "best epoch {} val_homotopy_rate {} stopped at {} ({:?})",
                o.report.best_epoch,
                o.report.best_val_homotopy_rate,
                o.report.stopping_epoch,
                o.report.stop_reason
            ))
        }
        Command::Plan {
            scenario,
            planner,
            model,
            out,
            dump_tree,
            common,
        } => {
            let cfg = load_config(&common)?;
            let kind = PlannerKind::from(planner);
            let pair = load_model(model.as_deref(), kind)?;
            if scenario.is_dir() {
                if dump_tree.is_some() {
                    return Err(AppError::Usage(
                        "--dump-tree needs a single --scenario file".into(),
                    ));
                }
                let failed = pipeline::plan_dir(&scenario, kind, pair.as_ref(), &cfg, &out)?;
                return Ok(format!(
                    "planned into {}; failed: {}",
                    out.display(),
                    failed.join(",")
                ));
            }
            let s = read_scenario(&scenario)?;
            let r = pipeline::plan_scenario(&s, kind, pair.as_ref(), &cfg)?;
            if let Some(t) = dump_tree {
                write_text(&t, &tree_to_json(&r.tree))?;
            }
            let path = r
                .path
                .ok_or_else(|| socialplan_core::Error::Infeasible(s.id.clone()))?;
            write_text(&out, &formats::path_to_json(&path))?;
            Ok(format!(
                "path with {} points, length {}",
                path.points.len(),
                path.length()
            ))
        }
        Command::Eval {
            scenarios,
            demos,
            plans,
            out,
            common,
        } => {
            let cfg = load_config(&common)?;
            let r = pipeline::evaluate(&scenarios, &demos, &plans, &cfg.metrics, &cfg)?;
            pipeline::write_eval(&r, &out)?;
            let summary: Vec<String> = r
                .planners
                .iter()
                .map(|b| format!("{} homotopy_rate {}", b.planner, b.aggregate.homotopy_rate))
                .collect();
            Ok(summary.join("; "))
        }
        Command::Serve {
            port,
            state,
            ui,
            common,
        } => {
            let cfg = load_config(&common)?;
            crate::service::serve(port, state, ui, cfg)?;
            Ok(String::new())
        }
    }
}

/// One-line JSON error for stderr.
pub fn error_line(e: &AppError) -> String {
    let mut v = serde_json::json!({ "error": e.code(), "detail": e.to_string() });
    if let Some(f) = e.field() {
        v["field"] = f.into();
    }
    v.to_string()
}

/// Parses `args` and runs; returns the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return 0;
        }
        Err(e) => {
            let detail = e.to_string();
            let first = detail
                .lines()
                .next()
                .unwrap_or("")
                .trim_start_matches("error: ");
            eprintln!(
                "{}",
                serde_json::json!({ "error": "usage", "detail": first })
            );
            return 2;
        }
    };
    let quiet = cli.quiet;
    match run(cli) {
        Ok(line) => {
            if !line.is_empty() && !quiet {
                println!("{line}");
            }
            0
        }
        Err(e) => {
            eprintln!("{}", error_line(&e));
            1
        }
    }
}
