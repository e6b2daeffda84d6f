#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use socialplan::formats::{to_json, RunConfig};
use socialplan::pipeline;
use socialplan_core::scenario::GenerateParams;

/// Small maps and a short training budget so CLI and service tests stay fast.
pub fn small_config() -> RunConfig {
    let mut cfg = RunConfig {
        generate: GenerateParams {
            count: 6,
            width: 100,
            height: 80,
            resolution: 0.05,
            ped_count: 2,
            ..Default::default()
        },
        ..Default::default()
    };
    cfg.train.epochs_max = 2;
    cfg.train.repetitions = 1;
    cfg.train.pretrain_samples = 400;
    cfg.train.patience = 1;
    cfg.planner.max_iterations = 1500;
    cfg
}

pub fn write_config(dir: &Path, cfg: &RunConfig) -> PathBuf {
    let f = dir.join("config.json");
    fs::write(&f, to_json(cfg)).unwrap();
    f
}

/// Writes `scenarios/` and `demos/` under `root`.
pub fn corpus(root: &Path, cfg: &RunConfig) -> (PathBuf, PathBuf) {
    let (s, d) = (root.join(pipeline::SCENARIOS), root.join(pipeline::DEMOS));
    pipeline::generate(&cfg.generate, &s).unwrap();
    pipeline::demonstrate(&s, cfg, &d).unwrap();
    (s, d)
}

/// Relative path → bytes for every file below `dir`.
pub fn snapshot(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(
                    p.strip_prefix(dir).unwrap().to_path_buf(),
                    fs::read(&p).unwrap(),
                );
            }
        }
    }
    out
}
