//! Adversarial inverse reinforcement learning of the planner's node cost.
//!
//! Each epoch replans every training scenario with the current generator,
//! collects node features along planned and demonstrated paths, then
//! alternates discriminator and generator minibatch updates. Validation
//! homotopy rate drives early stopping and checkpoint selection.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::ops::ControlFlow;

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::features::FeatureVector;
use crate::geometry::{subdivide, Point};
use crate::metrics::{dissimilarity, same_homotopy_with, HomotopyObstacles, MetricsConfig};
use crate::planner::{plan_gan_rrt_star, PlanResult, PlannerConfig};
use crate::rng::{derive, stream};
use crate::scenario::{Path, World};
use crate::tinynet::{GanPair, GeneratorObjective};
use crate::{Error, Result};

const TAG_PRETRAIN: u64 = 0x7072;
const TAG_HELD_OUT: u64 = 0x686f;
const TAG_EPOCH: u64 = 0x6570;
const TAG_SHUFFLE: u64 = 0x7368;
const TAG_VALIDATE: u64 = 0x7661;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub epochs_max: usize,
    pub repetitions: usize,
    pub minibatch: usize,
    pub lr_g: f64,
    pub lr_d: f64,
    pub momentum: f64,
    pub d_steps_per_g_step: usize,
    pub pretrain_samples: usize,
    pub pretrain_lr: f64,
    pub pretrain_passes: usize,
    pub patience: usize,
    pub resample_spacing: f64,
    pub seed: u64,
    pub objective: GeneratorObjective,
    /// Keep node sets from earlier epochs instead of starting fresh.
    pub accumulate: bool,
    /// Take planned nodes from the whole tree, not just the solution path.
    pub tree_nodes: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs_max: 200,
            repetitions: 3,
            minibatch: 64,
            lr_g: 1e-3,
            lr_d: 1e-3,
            momentum: 0.9,
            d_steps_per_g_step: 1,
            pretrain_samples: 5000,
            pretrain_lr: 0.5,
            pretrain_passes: 200,
            patience: 5,
            resample_spacing: 0.2,
            seed: 0,
            objective: GeneratorObjective::NonSaturating,
            accumulate: false,
            tree_nodes: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("epochs_max", self.epochs_max),
            ("repetitions", self.repetitions),
            ("minibatch", self.minibatch),
            ("d_steps_per_g_step", self.d_steps_per_g_step),
            ("pretrain_samples", self.pretrain_samples),
            ("pretrain_passes", self.pretrain_passes),
            ("patience", self.patience),
        ];
        for (field, v) in positive {
            if v == 0 {
                return Err(Error::InvalidConfig {
                    field,
                    detail: "must be positive".into(),
                });
            }
        }
        let rates = [
            ("lr_g", self.lr_g),
            ("lr_d", self.lr_d),
            ("pretrain_lr", self.pretrain_lr),
        ];
        for (field, v) in rates {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidConfig {
                    field,
                    detail: format!("{v} is not a finite rate"),
                });
            }
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::InvalidConfig {
                field: "momentum",
                detail: "must lie in [0, 1)".into(),
            });
        }
        if !(self.resample_spacing.is_finite() && self.resample_spacing > 0.0) {
            return Err(Error::InvalidConfig {
                field: "resample_spacing",
                detail: "must be positive".into(),
            });
        }
        Ok(())
    }
}

/// Regression target used to pre-balance the generator.
pub fn pretrain_target(f: &FeatureVector) -> f64 {
    (0.2 * f.f1 + 0.2 * (1.0 - f.f2) + 0.2 * (f.f3 + f.f4 + f.f5)).clamp(0.0, 1.0)
}

/// Features at points spaced at most `spacing` apart along `points`.
pub fn collect_nodes(world: &World, points: &[Point], spacing: f64) -> Vec<FeatureVector> {
    subdivide(points, spacing)
        .into_iter()
        .map(|p| world.features_at(p))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PretrainReport {
    pub passes: usize,
    pub train_mse: f64,
    pub held_out_mse: f64,
    pub d_loss: f64,
    pub warning: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Patience,
    EpochsMax,
    Cancelled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRow {
    pub epoch: usize,
    pub d_loss: f64,
    pub g_loss: f64,
    pub train_homotopy_rate: f64,
    pub val_homotopy_rate: f64,
    /// Mean over validation scenarios the planner solved.
    pub mean_dissimilarity: Option<f64>,
    pub failed_scenarios: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub rows: Vec<EpochRow>,
    /// Validation rate of the parameters training started from.
    pub initial_val_homotopy_rate: f64,
    pub best_epoch: usize,
    pub best_val_homotopy_rate: f64,
    pub stopping_epoch: usize,
    pub stop_reason: StopReason,
}

/// Passed to the progress hook after every completed epoch.
pub struct EpochEvent<'a> {
    pub row: &'a EpochRow,
    pub improved: bool,
    pub pair: &'a GanPair,
}

fn sample_free(world: &World, rng: &mut crate::rng::Rng) -> Option<Point> {
    let grid = world.space.grid();
    let (w, h) = (grid.width_m(), grid.height_m());
    for _ in 0..1000 {
        let p = Point::new(rng.gen::<f64>() * w, rng.gen::<f64>() * h);
        if world.space.is_free(p) {
            return Some(p);
        }
    }
    None
}

fn sample_features(worlds: &[World], n: usize, seed: u64, tag: u64) -> Vec<FeatureVector> {
    let mut rng = stream(seed, &[tag]);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let w = &worlds[rng.gen_range(0..worlds.len())];
        if let Some(p) = sample_free(w, &mut rng) {
            out.push(w.features_at(p));
        }
    }
    out
}

fn regression_mse(pair: &GanPair, data: &[(FeatureVector, f64)]) -> f64 {
    data.iter()
        .map(|(f, t)| {
            let e = pair.cost(f) - t;
            e * e
        })
        .sum::<f64>()
        / data.len() as f64
}

struct Rollouts {
    demo: Vec<FeatureVector>,
    plan: Vec<FeatureVector>,
    homotopic: usize,
    solved: usize,
    failed_scenarios: usize,
}

fn rollout(
    pair: &GanPair,
    worlds: &[World],
    obstacles: &[HomotopyObstacles],
    demos: &[Path],
    planner: &PlannerConfig,
    config: &TrainConfig,
    tag: &[u64],
) -> Result<Rollouts> {
    let mut out = Rollouts {
        demo: Vec::new(),
        plan: Vec::new(),
        homotopic: 0,
        solved: 0,
        failed_scenarios: 0,
    };
    for (i, (world, demo)) in worlds.iter().zip(demos).enumerate() {
        let mut any = false;
        for r in 0..config.repetitions {
            let mut parts = Vec::from(tag);
            parts.extend_from_slice(&[i as u64, r as u64]);
            let seed = derive(config.seed, &parts);
            let res: PlanResult = plan_gan_rrt_star(world, pair, &planner.with_seed(seed))?;
            let Some(path) = res.path else { continue };
            any = true;
            out.solved += 1;
            out.homotopic +=
                same_homotopy_with(world.scenario, &obstacles[i], demo, &path)? as usize;
            if config.tree_nodes {
                out.plan
                    .extend(res.tree.nodes.iter().map(|n| world.features_at(n.point)));
            } else {
                out.plan
                    .extend(collect_nodes(world, &path.points, config.resample_spacing));
            }
        }
        if any {
            out.demo
                .extend(collect_nodes(world, &demo.points, config.resample_spacing));
        } else {
            out.failed_scenarios += 1;
        }
    }
    Ok(out)
}

/// One shuffled pass: every fake minibatch is met by an equally sized real
/// minibatch, `d_steps` discriminator steps, then optionally one generator
/// step. Returns mean pre-step `(d_loss, g_loss)`.
fn adversarial_pass(
    pair: &mut GanPair,
    real: &[FeatureVector],
    fake: &[FeatureVector],
    config: &TrainConfig,
    epoch: usize,
    update_generator: bool,
) -> Result<(f64, f64)> {
    if real.is_empty() || fake.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let mut rng = stream(config.seed, &[TAG_SHUFFLE, epoch as u64]);
    let mut ri: Vec<usize> = (0..real.len()).collect();
    let mut fi: Vec<usize> = (0..fake.len()).collect();
    ri.shuffle(&mut rng);
    fi.shuffle(&mut rng);
    let (mut d_sum, mut g_sum, mut batches) = (0.0, 0.0, 0usize);
    let mut cursor = 0usize;
    for chunk in fi.chunks(config.minibatch) {
        let fb: Vec<FeatureVector> = chunk.iter().map(|&k| fake[k]).collect();
        let rb: Vec<FeatureVector> = (0..fb.len())
            .map(|k| real[ri[(cursor + k) % ri.len()]])
            .collect();
        cursor += fb.len();
        for s in 0..config.d_steps_per_g_step {
            let (l, g) = pair.d_loss_grad(&rb, &fb)?;
            if s == 0 {
                d_sum += l;
            }
            pair.step_discriminator(&g, config.lr_d, config.momentum)?;
        }
        if update_generator {
            let (l, g) = pair.g_loss_grad(&fb, config.objective)?;
            g_sum += l;
            pair.step_generator(&g, config.lr_g, config.momentum)?;
        }
        batches += 1;
    }
    Ok((d_sum / batches as f64, g_sum / batches as f64))
}

/// Regresses `G` toward [`pretrain_target`] on features at random free
/// points, then runs one discriminator pass on demo versus planned nodes.
pub fn pretrain(
    pair: &mut GanPair,
    worlds: &[World],
    demos: &[Path],
    planner: &PlannerConfig,
    config: &TrainConfig,
) -> Result<PretrainReport> {
    config.validate()?;
    planner.validate()?;
    if worlds.is_empty() {
        return Err(Error::Mismatch(
            "pretraining needs at least one scenario".into(),
        ));
    }
    check_demos(worlds, demos)?;
    let label = |fs: Vec<FeatureVector>| -> Vec<(FeatureVector, f64)> {
        fs.into_iter().map(|f| (f, pretrain_target(&f))).collect()
    };
    let data = label(sample_features(
        worlds,
        config.pretrain_samples,
        config.seed,
        TAG_PRETRAIN,
    ));
    let held_out = label(sample_features(
        worlds,
        config.pretrain_samples / 5 + 1,
        config.seed,
        TAG_HELD_OUT,
    ));

    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut rng = stream(config.seed, &[TAG_PRETRAIN, 1]);
    let mut passes = 0;
    let mut mse = regression_mse(pair, &data);
    while passes < config.pretrain_passes && mse >= 1e-3 {
        order.shuffle(&mut rng);
        for chunk in order.chunks(config.minibatch) {
            let scale = 2.0 / chunk.len() as f64;
            let mut grads = crate::tinynet::Grads::zeros_like(&pair.generator);
            for &k in chunk {
                let (f, t) = &data[k];
                let cache = pair.generator.forward_cached(&f.to_array())?;
                let (g, _) = pair
                    .generator
                    .backward(&cache, &[scale * (cache.output()[0] - t)])?;
                grads.add_assign(&g);
            }
            pair.step_generator(&grads, config.pretrain_lr, config.momentum)?;
        }
        passes += 1;
        mse = regression_mse(pair, &data);
    }
    pair.reset_optimizers();
    let held_out_mse = regression_mse(pair, &held_out);
    let warning = (held_out_mse >= 1e-2).then(|| {
        format!("generator pretraining stopped at mse {held_out_mse:.4} after {passes} passes")
    });

    let obstacles = homotopy_obstacles(worlds);
    let r = rollout(
        pair,
        worlds,
        &obstacles,
        demos,
        planner,
        config,
        &[TAG_PRETRAIN],
    )?;
    let (d_loss, _) = adversarial_pass(pair, &r.demo, &r.plan, config, usize::MAX, false)?;
    pair.reset_optimizers();
    Ok(PretrainReport {
        passes,
        train_mse: mse,
        held_out_mse,
        d_loss,
        warning,
    })
}

fn check_demos(worlds: &[World], demos: &[Path]) -> Result<()> {
    if worlds.len() != demos.len() {
        return Err(Error::Mismatch(format!(
            "{} scenarios but {} demos",
            worlds.len(),
            demos.len()
        )));
    }
    for (w, d) in worlds.iter().zip(demos) {
        if w.scenario.id != d.scenario_id {
            return Err(Error::Mismatch(format!(
                "demo for `{}` paired with scenario `{}`",
                d.scenario_id, w.scenario.id
            )));
        }
    }
    Ok(())
}

fn homotopy_obstacles(worlds: &[World]) -> Vec<HomotopyObstacles> {
    let cfg = MetricsConfig::default();
    worlds
        .iter()
        .map(|w| HomotopyObstacles::for_scenario(w.scenario, cfg.pedestrians_as_obstacles))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Validation {
    pub homotopy_rate: f64,
    pub mean_dissimilarity: Option<f64>,
}

/// Plans every validation scenario once with a seed that does not depend
/// on the epoch; failures count as non-homotopic.
pub fn validate(
    pair: &GanPair,
    worlds: &[World],
    obstacles: &[HomotopyObstacles],
    demos: &[Path],
    planner: &PlannerConfig,
    seed: u64,
) -> Result<Validation> {
    let (mut hits, mut dis, mut solved) = (0usize, 0.0, 0usize);
    for (j, (world, demo)) in worlds.iter().zip(demos).enumerate() {
        let cfg = planner.with_seed(derive(seed, &[TAG_VALIDATE, j as u64]));
        if let Some(path) = plan_gan_rrt_star(world, pair, &cfg)?.path {
            hits += same_homotopy_with(world.scenario, &obstacles[j], demo, &path)? as usize;
            dis += dissimilarity(&path.points, &demo.points, false)?;
            solved += 1;
        }
    }
    Ok(Validation {
        homotopy_rate: hits as f64 / worlds.len().max(1) as f64,
        mean_dissimilarity: (solved > 0).then(|| dis / solved as f64),
    })
}

/// Runs the adversarial loop and returns the parameters of the best
/// validation epoch. `on_epoch` may cancel by returning `Break`.
#[allow(clippy::too_many_arguments)]
pub fn train(
    pair: &GanPair,
    train_worlds: &[World],
    train_demos: &[Path],
    val_worlds: &[World],
    val_demos: &[Path],
    planner: &PlannerConfig,
    config: &TrainConfig,
    on_epoch: &mut dyn FnMut(EpochEvent<'_>) -> ControlFlow<()>,
) -> Result<(GanPair, TrainReport)> {
    config.validate()?;
    planner.validate()?;
    check_demos(train_worlds, train_demos)?;
    check_demos(val_worlds, val_demos)?;
    if train_worlds.is_empty() || val_worlds.is_empty() {
        return Err(Error::Mismatch(
            "training and validation sets must be nonempty".into(),
        ));
    }
    let train_obs = homotopy_obstacles(train_worlds);
    let val_obs = homotopy_obstacles(val_worlds);

    let mut pair = pair.clone();
    let initial = validate(&pair, val_worlds, &val_obs, val_demos, planner, config.seed)?;
    let mut best = pair.clone();
    let mut best_rate = initial.homotopy_rate;
    let mut best_epoch = 0;
    let mut stale = 0;
    let mut rows = Vec::new();
    let mut real: Vec<FeatureVector> = Vec::new();
    let mut fake: Vec<FeatureVector> = Vec::new();
    let mut reason = StopReason::EpochsMax;

    for epoch in 1..=config.epochs_max {
        let r = rollout(
            &pair,
            train_worlds,
            &train_obs,
            train_demos,
            planner,
            config,
            &[TAG_EPOCH, epoch as u64],
        )?;
        if 2 * r.failed_scenarios > train_worlds.len() {
            return Err(Error::TrainingAborted(format!(
                "epoch {epoch}: planner failed on {} of {} training scenarios",
                r.failed_scenarios,
                train_worlds.len()
            )));
        }
        if !config.accumulate {
            real.clear();
            fake.clear();
        }
        real.extend(r.demo);
        fake.extend(r.plan);
        let (d_loss, g_loss) = adversarial_pass(&mut pair, &real, &fake, config, epoch, true)?;
        let v = validate(&pair, val_worlds, &val_obs, val_demos, planner, config.seed)?;

        let improved = v.homotopy_rate > best_rate;
        if improved {
            best = pair.clone();
            best_rate = v.homotopy_rate;
            best_epoch = epoch;
            stale = 0;
        } else {
            stale += 1;
        }
        rows.push(EpochRow {
            epoch,
            d_loss,
            g_loss,
            train_homotopy_rate: r.homotopic as f64 / r.solved.max(1) as f64,
            val_homotopy_rate: v.homotopy_rate,
            mean_dissimilarity: v.mean_dissimilarity,
            failed_scenarios: r.failed_scenarios,
        });
        let flow = on_epoch(EpochEvent {
            row: rows.last().unwrap(),
            improved,
            pair: &pair,
        });
        if flow.is_break() {
            reason = StopReason::Cancelled;
            break;
        }
        if stale >= config.patience {
            reason = StopReason::Patience;
            break;
        }
    }
    best.reset_optimizers();
    let report = TrainReport {
        stopping_epoch: rows.len(),
        rows,
        initial_val_homotopy_rate: initial.homotopy_rate,
        best_epoch,
        best_val_homotopy_rate: best_rate,
        stop_reason: reason,
    };
    Ok((best, report))
}
