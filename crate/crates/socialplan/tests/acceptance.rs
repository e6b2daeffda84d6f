//! Acceptance run: one PASS/FAIL line per criterion, plus INFO lines with
//! context numbers. Exits nonzero when any criterion fails.

#[path = "support/deform.rs"]
mod deform;

use std::collections::BTreeSet;
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path as FsPath, PathBuf};
use std::time::{Duration, Instant};

use deform::CellGrid;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use socialplan::formats::{from_json, read_text, EvalReport};
use socialplan::pipeline::TrainOutput;
use socialplan_core::metrics::{
    dissimilarity, feature_difference, homotopy_rate, same_homotopy, MetricsConfig,
};
use socialplan_core::oracle::{oracle_demo, OracleConfig};
use socialplan_core::planner::{plan_gan_rrt_star, plan_rrt_star, PlanResult};
use socialplan_core::scenario::GenerateParams;
use socialplan_core::tinynet::{GanPair, GeneratorObjective, Grads};
use socialplan_core::{
    FeatureConfig, FeatureVector, OccupancyGrid, Path, PathSource, PlannerConfig, Point, Scenario,
    World,
};

type Check = Result<String, String>;

struct Runner {
    failed: Vec<&'static str>,
}

impl Runner {
    fn criterion(&mut self, name: &'static str, budget: Duration, f: impl FnOnce() -> Check) {
        let t = Instant::now();
        let out = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let took = t.elapsed();
        let out = match out {
            Ok(d) if took > budget => {
                Err(format!("{d}; over budget {:.0} s", budget.as_secs_f64()))
            }
            other => other,
        };
        match out {
            Ok(d) => println!("PASS  {name:<28} {:>7.1} s  {d}", took.as_secs_f64()),
            Err(d) => {
                println!("FAIL  {name:<28} {:>7.1} s  {d}", took.as_secs_f64());
                self.failed.push(name);
            }
        }
    }
}

fn info(name: &str, detail: impl std::fmt::Display) {
    println!("INFO  {name:<28} {detail}");
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

// gradients

const H: f64 = 1e-5;

fn rel_err(a: &[f64], n: &[f64]) -> f64 {
    let norm = |v: &mut dyn Iterator<Item = f64>| v.map(|x| x * x).sum::<f64>().sqrt();
    let diff = norm(&mut a.iter().zip(n).map(|(x, y)| x - y));
    let scale = norm(&mut a.iter().copied()) + norm(&mut n.iter().copied());
    if scale == 0.0 {
        0.0
    } else {
        diff / scale
    }
}

fn batch(rng: &mut ChaCha8Rng) -> Vec<FeatureVector> {
    let n = rng.gen_range(1..12);
    (0..n)
        .map(|_| FeatureVector::from_array(std::array::from_fn(|_| rng.gen())))
        .collect()
}

fn central(pair: &GanPair, generator: bool, loss: &dyn Fn(&GanPair) -> f64) -> Vec<f64> {
    let count = if generator {
        pair.generator.params().count()
    } else {
        pair.discriminator.params().count()
    };
    (0..count)
        .map(|k| {
            let shifted = |d: f64| {
                let mut p = pair.clone();
                let net = if generator {
                    &mut p.generator
                } else {
                    &mut p.discriminator
                };
                *net.params_mut().nth(k).unwrap() += d;
                loss(&p)
            };
            (shifted(H) - shifted(-H)) / (2.0 * H)
        })
        .collect()
}

fn flat(g: &Grads) -> Vec<f64> {
    g.iter().collect()
}

fn gradient_correctness() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for k in 0..100 {
        let mut pair = GanPair::new(rng.gen());
        let scale = rng.gen_range(0.5..3.0);
        pair.generator.params_mut().for_each(|p| *p *= scale);
        pair.discriminator.params_mut().for_each(|p| *p *= scale);
        let (real, fake) = (batch(&mut rng), batch(&mut rng));
        let (_, gd) = pair.d_loss_grad(&real, &fake).map_err(|e| e.to_string())?;
        let nd = central(&pair, false, &|p| p.d_loss(&real, &fake).unwrap());
        let obj = if k % 2 == 0 {
            GeneratorObjective::NonSaturating
        } else {
            GeneratorObjective::Literal
        };
        let (_, gg) = pair.g_loss_grad(&fake, obj).map_err(|e| e.to_string())?;
        let ng = central(&pair, true, &|p| p.g_loss(&fake, obj).unwrap());
        worst = worst
            .max(rel_err(&flat(&gd), &nd))
            .max(rel_err(&flat(&gg), &ng));
    }
    ensure(worst < 1e-5, || format!("max relative error {worst:.3e}"))?;
    Ok(format!(
        "100 instances, max relative error {worst:.3e} (< 1e-5)"
    ))
}

// planner reduction

fn same_bits(a: &PlanResult, b: &PlanResult) -> bool {
    let t = |r: &PlanResult| {
        r.tree
            .nodes
            .iter()
            .map(|n| {
                (
                    n.point.x.to_bits(),
                    n.point.y.to_bits(),
                    n.parent,
                    n.cost.to_bits(),
                    n.weight.to_bits(),
                )
            })
            .collect::<Vec<_>>()
    };
    let pts = |r: &PlanResult| {
        r.path.as_ref().map(|p| {
            p.points
                .iter()
                .map(|q| (q.x.to_bits(), q.y.to_bits()))
                .collect::<Vec<_>>()
        })
    };
    let trace = |r: &PlanResult| {
        r.best_cost_trace
            .iter()
            .map(|c| c.to_bits())
            .collect::<Vec<_>>()
    };
    t(a) == t(b) && a.tree.goal == b.tree.goal && pts(a) == pts(b) && trace(a) == trace(b)
}

fn planner_reduction() -> Check {
    let scenarios = GenerateParams {
        count: 20,
        seed: 11,
        ..Default::default()
    }
    .generate()
    .map_err(|e| e.to_string())?;
    let mut nodes = 0;
    for (k, s) in scenarios.iter().enumerate() {
        let world = World::new(s, FeatureConfig::default());
        let pair = GanPair::new(k as u64 + 100);
        for seed in 0..3 {
            let cfg = PlannerConfig {
                cost_weight: 0.0,
                discriminator_gate: 0.0,
                seed,
                ..Default::default()
            };
            let a = plan_gan_rrt_star(&world, &pair, &cfg).map_err(|e| e.to_string())?;
            let b = plan_rrt_star(&world, &cfg).map_err(|e| e.to_string())?;
            ensure(same_bits(&a, &b), || {
                format!("{} seed {seed}: trees differ", s.id)
            })?;
            nodes += a.tree.nodes.len();
        }
    }
    Ok(format!(
        "60 runs bit-identical ({nodes} tree nodes compared)"
    ))
}

// RRT* optimality

fn rrt_star_optimality() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut ok = 0;
    let mut ratios = Vec::new();
    for seed in 0..20u64 {
        // opposite corners of a 6 m square, jittered per run
        let start = Point::new(rng.gen_range(0.4..1.0), rng.gen_range(0.4..1.0));
        let goal = Point::new(rng.gen_range(5.0..5.6), rng.gen_range(5.0..5.6));
        let s = Scenario {
            id: format!("empty-{seed}"),
            grid: OccupancyGrid::empty(300, 300, 0.02).map_err(|e| e.to_string())?,
            pedestrians: Vec::new(),
            start,
            goal,
            goal_radius: 0.25,
            robot_radius: 0.2,
        };
        let world = World::new(&s, FeatureConfig::default());
        let cfg = PlannerConfig {
            max_iterations: 3000,
            seed,
            ..Default::default()
        };
        let r = plan_rrt_star(&world, &cfg).map_err(|e| e.to_string())?;
        if let Some(p) = r.path {
            let ratio = p.length() / start.dist(goal);
            ok += (ratio <= 1.05) as usize;
            ratios.push(ratio);
        }
    }
    let worst = ratios.iter().cloned().fold(0.0, f64::max);
    ensure(ok >= 18, || format!("{ok}/20 within 5%"))?;
    Ok(format!(
        "{ok}/20 runs within 5% of straight line (worst ratio {worst:.4})"
    ))
}

// homotopy oracle agreement

struct Rect {
    x0: usize,
    y0: usize,
    x1: usize,
    y1: usize,
}

fn place_rects(rng: &mut ChaCha8Rng, w: usize, h: usize, count: usize) -> Option<Vec<Rect>> {
    let mut rects: Vec<Rect> = Vec::new();
    for _ in 0..count {
        let mut placed = false;
        for _ in 0..200 {
            let (rw, rh) = (rng.gen_range(1..=3usize), rng.gen_range(1..=3usize));
            if rw + 2 > w || rh + 2 > h {
                continue;
            }
            let x0 = rng.gen_range(1..=w - 1 - rw);
            let y0 = rng.gen_range(1..=h - 1 - rh);
            let r = Rect {
                x0,
                y0,
                x1: x0 + rw - 1,
                y1: y0 + rh - 1,
            };
            // at least one free cell between obstacles, diagonals included
            let clear = rects
                .iter()
                .all(|o| r.x0 > o.x1 + 1 || o.x0 > r.x1 + 1 || r.y0 > o.y1 + 1 || o.y0 > r.y1 + 1);
            if clear {
                rects.push(r);
                placed = true;
                break;
            }
        }
        if !placed {
            return None;
        }
    }
    Some(rects)
}

/// Shortest 4-connected cell path with shuffled neighbour order.
fn bfs(grid: &CellGrid, a: u16, b: u16, rng: &mut ChaCha8Rng) -> Vec<u16> {
    let n = grid.w * grid.h;
    let mut prev = vec![u16::MAX; n];
    let mut queue = std::collections::VecDeque::from([a]);
    prev[a as usize] = a;
    while let Some(c) = queue.pop_front() {
        if c == b {
            break;
        }
        let (i, j) = (
            (c as usize % grid.w) as isize,
            (c as usize / grid.w) as isize,
        );
        let mut nb = [(1, 0), (-1, 0), (0, 1), (0, -1)];
        nb.shuffle(rng);
        for (di, dj) in nb {
            let (ni, nj) = (i + di, j + dj);
            if grid.free(ni, nj) {
                let k = nj as usize * grid.w + ni as usize;
                if prev[k] == u16::MAX {
                    prev[k] = c;
                    queue.push_back(k as u16);
                }
            }
        }
    }
    let mut out = vec![b];
    while *out.last().unwrap() != a {
        out.push(prev[*out.last().unwrap() as usize]);
    }
    out.reverse();
    out
}

fn join(parts: &[Vec<u16>]) -> Vec<u16> {
    let mut out = parts[0].clone();
    for p in &parts[1..] {
        out.extend_from_slice(&p[1..]);
    }
    out
}

/// Ring of cells around `r`, walked once in either direction from its first cell.
fn ring(grid: &CellGrid, r: &Rect, reverse: bool) -> Vec<u16> {
    let (x0, y0, x1, y1) = (r.x0 - 1, r.y0 - 1, r.x1 + 1, r.y1 + 1);
    let mut cells = Vec::new();
    for x in x0..x1 {
        cells.push((x, y0));
    }
    for y in y0..y1 {
        cells.push((x1, y));
    }
    for x in (x0 + 1..=x1).rev() {
        cells.push((x, y1));
    }
    for y in (y0 + 1..=y1).rev() {
        cells.push((x0, y));
    }
    if reverse {
        cells[1..].reverse();
    }
    cells.push(cells[0]);
    cells
        .into_iter()
        .map(|(x, y)| (y * grid.w + x) as u16)
        .collect()
}

fn random_path(
    grid: &CellGrid,
    rects: &[Rect],
    free: &[u16],
    a: u16,
    b: u16,
    rng: &mut ChaCha8Rng,
) -> Vec<u16> {
    let mut parts = Vec::new();
    let mut at = a;
    for _ in 0..rng.gen_range(0..=3) {
        if !rects.is_empty() && rng.gen_bool(0.35) {
            let r = &rects[rng.gen_range(0..rects.len())];
            let loop_cells = ring(grid, r, rng.gen_bool(0.5));
            parts.push(bfs(grid, at, loop_cells[0], rng));
            parts.push(loop_cells.clone());
            at = loop_cells[0];
        } else {
            let wp = *free.choose(rng).unwrap();
            parts.push(bfs(grid, at, wp, rng));
            at = wp;
        }
    }
    parts.push(bfs(grid, at, b, rng));
    join(&parts)
}

fn homotopy_oracle_agreement() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let (mut pairs, mut same, mut disagreements) = (0usize, 0usize, Vec::new());
    for w in 8..=12usize {
        for h in [8usize, 10, 12] {
            for count in 0..=2usize {
                for _rep in 0..2 {
                    let Some(rects) = place_rects(&mut rng, w, h, count) else {
                        continue;
                    };
                    let mut blocked = vec![false; w * h];
                    for r in &rects {
                        for y in r.y0..=r.y1 {
                            for x in r.x0..=r.x1 {
                                blocked[y * w + x] = true;
                            }
                        }
                    }
                    let grid = CellGrid {
                        w,
                        h,
                        blocked: blocked.clone(),
                    };
                    let free: Vec<u16> = (0..w * h)
                        .filter(|&k| !blocked[k])
                        .map(|k| k as u16)
                        .collect();
                    let a = *free.choose(&mut rng).unwrap();
                    let b = loop {
                        let b = *free.choose(&mut rng).unwrap();
                        if b != a {
                            break b;
                        }
                    };
                    let cells = blocked.iter().map(|&x| x as u8).collect();
                    let center = |c: u16| {
                        Point::new((c as usize % w) as f64 + 0.5, (c as usize / w) as f64 + 0.5)
                    };
                    let scenario = Scenario {
                        id: "tiny".into(),
                        grid: OccupancyGrid::new(w, h, 1.0, cells).map_err(|e| e.to_string())?,
                        pedestrians: Vec::new(),
                        start: center(a),
                        goal: center(b),
                        goal_radius: 0.25,
                        robot_radius: 0.0,
                    };
                    let paths: Vec<Vec<u16>> = (0..5)
                        .map(|_| random_path(&grid, &rects, &free, a, b, &mut rng))
                        .collect();
                    let as_path = |p: &[u16]| Path {
                        scenario_id: "tiny".into(),
                        source: PathSource::DemoHuman,
                        points: p.iter().map(|&c| center(c)).collect(),
                    };
                    for i in 0..paths.len() {
                        for j in i + 1..paths.len() {
                            let truth = grid.homotopic(&paths[i], &paths[j]);
                            let got = same_homotopy(
                                &scenario,
                                &as_path(&paths[i]),
                                &as_path(&paths[j]),
                                &MetricsConfig::default(),
                            )
                            .map_err(|e| e.to_string())?;
                            pairs += 1;
                            same += truth as usize;
                            if truth != got {
                                disagreements.push(format!(
                                    "{w}x{h} {count} obstacles: oracle {truth}, h-signature {got}"
                                ));
                            }
                        }
                    }
                }
            }
        }
    }
    ensure(pairs >= 200, || format!("only {pairs} pairs"))?;
    ensure(same > 0 && same < pairs, || {
        format!("degenerate suite: {same}/{pairs} homotopic")
    })?;
    ensure(disagreements.is_empty(), || {
        format!(
            "{} of {pairs} pairs disagree, first: {}",
            disagreements.len(),
            disagreements[0]
        )
    })?;
    Ok(format!(
        "{pairs} pairs agree ({same} homotopic, {} not)",
        pairs - same
    ))
}

// metric identities

fn metric_identities() -> Check {
    let scenarios = GenerateParams {
        count: 10,
        seed: 5,
        ..Default::default()
    }
    .generate()
    .map_err(|e| e.to_string())?;
    let worlds: Vec<World> = scenarios
        .iter()
        .map(|s| World::new(s, FeatureConfig::default()))
        .collect();
    let demos: Vec<Path> = worlds
        .iter()
        .map(|w| oracle_demo(w, &OracleConfig::default()))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    for d in &demos {
        let v = dissimilarity(&d.points, &d.points, false).map_err(|e| e.to_string())?;
        ensure(v == 0.0, || {
            format!("dissimilarity(z, z) = {v:e} on {}", d.scenario_id)
        })?;
    }
    let fd = feature_difference(&worlds, &demos, &demos).map_err(|e| e.to_string())?;
    ensure(fd == 0.0, || format!("feature_difference = {fd:e}"))?;
    let hr = homotopy_rate(&worlds, &demos, &demos, &MetricsConfig::default())
        .map_err(|e| e.to_string())?;
    ensure(hr == 1.0, || format!("homotopy_rate = {hr}"))?;
    Ok("dissimilarity 0, feature_difference 0, homotopy_rate 1 on 10 scenarios".into())
}

// end to end

fn cli(args: &[&str]) -> Result<(), String> {
    let mut full = vec!["socialplan", "--quiet"];
    full.extend_from_slice(args);
    match socialplan::cli::main_with(full.clone()) {
        0 => Ok(()),
        code => Err(format!("`{}` exited with {code}", full.join(" "))),
    }
}

fn s(p: &FsPath) -> &str {
    p.to_str().unwrap()
}

struct PipelineRun {
    report_bytes: Vec<u8>,
    report: EvalReport,
    train: TrainOutput,
    scenarios: PathBuf,
}

/// gen → demo → train → plan (3 seeds × 2 planners on the held-out 25) → eval.
fn pipeline(root: &FsPath) -> Result<PipelineRun, String> {
    let d = |name: &str| root.join(name);
    let (scen, demos, models, test) =
        (d("scenarios"), d("demos"), d("models"), d("test_scenarios"));
    cli(&[
        "gen",
        "--count",
        "100",
        "--width",
        "324",
        "--height",
        "257",
        "--peds",
        "3",
        "--seed",
        "0",
        "--out",
        s(&scen),
    ])?;
    cli(&[
        "demo",
        "--scenarios",
        s(&scen),
        "--mode",
        "oracle",
        "--out",
        s(&demos),
        "--seed",
        "0",
    ])?;
    cli(&[
        "train",
        "--scenarios",
        s(&scen),
        "--demos",
        s(&demos),
        "--split",
        "75:25",
        "--out",
        s(&models),
        "--seed",
        "0",
    ])?;
    let train: TrainOutput = from_json(
        "train report",
        &read_text(&models.join("train_report.json")).map_err(|e| e.to_string())?,
    )
    .map_err(|e| e.to_string())?;
    fs::create_dir_all(&test).map_err(|e| e.to_string())?;
    for id in &train.val_ids {
        fs::copy(
            scen.join(format!("{id}.json")),
            test.join(format!("{id}.json")),
        )
        .map_err(|e| e.to_string())?;
    }
    let best = models.join("best.json");
    let mut plan_dirs = Vec::new();
    for seed in 0..3 {
        let out = d(&format!("plans-seed{seed}"));
        let seed = seed.to_string();
        cli(&[
            "plan",
            "--scenario",
            s(&test),
            "--planner",
            "rrtstar",
            "--out",
            s(&out),
            "--seed",
            &seed,
        ])?;
        cli(&[
            "plan",
            "--scenario",
            s(&test),
            "--planner",
            "ganrrtstar",
            "--model",
            s(&best),
            "--out",
            s(&out),
            "--seed",
            &seed,
        ])?;
        plan_dirs.push(out);
    }
    let report_path = d("report.json");
    let mut args = vec![
        "eval",
        "--scenarios",
        s(&test),
        "--demos",
        s(&demos),
        "--out",
        s(&report_path),
        "--plans",
    ];
    args.extend(plan_dirs.iter().map(|p| s(p)));
    cli(&args)?;
    let report_bytes = fs::read(&report_path).map_err(|e| e.to_string())?;
    let report: EvalReport = serde_json::from_slice(&report_bytes).map_err(|e| e.to_string())?;
    Ok(PipelineRun {
        report_bytes,
        report,
        train,
        scenarios: scen,
    })
}

fn learning_effect(run: &PipelineRun) -> Check {
    let block = |name: &str| {
        run.report
            .planners
            .iter()
            .find(|b| b.planner == name)
            .ok_or_else(|| format!("no {name} block in report"))
    };
    let (gan, rrt) = (
        block("gan_rrt_star")?.aggregate,
        block("rrt_star")?.aggregate,
    );
    let summary = format!(
        "homotopy {:.4} vs {:.4}, dissimilarity {:.5} vs {:.5}, feature difference {:.5} vs {:.5} (GAN-RRT* vs RRT*)",
        gan.homotopy_rate,
        rrt.homotopy_rate,
        gan.mean_dissimilarity,
        rrt.mean_dissimilarity,
        gan.feature_difference,
        rrt.feature_difference
    );
    ensure(gan.homotopy_rate >= rrt.homotopy_rate + 0.10, || {
        format!("(a) gap below 0.10: {summary}")
    })?;
    ensure(gan.mean_dissimilarity < rrt.mean_dissimilarity, || {
        format!("(b) dissimilarity not lower: {summary}")
    })?;
    ensure(gan.feature_difference < rrt.feature_difference, || {
        format!("(c) feature difference not lower: {summary}")
    })?;
    Ok(summary)
}

/// Fraction of scenarios where the social demo and the plain shortest grid
/// path fall in different homotopy classes.
fn oracle_vs_shortest(scen: &FsPath) -> Result<(usize, usize), String> {
    let scenarios = socialplan::pipeline::load_scenarios(scen).map_err(|e| e.to_string())?;
    let zero = OracleConfig {
        w_clearance: 0.0,
        w_pedestrian: 0.0,
    };
    let mut differ = 0;
    for sc in &scenarios {
        let w = World::new(sc, FeatureConfig::default());
        let social = oracle_demo(&w, &OracleConfig::default()).map_err(|e| e.to_string())?;
        let plain = oracle_demo(&w, &zero).map_err(|e| e.to_string())?;
        differ += !same_homotopy(sc, &social, &plain, &MetricsConfig::default())
            .map_err(|e| e.to_string())? as usize;
    }
    Ok((differ, scenarios.len()))
}

fn main() {
    let mut r = Runner { failed: Vec::new() };
    r.criterion(
        "gradient_correctness",
        Duration::from_secs(30),
        gradient_correctness,
    );
    r.criterion(
        "planner_reduction",
        Duration::from_secs(120),
        planner_reduction,
    );
    r.criterion(
        "rrt_star_optimality",
        Duration::from_secs(60),
        rrt_star_optimality,
    );
    r.criterion(
        "homotopy_oracle_agreement",
        Duration::from_secs(300),
        homotopy_oracle_agreement,
    );
    r.criterion(
        "metric_identities",
        Duration::from_secs(60),
        metric_identities,
    );

    let dirs: Vec<_> = (0..2)
        .map(|_| tempfile::tempdir().expect("temp dir"))
        .collect();
    let t = Instant::now();
    let first = pipeline(dirs[0].path());
    let first_time = t.elapsed();
    r.criterion(
        "end_to_end_learning_effect",
        Duration::from_secs(30 * 60),
        || {
            let run = first.as_ref().map_err(|e| e.clone())?;
            ensure(first_time < Duration::from_secs(30 * 60), || {
                format!("pipeline took {:.0} s", first_time.as_secs_f64())
            })?;
            learning_effect(run).map(|d| format!("{d}; pipeline {:.0} s", first_time.as_secs_f64()))
        },
    );
    if let Ok(run) = &first {
        let rep = &run.train.report;
        info(
            "learning_gain",
            format!(
                "pretrained val homotopy {:.4}, best {:.4} at epoch {} (0 = pretrained), stopped at {} ({:?})",
                rep.initial_val_homotopy_rate, rep.best_val_homotopy_rate, rep.best_epoch, rep.stopping_epoch, rep.stop_reason
            ),
        );
        match oracle_vs_shortest(&run.scenarios) {
            Ok((d, n)) => info(
                "oracle_vs_shortest_homotopy",
                format!("{d}/{n} social demos differ from the shortest path"),
            ),
            Err(e) => info("oracle_vs_shortest_homotopy", format!("error: {e}")),
        }
    }
    r.criterion("determinism", Duration::from_secs(30 * 60), || {
        let a = first.as_ref().map_err(|e| e.clone())?;
        let b = pipeline(dirs[1].path())?;
        ensure(a.report_bytes == b.report_bytes, || {
            "report.json differs between runs".into()
        })?;
        let planners: BTreeSet<_> = a
            .report
            .planners
            .iter()
            .map(|p| p.planner.as_str())
            .collect();
        Ok(format!(
            "report.json byte-identical across two runs ({} bytes, planners {planners:?})",
            a.report_bytes.len()
        ))
    });

    if r.failed.is_empty() {
        println!("acceptance: all criteria passed");
    } else {
        println!("acceptance: failed {:?}", r.failed);
        std::process::exit(1);
    }
}
