//! RRT, RRT* and GAN-RRT* over a scenario.
//!
//! All three share one growth loop. RRT* and GAN-RRT* differ only in the
//! per-node edge weight: the cost of the edge `a → b` is
//! `|ab| · (1 + λ·G(f(b)))`, which is exactly the Euclidean length when
//! `λ = 0`.

mod index;

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

pub use index::BucketIndex;

use crate::features::{FeatureVector, FEATURE_DIM};
use crate::geometry::Point;
use crate::rng::{stream, Rng};
use crate::scenario::{Path, PathSource, World};
use crate::tinynet::{GanPair, Mlp};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlannerConfig {
    pub max_iterations: usize,
    pub steer_step: f64,
    pub near_radius: f64,
    pub goal_bias: f64,
    /// λ: weight of the learned node cost against path length.
    pub cost_weight: f64,
    /// τ_d: reject new nodes whose discriminator score falls below it.
    pub discriminator_gate: f64,
    pub seed: u64,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self {
            max_iterations: 3000,
            steer_step: 0.25,
            near_radius: 0.8,
            goal_bias: 0.05,
            cost_weight: 4.0,
            discriminator_gate: 0.0,
            seed: 0,
        }
    }
}

impl PlannerConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |field, v: f64| {
            Err(Error::InvalidConfig {
                field,
                detail: alloc::format!("out of range: {v}"),
            })
        };
        if !(self.steer_step.is_finite() && self.steer_step > 0.0) {
            return bad("steer_step", self.steer_step);
        }
        if !(self.near_radius.is_finite() && self.near_radius > 0.0) {
            return bad("near_radius", self.near_radius);
        }
        if !(0.0..=1.0).contains(&self.goal_bias) {
            return bad("goal_bias", self.goal_bias);
        }
        if !(self.cost_weight.is_finite() && self.cost_weight >= 0.0) {
            return bad("cost_weight", self.cost_weight);
        }
        if !(0.0..1.0).contains(&self.discriminator_gate) {
            return bad("discriminator_gate", self.discriminator_gate);
        }
        Ok(())
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeNode {
    pub point: Point,
    pub parent: Option<usize>,
    /// Cumulative cost from the root.
    pub cost: f64,
    /// Multiplier applied to the length of the edge ending at this node.
    #[serde(skip)]
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PlanTree {
    pub nodes: Vec<TreeNode>,
    /// Cheapest node inside the goal region, if any.
    pub goal: Option<usize>,
}

impl PlanTree {
    pub fn edge_cost(&self, child: usize) -> f64 {
        let n = &self.nodes[child];
        match n.parent {
            Some(p) => self.nodes[p].point.dist(n.point) * n.weight,
            None => 0.0,
        }
    }

    /// Cost recomputed along the parent chain.
    pub fn recompute_cost(&self, node: usize) -> f64 {
        let mut chain = Vec::new();
        let mut at = node;
        while let Some(p) = self.nodes[at].parent {
            chain.push(at);
            at = p;
        }
        chain
            .iter()
            .rev()
            .fold(0.0, |acc, &c| acc + self.edge_cost(c))
    }

    pub fn root(&self) -> Option<&TreeNode> {
        self.nodes.first()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanResult {
    pub tree: PlanTree,
    pub path: Option<Path>,
    /// Best goal-reaching cost after each iteration (`+inf` before success).
    pub best_cost_trace: Vec<f64>,
}

impl PlanResult {
    pub fn succeeded(&self) -> bool {
        self.path.is_some()
    }

    pub fn cost(&self) -> Option<f64> {
        self.tree.goal.map(|g| self.tree.nodes[g].cost)
    }
}

/// `C_G(a, b) = Cost_G(a) + |ab| · (1 + λ·G(f(b)))`.
pub fn edge_cost_gan(
    generator: &Mlp,
    to_features: &FeatureVector,
    from_cost: f64,
    edge_length: f64,
    cost_weight: f64,
) -> Result<f64> {
    let g = generator.forward(&to_features.to_array())?[0];
    Ok(from_cost + edge_length * node_weight(g, cost_weight))
}

#[inline]
pub fn node_weight(g: f64, cost_weight: f64) -> f64 {
    1.0 + cost_weight * g
}

/// Walks parent links from the tree's goal node back to the root.
pub fn extract_solution(tree: &PlanTree, scenario_id: &str, source: PathSource) -> Option<Path> {
    let mut at = tree.goal?;
    let mut points = vec![tree.nodes[at].point];
    while let Some(p) = tree.nodes[at].parent {
        points.push(tree.nodes[p].point);
        at = p;
    }
    points.reverse();
    if points.len() < 2 {
        return None;
    }
    Some(Path {
        scenario_id: scenario_id.into(),
        source,
        points,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mode {
    FirstSolution,
    Optimize,
}

struct Grower<'w, 'a> {
    world: &'w World<'a>,
    config: PlannerConfig,
    rng: Rng,
    tree: PlanTree,
    index: BucketIndex,
    children: Vec<Vec<usize>>,
    goal_nodes: Vec<usize>,
}

impl<'w, 'a> Grower<'w, 'a> {
    fn new(world: &'w World<'a>, config: PlannerConfig) -> Self {
        let g = world.space.grid();
        let bucket = config.near_radius.max(config.steer_step);
        Self {
            world,
            config,
            rng: stream(config.seed, &[0x7272]),
            tree: PlanTree::default(),
            index: BucketIndex::new(g.width_m(), g.height_m(), bucket),
            children: Vec::new(),
            goal_nodes: Vec::new(),
        }
    }

    fn add_node(&mut self, point: Point, parent: Option<usize>, cost: f64, weight: f64) -> usize {
        let idx = self.index.insert(point);
        self.tree.nodes.push(TreeNode {
            point,
            parent,
            cost,
            weight,
        });
        self.children.push(Vec::new());
        if let Some(p) = parent {
            self.children[p].push(idx);
        }
        if self.world.scenario.in_goal(point) {
            self.goal_nodes.push(idx);
        }
        idx
    }

    fn refresh_goal(&mut self) {
        let nodes = &self.tree.nodes;
        self.tree.goal = self
            .goal_nodes
            .iter()
            .copied()
            .min_by(|&a, &b| nodes[a].cost.total_cmp(&nodes[b].cost).then(a.cmp(&b)));
    }

    fn best_cost(&self) -> f64 {
        self.tree
            .goal
            .map_or(f64::INFINITY, |g| self.tree.nodes[g].cost)
    }

    fn sample(&mut self) -> Point {
        let s = self.world.scenario;
        if self.rng.gen::<f64>() < self.config.goal_bias {
            return s.goal;
        }
        let g = self.world.space.grid();
        let mut p = s.goal;
        for _ in 0..32 {
            p = Point::new(
                self.rng.gen_range(0.0..g.width_m()),
                self.rng.gen_range(0.0..g.height_m()),
            );
            if self.world.space.point_in_unblocked_cell(p) {
                break;
            }
        }
        p
    }

    fn steer(&self, from: Point, to: Point) -> Point {
        let d = from.dist(to);
        if d <= self.config.steer_step {
            to
        } else {
            from.lerp(to, self.config.steer_step / d)
        }
    }

    fn reparent(&mut self, node: usize, parent: usize, cost: f64) {
        if let Some(old) = self.tree.nodes[node].parent {
            let siblings = &mut self.children[old];
            if let Some(pos) = siblings.iter().position(|&c| c == node) {
                siblings.swap_remove(pos);
            }
        }
        self.tree.nodes[node].parent = Some(parent);
        self.tree.nodes[node].cost = cost;
        self.children[parent].push(node);
        let mut stack: Vec<usize> = self.children[node].clone();
        while let Some(c) = stack.pop() {
            let p = self.tree.nodes[c].parent.unwrap();
            let pc = self.tree.nodes[p].cost;
            let n = &self.tree.nodes[c];
            let cost = pc + self.tree.nodes[p].point.dist(n.point) * n.weight;
            self.tree.nodes[c].cost = cost;
            stack.extend_from_slice(&self.children[c]);
        }
    }

    fn run(
        mut self,
        mode: Mode,
        source: PathSource,
        weigh: &mut dyn FnMut(Point) -> Option<f64>,
    ) -> PlanResult {
        let s = self.world.scenario;
        let space = &self.world.space;
        self.add_node(s.start, None, 0.0, 1.0);
        let mut trace = Vec::with_capacity(self.config.max_iterations);
        if s.in_goal(s.start) {
            // start already inside the goal region
            if s.start != s.goal && space.segment_free(s.start, s.goal) {
                if let Some(w) = weigh(s.goal) {
                    let cost = s.start.dist(s.goal) * w;
                    self.add_node(s.goal, Some(0), cost, w);
                    self.goal_nodes.retain(|&g| g != 0);
                }
            }
            self.refresh_goal();
            let path = extract_solution(&self.tree, &s.id, source).or_else(|| {
                Some(Path {
                    scenario_id: s.id.clone(),
                    source,
                    points: vec![s.start, s.start],
                })
            });
            return PlanResult {
                tree: self.tree,
                path,
                best_cost_trace: trace,
            };
        }

        let mut near = Vec::new();
        let mut candidates: Vec<(f64, usize)> = Vec::new();
        let r = self.config.near_radius;
        for _ in 0..self.config.max_iterations {
            let x_rand = self.sample();
            let nearest = self.index.nearest(x_rand).unwrap();
            let from = self.tree.nodes[nearest].point;
            let x_new = self.steer(from, x_rand);
            if x_new == from || !space.is_free(x_new) {
                trace.push(self.best_cost());
                continue;
            }
            let Some(w_new) = weigh(x_new) else {
                trace.push(self.best_cost());
                continue;
            };

            match mode {
                Mode::FirstSolution => {
                    if space.segment_free(from, x_new) {
                        let cost = self.tree.nodes[nearest].cost + from.dist(x_new) * w_new;
                        self.add_node(x_new, Some(nearest), cost, w_new);
                    }
                }
                Mode::Optimize => {
                    self.index.within(x_new, r, &mut near);
                    if !near.contains(&nearest) {
                        near.push(nearest);
                        near.sort_unstable();
                    }
                    candidates.clear();
                    for &c in &near {
                        let n = &self.tree.nodes[c];
                        candidates.push((n.cost + n.point.dist(x_new) * w_new, c));
                    }
                    candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                    let parent = candidates
                        .iter()
                        .find(|&&(_, c)| space.segment_free(self.tree.nodes[c].point, x_new))
                        .copied();
                    if let Some((c_min, x_min)) = parent {
                        let new = self.add_node(x_new, Some(x_min), c_min, w_new);
                        for &n in &near {
                            if n == x_min {
                                continue;
                            }
                            let node = self.tree.nodes[n];
                            let c = c_min + x_new.dist(node.point) * node.weight;
                            if c < node.cost && space.segment_free(x_new, node.point) {
                                self.reparent(n, new, c);
                            }
                        }
                    }
                }
            }
            self.refresh_goal();
            trace.push(self.best_cost());
            if mode == Mode::FirstSolution && self.tree.goal.is_some() {
                break;
            }
        }
        let path = extract_solution(&self.tree, &s.id, source);
        PlanResult {
            tree: self.tree,
            path,
            best_cost_trace: trace,
        }
    }
}

pub fn plan_rrt(world: &World, config: &PlannerConfig) -> Result<PlanResult> {
    config.validate()?;
    Ok(Grower::new(world, *config).run(Mode::FirstSolution, PathSource::Rrt, &mut |_| Some(1.0)))
}

pub fn plan_rrt_star(world: &World, config: &PlannerConfig) -> Result<PlanResult> {
    config.validate()?;
    Ok(Grower::new(world, *config).run(Mode::Optimize, PathSource::RrtStar, &mut |_| Some(1.0)))
}

pub fn plan_gan_rrt_star(
    world: &World,
    pair: &GanPair,
    config: &PlannerConfig,
) -> Result<PlanResult> {
    config.validate()?;
    if pair.generator.input_dim() != FEATURE_DIM {
        return Err(Error::DimensionMismatch {
            expected: FEATURE_DIM,
            actual: pair.generator.input_dim(),
        });
    }
    let lambda = config.cost_weight;
    let gate = config.discriminator_gate;
    let mut weigh = |p: Point| {
        let f = world.features_at(p);
        let g = pair.cost(&f);
        if gate > 0.0 && pair.score(&f, g) < gate {
            return None;
        }
        Some(node_weight(g, lambda))
    };
    Ok(Grower::new(world, *config).run(Mode::Optimize, PathSource::GanRrtStar, &mut weigh))
}

/// Planner selector used by evaluation and the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlannerKind {
    Rrt,
    RrtStar,
    GanRrtStar,
}

impl PlannerKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PlannerKind::Rrt => "rrt",
            PlannerKind::RrtStar => "rrt_star",
            PlannerKind::GanRrtStar => "gan_rrt_star",
        }
    }
}

/// Runs `kind`; `pair` is required for GAN-RRT* and ignored otherwise.
pub fn plan(
    kind: PlannerKind,
    world: &World,
    pair: Option<&GanPair>,
    config: &PlannerConfig,
) -> Result<PlanResult> {
    match kind {
        PlannerKind::Rrt => plan_rrt(world, config),
        PlannerKind::RrtStar => plan_rrt_star(world, config),
        PlannerKind::GanRrtStar => match pair {
            Some(pair) => plan_gan_rrt_star(world, pair, config),
            None => Err(Error::InvalidConfig {
                field: "model",
                detail: "gan_rrt_star needs a model".into(),
            }),
        },
    }
}
