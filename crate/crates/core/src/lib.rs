//! Socially aware sampling-based path planning.
//!
//! The crate is `no_std` (with `alloc`) and holds every algorithm of the
//! workbench: the world model and collision checking, the five social
//! features, a small dense network engine with the generator/discriminator
//! pair, the RRT family of planners including the learned-cost variant, the
//! grid-search demonstrator, evaluation metrics, and the adversarial
//! inverse-RL training loop. File formats, the CLI and the HTTP service live
//! in the `socialplan` crate.

#![no_std]

extern crate alloc;

pub mod error;
pub mod features;
pub mod geometry;
pub mod irl;
pub mod metrics;
pub mod oracle;
pub mod planner;
pub mod rng;
pub mod scenario;
pub mod tinynet;

pub use error::{Error, Result};
pub use features::{DistanceField, FeatureConfig, FeatureVector};
pub use geometry::Point;
pub use planner::{PlanResult, PlanTree, PlannerConfig};
pub use scenario::{FreeSpace, OccupancyGrid, Path, PathSource, Pedestrian, Scenario, World};
pub use tinynet::{GanPair, Mlp};
