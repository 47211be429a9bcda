//! 3D UAV path planning over procedurally generated urban maps.
//!
//! The crate provides the obstacle world ([`env`]), a baseline RRT
//! ([`rrt`]), the goal-biased, step-adaptive, detouring dRRT ([`drrt`]) with
//! B-spline post-smoothing ([`smoothing`]), grid baselines ([`baselines`]),
//! path metrics ([`metrics`]) and a seeded experiment harness ([`harness`]).

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod drrt;
pub mod env;
pub mod error;
pub mod harness;
pub mod metrics;
pub mod planner;
pub mod rrt;
pub mod smoothing;

pub use baselines::{plan_aco, plan_astar, voxelize, AcoParams, VoxelGrid};
pub use drrt::{plan_drrt, DrrtParams};
pub use env::{generate_city, Aabb, Building, CityMap, GenParams, Point3};
pub use error::{Error, Result};
pub use harness::{run_benchmark, Algorithm, BenchReport, Scenario};
pub use metrics::{path_length, summarize, turn_angles, PathMetrics, TrialRecord};
pub use planner::{PlanRequest, PlanResult, SearchTree};
pub use rrt::{plan_rrt, RrtParams};
pub use smoothing::{smooth_path, BsplineCurve};
