//! Baseline RRT: uniform sampling, fixed step, no goal bias.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::env::CityMap;
use crate::error::{Error, Result};
use crate::planner::{
    extract_path, nearest_node, rng_from_seed, sample_uniform, steer, PlanRequest, PlanResult,
    SearchTree,
};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RrtParams {
    pub step_size: f64,
}

impl Default for RrtParams {
    fn default() -> Self {
        Self { step_size: 10.0 }
    }
}

impl RrtParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.step_size > 0.0 && self.step_size.is_finite()) {
            return Err(Error::invalid("RRT step_size must be positive"));
        }
        Ok(())
    }
}

pub fn plan_rrt(map: &CityMap, req: &PlanRequest, params: &RrtParams, seed: u64) -> Result<PlanResult> {
    plan_rrt_with_tree(map, req, params, seed).map(|(r, _)| r)
}

/// Same as [`plan_rrt`] but also hands back the grown tree.
pub fn plan_rrt_with_tree(
    map: &CityMap,
    req: &PlanRequest,
    params: &RrtParams,
    seed: u64,
) -> Result<(PlanResult, SearchTree)> {
    params.validate()?;
    req.validate(map)?;
    let started = Instant::now();
    let mut rng = rng_from_seed(seed);
    let mut tree = SearchTree::new(req.start);

    if let Some(path) = goal_path(map, req, &tree, 0) {
        return Ok((finish(path, 0, 0, started), tree));
    }

    let mut explored = 0usize;
    let mut failed = 0usize;
    while failed < req.max_failed_attempts {
        let sample = sample_uniform(&map.bounds, &mut rng);
        let near = nearest_node(&tree, sample);
        let from = tree.position(near);
        let new = steer(from, sample, params.step_size);
        explored += 1;
        if new == from || map.segment_collides(from, new) {
            failed += 1;
            continue;
        }
        let idx = tree.push(new, near);
        if let Some(path) = goal_path(map, req, &tree, idx) {
            return Ok((finish(path, explored, failed, started), tree));
        }
    }
    Ok((PlanResult::failure(explored, failed, started.elapsed()), tree))
}

/// Path to `leaf` if it is within the goal threshold, with the goal appended
/// when the last hop to it is free.
pub(crate) fn goal_path(
    map: &CityMap,
    req: &PlanRequest,
    tree: &SearchTree,
    leaf: usize,
) -> Option<Vec<crate::env::Point3>> {
    let pos = tree.position(leaf);
    if pos.distance(req.goal) > req.goal_threshold {
        return None;
    }
    let mut path = extract_path(tree, leaf);
    if pos != req.goal && !map.segment_collides(pos, req.goal) {
        path.push(req.goal);
    }
    Some(path)
}

pub(crate) fn finish(path: Vec<crate::env::Point3>, explored: usize, failed: usize, started: Instant) -> PlanResult {
    PlanResult {
        success: true,
        path,
        explored_nodes: explored,
        failed_attempts: failed,
        elapsed_s: started.elapsed().as_secs_f64(),
    }
}
