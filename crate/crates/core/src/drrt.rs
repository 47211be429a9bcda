//! dRRT: RRT with goal-biased sampling, a step size that grows in open
//! space and shrinks after collisions, and horizontal detours around
//! blocked extensions. Produces the raw path; see [`crate::smoothing`] for
//! the B-spline pass.

use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::env::{Aabb, CityMap, Point3};
use crate::error::{Error, Result};
use crate::planner::{
    rng_from_seed, sample_uniform, steer, PlanRequest, PlanResult, PlanRng,
    SearchTree,
};
use crate::rrt::{finish, goal_path};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DrrtParams {
    /// Base step, also the value the step resets to in the neutral case.
    pub step_size: f64,
    /// Probability of sampling the goal itself.
    pub p_target: f64,
    /// Multiplicative step scaling factor.
    pub e: f64,
    pub step_max: f64,
    pub step_min: f64,
    /// Clearance above which a new node counts as far from obstacles.
    pub clearance_far: f64,
    /// Try horizontal/vertical detours when the straight extension collides.
    pub detour: bool,
}

impl Default for DrrtParams {
    fn default() -> Self {
        Self {
            step_size: 10.0,
            p_target: 0.9,
            e: 1.2,
            step_max: 15.0,
            step_min: 1.0,
            clearance_far: 20.0,
            detour: true,
        }
    }
}

impl DrrtParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p_target) {
            return Err(Error::invalid("p_target must lie in [0, 1]"));
        }
        if !(self.step_min > 0.0 && self.step_min <= self.step_size && self.step_size <= self.step_max) {
            return Err(Error::invalid("need 0 < step_min <= step_size <= step_max"));
        }
        if !self.step_max.is_finite() {
            return Err(Error::invalid("step_max must be finite"));
        }
        // e == 1 freezes the step, which is allowed
        if !(self.e >= 1.0 && self.e.is_finite()) {
            return Err(Error::invalid("step scaling factor e must be >= 1"));
        }
        if !(self.clearance_far >= 0.0) {
            return Err(Error::invalid("clearance_far must be non-negative"));
        }
        Ok(())
    }
}

/// How the last extension went, as far as the step size is concerned.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StepOutcome {
    FarFromObstacles,
    Collided,
    Neutral,
}

/// Goal with probability `p_target`, otherwise a uniform point in `bounds`.
///
/// The coin is only drawn for `0 < p_target < 1`; the degenerate cases
/// consume exactly the same randomness as plain uniform sampling (or none).
pub fn sample_with_bias(goal: Point3, p_target: f64, bounds: &Aabb, rng: &mut PlanRng) -> Point3 {
    if p_target >= 1.0 {
        return goal;
    }
    if p_target > 0.0 && rng.gen::<f64>() < p_target {
        return goal;
    }
    sample_uniform(bounds, rng)
}

pub fn update_step(current: f64, outcome: StepOutcome, params: &DrrtParams) -> f64 {
    match outcome {
        StepOutcome::FarFromObstacles => params.step_max.min(params.e * current),
        StepOutcome::Collided => params.step_min.max(current / params.e),
        StepOutcome::Neutral => params.step_size,
    }
}

pub fn classify_step_outcome(
    map: &CityMap,
    x_new: Point3,
    extension_collided: bool,
    params: &DrrtParams,
) -> StepOutcome {
    if extension_collided {
        StepOutcome::Collided
    } else if map.clearance(x_new) > params.clearance_far {
        StepOutcome::FarFromObstacles
    } else {
        StepOutcome::Neutral
    }
}

/// Horizontal candidates in preference order: +x, -x, +y, -y.
const DETOUR_DIRS: [Point3; 4] = [
    Point3::new(1.0, 0.0, 0.0),
    Point3::new(-1.0, 0.0, 0.0),
    Point3::new(0.0, 1.0, 0.0),
    Point3::new(0.0, -1.0, 0.0),
];

/// Alternative extension from `x_near` when the direct one is blocked.
///
/// Picks the free horizontal move that ends closest to `goal`. If all four
/// are blocked, climbs toward the goal's altitude (up if the goal is higher,
/// down otherwise). Candidates for which `visited` holds are skipped so the
/// tree does not re-add positions it already has. `None` when nothing is left.
pub fn detour_extend(
    map: &CityMap,
    x_near: Point3,
    goal: Point3,
    step: f64,
    visited: impl Fn(Point3) -> bool,
) -> Option<Point3> {
    let mut best: Option<(f64, Point3)> = None;
    for dir in DETOUR_DIRS {
        let cand = x_near + dir * step;
        if visited(cand) || map.segment_collides(x_near, cand) {
            continue;
        }
        let d = cand.distance(goal);
        if best.is_none_or(|(bd, _)| d < bd) {
            best = Some((d, cand));
        }
    }
    if let Some((_, p)) = best {
        return Some(p);
    }
    let dz = if goal.z > x_near.z { step } else { -step };
    let vertical = x_near + Point3::new(0.0, 0.0, dz);
    (!visited(vertical) && !map.segment_collides(x_near, vertical)).then_some(vertical)
}

pub fn plan_drrt(map: &CityMap, req: &PlanRequest, params: &DrrtParams, seed: u64) -> Result<PlanResult> {
    plan_drrt_with_tree(map, req, params, seed).map(|(r, _)| r)
}

pub fn plan_drrt_with_tree(
    map: &CityMap,
    req: &PlanRequest,
    params: &DrrtParams,
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

    let mut step = params.step_size;
    let mut explored = 0usize;
    let mut failed = 0usize;
    while failed < req.max_failed_attempts {
        let sample = sample_with_bias(req.goal, params.p_target, &map.bounds, &mut rng);
        explored += 1;
        let Some(near) = tree.nearest_live(sample) else {
            failed += 1;
            continue;
        };
        let from = tree.position(near);
        let direct = steer(from, sample, step);

        let collided = direct == from || map.segment_collides(from, direct);
        let accepted = if !collided {
            Some(direct)
        } else if params.detour {
            let r2 = (0.5 * params.step_min).powi(2);
            detour_extend(map, from, req.goal, step, |p| tree.nearest_distance_squared(p) <= r2)
        } else {
            None
        };

        step = update_step(step, classify_step_outcome(map, direct, collided, params), params);
        debug_assert!(step >= params.step_min && step <= params.step_max);

        let Some(new) = accepted else {
            // every way out of `near` is blocked or already in the tree
            if params.detour {
                tree.retire(near);
            }
            failed += 1;
            continue;
        };
        let idx = tree.push(new, near);
        if let Some(path) = goal_path(map, req, &tree, idx) {
            return Ok((finish(path, explored, failed, started), tree));
        }
    }
    Ok((PlanResult::failure(explored, failed, started.elapsed()), tree))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::Building;
    use crate::planner::rng_from_seed;

    fn cube(side: f64) -> Aabb {
        Aabb::from_extent(Point3::new(side, side, side))
    }

    #[test]
    fn degenerate_bias() {
        let b = cube(500.0);
        let goal = Point3::new(1.0, 2.0, 3.0);
        let mut rng = rng_from_seed(1);
        for _ in 0..1000 {
            assert_eq!(sample_with_bias(goal, 1.0, &b, &mut rng), goal);
            assert_ne!(sample_with_bias(goal, 0.0, &b, &mut rng), goal);
        }
    }

    #[test]
    fn zero_bias_matches_uniform_stream() {
        let b = cube(500.0);
        let mut r1 = rng_from_seed(42);
        let mut r2 = rng_from_seed(42);
        for _ in 0..100 {
            assert_eq!(
                sample_with_bias(Point3::ZERO, 0.0, &b, &mut r1),
                sample_uniform(&b, &mut r2)
            );
        }
    }

    #[test]
    fn step_updates() {
        let p = DrrtParams::default();
        assert!((update_step(10.0, StepOutcome::FarFromObstacles, &p) - 12.0).abs() < 1e-12);
        assert_eq!(update_step(14.0, StepOutcome::FarFromObstacles, &p), 15.0);
        assert_eq!(update_step(1.0, StepOutcome::Collided, &p), 1.0);
        assert!((update_step(12.0, StepOutcome::Collided, &p) - 10.0).abs() < 1e-12);
        assert_eq!(update_step(3.0, StepOutcome::Neutral, &p), 10.0);
    }

    #[test]
    fn outcome_classification() {
        let p = DrrtParams::default();
        let empty = CityMap::empty(cube(500.0));
        assert_eq!(classify_step_outcome(&empty, Point3::new(5.0, 5.0, 5.0), true, &p), StepOutcome::Collided);
        assert_eq!(
            classify_step_outcome(&empty, Point3::new(5.0, 5.0, 5.0), false, &p),
            StepOutcome::FarFromObstacles
        );
        let map = CityMap::with_buildings(
            Aabb::new(Point3::new(-50.0, -50.0, 0.0), Point3::new(50.0, 50.0, 50.0)),
            vec![Building::new(Point3::ZERO, Point3::new(1.0, 1.0, 1.0))],
        );
        // clearance exactly 20 is not "far"
        let at = Point3::new(21.0, 0.5, 0.5);
        assert_eq!(map.clearance(at), 20.0);
        assert_eq!(classify_step_outcome(&map, at, false, &p), StepOutcome::Neutral);
        let beyond = Point3::new(21.5, 0.5, 0.5);
        assert_eq!(classify_step_outcome(&map, beyond, false, &p), StepOutcome::FarFromObstacles);
    }

    #[test]
    fn detour_free_forward() {
        let map = CityMap::empty(cube(500.0));
        let got = detour_extend(&map, Point3::new(0.0, 0.0, 10.0), Point3::new(100.0, 0.0, 10.0), 5.0, |_| false);
        assert_eq!(got, Some(Point3::new(5.0, 0.0, 10.0)));
    }

    #[test]
    fn detour_wall_tie_prefers_plus_y() {
        let bounds = Aabb::new(Point3::new(-50.0, -50.0, 0.0), Point3::new(150.0, 50.0, 50.0));
        let wall = Building::new(Point3::new(2.0, -20.0, 0.0), Point3::new(4.0, 20.0, 40.0));
        let map = CityMap::with_buildings(bounds, vec![wall]);
        let x = Point3::new(0.0, 0.0, 10.0);
        let goal = Point3::new(100.0, 0.0, 10.0);
        // candidates: +x blocked; -x at 105 from goal; +y and -y both at sqrt(100^2+5^2)
        let got = detour_extend(&map, x, goal, 5.0, |_| false);
        assert_eq!(got, Some(Point3::new(0.0, 5.0, 10.0)));
        // goal shifted to -y side: -y now strictly closer
        let goal = Point3::new(100.0, -1.0, 10.0);
        assert_eq!(detour_extend(&map, x, goal, 5.0, |_| false), Some(Point3::new(0.0, -5.0, 10.0)));
    }

    fn boxed_in_map() -> (CityMap, Point3) {
        let bounds = Aabb::new(Point3::new(-50.0, -50.0, 0.0), Point3::new(50.0, 50.0, 100.0));
        let x = Point3::new(0.0, 0.0, 10.0);
        let walls = vec![
            Building::new(Point3::new(2.0, -3.0, 0.0), Point3::new(3.0, 3.0, 12.0)),
            Building::new(Point3::new(-3.0, -3.0, 0.0), Point3::new(-2.0, 3.0, 12.0)),
            Building::new(Point3::new(-3.0, 2.0, 0.0), Point3::new(3.0, 3.0, 12.0)),
            Building::new(Point3::new(-3.0, -3.0, 0.0), Point3::new(3.0, -2.0, 12.0)),
        ];
        (CityMap::with_buildings(bounds, walls), x)
    }

    #[test]
    fn detour_vertical_fallback() {
        let (map, x) = boxed_in_map();
        let up = detour_extend(&map, x, Point3::new(40.0, 40.0, 60.0), 5.0, |_| false);
        assert_eq!(up, Some(Point3::new(0.0, 0.0, 15.0)));
        let down = detour_extend(&map, x, Point3::new(40.0, 40.0, 2.0), 5.0, |_| false);
        assert_eq!(down, Some(Point3::new(0.0, 0.0, 5.0)));
        // a floor one meter below turns the downward move into a collision
        let mut map = map;
        map.buildings.push(Building::new(Point3::new(-3.0, -3.0, 0.0), Point3::new(3.0, 3.0, 9.0)));
        assert_eq!(detour_extend(&map, x, Point3::new(40.0, 40.0, 2.0), 5.0, |_| false), None);
    }

    #[test]
    fn empty_map_straight_line() {
        let map = CityMap::empty(cube(500.0));
        let req = PlanRequest::new(crate::env::DEFAULT_START, crate::env::DEFAULT_GOAL);
        let straight = req.start.distance(req.goal);
        assert!((straight - 382_101f64.sqrt()).abs() < 1e-9);
        let mut total = 0.0;
        for seed in 0..30 {
            let r = plan_drrt(&map, &req, &DrrtParams::default(), seed).unwrap();
            assert!(r.success);
            let ratio = crate::metrics::path_length(&r.path) / straight;
            assert!((1.0 - 1e-9..=1.10).contains(&ratio), "seed {seed}: ratio {ratio}");
            total += ratio;
        }
        assert!(total / 30.0 <= 1.05, "mean ratio {}", total / 30.0);
    }

    #[test]
    fn invalid_params() {
        let map = CityMap::empty(cube(100.0));
        let req = PlanRequest::new(Point3::new(1.0, 1.0, 1.0), Point3::new(90.0, 90.0, 90.0));
        for p in [
            DrrtParams { p_target: 1.5, ..Default::default() },
            DrrtParams { e: 0.9, ..Default::default() },
            DrrtParams { step_min: 11.0, ..Default::default() },
        ] {
            assert!(plan_drrt(&map, &req, &p, 0).is_err());
        }
    }
}
