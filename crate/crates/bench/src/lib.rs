//! Shared fixtures for the criterion benches.

use uavplan_core::env::{DEFAULT_GOAL, DEFAULT_START};
use uavplan_core::{generate_city, voxelize, CityMap, GenParams, PlanRequest, Point3, VoxelGrid};

/// Map seed used throughout the benches.
pub const MAP_SEED: u64 = 1;

pub struct Urban {
    pub map: CityMap,
    pub grid: VoxelGrid,
    pub request: PlanRequest,
}

pub fn urban() -> Urban {
    let map = generate_city(MAP_SEED, &GenParams::default()).expect("default city generates");
    let grid = voxelize(&map, 5.0).expect("valid resolution");
    Urban {
        map,
        grid,
        request: PlanRequest::new(DEFAULT_START, DEFAULT_GOAL),
    }
}

/// Deterministic low-discrepancy points in the map's bounds.
pub fn points(map: &CityMap, n: usize) -> Vec<Point3> {
    let e = map.bounds.extent();
    (0..n)
        .map(|i| {
            let f = |a: f64| ((i as f64 + 0.5) * a).fract();
            map.bounds.min + Point3::new(f(0.618_033_988_7) * e.x, f(0.754_877_666_2) * e.y, f(0.569_840_290_9) * e.z)
        })
        .collect()
}
