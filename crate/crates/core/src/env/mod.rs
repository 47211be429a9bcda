//! Urban obstacle world: buildings as closed axis-aligned prisms standing on
//! the ground plane, plus the flight volume bounds.
//!
//! Leaving the bounds counts as a collision, as does touching any building
//! surface.

mod aabb;
mod point;

use std::fs;
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use aabb::Aabb;
pub use point::Point3;

use crate::error::{Error, Result};

/// One building footprint extruded from the ground (`min.z` is the floor).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Building(pub Aabb);

impl Building {
    pub fn new(min: Point3, max: Point3) -> Self {
        Building(Aabb::new(min, max))
    }

    pub fn aabb(&self) -> &Aabb {
        &self.0
    }

    pub fn height(&self) -> f64 {
        self.0.max.z - self.0.min.z
    }
}

/// Knobs for [`generate_city`]. Defaults describe the 500 m cube with 40
/// buildings and the two standard endpoints kept clear.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenParams {
    pub bounds: Aabb,
    pub count: usize,
    /// Side length range of the footprint, per side.
    pub footprint: [f64; 2],
    pub height: [f64; 2],
    /// Points no building may come within `keep_clear_radius` of.
    pub keep_clear: Vec<Point3>,
    pub keep_clear_radius: f64,
    /// Rejection budget per building before generation gives up.
    pub max_rejections: usize,
}

pub const DEFAULT_START: Point3 = Point3::new(10.0, 10.0, 1.0);
pub const DEFAULT_GOAL: Point3 = Point3::new(470.0, 420.0, 50.0);

impl Default for GenParams {
    fn default() -> Self {
        Self {
            bounds: Aabb::from_extent(Point3::new(500.0, 500.0, 500.0)),
            count: 40,
            footprint: [20.0, 60.0],
            height: [18.0, 270.0],
            keep_clear: vec![DEFAULT_START, DEFAULT_GOAL],
            keep_clear_radius: 5.0,
            max_rejections: 1000,
        }
    }
}

impl GenParams {
    fn validate(&self) -> Result<()> {
        if !self.bounds.is_valid() {
            return Err(Error::invalid("bounds must be a non-degenerate finite box"));
        }
        let [fmin, fmax] = self.footprint;
        if !(fmin > 0.0 && fmin <= fmax) {
            return Err(Error::invalid(format!("footprint range [{fmin}, {fmax}] must be positive and ordered")));
        }
        let [hmin, hmax] = self.height;
        if !(hmin > 0.0 && hmin <= hmax) {
            return Err(Error::invalid(format!("height range [{hmin}, {hmax}] must be positive and ordered")));
        }
        let ext = self.bounds.extent();
        if fmax > ext.x || fmax > ext.y || hmax > ext.z {
            return Err(Error::invalid("building size range exceeds the map bounds"));
        }
        if !(self.keep_clear_radius >= 0.0) {
            return Err(Error::invalid("keep_clear_radius must be non-negative"));
        }
        if let Some(p) = self.keep_clear.iter().find(|p| !self.bounds.contains(**p)) {
            return Err(Error::invalid(format!("keep-clear point {p} lies outside the bounds")));
        }
        Ok(())
    }
}

/// The obstacle world. Immutable once built; all queries are pure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CityMap {
    pub bounds: Aabb,
    pub seed: u64,
    pub buildings: Vec<Building>,
}

/// Generates a random city. A pure function of `(seed, params)`.
pub fn generate_city(seed: u64, params: &GenParams) -> Result<CityMap> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b = params.bounds;
    let [fmin, fmax] = params.footprint;
    let [hmin, hmax] = params.height;

    let mut buildings = Vec::with_capacity(params.count);
    let mut rejections = 0usize;
    let budget = params.max_rejections.saturating_mul(params.count.max(1));
    while buildings.len() < params.count {
        let w = rng.gen_range(fmin..=fmax);
        let d = rng.gen_range(fmin..=fmax);
        let h = rng.gen_range(hmin..=hmax);
        let cx = rng.gen_range(b.min.x + w / 2.0..=b.max.x - w / 2.0);
        let cy = rng.gen_range(b.min.y + d / 2.0..=b.max.y - d / 2.0);
        let candidate = Building::new(
            Point3::new(cx - w / 2.0, cy - d / 2.0, b.min.z),
            Point3::new(cx + w / 2.0, cy + d / 2.0, b.min.z + h),
        );
        let blocks_keep_clear = params
            .keep_clear
            .iter()
            .any(|p| candidate.aabb().distance_to(*p) <= params.keep_clear_radius);
        if blocks_keep_clear {
            rejections += 1;
            if rejections > budget {
                return Err(Error::Placement {
                    placed: buildings.len(),
                    requested: params.count,
                    rounds: rejections,
                });
            }
            continue;
        }
        buildings.push(candidate);
    }

    Ok(CityMap {
        bounds: b,
        seed,
        buildings,
    })
}

impl CityMap {
    pub fn empty(bounds: Aabb) -> Self {
        Self {
            bounds,
            seed: 0,
            buildings: Vec::new(),
        }
    }

    pub fn with_buildings(bounds: Aabb, buildings: Vec<Building>) -> Self {
        Self {
            bounds,
            seed: 0,
            buildings,
        }
    }

    /// Inside the bounds and not touching any building.
    pub fn point_free(&self, p: Point3) -> bool {
        p.is_finite()
            && self.bounds.contains(p)
            && !self.buildings.iter().any(|b| b.aabb().contains(p))
    }

    /// True iff the closed segment leaves the bounds or touches a building.
    pub fn segment_collides(&self, a: Point3, b: Point3) -> bool {
        if !a.is_finite() || !b.is_finite() {
            return true;
        }
        // the bounds are convex, so checking the endpoints suffices
        if !self.bounds.contains(a) || !self.bounds.contains(b) {
            return true;
        }
        self.buildings
            .iter()
            .any(|bld| bld.aabb().intersects_segment(a, b))
    }

    /// Distance to the nearest building surface; 0 inside a building and
    /// `f64::INFINITY` on an empty map. Bounds walls are ignored.
    pub fn clearance(&self, p: Point3) -> f64 {
        self.buildings
            .iter()
            .map(|b| b.aabb().distance_to(p))
            .fold(f64::INFINITY, f64::min)
    }

    /// Every segment of `path` is collision-free.
    pub fn path_free(&self, path: &[Point3]) -> bool {
        match path {
            [] => false,
            [p] => self.point_free(*p),
            _ => path.windows(2).all(|w| !self.segment_collides(w[0], w[1])),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let map: CityMap = serde_json::from_str(s)?;
        if !map.bounds.is_valid() {
            return Err(Error::invalid("map bounds are degenerate"));
        }
        if let Some(b) = map.buildings.iter().find(|b| !b.aabb().is_valid()) {
            return Err(Error::invalid(format!("degenerate building {:?}", b.aabb())));
        }
        Ok(map)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let s = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&s)
    }
}
