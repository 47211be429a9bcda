//! Reference implementations used by the integration tests. Each one takes
//! the slow, obvious route so it can be trusted against the fast code.
#![allow(dead_code)]

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use uavplan_core::baselines::{Cell, VoxelGrid};
use uavplan_core::env::Building;
use uavplan_core::{Aabb, CityMap, Point3};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_point(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> Point3 {
    Point3::new(rng.gen_range(lo..hi), rng.gen_range(lo..hi), rng.gen_range(lo..hi))
}

/// Index of the closest point, first one on ties.
pub fn linear_nearest(points: &[Point3], q: Point3) -> usize {
    let mut best = 0;
    for (i, p) in points.iter().enumerate() {
        if p.distance_squared(q) < points[best].distance_squared(q) {
            best = i;
        }
    }
    best
}

/// Signed distance to a box: positive outside, negative inside.
pub fn signed_distance(b: &Aabb, p: Point3) -> f64 {
    let mut outside = 0.0f64;
    let mut inside = f64::INFINITY;
    for k in 0..3 {
        let (lo, hi, v) = (b.min.axis(k), b.max.axis(k), p.axis(k));
        let d = (lo - v).max(v - hi);
        if d > 0.0 {
            outside += d * d;
        }
        inside = inside.min(-d);
    }
    if outside > 0.0 {
        outside.sqrt()
    } else {
        -inside
    }
}

/// Free-space margin of `p`: distance to the nearest building surface or
/// bounds face, negative when blocked.
pub fn margin(map: &CityMap, p: Point3) -> f64 {
    let to_bounds = -signed_distance(&map.bounds, p);
    map.buildings
        .iter()
        .map(|b| signed_distance(b.aabb(), p))
        .fold(to_bounds, f64::min)
}

/// Minimum margin along `a -> b` from `samples + 1` evenly spaced points.
pub fn sampled_min_margin(map: &CityMap, a: Point3, b: Point3, samples: usize) -> f64 {
    (0..=samples)
        .map(|i| margin(map, a.lerp(b, i as f64 / samples as f64)))
        .fold(f64::INFINITY, f64::min)
}

/// Dense sampling: collides iff some sample is blocked (margin <= 0).
pub fn dense_segment_collides(map: &CityMap, a: Point3, b: Point3, samples: usize) -> bool {
    sampled_min_margin(map, a, b, samples) <= 0.0
}

pub fn random_city(rng: &mut ChaCha8Rng, side: f64, count: usize) -> CityMap {
    let bounds = Aabb::from_extent(Point3::new(side, side, side));
    let buildings = (0..count)
        .map(|_| {
            let w = rng.gen_range(side * 0.05..side * 0.2);
            let d = rng.gen_range(side * 0.05..side * 0.2);
            let h = rng.gen_range(side * 0.1..side * 0.8);
            let x = rng.gen_range(0.0..side - w);
            let y = rng.gen_range(0.0..side - d);
            Building::new(Point3::new(x, y, 0.0), Point3::new(x + w, y + d, h))
        })
        .collect();
    CityMap::with_buildings(bounds, buildings)
}

/// Free point of `map` drawn by rejection, away from every surface by `clear`.
pub fn free_point(rng: &mut ChaCha8Rng, map: &CityMap, clear: f64) -> Point3 {
    let (lo, hi) = (map.bounds.min, map.bounds.max);
    loop {
        let p = Point3::new(
            rng.gen_range(lo.x..hi.x),
            rng.gen_range(lo.y..hi.y),
            rng.gen_range(lo.z..hi.z),
        );
        if margin(map, p) > clear {
            return p;
        }
    }
}

/// De Boor's algorithm for a clamped B-spline.
pub fn de_boor(ctrl: &[Point3], degree: usize, knots: &[f64], u: f64) -> Point3 {
    let n = ctrl.len();
    // span k with knots[k] <= u < knots[k+1], the last non-empty one at the end
    let mut k = degree;
    while k < n - 1 && u >= knots[k + 1] {
        k += 1;
    }
    let mut d: Vec<Point3> = (0..=degree).map(|j| ctrl[j + k - degree]).collect();
    for r in 1..=degree {
        for j in (r..=degree).rev() {
            let i = j + k - degree;
            let denom = knots[i + degree + 1 - r] - knots[i];
            let alpha = if denom == 0.0 { 0.0 } else { (u - knots[i]) / denom };
            d[j] = d[j - 1] * (1.0 - alpha) + d[j] * alpha;
        }
    }
    d[degree]
}

#[derive(PartialEq)]
struct Entry(f64, usize);

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Shortest 26-connected cost between cell centers, `None` if unreachable.
pub fn dijkstra(grid: &VoxelGrid, from: Cell, to: Cell) -> Option<f64> {
    let [nx, ny, nz] = grid.dims();
    let idx = |c: [i64; 3]| (c[0] as usize * ny + c[1] as usize) * nz + c[2] as usize;
    let mut dist = vec![f64::INFINITY; nx * ny * nz];
    let start = idx([from[0] as i64, from[1] as i64, from[2] as i64]);
    let target = idx([to[0] as i64, to[1] as i64, to[2] as i64]);
    dist[start] = 0.0;
    let mut heap = BinaryHeap::from([Entry(0.0, start)]);
    while let Some(Entry(d, i)) = heap.pop() {
        if i == target {
            return Some(d);
        }
        if d > dist[i] {
            continue;
        }
        let c = [(i / (ny * nz)) as i64, ((i / nz) % ny) as i64, (i % nz) as i64];
        for dx in -1i64..=1 {
            for dy in -1i64..=1 {
                for dz in -1i64..=1 {
                    if dx == 0 && dy == 0 && dz == 0 {
                        continue;
                    }
                    let n = [c[0] + dx, c[1] + dy, c[2] + dz];
                    if n[0] < 0 || n[1] < 0 || n[2] < 0 {
                        continue;
                    }
                    if n[0] >= nx as i64 || n[1] >= ny as i64 || n[2] >= nz as i64 {
                        continue;
                    }
                    let cell = [n[0] as usize, n[1] as usize, n[2] as usize];
                    if !grid.is_free(cell) {
                        continue;
                    }
                    let step = ((dx * dx + dy * dy + dz * dz) as f64).sqrt() * grid.resolution();
                    let j = idx(n);
                    if d + step < dist[j] {
                        dist[j] = d + step;
                        heap.push(Entry(d + step, j));
                    }
                }
            }
        }
    }
    None
}

/// Random occupancy grid with each cell blocked with probability `fill`.
pub fn random_grid(rng: &mut ChaCha8Rng, dims: [usize; 3], fill: f64) -> VoxelGrid {
    let n = dims.iter().product();
    let occupied = (0..n).map(|_| rng.gen_bool(fill)).collect();
    VoxelGrid::from_occupancy(Point3::ZERO, 1.0, dims, occupied).unwrap()
}

pub fn path_cost(path: &[Point3]) -> f64 {
    let mut total = 0.0;
    for i in 1..path.len() {
        let d = path[i] - path[i - 1];
        total += (d.x * d.x + d.y * d.y + d.z * d.z).sqrt();
    }
    total
}
