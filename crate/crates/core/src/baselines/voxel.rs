use crate::env::{Aabb, CityMap, Point3};
use crate::error::{Error, Result};

/// Integer cell coordinates.
pub type Cell = [usize; 3];

/// 26-connected neighbourhood offsets.
pub const NEIGHBORS_26: [[i8; 3]; 26] = {
    let mut out = [[0i8; 3]; 26];
    let mut n = 0;
    let mut dx = -1;
    while dx <= 1 {
        let mut dy = -1;
        while dy <= 1 {
            let mut dz = -1;
            while dz <= 1 {
                if !(dx == 0 && dy == 0 && dz == 0) {
                    out[n] = [dx, dy, dz];
                    n += 1;
                }
                dz += 1;
            }
            dy += 1;
        }
        dx += 1;
    }
    out
};

/// Uniform occupancy grid over the map bounds. A cell is blocked when its
/// closed box touches a building or its center falls outside the bounds.
#[derive(Clone, Debug, PartialEq)]
pub struct VoxelGrid {
    origin: Point3,
    resolution: f64,
    dims: [usize; 3],
    occupied: Vec<bool>,
}

pub fn voxelize(map: &CityMap, resolution: f64) -> Result<VoxelGrid> {
    if !(resolution > 0.0 && resolution.is_finite()) {
        return Err(Error::invalid("voxel resolution must be positive"));
    }
    let ext = map.bounds.extent();
    let dims = [
        (ext.x / resolution).ceil() as usize,
        (ext.y / resolution).ceil() as usize,
        (ext.z / resolution).ceil() as usize,
    ];
    let total = dims[0]
        .checked_mul(dims[1])
        .and_then(|v| v.checked_mul(dims[2]))
        .filter(|&v| v <= 1 << 30)
        .ok_or_else(|| Error::invalid("voxel grid too large"))?;
    let mut grid = VoxelGrid {
        origin: map.bounds.min,
        resolution,
        dims,
        occupied: vec![false; total],
    };

    for b in &map.buildings {
        let a = b.aabb();
        // candidate index range, widened by one and then filtered exactly
        let range = |axis: usize| {
            let o = grid.origin.axis(axis);
            let lo = ((a.min.axis(axis) - o) / resolution).floor() as i64 - 1;
            let hi = ((a.max.axis(axis) - o) / resolution).floor() as i64 + 1;
            let n = dims[axis] as i64;
            (lo.clamp(0, n) as usize, (hi + 1).clamp(0, n) as usize)
        };
        let (x0, x1) = range(0);
        let (y0, y1) = range(1);
        let (z0, z1) = range(2);
        for x in x0..x1 {
            for y in y0..y1 {
                for z in z0..z1 {
                    let c = [x, y, z];
                    if grid.cell_box(c).intersects(a) {
                        let i = grid.index(c);
                        grid.occupied[i] = true;
                    }
                }
            }
        }
    }

    for x in 0..dims[0] {
        for y in 0..dims[1] {
            for z in 0..dims[2] {
                let c = [x, y, z];
                if !map.bounds.contains(grid.center(c)) {
                    let i = grid.index(c);
                    grid.occupied[i] = true;
                }
            }
        }
    }
    Ok(grid)
}

impl VoxelGrid {
    /// Grid from an explicit occupancy array in x-major order
    /// (`index = (x * ny + y) * nz + z`).
    pub fn from_occupancy(origin: Point3, resolution: f64, dims: [usize; 3], occupied: Vec<bool>) -> Result<Self> {
        if !(resolution > 0.0) {
            return Err(Error::invalid("voxel resolution must be positive"));
        }
        if occupied.len() != dims.iter().product::<usize>() {
            return Err(Error::invalid("occupancy length does not match dims"));
        }
        Ok(Self {
            origin,
            resolution,
            dims,
            occupied,
        })
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.occupied.len()
    }

    pub fn is_empty(&self) -> bool {
        self.occupied.is_empty()
    }

    pub fn index(&self, c: Cell) -> usize {
        (c[0] * self.dims[1] + c[1]) * self.dims[2] + c[2]
    }

    pub fn cell(&self, index: usize) -> Cell {
        let z = index % self.dims[2];
        let rest = index / self.dims[2];
        [rest / self.dims[1], rest % self.dims[1], z]
    }

    pub fn is_free(&self, c: Cell) -> bool {
        !self.occupied[self.index(c)]
    }

    pub fn is_free_index(&self, index: usize) -> bool {
        !self.occupied[index]
    }

    pub fn free_count(&self) -> usize {
        self.occupied.iter().filter(|o| !**o).count()
    }

    pub fn cell_box(&self, c: Cell) -> Aabb {
        let r = self.resolution;
        let min = self.origin + Point3::new(c[0] as f64 * r, c[1] as f64 * r, c[2] as f64 * r);
        Aabb::new(min, min + Point3::new(r, r, r))
    }

    pub fn center(&self, c: Cell) -> Point3 {
        let r = self.resolution;
        self.origin
            + Point3::new(
                (c[0] as f64 + 0.5) * r,
                (c[1] as f64 + 0.5) * r,
                (c[2] as f64 + 0.5) * r,
            )
    }

    /// Cell containing `p`; points on the far boundary map to the last cell.
    pub fn cell_of(&self, p: Point3) -> Option<Cell> {
        let mut c = [0usize; 3];
        for (axis, slot) in c.iter_mut().enumerate() {
            let f = (p.axis(axis) - self.origin.axis(axis)) / self.resolution;
            if !(f >= 0.0) {
                return None;
            }
            let i = f.floor() as usize;
            *slot = match i {
                i if i < self.dims[axis] => i,
                i if i == self.dims[axis] && f == i as f64 => i - 1,
                _ => return None,
            };
        }
        Some(c)
    }

    /// In-grid neighbour of `c` along `offset`.
    pub fn offset(&self, c: Cell, offset: [i8; 3]) -> Option<Cell> {
        let mut out = [0usize; 3];
        for axis in 0..3 {
            let v = c[axis] as i64 + offset[axis] as i64;
            if v < 0 || v >= self.dims[axis] as i64 {
                return None;
            }
            out[axis] = v as usize;
        }
        Some(out)
    }

    /// Euclidean distance between cell centers, in meters.
    pub fn cell_distance(&self, a: Cell, b: Cell) -> f64 {
        let d = |i: usize| a[i] as f64 - b[i] as f64;
        (d(0) * d(0) + d(1) * d(1) + d(2) * d(2)).sqrt() * self.resolution
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::Building;

    #[test]
    fn neighbour_table() {
        assert_eq!(NEIGHBORS_26.len(), 26);
        assert!(!NEIGHBORS_26.contains(&[0, 0, 0]));
    }

    #[test]
    fn empty_map_all_free() {
        let map = CityMap::empty(Aabb::from_extent(Point3::new(50.0, 50.0, 20.0)));
        let g = voxelize(&map, 5.0).unwrap();
        assert_eq!(g.dims(), [10, 10, 4]);
        assert_eq!(g.free_count(), 400);
    }

    #[test]
    fn corner_building() {
        let map = CityMap::with_buildings(
            Aabb::from_extent(Point3::new(50.0, 50.0, 50.0)),
            vec![Building::new(Point3::ZERO, Point3::new(10.0, 10.0, 10.0))],
        );
        let g = voxelize(&map, 5.0).unwrap();
        // [0,10] on each axis touches cells 0, 1 and (by the closed face at 10) cell 2
        let occupied: Vec<Cell> = (0..g.len()).filter(|&i| !g.is_free_index(i)).map(|i| g.cell(i)).collect();
        assert_eq!(occupied.len(), 27);
        assert!(occupied.iter().all(|c| c.iter().all(|&v| v <= 2)));
    }

    #[test]
    fn interior_building_exact_cells() {
        let map = CityMap::with_buildings(
            Aabb::from_extent(Point3::new(50.0, 50.0, 50.0)),
            vec![Building::new(Point3::new(0.5, 0.5, 0.0), Point3::new(9.5, 9.5, 9.5))],
        );
        let g = voxelize(&map, 5.0).unwrap();
        let occupied: Vec<Cell> = (0..g.len()).filter(|&i| !g.is_free_index(i)).map(|i| g.cell(i)).collect();
        assert_eq!(occupied.len(), 8);
        assert!(occupied.iter().all(|c| c.iter().all(|&v| v <= 1)));
    }

    #[test]
    fn face_on_cell_boundary_blocks_both_sides() {
        let map = CityMap::with_buildings(
            Aabb::from_extent(Point3::new(50.0, 50.0, 50.0)),
            vec![Building::new(Point3::new(12.0, 12.0, 0.0), Point3::new(15.0, 13.0, 1.0))],
        );
        let g = voxelize(&map, 5.0).unwrap();
        assert!(!g.is_free([2, 2, 0]));
        assert!(!g.is_free([3, 2, 0]));
        assert!(g.is_free([4, 2, 0]));
    }

    #[test]
    fn index_roundtrip_and_lookup() {
        let g = voxelize(&CityMap::empty(Aabb::from_extent(Point3::new(30.0, 20.0, 10.0))), 5.0).unwrap();
        for i in 0..g.len() {
            assert_eq!(g.index(g.cell(i)), i);
        }
        assert_eq!(g.cell_of(Point3::new(30.0, 20.0, 10.0)), Some([5, 3, 1]));
        assert_eq!(g.cell_of(Point3::new(12.0, 3.0, 7.0)), Some([2, 0, 1]));
        assert_eq!(g.cell_of(Point3::new(-0.1, 3.0, 7.0)), None);
        assert_eq!(g.cell_of(Point3::new(30.1, 3.0, 7.0)), None);
    }

    #[test]
    fn cells_beyond_bounds_blocked() {
        let g = voxelize(&CityMap::empty(Aabb::from_extent(Point3::new(12.0, 10.0, 10.0))), 5.0).unwrap();
        assert_eq!(g.dims(), [3, 2, 2]);
        // center x = 12.5 lies outside
        assert!(!g.is_free([2, 0, 0]));
        assert!(g.is_free([1, 0, 0]));
    }
}
