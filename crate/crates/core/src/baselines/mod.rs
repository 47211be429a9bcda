//! Grid baselines: voxel occupancy, A* and ant colony optimization.

mod aco;
mod astar;
mod voxel;

pub use aco::{plan_aco, plan_aco_with_stats, AcoParams, AcoStats};
pub use astar::plan_astar;
pub use voxel::{voxelize, Cell, VoxelGrid, NEIGHBORS_26};

use crate::env::Point3;
use crate::error::{Error, Result};
use crate::planner::PlanRequest;

/// Start and goal cells of `req`, both required to be free.
fn endpoint_cells(grid: &VoxelGrid, req: &PlanRequest) -> Result<(Cell, Cell)> {
    let lookup = |what: &'static str, p: Point3| {
        grid.cell_of(p)
            .filter(|c| grid.is_free(*c))
            .ok_or(Error::BlockedEndpoint { what, point: p })
    };
    Ok((lookup("start", req.start)?, lookup("goal", req.goal)?))
}

/// Cell centers framed by the exact start and goal points.
fn cells_to_path(grid: &VoxelGrid, req: &PlanRequest, cells: &[Cell]) -> Vec<Point3> {
    let mut path = Vec::with_capacity(cells.len() + 2);
    path.push(req.start);
    for &c in cells {
        let p = grid.center(c);
        if path.last() != Some(&p) {
            path.push(p);
        }
    }
    if path.last() != Some(&req.goal) {
        path.push(req.goal);
    }
    path
}
