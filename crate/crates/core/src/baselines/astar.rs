use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::Instant;

use super::{cells_to_path, endpoint_cells, VoxelGrid, NEIGHBORS_26};
use crate::error::Result;
use crate::planner::{PlanRequest, PlanResult};

#[derive(Clone, Copy, Debug)]
struct Open {
    f: f64,
    g: f64,
    index: usize,
}

impl PartialEq for Open {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Open {}

impl PartialOrd for Open {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Open {
    // BinaryHeap pops the maximum: lowest f, then highest g, then lowest index
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .f
            .total_cmp(&self.f)
            .then(self.g.total_cmp(&other.g))
            .then(other.index.cmp(&self.index))
    }
}

/// 26-connected A* over free cells with Euclidean step costs and a
/// straight-line heuristic.
///
/// `explored_nodes` is the number of cells expanded (popped and closed).
pub fn plan_astar(grid: &VoxelGrid, req: &PlanRequest) -> Result<PlanResult> {
    let (start, goal) = endpoint_cells(grid, req)?;
    let started = Instant::now();
    let n = grid.len();
    let start_i = grid.index(start);
    let goal_i = grid.index(goal);

    let step_cost: Vec<f64> = NEIGHBORS_26
        .iter()
        .map(|o| {
            let s = (o[0] * o[0] + o[1] * o[1] + o[2] * o[2]) as f64;
            s.sqrt() * grid.resolution()
        })
        .collect();

    let mut g = vec![f64::INFINITY; n];
    let mut parent = vec![usize::MAX; n];
    let mut closed = vec![false; n];
    let mut open = BinaryHeap::new();
    g[start_i] = 0.0;
    open.push(Open {
        f: grid.cell_distance(start, goal),
        g: 0.0,
        index: start_i,
    });

    let mut expanded = 0usize;
    while let Some(Open { g: g_cur, index, .. }) = open.pop() {
        if closed[index] || g_cur > g[index] {
            continue;
        }
        closed[index] = true;
        expanded += 1;
        if index == goal_i {
            let mut cells = vec![grid.cell(index)];
            let mut cur = index;
            while parent[cur] != usize::MAX {
                cur = parent[cur];
                cells.push(grid.cell(cur));
            }
            cells.reverse();
            #[cfg(debug_assertions)]
            for c in &cells {
                // straight-line distance never exceeds the remaining optimal cost
                let rest = g[goal_i] - g[grid.index(*c)];
                debug_assert!(grid.cell_distance(*c, goal) <= rest + 1e-9);
            }
            return Ok(PlanResult {
                success: true,
                path: cells_to_path(grid, req, &cells),
                explored_nodes: expanded,
                failed_attempts: 0,
                elapsed_s: started.elapsed().as_secs_f64(),
            });
        }
        let cell = grid.cell(index);
        for (k, off) in NEIGHBORS_26.iter().enumerate() {
            let Some(nb) = grid.offset(cell, *off) else {
                continue;
            };
            let j = grid.index(nb);
            if closed[j] || !grid.is_free_index(j) {
                continue;
            }
            let tentative = g_cur + step_cost[k];
            if tentative < g[j] {
                g[j] = tentative;
                parent[j] = index;
                open.push(Open {
                    f: tentative + grid.cell_distance(nb, goal),
                    g: tentative,
                    index: j,
                });
            }
        }
    }
    Ok(PlanResult::failure(expanded, 0, started.elapsed()))
}
