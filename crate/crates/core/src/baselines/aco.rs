use std::time::Instant;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use super::{cells_to_path, endpoint_cells, Cell, VoxelGrid, NEIGHBORS_26};
use crate::error::{Error, Result};
use crate::planner::{rng_from_seed, PlanRequest, PlanResult};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AcoParams {
    pub ants: usize,
    pub iterations: usize,
    /// Pheromone exponent.
    pub alpha: f64,
    /// Heuristic exponent. The heuristic `1/d` changes by about `1/d` per
    /// move, so ants far from the goal only head for it when this is large.
    pub beta: f64,
    /// Evaporation rate.
    pub rho: f64,
    /// Deposit constant.
    pub q: f64,
    /// Initial pheromone on every cell.
    pub tau0: f64,
    /// Step cap per ant as a multiple of the straight-line cell distance.
    pub step_cap_factor: f64,
}

impl Default for AcoParams {
    fn default() -> Self {
        Self {
            ants: 30,
            iterations: 100,
            alpha: 1.0,
            beta: 100.0,
            rho: 0.5,
            q: 100.0,
            tau0: 1.0,
            step_cap_factor: 4.0,
        }
    }
}

impl AcoParams {
    pub fn validate(&self) -> Result<()> {
        if self.ants == 0 || self.iterations == 0 {
            return Err(Error::invalid("ACO needs at least one ant and one iteration"));
        }
        let positive = [self.alpha, self.beta, self.q, self.tau0, self.step_cap_factor];
        if positive.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::invalid("ACO alpha, beta, q, tau0 and step_cap_factor must be positive"));
        }
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return Err(Error::invalid("ACO rho must lie in (0, 1)"));
        }
        Ok(())
    }
}

/// Per-iteration diagnostics of one ACO run.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct AcoStats {
    /// Cost of the best ant path of each iteration, if any ant arrived.
    pub iteration_best: Vec<Option<f64>>,
    /// `(min, max)` pheromone after each iteration's update.
    pub pheromone_range: Vec<(f64, f64)>,
    /// Upper bound the pheromone must respect after each iteration.
    pub pheromone_bound: Vec<f64>,
}

pub fn plan_aco(grid: &VoxelGrid, req: &PlanRequest, params: &AcoParams, seed: u64) -> Result<PlanResult> {
    plan_aco_with_stats(grid, req, params, seed).map(|(r, _)| r)
}

/// Ant colony search over the free cells of `grid`.
///
/// Each ant walks a self-avoiding route from the start cell, choosing among
/// unvisited free neighbours with probability proportional to
/// `tau^alpha * (1 / d)^beta`, `d` being the neighbour's distance to the goal.
/// Ants that dead-end or exceed the step cap are dropped. After every
/// iteration all pheromone evaporates by `rho` and each arriving ant deposits
/// `q / cost` on the cells of its route. Ants of one iteration only read the
/// previous iteration's pheromone.
pub fn plan_aco_with_stats(
    grid: &VoxelGrid,
    req: &PlanRequest,
    params: &AcoParams,
    seed: u64,
) -> Result<(PlanResult, AcoStats)> {
    params.validate()?;
    let (start, goal) = endpoint_cells(grid, req)?;
    let started = Instant::now();
    let mut seeder = rng_from_seed(seed);

    let n = grid.len();
    let start_i = grid.index(start);
    let goal_i = grid.index(goal);
    let max_steps = ((grid.cell_distance(start, goal) / grid.resolution()) * params.step_cap_factor)
        .ceil()
        .max(1.0) as usize;

    let mut tau = vec![params.tau0; n];
    // visit stamps: cell visited by the current ant iff stamp == ant id
    let mut stamp = vec![0u32; n];
    let mut ant_id = 0u32;

    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut min_cost = f64::INFINITY;
    let mut visited_total = 0usize;
    let mut dropped = 0usize;
    let mut stats = AcoStats::default();
    let mut candidates: Vec<(usize, f64)> = Vec::with_capacity(26);

    for _ in 0..params.iterations {
        let mut arrivals: Vec<(f64, Vec<usize>)> = Vec::new();
        for _ in 0..params.ants {
            ant_id += 1;
            let mut rng = rng_from_seed(seeder.next_u64());
            let mut route = vec![start_i];
            let mut cost = 0.0;
            stamp[start_i] = ant_id;
            let mut cur = start;
            let mut arrived = start_i == goal_i;

            while !arrived && route.len() <= max_steps {
                candidates.clear();
                for off in NEIGHBORS_26 {
                    let Some(nb) = grid.offset(cur, off) else { continue };
                    let j = grid.index(nb);
                    if stamp[j] == ant_id || !grid.is_free_index(j) {
                        continue;
                    }
                    candidates.push((j, grid.cell_distance(nb, goal)));
                }
                if candidates.is_empty() {
                    break;
                }
                let next = if let Some(&(j, _)) = candidates.iter().find(|(j, _)| *j == goal_i) {
                    j
                } else {
                    // normalise the heuristic by the best candidate to keep powers in range
                    let d_min = candidates.iter().map(|c| c.1).fold(f64::INFINITY, f64::min);
                    let weights: Vec<f64> = candidates
                        .iter()
                        .map(|&(j, d)| tau[j].powf(params.alpha) * (d_min / d).powf(params.beta))
                        .collect();
                    roulette(&candidates, &weights, &mut rng)
                };
                let nb = grid.cell(next);
                cost += grid.cell_distance(cur, nb);
                stamp[next] = ant_id;
                route.push(next);
                cur = nb;
                arrived = next == goal_i;
            }

            visited_total += route.len();
            if arrived {
                arrivals.push((cost, route));
            } else {
                dropped += 1;
            }
        }

        for t in tau.iter_mut() {
            *t *= 1.0 - params.rho;
        }
        for (cost, route) in &arrivals {
            let deposit = params.q / cost.max(grid.resolution());
            for &c in route {
                tau[c] += deposit;
            }
        }

        let iter_best = arrivals
            .iter()
            .min_by(|a, b| a.0.total_cmp(&b.0))
            .cloned();
        stats.iteration_best.push(iter_best.as_ref().map(|b| b.0));
        if let Some((c, route)) = iter_best {
            min_cost = min_cost.min(c.max(grid.resolution()));
            if best.as_ref().is_none_or(|b| c < b.0) {
                best = Some((c, route));
            }
        }
        let (lo, hi) = tau
            .iter()
            .fold((f64::INFINITY, 0.0_f64), |(lo, hi), &t| (lo.min(t), hi.max(t)));
        stats.pheromone_range.push((lo, hi));
        let bound = if min_cost.is_finite() {
            params.tau0.max(params.ants as f64 * params.q / (params.rho * min_cost))
        } else {
            params.tau0
        };
        stats.pheromone_bound.push(bound);
    }

    let elapsed = started.elapsed();
    let result = match best {
        Some((_, route)) => {
            let cells: Vec<Cell> = route.iter().map(|&i| grid.cell(i)).collect();
            PlanResult {
                success: true,
                path: cells_to_path(grid, req, &cells),
                explored_nodes: visited_total,
                failed_attempts: dropped,
                elapsed_s: elapsed.as_secs_f64(),
            }
        }
        None => PlanResult::failure(visited_total, dropped, elapsed),
    };
    Ok((result, stats))
}

fn roulette(candidates: &[(usize, f64)], weights: &[f64], rng: &mut impl Rng) -> usize {
    let total: f64 = weights.iter().sum();
    let mut r = rng.gen::<f64>() * total;
    for (c, w) in candidates.iter().zip(weights) {
        if r < *w {
            return c.0;
        }
        r -= w;
    }
    candidates[candidates.len() - 1].0
}
