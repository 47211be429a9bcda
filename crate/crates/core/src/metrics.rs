//! Path quality metrics: length, waypoint count and heading changes.

use serde::{Deserialize, Serialize};

use crate::env::Point3;

/// Heading changes above this many degrees count as sharp turns.
pub const SHARP_TURN_DEG: f64 = 45.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathMetrics {
    pub length_m: f64,
    pub smoothed_length_m: Option<f64>,
    pub waypoints: usize,
    pub max_turn_deg: f64,
    pub max_turn_smoothed_deg: Option<f64>,
    pub sharp_turns: usize,
    pub sharp_turns_smoothed: Option<usize>,
}

/// One planner run as it appears in a benchmark report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub algorithm: String,
    pub trial: usize,
    pub seed: u64,
    pub success: bool,
    /// Planning time, including smoothing where the algorithm smooths.
    pub elapsed_s: f64,
    /// Smoothing share of `elapsed_s`, if any.
    pub smoothing_s: Option<f64>,
    pub explored_nodes: usize,
    pub metrics: Option<PathMetrics>,
}

pub fn path_length(path: &[Point3]) -> f64 {
    path.windows(2).map(|w| w[0].distance(w[1])).sum()
}

/// Heading change in degrees at every interior waypoint, after merging
/// repeated consecutive points.
pub fn turn_angles(path: &[Point3]) -> Vec<f64> {
    let mut pts: Vec<Point3> = Vec::with_capacity(path.len());
    for &p in path {
        if pts.last() != Some(&p) {
            pts.push(p);
        }
    }
    pts.windows(3)
        .map(|w| {
            let a = w[1] - w[0];
            let b = w[2] - w[1];
            let cos = (a.dot(b) / (a.norm() * b.norm())).clamp(-1.0, 1.0);
            cos.acos().to_degrees()
        })
        .collect()
}

fn turn_stats(path: &[Point3]) -> (f64, usize) {
    let angles = turn_angles(path);
    let max = angles.iter().copied().fold(0.0, f64::max);
    let sharp = angles.iter().filter(|&&a| a > SHARP_TURN_DEG).count();
    (max, sharp)
}

pub fn summarize(path: &[Point3], smoothed: Option<&[Point3]>) -> PathMetrics {
    let (max_turn_deg, sharp_turns) = turn_stats(path);
    let smoothed_stats = smoothed.map(|s| (path_length(s), turn_stats(s)));
    PathMetrics {
        length_m: path_length(path),
        smoothed_length_m: smoothed_stats.map(|(l, _)| l),
        waypoints: path.len(),
        max_turn_deg,
        max_turn_smoothed_deg: smoothed_stats.map(|(_, (m, _))| m),
        sharp_turns,
        sharp_turns_smoothed: smoothed_stats.map(|(_, (_, n))| n),
    }
}
