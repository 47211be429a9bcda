//! Shared planner plumbing: the search tree and its exact nearest-neighbour
//! index, steering, path extraction and the request/result contracts.

use std::fs;
use std::path::Path;
use std::time::Duration;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::env::{Aabb, CityMap, Point3};
use crate::error::{Error, Result};

/// The single generator every planner run draws from.
pub type PlanRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> PlanRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform point in `bounds`, three draws in x, y, z order.
pub fn sample_uniform(bounds: &Aabb, rng: &mut PlanRng) -> Point3 {
    let e = bounds.extent();
    Point3::new(
        bounds.min.x + rng.gen::<f64>() * e.x,
        bounds.min.y + rng.gen::<f64>() * e.y,
        bounds.min.z + rng.gen::<f64>() * e.z,
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeNode {
    pub position: Point3,
    pub parent: Option<usize>,
}

/// A rooted tree grown by RRT-style planners. Node 0 is the root and every
/// parent index is smaller than its child's index.
///
/// Positions are mirrored into a [`KdForest`] so that
/// [`SearchTree::nearest`] stays exact without a linear scan.
#[derive(Clone, Debug)]
pub struct SearchTree {
    nodes: Vec<TreeNode>,
    index: KdForest,
    retired: Vec<bool>,
    live: usize,
}

impl SearchTree {
    pub fn new(root: Point3) -> Self {
        let mut index = KdForest::default();
        index.insert(root, 0);
        Self {
            nodes: vec![TreeNode {
                position: root,
                parent: None,
            }],
            index,
            retired: vec![false],
            live: 1,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn position(&self, i: usize) -> Point3 {
        self.nodes[i].position
    }

    pub fn parent(&self, i: usize) -> Option<usize> {
        self.nodes[i].parent
    }

    /// Appends a node and returns its index.
    ///
    /// Panics if `parent` does not exist yet.
    pub fn push(&mut self, position: Point3, parent: usize) -> usize {
        assert!(parent < self.nodes.len(), "parent {parent} does not exist");
        let idx = self.nodes.len();
        self.nodes.push(TreeNode {
            position,
            parent: Some(parent),
        });
        self.index.insert(position, idx as u32);
        self.retired.push(false);
        self.live += 1;
        idx
    }

    /// Index of the node closest to `p`; ties go to the lowest index.
    /// Retired nodes are still candidates here.
    pub fn nearest(&self, p: Point3) -> usize {
        self.index.nearest(p).expect("tree always has a root").1 as usize
    }

    /// Excludes `i` from [`SearchTree::nearest_live`]. The node stays in the
    /// tree and keeps its children.
    pub fn retire(&mut self, i: usize) {
        if !std::mem::replace(&mut self.retired[i], true) {
            self.live -= 1;
        }
    }

    pub fn is_retired(&self, i: usize) -> bool {
        self.retired[i]
    }

    /// Like [`SearchTree::nearest`] but skipping retired nodes.
    pub fn nearest_live(&self, p: Point3) -> Option<usize> {
        if self.live == self.nodes.len() {
            return Some(self.nearest(p));
        }
        if self.live == 0 {
            return None;
        }
        self.index
            .nearest_where(p, |id| !self.retired[id as usize])
            .map(|(_, id)| id as usize)
    }

    /// Squared distance from `p` to the closest node.
    pub fn nearest_distance_squared(&self, p: Point3) -> f64 {
        self.index.nearest(p).expect("tree always has a root").0
    }

    /// Root-to-`leaf` positions.
    pub fn path_to(&self, leaf: usize) -> Vec<Point3> {
        let mut path = Vec::new();
        let mut cur = Some(leaf);
        while let Some(i) = cur {
            path.push(self.nodes[i].position);
            cur = self.nodes[i].parent;
        }
        path.reverse();
        path
    }

    pub fn depth(&self, node: usize) -> usize {
        let mut d = 0;
        let mut cur = self.nodes[node].parent;
        while let Some(i) = cur {
            d += 1;
            cur = self.nodes[i].parent;
        }
        d
    }
}

/// Exact incremental nearest-neighbour index: a binary-counter family of
/// balanced static kd-trees whose sizes are distinct powers of two.
/// Inserting merges equal-sized trees, so every point is rebuilt at most
/// `log2(n)` times and queries visit `O(log n)` trees.
#[derive(Clone, Debug, Default)]
pub struct KdForest {
    trees: Vec<Vec<(Point3, u32)>>,
}

impl KdForest {
    pub fn len(&self) -> usize {
        self.trees.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.trees.is_empty()
    }

    pub fn insert(&mut self, p: Point3, id: u32) {
        let mut carry = vec![(p, id)];
        while self.trees.last().is_some_and(|t| t.len() == carry.len()) {
            let mut t = self.trees.pop().expect("checked above");
            t.append(&mut carry);
            carry = t;
        }
        if carry.len() > 1 {
            build_kd(&mut carry, 0);
        }
        self.trees.push(carry);
    }

    /// `(squared distance, id)` of the closest point, lowest id on ties.
    pub fn nearest(&self, p: Point3) -> Option<(f64, u32)> {
        self.nearest_where(p, |_| true)
    }

    /// Closest point among those whose id passes `keep`.
    pub fn nearest_where(&self, p: Point3, keep: impl Fn(u32) -> bool) -> Option<(f64, u32)> {
        let mut best = (f64::INFINITY, u32::MAX);
        for t in &self.trees {
            search_kd(t, 0, p, &keep, &mut best);
        }
        (best.1 != u32::MAX).then_some(best)
    }
}

fn build_kd(items: &mut [(Point3, u32)], depth: usize) {
    if items.len() <= 1 {
        return;
    }
    let axis = depth % 3;
    let mid = items.len() / 2;
    items.select_nth_unstable_by(mid, |a, b| a.0.axis(axis).total_cmp(&b.0.axis(axis)));
    let (left, rest) = items.split_at_mut(mid);
    build_kd(left, depth + 1);
    build_kd(&mut rest[1..], depth + 1);
}

fn search_kd(
    items: &[(Point3, u32)],
    depth: usize,
    p: Point3,
    keep: &impl Fn(u32) -> bool,
    best: &mut (f64, u32),
) {
    if items.is_empty() {
        return;
    }
    let mid = items.len() / 2;
    let (q, id) = items[mid];
    let d2 = q.distance_squared(p);
    if (d2 < best.0 || (d2 == best.0 && id < best.1)) && keep(id) {
        *best = (d2, id);
    }
    let axis = depth % 3;
    let diff = p.axis(axis) - q.axis(axis);
    let (left, right) = (&items[..mid], &items[mid + 1..]);
    let (near, far) = if diff < 0.0 { (left, right) } else { (right, left) };
    search_kd(near, depth + 1, p, keep, best);
    // `<=` keeps equal-distance candidates with a lower id reachable
    if diff * diff <= best.0 {
        search_kd(far, depth + 1, p, keep, best);
    }
}

/// Exact nearest node. Panics on an empty tree.
pub fn nearest_node(tree: &SearchTree, p: Point3) -> usize {
    assert!(!tree.is_empty(), "nearest_node on an empty tree");
    tree.nearest(p)
}

pub fn extract_path(tree: &SearchTree, leaf: usize) -> Vec<Point3> {
    tree.path_to(leaf)
}

/// Moves from `from` toward `to` by at most `step`.
pub fn steer(from: Point3, to: Point3, step: f64) -> Point3 {
    debug_assert!(step > 0.0);
    let d = to - from;
    let dist = d.norm();
    if dist <= step {
        to
    } else {
        from + d * (step / dist)
    }
}

/// Start, goal and termination criteria shared by every planner.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanRequest {
    pub start: Point3,
    pub goal: Point3,
    pub goal_threshold: f64,
    pub max_failed_attempts: usize,
}

impl PlanRequest {
    pub fn new(start: Point3, goal: Point3) -> Self {
        Self {
            start,
            goal,
            goal_threshold: 5.0,
            max_failed_attempts: 20_000,
        }
    }

    pub fn validate(&self, map: &CityMap) -> Result<()> {
        if !(self.goal_threshold > 0.0) {
            return Err(Error::invalid("goal_threshold must be positive"));
        }
        if self.max_failed_attempts == 0 {
            return Err(Error::invalid("max_failed_attempts must be positive"));
        }
        if !map.point_free(self.start) {
            return Err(Error::BlockedEndpoint {
                what: "start",
                point: self.start,
            });
        }
        if !map.point_free(self.goal) {
            return Err(Error::BlockedEndpoint {
                what: "goal",
                point: self.goal,
            });
        }
        Ok(())
    }
}

/// Outcome of one planning call.
///
/// `explored_nodes` counts extension attempts for the sampling planners and
/// visited cells for the grid planners. `failed_attempts` is whatever the
/// planner counts against its failure budget.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PlanResult {
    pub success: bool,
    pub path: Vec<Point3>,
    pub explored_nodes: usize,
    pub failed_attempts: usize,
    pub elapsed_s: f64,
}

impl PlanResult {
    pub fn failure(explored_nodes: usize, failed_attempts: usize, elapsed: Duration) -> Self {
        Self {
            success: false,
            path: Vec::new(),
            explored_nodes,
            failed_attempts,
            elapsed_s: elapsed.as_secs_f64(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }
}

/// A bare waypoint list on disk, either `[[x,y,z],...]` or an object with a
/// `path` field (as written by [`PlanResult::save`]).
pub fn load_path(path: impl AsRef<Path>) -> Result<Vec<Point3>> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum PathFile {
        Bare(Vec<Point3>),
        Wrapped { path: Vec<Point3> },
    }
    let path = path.as_ref();
    let s = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(match serde_json::from_str::<PathFile>(&s)? {
        PathFile::Bare(p) | PathFile::Wrapped { path: p } => p,
    })
}
