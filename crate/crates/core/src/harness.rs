//! Seeded multi-trial experiments and their reports.
//!
//! Trial `i` of a scenario runs every algorithm with seed `base_seed + i` on
//! the same map, so algorithms are compared on paired seeds. Everything in a
//! report except the timing columns is a pure function of the scenario.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{plan_aco, plan_astar, voxelize, AcoParams, VoxelGrid};
use crate::drrt::{plan_drrt, DrrtParams};
use crate::env::{generate_city, CityMap, GenParams, Point3, DEFAULT_GOAL, DEFAULT_START};
use crate::error::{Error, Result};
use crate::metrics::{summarize, TrialRecord};
use crate::planner::{PlanRequest, PlanResult};
use crate::rrt::{plan_rrt, RrtParams};
use crate::smoothing::{smooth_path, DEFAULT_SAMPLES_PER_SPAN};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Algorithm {
    Rrt,
    Drrt,
    Astar,
    Aco,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [Algorithm::Rrt, Algorithm::Drrt, Algorithm::Astar, Algorithm::Aco];

    pub fn as_str(&self) -> &'static str {
        match self {
            Algorithm::Rrt => "rrt",
            Algorithm::Drrt => "drrt",
            Algorithm::Astar => "astar",
            Algorithm::Aco => "aco",
        }
    }

    fn needs_grid(&self) -> bool {
        matches!(self, Algorithm::Astar | Algorithm::Aco)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "rrt" => Algorithm::Rrt,
            "drrt" => Algorithm::Drrt,
            "astar" | "a*" => Algorithm::Astar,
            "aco" => Algorithm::Aco,
            _ => return Err(Error::UnknownAlgorithm(s.to_string())),
        })
    }
}

impl TryFrom<String> for Algorithm {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Algorithm> for String {
    fn from(a: Algorithm) -> String {
        a.as_str().to_string()
    }
}

/// Where a scenario's map comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MapSource {
    Generate {
        seed: u64,
        #[serde(default)]
        params: GenParams,
    },
    /// Path to a map JSON file, relative to the scenario file.
    File(PathBuf),
    Inline(CityMap),
}

impl MapSource {
    pub fn build(&self) -> Result<CityMap> {
        match self {
            MapSource::Generate { seed, params } => generate_city(*seed, params),
            MapSource::File(p) => CityMap::load(p),
            MapSource::Inline(m) => Ok(m.clone()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridParams {
    pub resolution: f64,
}

impl Default for GridParams {
    fn default() -> Self {
        Self { resolution: 5.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SmoothingParams {
    pub samples_per_span: usize,
}

impl Default for SmoothingParams {
    fn default() -> Self {
        Self {
            samples_per_span: DEFAULT_SAMPLES_PER_SPAN,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Scenario {
    pub name: String,
    pub map: MapSource,
    pub start: Point3,
    pub goal: Point3,
    pub goal_threshold: f64,
    pub max_failed_attempts: usize,
    pub trials: usize,
    pub base_seed: u64,
    pub algorithms: Vec<Algorithm>,
    pub rrt: RrtParams,
    pub drrt: DrrtParams,
    pub grid: GridParams,
    pub aco: AcoParams,
    pub smoothing: SmoothingParams,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            name: "urban".to_string(),
            map: MapSource::Generate {
                seed: 1,
                params: GenParams::default(),
            },
            start: DEFAULT_START,
            goal: DEFAULT_GOAL,
            goal_threshold: 5.0,
            max_failed_attempts: 20_000,
            trials: 30,
            base_seed: 0,
            algorithms: Algorithm::ALL.to_vec(),
            rrt: RrtParams::default(),
            drrt: DrrtParams::default(),
            grid: GridParams::default(),
            aco: AcoParams::default(),
            smoothing: SmoothingParams::default(),
        }
    }
}

impl Scenario {
    /// Loads a scenario file; a relative map file path is resolved against
    /// the scenario's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let s = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut sc: Scenario = serde_json::from_str(&s)?;
        if let MapSource::File(p) = &mut sc.map {
            if p.is_relative() {
                if let Some(dir) = path.parent() {
                    *p = dir.join(&*p);
                }
            }
        }
        Ok(sc)
    }

    pub fn request(&self) -> PlanRequest {
        PlanRequest {
            start: self.start,
            goal: self.goal,
            goal_threshold: self.goal_threshold,
            max_failed_attempts: self.max_failed_attempts,
        }
    }

    fn validate(&self, map: &CityMap) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::invalid("a scenario needs at least one trial"));
        }
        if self.algorithms.is_empty() {
            return Err(Error::invalid("a scenario needs at least one algorithm"));
        }
        self.request().validate(map)?;
        self.rrt.validate()?;
        self.drrt.validate()?;
        self.aco.validate()?;
        if self.smoothing.samples_per_span == 0 {
            return Err(Error::invalid("samples_per_span must be at least 1"));
        }
        Ok(())
    }
}

/// A map with everything the planners need precomputed.
pub struct PreparedScenario<'a> {
    pub scenario: &'a Scenario,
    pub map: CityMap,
    pub grid: Option<VoxelGrid>,
}

impl<'a> PreparedScenario<'a> {
    pub fn new(scenario: &'a Scenario) -> Result<Self> {
        let map = scenario.map.build()?;
        Self::with_map(scenario, map)
    }

    pub fn with_map(scenario: &'a Scenario, map: CityMap) -> Result<Self> {
        scenario.validate(&map)?;
        let grid = if scenario.algorithms.iter().any(Algorithm::needs_grid) {
            Some(voxelize(&map, scenario.grid.resolution)?)
        } else {
            None
        };
        Ok(Self { scenario, map, grid })
    }

    fn grid(&self) -> &VoxelGrid {
        self.grid.as_ref().expect("grid prepared for grid planners")
    }

    /// One planner run with its metrics. Smoothing is applied to dRRT only
    /// and its time is added to the planning time.
    pub fn run_trial(&self, algorithm: Algorithm, trial: usize) -> Result<(TrialRecord, PlanResult, Option<Vec<Point3>>)> {
        let sc = self.scenario;
        let seed = sc.base_seed.wrapping_add(trial as u64);
        let req = sc.request();
        let result = match algorithm {
            Algorithm::Rrt => plan_rrt(&self.map, &req, &sc.rrt, seed)?,
            Algorithm::Drrt => plan_drrt(&self.map, &req, &sc.drrt, seed)?,
            Algorithm::Astar => plan_astar(self.grid(), &req)?,
            Algorithm::Aco => plan_aco(self.grid(), &req, &sc.aco, seed)?,
        };

        let mut smoothing_s = None;
        let mut smoothed = None;
        if algorithm == Algorithm::Drrt && result.success {
            let t0 = Instant::now();
            let s = smooth_path(&result.path, sc.smoothing.samples_per_span, &self.map)?;
            smoothing_s = Some(t0.elapsed().as_secs_f64());
            smoothed = Some(s);
        }
        let metrics = result
            .success
            .then(|| summarize(&result.path, smoothed.as_deref()));
        let record = TrialRecord {
            algorithm: algorithm.to_string(),
            trial,
            seed,
            success: result.success,
            elapsed_s: result.elapsed_s + smoothing_s.unwrap_or(0.0),
            smoothing_s,
            explored_nodes: result.explored_nodes,
            metrics,
        };
        Ok((record, result, smoothed))
    }
}

/// Means over one algorithm's trials. Path metrics average successful
/// trials only; `t`, `m` and the success rate cover every trial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub algorithm: String,
    pub trials: usize,
    pub successes: usize,
    pub mean_t: f64,
    pub median_t: f64,
    pub mean_l: Option<f64>,
    pub mean_l_smoothed: Option<f64>,
    pub mean_w: Option<f64>,
    pub mean_m: f64,
    pub success_rate: f64,
    pub mean_beta: Option<f64>,
    pub mean_beta_smoothed: Option<f64>,
    pub mean_n: Option<f64>,
    pub mean_n_smoothed: Option<f64>,
}

fn mean_of(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

fn median_of(mut values: Vec<f64>) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    }
}

/// Aggregates records of a single algorithm. Panics on an empty slice.
pub fn aggregate(records: &[TrialRecord]) -> AggregateRow {
    assert!(!records.is_empty(), "aggregate needs at least one record");
    let ok: Vec<_> = records.iter().filter_map(|r| r.metrics.as_ref()).collect();
    let n = records.len() as f64;
    AggregateRow {
        algorithm: records[0].algorithm.clone(),
        trials: records.len(),
        successes: records.iter().filter(|r| r.success).count(),
        mean_t: records.iter().map(|r| r.elapsed_s).sum::<f64>() / n,
        median_t: median_of(records.iter().map(|r| r.elapsed_s).collect()),
        mean_l: mean_of(ok.iter().map(|m| m.length_m)),
        mean_l_smoothed: mean_of(ok.iter().filter_map(|m| m.smoothed_length_m)),
        mean_w: mean_of(ok.iter().map(|m| m.waypoints as f64)),
        mean_m: records.iter().map(|r| r.explored_nodes as f64).sum::<f64>() / n,
        success_rate: records.iter().filter(|r| r.success).count() as f64 / n,
        mean_beta: mean_of(ok.iter().map(|m| m.max_turn_deg)),
        mean_beta_smoothed: mean_of(ok.iter().filter_map(|m| m.max_turn_smoothed_deg)),
        mean_n: mean_of(ok.iter().map(|m| m.sharp_turns as f64)),
        mean_n_smoothed: mean_of(ok.iter().filter_map(|m| m.sharp_turns_smoothed.map(|v| v as f64))),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub scenario: String,
    pub map_seed: u64,
    pub base_seed: u64,
    pub trials: usize,
    pub rows: Vec<AggregateRow>,
    pub records: Vec<TrialRecord>,
}

/// One CSV line per algorithm, columns in table order.
#[derive(Serialize)]
struct CsvRow<'a> {
    algorithm: &'a str,
    t: f64,
    l: Option<f64>,
    #[serde(rename = "l'")]
    l_smoothed: Option<f64>,
    w: Option<f64>,
    m: f64,
    eta: f64,
    beta: Option<f64>,
    #[serde(rename = "beta'")]
    beta_smoothed: Option<f64>,
    n: Option<f64>,
    #[serde(rename = "n'")]
    n_smoothed: Option<f64>,
}

#[derive(Serialize)]
struct CsvTrial<'a> {
    algorithm: &'a str,
    trial: usize,
    seed: u64,
    success: bool,
    t: f64,
    m: usize,
    l: Option<f64>,
    #[serde(rename = "l'")]
    l_smoothed: Option<f64>,
    w: Option<usize>,
    beta: Option<f64>,
    #[serde(rename = "beta'")]
    beta_smoothed: Option<f64>,
    n: Option<usize>,
    #[serde(rename = "n'")]
    n_smoothed: Option<usize>,
}

fn csv_string<T: Serialize>(rows: impl IntoIterator<Item = T>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Error::invalid(format!("csv: {e}")))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::invalid(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

impl BenchReport {
    pub fn row(&self, algorithm: Algorithm) -> Option<&AggregateRow> {
        self.rows.iter().find(|r| r.algorithm == algorithm.as_str())
    }

    pub fn records_for(&self, algorithm: Algorithm) -> impl Iterator<Item = &TrialRecord> {
        self.records.iter().filter(move |r| r.algorithm == algorithm.as_str())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn to_csv(&self) -> Result<String> {
        csv_string(self.rows.iter().map(|r| CsvRow {
            algorithm: &r.algorithm,
            t: r.mean_t,
            l: r.mean_l,
            l_smoothed: r.mean_l_smoothed,
            w: r.mean_w,
            m: r.mean_m,
            eta: r.success_rate,
            beta: r.mean_beta,
            beta_smoothed: r.mean_beta_smoothed,
            n: r.mean_n,
            n_smoothed: r.mean_n_smoothed,
        }))
    }

    /// Per-trial rows for external plotting.
    pub fn trials_csv(&self) -> Result<String> {
        csv_string(self.records.iter().map(|r| {
            let m = r.metrics.as_ref();
            CsvTrial {
                algorithm: &r.algorithm,
                trial: r.trial,
                seed: r.seed,
                success: r.success,
                t: r.elapsed_s,
                m: r.explored_nodes,
                l: m.map(|m| m.length_m),
                l_smoothed: m.and_then(|m| m.smoothed_length_m),
                w: m.map(|m| m.waypoints),
                beta: m.map(|m| m.max_turn_deg),
                beta_smoothed: m.and_then(|m| m.max_turn_smoothed_deg),
                n: m.map(|m| m.sharp_turns),
                n_smoothed: m.and_then(|m| m.sharp_turns_smoothed),
            }
        }))
    }

    /// Copy with every wall-clock field zeroed.
    pub fn without_timing(&self) -> BenchReport {
        let mut r = self.clone();
        for row in &mut r.rows {
            row.mean_t = 0.0;
            row.median_t = 0.0;
        }
        for rec in &mut r.records {
            rec.elapsed_s = 0.0;
            rec.smoothing_s = rec.smoothing_s.map(|_| 0.0);
        }
        r
    }
}

pub fn run_benchmark(scenario: &Scenario) -> Result<BenchReport> {
    run_benchmark_with_threads(scenario, 1)
}

/// Runs the scenario with trials spread over `threads` workers. The output
/// apart from timing does not depend on `threads`.
pub fn run_benchmark_with_threads(scenario: &Scenario, threads: usize) -> Result<BenchReport> {
    let prepared = PreparedScenario::new(scenario)?;
    run_prepared(&prepared, threads)
}

pub fn run_prepared(prepared: &PreparedScenario<'_>, threads: usize) -> Result<BenchReport> {
    let sc = prepared.scenario;
    let trial = |i: usize| -> Result<Vec<TrialRecord>> {
        sc.algorithms
            .iter()
            .map(|&a| prepared.run_trial(a, i).map(|(rec, _, _)| rec))
            .collect()
    };
    let per_trial: Vec<Vec<TrialRecord>> = if threads <= 1 {
        (0..sc.trials).map(trial).collect::<Result<_>>()?
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
        pool.install(|| (0..sc.trials).into_par_iter().map(trial).collect::<Result<_>>())?
    };

    // records grouped by algorithm, then by trial
    let mut records = Vec::with_capacity(sc.trials * sc.algorithms.len());
    for (k, _) in sc.algorithms.iter().enumerate() {
        records.extend(per_trial.iter().map(|t| t[k].clone()));
    }
    let rows = records
        .chunks(sc.trials)
        .map(aggregate)
        .collect();
    Ok(BenchReport {
        scenario: sc.name.clone(),
        map_seed: prepared.map.seed,
        base_seed: sc.base_seed,
        trials: sc.trials,
        rows,
        records,
    })
}
