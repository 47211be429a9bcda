use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use uavplan_core::harness::run_benchmark_with_threads;
use uavplan_core::planner::load_path;
use uavplan_core::smoothing::DEFAULT_SAMPLES_PER_SPAN;
use uavplan_core::*;

#[derive(Parser)]
#[command(name = "uavplan", version, about = "3D UAV path planning over urban maps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Plan a single path and write it as JSON.
    Plan(PlanArgs),
    /// Run a benchmark scenario and write JSON and CSV reports.
    Bench(BenchArgs),
    /// Generate a random city map.
    Genmap(GenmapArgs),
    /// Print length and turn statistics of a path file.
    Metrics(MetricsArgs),
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct MapArg {
    /// Map JSON file.
    #[arg(long)]
    map: Option<PathBuf>,
    /// Generate the map from this seed instead.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct PlanArgs {
    #[arg(long, value_parser = parse_algorithm)]
    algo: Algorithm,
    #[command(flatten)]
    map: MapArg,
    /// Buildings in a generated map.
    #[arg(long, default_value_t = 40)]
    count: usize,
    #[arg(long, value_parser = parse_point, default_value = "10,10,1")]
    start: Point3,
    #[arg(long, value_parser = parse_point, default_value = "470,420,50")]
    goal: Point3,
    /// Planner seed (the sampling planners and ACO).
    #[arg(long, default_value_t = 0)]
    rng_seed: u64,
    /// Voxel size for A* and ACO, meters.
    #[arg(long, default_value_t = 5.0)]
    resolution: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    scenario: PathBuf,
    /// Report path. The JSON goes here; `<stem>.csv` and `<stem>_trials.csv`
    /// are written next to it.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 1)]
    threads: usize,
}

#[derive(Args)]
struct GenmapArgs {
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 40)]
    count: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct MetricsArgs {
    #[arg(long)]
    path: PathBuf,
}

fn parse_point(s: &str) -> Result<Point3, String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| format!("bad coordinate in {s:?}: {e}"))?;
    match parts[..] {
        [x, y, z] if parts.iter().all(|v| v.is_finite()) => Ok(Point3::new(x, y, z)),
        _ => Err(format!("expected x,y,z, got {s:?}")),
    }
}

fn parse_algorithm(s: &str) -> Result<Algorithm, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// What `plan` writes. The `path` field keeps it readable by `metrics`.
#[derive(serde::Serialize)]
struct PlanFile<'a> {
    algorithm: Algorithm,
    map_seed: u64,
    rng_seed: u64,
    #[serde(flatten)]
    result: &'a PlanResult,
    #[serde(skip_serializing_if = "Option::is_none")]
    smoothed_path: Option<Vec<Point3>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    metrics: Option<PathMetrics>,
}

fn plan(args: PlanArgs) -> Result<()> {
    let map = match (&args.map.map, args.map.seed) {
        (Some(file), _) => CityMap::load(file)?,
        (None, Some(seed)) => generate_city(seed, &GenParams { count: args.count, ..Default::default() })?,
        (None, None) => unreachable!("clap requires one map source"),
    };
    let req = PlanRequest::new(args.start, args.goal);
    req.validate(&map)?;
    let seed = args.rng_seed;
    let result = match args.algo {
        Algorithm::Rrt => plan_rrt(&map, &req, &RrtParams::default(), seed)?,
        Algorithm::Drrt => plan_drrt(&map, &req, &DrrtParams::default(), seed)?,
        Algorithm::Astar | Algorithm::Aco => {
            let grid = voxelize(&map, args.resolution)?;
            if args.algo == Algorithm::Astar {
                plan_astar(&grid, &req)?
            } else {
                plan_aco(&grid, &req, &AcoParams::default(), seed)?
            }
        }
    };
    let smoothed_path = match (args.algo, result.success) {
        (Algorithm::Drrt, true) => Some(smooth_path(&result.path, DEFAULT_SAMPLES_PER_SPAN, &map)?),
        _ => None,
    };
    let metrics = result.success.then(|| summarize(&result.path, smoothed_path.as_deref()));
    let file = PlanFile {
        algorithm: args.algo,
        map_seed: map.seed,
        rng_seed: seed,
        result: &result,
        smoothed_path,
        metrics,
    };
    fs::write(&args.out, serde_json::to_string_pretty(&file)?)
        .with_context(|| format!("writing {}", args.out.display()))?;
    if result.success {
        println!(
            "{}: {} waypoints, {:.2} m, {} explored, {:.4} s",
            args.algo,
            result.path.len(),
            path_length(&result.path),
            result.explored_nodes,
            result.elapsed_s
        );
    } else {
        println!("{}: no path after {} attempts", args.algo, result.explored_nodes);
    }
    Ok(())
}

fn sibling(out: &Path, suffix: &str) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}{suffix}"))
}

fn bench(args: BenchArgs) -> Result<()> {
    if args.threads == 0 {
        bail!("--threads must be at least 1");
    }
    let scenario = Scenario::load(&args.scenario)?;
    let t0 = Instant::now();
    let report = run_benchmark_with_threads(&scenario, args.threads)?;
    let csv_path = sibling(&args.out, ".csv");
    let trials_path = sibling(&args.out, "_trials.csv");
    fs::write(&args.out, report.to_json()?).with_context(|| format!("writing {}", args.out.display()))?;
    fs::write(&csv_path, report.to_csv()?).with_context(|| format!("writing {}", csv_path.display()))?;
    fs::write(&trials_path, report.trials_csv()?).with_context(|| format!("writing {}", trials_path.display()))?;

    println!("{} trials in {:.1} s", report.trials, t0.elapsed().as_secs_f64());
    for r in &report.rows {
        println!(
            "{:<6} eta={:>5.1}% t_mean={:.4}s l={}",
            r.algorithm,
            100.0 * r.success_rate,
            r.mean_t,
            r.mean_l.map_or("-".to_string(), |l| format!("{l:.2}"))
        );
    }
    Ok(())
}

fn genmap(args: GenmapArgs) -> Result<()> {
    let map = generate_city(args.seed, &GenParams { count: args.count, ..Default::default() })?;
    map.save(&args.out)?;
    println!("{} buildings written to {}", map.buildings.len(), args.out.display());
    Ok(())
}

fn metrics(args: MetricsArgs) -> Result<()> {
    let path = load_path(&args.path)?;
    if path.is_empty() {
        bail!("{} holds no waypoints", args.path.display());
    }
    println!("{}", serde_json::to_string_pretty(&summarize(&path, None))?);
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Plan(a) => plan(a),
        Command::Bench(a) => bench(a),
        Command::Genmap(a) => genmap(a),
        Command::Metrics(a) => metrics(a),
    }
}
