use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use fcurp_core::batch::{batch_run, BatchConfig, SweepGrid};
use fcurp_core::offline::{plan_mission, validate_plan, MissionPlan};
use fcurp_core::scenario::{
    emit_scenario, parse_scenario, parse_scenario_with_seed, ScenarioGenerator,
};
use fcurp_core::sim::{run_with_plan, write_trace, SimConfig, TraceRecord};
use fcurp_core::{CostModel, Scenario, VehicleParams, WorldBounds};

#[derive(Parser)]
#[command(
    name = "fcurp",
    version,
    about = "Fuel-constrained UAV routing with a mobile refueling UGV"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Offline plan only; prints the plan document.
    Plan {
        #[command(flatten)]
        input: ScenarioArgs,
        /// Write the plan here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Plan and run the closed-loop simulation.
    Simulate {
        #[command(flatten)]
        input: ScenarioArgs,
        /// Use this plan document instead of planning.
        #[arg(long)]
        plan: Option<PathBuf>,
        #[command(flatten)]
        sim: SimArgs,
        #[arg(long)]
        trace_out: Option<PathBuf>,
        /// Write the metrics summary here instead of stdout.
        #[arg(long)]
        metrics_out: Option<PathBuf>,
    },
    /// Generate a random scenario document.
    Generate {
        #[arg(long, short = 'n')]
        targets: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Side of the square world, meters.
        #[arg(long, default_value_t = 50.0)]
        world: f64,
        #[command(flatten)]
        vehicle: VehicleArgs,
        /// Upper bound of the uniform processing-cost distribution.
        #[arg(long, default_value_t = 25.0)]
        tau_max: f64,
        #[arg(long, default_value_t = 0.5)]
        min_separation: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep generated scenarios over a parameter grid.
    Batch {
        /// `target_count=10,50`, `fuel_capacity=50,200` or `speed_ratio=0.2,1.0`; repeatable.
        #[arg(long, value_name = "KEY=V1,V2,...")]
        sweep: Vec<String>,
        /// Comma-separated seeds.
        #[arg(long, default_value = "1")]
        seeds: String,
        #[command(flatten)]
        sim: SimArgs,
        /// Directory for runs.csv, aggregate.csv (and traces with --keep-traces).
        #[arg(long, default_value = "batch-out")]
        out_dir: PathBuf,
        #[arg(long)]
        keep_traces: bool,
    },
    /// Check a scenario and its plan (computed, or given with --plan).
    Validate {
        #[command(flatten)]
        input: ScenarioArgs,
        #[arg(long)]
        plan: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ScenarioArgs {
    #[arg(long)]
    scenario: PathBuf,
    /// Override the cost model's seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct SimArgs {
    #[arg(long, default_value_t = 0.05)]
    dt: f64,
    #[arg(long, default_value_t = 0.1)]
    eps_pos: f64,
    #[arg(long, default_value_t = 0.0)]
    refuel_duration: f64,
    /// Hard mission time limit, seconds (default: 10x the offline flight time).
    #[arg(long)]
    max_time: Option<f64>,
}

#[derive(Args)]
struct VehicleArgs {
    #[arg(long, default_value_t = 2.0)]
    v_uav: f64,
    #[arg(long, default_value_t = 1.0)]
    v_ugv: f64,
    #[arg(long, default_value_t = 50.0)]
    fuel_capacity: f64,
    #[arg(long, default_value_t = 1.0)]
    fuel_per_meter: f64,
}

impl SimArgs {
    fn config(&self) -> Result<SimConfig> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            bail!("--dt must be positive, got {}", self.dt);
        }
        Ok(SimConfig {
            dt: self.dt,
            eps_pos: self.eps_pos,
            refuel_duration: self.refuel_duration,
            max_mission_time: self.max_time,
            ..Default::default()
        })
    }
}

fn load_scenario(args: &ScenarioArgs) -> Result<Scenario> {
    let text = fs::read_to_string(&args.scenario)
        .with_context(|| format!("reading {}", args.scenario.display()))?;
    let s = match args.seed {
        Some(seed) => parse_scenario_with_seed(&text, seed),
        None => parse_scenario(&text),
    };
    s.with_context(|| format!("in {}", args.scenario.display()))
}

fn load_plan(path: &Path) -> Result<MissionPlan> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    MissionPlan::from_json(&text).map_err(|e| anyhow!("{}: {e}", path.display()))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn write_trace_file(path: &Path, trace: &[TraceRecord]) -> Result<()> {
    let f = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = io::BufWriter::new(f);
    write_trace(&mut w, trace)?;
    w.flush()?;
    Ok(())
}

fn parse_sweep(specs: &[String]) -> Result<SweepGrid> {
    let mut grid = SweepGrid::default();
    for spec in specs {
        let (key, vals) = spec
            .split_once('=')
            .ok_or_else(|| anyhow!("--sweep expects KEY=V1,V2, got `{spec}`"))?;
        let nums: Vec<&str> = vals
            .split(',')
            .map(str::trim)
            .filter(|v| !v.is_empty())
            .collect();
        match key.trim() {
            "target_count" | "n" => {
                grid.target_count = nums
                    .iter()
                    .map(|v| {
                        v.parse()
                            .with_context(|| format!("target_count value `{v}`"))
                    })
                    .collect::<Result<_>>()?
            }
            "fuel_capacity" | "U" => {
                grid.fuel_capacity = nums
                    .iter()
                    .map(|v| {
                        v.parse()
                            .with_context(|| format!("fuel_capacity value `{v}`"))
                    })
                    .collect::<Result<_>>()?
            }
            "speed_ratio" | "ratio" => {
                grid.speed_ratio = nums
                    .iter()
                    .map(|v| {
                        v.parse()
                            .with_context(|| format!("speed_ratio value `{v}`"))
                    })
                    .collect::<Result<_>>()?
            }
            other => {
                bail!("unknown sweep key `{other}` (target_count, fuel_capacity, speed_ratio)")
            }
        }
    }
    Ok(grid)
}

fn cmd_simulate(
    input: &ScenarioArgs,
    plan: Option<&Path>,
    sim: &SimArgs,
    trace_out: Option<&Path>,
    metrics_out: Option<&Path>,
) -> Result<ExitCode> {
    let scenario = load_scenario(input)?;
    let plan = match plan {
        Some(p) => load_plan(p)?,
        None => plan_mission(&scenario)?,
    };
    let cfg = sim.config()?;
    let (trace, metrics, failure) = match run_with_plan(&scenario, &plan, &cfg) {
        Ok(r) => (r.trace, r.metrics, None),
        Err(f) => (f.trace, f.metrics, Some(f.error)),
    };
    if let Some(p) = trace_out {
        write_trace_file(p, &trace)?;
    }
    emit(metrics_out, &metrics.to_summary())?;
    match failure {
        None => Ok(ExitCode::SUCCESS),
        Some(e) => {
            eprintln!("mission failed: {e}");
            Ok(ExitCode::from(2))
        }
    }
}

fn cmd_validate(input: &ScenarioArgs, plan: Option<&Path>) -> Result<ExitCode> {
    let scenario = load_scenario(input)?;
    let plan = match plan {
        Some(p) => load_plan(p)?,
        None => plan_mission(&scenario)?,
    };
    let report = validate_plan(&plan, &scenario);
    for v in &report.violations {
        println!("{}", serde_json::to_string(v)?);
    }
    if report.is_valid() {
        eprintln!(
            "ok: {} segments, {:.3} m",
            plan.segments.len(),
            plan.total_length()
        );
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("{} violation(s)", report.violations.len());
        Ok(ExitCode::FAILURE)
    }
}

fn cmd_batch(
    sweep: &[String],
    seeds: &str,
    sim: &SimArgs,
    out_dir: &Path,
    keep_traces: bool,
) -> Result<()> {
    let grid = parse_sweep(sweep)?;
    let seeds = seeds
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<u64>().with_context(|| format!("seed `{s}`")))
        .collect::<Result<Vec<_>>>()?;
    let cfg = BatchConfig {
        grid,
        seeds,
        sim: sim.config()?,
        keep_traces,
        ..Default::default()
    };
    let report = batch_run(&cfg)?;
    fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    fs::write(out_dir.join("runs.csv"), report.runs_csv())?;
    fs::write(out_dir.join("aggregate.csv"), report.aggregate_csv())?;
    if keep_traces {
        for r in &report.runs {
            if let Some(trace) = &r.trace {
                let name = format!(
                    "trace_n{}_u{}_r{}_s{}.jsonl",
                    r.cell.target_count, r.cell.fuel_capacity, r.cell.speed_ratio, r.seed
                );
                write_trace_file(&out_dir.join(name), trace)?;
            }
        }
    }
    let failed = report.runs.iter().filter(|r| !r.ok()).count();
    eprintln!(
        "{} runs over {} cells, {failed} failed; wrote {}",
        report.runs.len(),
        report.aggregates.len(),
        out_dir.display()
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Plan { input, out } => load_scenario(input)
            .and_then(|s| Ok(plan_mission(&s)?))
            .and_then(|p| emit(out.as_deref(), &(p.to_json() + "\n")))
            .map(|_| ExitCode::SUCCESS),
        Command::Simulate {
            input,
            plan,
            sim,
            trace_out,
            metrics_out,
        } => cmd_simulate(
            input,
            plan.as_deref(),
            sim,
            trace_out.as_deref(),
            metrics_out.as_deref(),
        ),
        Command::Generate {
            targets,
            seed,
            world,
            vehicle,
            tau_max,
            min_separation,
            out,
        } => {
            let gen = ScenarioGenerator {
                bounds: WorldBounds::square(*world),
                params: VehicleParams {
                    v_uav: vehicle.v_uav,
                    v_ugv: vehicle.v_ugv,
                    fuel_capacity: vehicle.fuel_capacity,
                    fuel_per_meter: vehicle.fuel_per_meter,
                    r_max: None,
                },
                cost_model: CostModel::Uniform {
                    lo: 0.0,
                    hi: *tau_max,
                    seed: 0,
                },
                min_separation: *min_separation,
                ..Default::default()
            };
            gen.generate(*targets, *seed)
                .map_err(anyhow::Error::from)
                .and_then(|s| emit(out.as_deref(), &emit_scenario(&s)))
                .map(|_| ExitCode::SUCCESS)
        }
        Command::Batch {
            sweep,
            seeds,
            sim,
            out_dir,
            keep_traces,
        } => cmd_batch(sweep, seeds, sim, out_dir, *keep_traces).map(|_| ExitCode::SUCCESS),
        Command::Validate { input, plan } => cmd_validate(input, plan.as_deref()),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
