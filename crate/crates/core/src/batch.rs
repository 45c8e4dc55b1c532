//! Parameter sweeps over generated scenarios.

use std::fmt::Write as _;

use rayon::prelude::*;
use thiserror::Error;

use crate::model::VehicleParams;
use crate::scenario::ScenarioGenerator;
use crate::sim::{run, Metrics, SimConfig, TraceRecord};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BatchError {
    #[error("sweep axis `{0}` is empty")]
    EmptyAxis(&'static str),
    #[error("no seeds given")]
    NoSeeds,
    #[error("sweep value {value} for `{axis}` must be positive and finite")]
    BadValue { axis: &'static str, value: f64 },
}

#[derive(Clone, Debug)]
pub struct SweepGrid {
    pub target_count: Vec<usize>,
    pub fuel_capacity: Vec<f64>,
    /// UGV speed over UAV speed; the UAV keeps the generator's speed.
    pub speed_ratio: Vec<f64>,
}

impl Default for SweepGrid {
    fn default() -> Self {
        Self {
            target_count: vec![10, 50, 100],
            fuel_capacity: vec![50.0, 200.0, 500.0],
            speed_ratio: vec![0.2, 0.5, 1.0],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct Cell {
    pub target_count: usize,
    pub fuel_capacity: f64,
    pub speed_ratio: f64,
}

impl SweepGrid {
    pub fn validate(&self) -> Result<(), BatchError> {
        if self.target_count.is_empty() {
            return Err(BatchError::EmptyAxis("target_count"));
        }
        if self.fuel_capacity.is_empty() {
            return Err(BatchError::EmptyAxis("fuel_capacity"));
        }
        if self.speed_ratio.is_empty() {
            return Err(BatchError::EmptyAxis("speed_ratio"));
        }
        for &n in &self.target_count {
            if n == 0 {
                return Err(BatchError::BadValue {
                    axis: "target_count",
                    value: 0.0,
                });
            }
        }
        for (axis, vals) in [
            ("fuel_capacity", &self.fuel_capacity),
            ("speed_ratio", &self.speed_ratio),
        ] {
            if let Some(&value) = vals.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
                return Err(BatchError::BadValue { axis, value });
            }
        }
        Ok(())
    }

    /// Cells in sorted order.
    pub fn cells(&self) -> Vec<Cell> {
        let mut out = Vec::new();
        for &target_count in &self.target_count {
            for &fuel_capacity in &self.fuel_capacity {
                for &speed_ratio in &self.speed_ratio {
                    out.push(Cell {
                        target_count,
                        fuel_capacity,
                        speed_ratio,
                    });
                }
            }
        }
        out.sort_by(|a, b| a.partial_cmp(b).expect("finite cells"));
        out.dedup();
        out
    }
}

#[derive(Clone, Debug)]
pub struct BatchConfig {
    pub grid: SweepGrid,
    pub seeds: Vec<u64>,
    pub generator: ScenarioGenerator,
    pub sim: SimConfig,
    pub keep_traces: bool,
}

impl Default for BatchConfig {
    fn default() -> Self {
        Self {
            grid: SweepGrid::default(),
            seeds: vec![1],
            generator: ScenarioGenerator::default(),
            sim: SimConfig::default(),
            keep_traces: false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunRow {
    pub cell: Cell,
    pub seed: u64,
    pub metrics: Metrics,
    /// `None` for a completed mission.
    pub error: Option<String>,
    pub trace: Option<Vec<TraceRecord>>,
}

impl RunRow {
    pub fn ok(&self) -> bool {
        self.error.is_none()
    }
}

#[derive(Clone, Debug)]
pub struct CellAggregate {
    pub cell: Cell,
    pub runs: usize,
    pub failures: usize,
    /// `(metric, min, mean, max)` over completed runs, metrics alphabetical.
    pub stats: Vec<(String, f64, f64, f64)>,
}

#[derive(Clone, Debug)]
pub struct BatchReport {
    pub runs: Vec<RunRow>,
    pub aggregates: Vec<CellAggregate>,
}

fn run_cell(cfg: &BatchConfig, cell: Cell, seed: u64) -> RunRow {
    let base = cfg.generator.params;
    let params = VehicleParams {
        fuel_capacity: cell.fuel_capacity,
        v_ugv: base.v_uav * cell.speed_ratio,
        ..base
    };
    let generator = ScenarioGenerator {
        params,
        ..cfg.generator.clone()
    };
    let sim = SimConfig {
        keep_trace: cfg.keep_traces,
        ..cfg.sim.clone()
    };
    let scenario = match generator.generate(cell.target_count, seed) {
        Ok(s) => s,
        Err(e) => {
            return RunRow {
                cell,
                seed,
                metrics: Metrics::default(),
                error: Some(format!("generation: {e}")),
                trace: None,
            }
        }
    };
    match run(&scenario, &sim) {
        Ok(r) => RunRow {
            cell,
            seed,
            metrics: r.metrics,
            error: None,
            trace: cfg.keep_traces.then_some(r.trace),
        },
        Err(f) => RunRow {
            cell,
            seed,
            error: Some(f.error.to_string()),
            metrics: f.metrics,
            trace: cfg.keep_traces.then_some(f.trace),
        },
    }
}

/// Runs every cell and seed in parallel. Run failures are recorded, never raised.
pub fn batch_run(cfg: &BatchConfig) -> Result<BatchReport, BatchError> {
    cfg.grid.validate()?;
    if cfg.seeds.is_empty() {
        return Err(BatchError::NoSeeds);
    }
    let mut seeds = cfg.seeds.clone();
    seeds.sort_unstable();
    seeds.dedup();
    let jobs: Vec<(Cell, u64)> = cfg
        .grid
        .cells()
        .into_iter()
        .flat_map(|c| seeds.iter().map(move |&s| (c, s)))
        .collect();
    let runs: Vec<RunRow> = jobs
        .par_iter()
        .map(|&(cell, seed)| run_cell(cfg, cell, seed))
        .collect();
    let aggregates = aggregate(&runs);
    Ok(BatchReport { runs, aggregates })
}

fn aggregate(runs: &[RunRow]) -> Vec<CellAggregate> {
    let names = Metrics::field_names();
    let mut out: Vec<CellAggregate> = Vec::new();
    for group in runs.chunk_by(|a, b| a.cell == b.cell) {
        let ok: Vec<Vec<(String, f64)>> = group
            .iter()
            .filter(|r| r.ok())
            .map(|r| r.metrics.fields())
            .collect();
        let stats = names
            .iter()
            .enumerate()
            .map(|(i, name)| {
                if ok.is_empty() {
                    return (name.clone(), f64::NAN, f64::NAN, f64::NAN);
                }
                let vals = ok.iter().map(|f| f[i].1);
                let min = vals.clone().fold(f64::INFINITY, f64::min);
                let max = vals.clone().fold(f64::NEG_INFINITY, f64::max);
                let mean = vals.sum::<f64>() / ok.len() as f64;
                (name.clone(), min, mean, max)
            })
            .collect();
        out.push(CellAggregate {
            cell: group[0].cell,
            runs: group.len(),
            failures: group.len() - ok.len(),
            stats,
        });
    }
    out
}

const CELL_COLUMNS: &str = "target_count,fuel_capacity,speed_ratio";

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn num(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        format!("{v}")
    }
}

fn cell_prefix(c: &Cell) -> String {
    format!("{},{},{}", c.target_count, c.fuel_capacity, c.speed_ratio)
}

impl BatchReport {
    /// One row per run: cell, seed, status, metrics alphabetically, error text.
    pub fn runs_csv(&self) -> String {
        let mut s = format!("{CELL_COLUMNS},seed,status");
        for n in Metrics::field_names() {
            let _ = write!(s, ",{n}");
        }
        s.push_str(",error\n");
        for r in &self.runs {
            let _ = write!(
                s,
                "{},{},{}",
                cell_prefix(&r.cell),
                r.seed,
                if r.ok() { "ok" } else { "failed" }
            );
            for (_, v) in r.metrics.fields() {
                let _ = write!(s, ",{}", num(v));
            }
            let _ = writeln!(s, ",{}", csv_field(r.error.as_deref().unwrap_or("")));
        }
        s
    }

    /// One row per cell: cell, run counts, then `<metric>_max,_mean,_min` alphabetically.
    pub fn aggregate_csv(&self) -> String {
        let mut s = format!("{CELL_COLUMNS},failures,runs");
        for n in Metrics::field_names() {
            let _ = write!(s, ",{n}_max,{n}_mean,{n}_min");
        }
        s.push('\n');
        for a in &self.aggregates {
            let _ = write!(s, "{},{},{}", cell_prefix(&a.cell), a.failures, a.runs);
            for (_, min, mean, max) in &a.stats {
                let _ = write!(s, ",{},{},{}", num(*max), num(*mean), num(*min));
            }
            s.push('\n');
        }
        s
    }
}
