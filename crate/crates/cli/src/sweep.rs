//! Experiment grids: k seeded runs per (mission, robot count) cell,
//! aggregated into one metrics row per cell.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde::Deserialize;

use mtswarm_core::merkle::MerkleTree;
use mtswarm_core::metrics::{time_grid, MetricsReport};
use mtswarm_core::mission::{encode_mission, read_mission, MissionKind, MissionSpec};
use mtswarm_core::sim::{run_with_net, NetConfig, RunRecord};

/// Sweep plan file. Missions come from mission files, from built-in
/// generators via `mission_kind` + `n_values`, or both.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepPlan {
    #[serde(default)]
    pub mission_kind: Option<MissionKind>,
    #[serde(default)]
    pub n_values: Vec<usize>,
    #[serde(default)]
    pub mission_files: Vec<PathBuf>,
    pub robots: Vec<usize>,
    #[serde(default = "default_runs")]
    pub runs_per_cell: usize,
    #[serde(default)]
    pub seed_base: u64,
    /// Explicit per-cell seed list; overrides runs_per_cell and seed_base.
    #[serde(default)]
    pub seeds: Option<Vec<u64>>,
    #[serde(default)]
    pub net: NetConfig,
    /// Resolution of the success-probability curve, in seconds.
    #[serde(default = "default_ps_step")]
    pub ps_grid_step: f64,
}

impl SweepPlan {
    fn cell_seeds(&self) -> Vec<u64> {
        match &self.seeds {
            Some(seeds) => seeds.clone(),
            None => (0..self.runs_per_cell)
                .map(|j| self.seed_base + j as u64)
                .collect(),
        }
    }
}

fn default_runs() -> usize {
    100
}

fn default_ps_step() -> f64 {
    10.0
}

struct Cell {
    spec: MissionSpec,
    tree: MerkleTree,
    robots: usize,
}

pub fn cmd_sweep(
    plan_path: &Path,
    seeds_override: Option<usize>,
    out: Option<PathBuf>,
    runs_out: Option<PathBuf>,
) -> Result<()> {
    let mut reader = BufReader::new(
        File::open(plan_path).with_context(|| format!("opening {}", plan_path.display()))?,
    );
    let mut plan: SweepPlan = serde_json::from_reader(&mut reader)
        .with_context(|| format!("parsing sweep plan {}", plan_path.display()))?;
    if let Some(k) = seeds_override {
        plan.runs_per_cell = k;
        plan.seeds = None;
    }
    if plan.cell_seeds().is_empty() {
        bail!("the plan yields no seeds per cell");
    }
    if plan.robots.is_empty() {
        bail!("the plan lists no robot counts");
    }

    let cells = build_cells(&plan)?;
    let reports = run_cells(&plan, &cells, runs_out.as_deref())?;

    let mut csv = String::from(MetricsReport::csv_header());
    csv.push('\n');
    for report in &reports {
        csv.push_str(&report.csv_row());
        csv.push('\n');
        println!("{}", report.summary_line());
    }
    if let Some(path) = out {
        std::fs::write(&path, csv).with_context(|| format!("writing {}", path.display()))?;
        eprintln!("wrote {} metric rows to {}", reports.len(), path.display());
    } else {
        print!("{csv}");
    }
    Ok(())
}

fn build_cells(plan: &SweepPlan) -> Result<Vec<Cell>> {
    let mut missions = Vec::new();
    for &n in &plan.n_values {
        let spec = match plan.mission_kind {
            Some(MissionKind::Foraging) | None => {
                if !(1..=8).contains(&n) {
                    bail!("built-in foraging missions support 1..=8 operations, got {n}");
                }
                MissionSpec::foraging(n)
            }
            Some(MissionKind::Maze) => {
                let spec = MissionSpec::maze_default();
                if spec.n() != n {
                    bail!(
                        "the built-in maze has {} operations; use mission_files for other sizes",
                        spec.n()
                    );
                }
                spec
            }
        };
        missions.push(spec);
    }
    for path in &plan.mission_files {
        let mut reader = BufReader::new(
            File::open(path).with_context(|| format!("opening {}", path.display()))?,
        );
        missions
            .push(read_mission(&mut reader).with_context(|| format!("reading {}", path.display()))?);
    }
    if missions.is_empty() {
        bail!("the plan names no missions (n_values and mission_files are both empty)");
    }

    let mut cells = Vec::new();
    for spec in missions {
        let (tree, _) = encode_mission(&spec)?;
        for &robots in &plan.robots {
            cells.push(Cell {
                spec: spec.clone(),
                tree: tree.clone(),
                robots,
            });
        }
    }
    Ok(cells)
}

fn run_cells(
    plan: &SweepPlan,
    cells: &[Cell],
    runs_out: Option<&Path>,
) -> Result<Vec<MetricsReport>> {
    let seeds = plan.cell_seeds();

    // Runs are independent; parallelize freely but keep plan order in the
    // output.
    let all_records: Vec<Vec<RunRecord>> = cells
        .par_iter()
        .map(|cell| {
            seeds
                .par_iter()
                .map(|&seed| {
                    run_with_net(&cell.spec, &cell.tree, cell.robots, seed, plan.net)
                        .expect("validated cell")
                })
                .collect()
        })
        .collect();

    if let Some(path) = runs_out {
        let mut w = BufWriter::new(
            File::create(path).with_context(|| format!("creating {}", path.display()))?,
        );
        writeln!(w, "{}", RunRecord::csv_header())?;
        for records in &all_records {
            for record in records {
                writeln!(w, "{}", record.csv_row())?;
            }
        }
        w.flush()?;
    }

    let mut reports = Vec::with_capacity(cells.len());
    for (cell, records) in cells.iter().zip(&all_records) {
        let grid = time_grid(cell.spec.arena.time_cap, plan.ps_grid_step);
        let report = MetricsReport::from_records(records, &grid)?.with_kind(cell.spec.mission_kind);
        reports.push(report);
    }
    Ok(reports)
}
