//! Run metrics: finishing time, probability of success over time, amount of
//! communication (measured and closed-form upper bound), Shannon
//! equitability of per-robot work, and the tree memory footprint.

use serde::Serialize;
use thiserror::Error;

use crate::merkle::proof_length;
use crate::mission::MissionKind;
use crate::sim::RunRecord;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricsError {
    #[error("no runs to aggregate")]
    Empty,
    #[error("per-robot counts sum to {sum}, more than the {n} mission operations")]
    CountsExceedMission { sum: usize, n: usize },
}

/// Empirical probability the mission finishes by time t, over k runs:
/// `P_s(t) = |{j : r_j <= t}| / k`. Unfinished runs must be recorded with a
/// run time above the cap so they never count as successes.
pub fn success_curve(run_times: &[f64], t_grid: &[f64]) -> Result<Vec<f64>, MetricsError> {
    if run_times.is_empty() {
        return Err(MetricsError::Empty);
    }
    let k = run_times.len() as f64;
    Ok(t_grid
        .iter()
        .map(|&t| run_times.iter().filter(|&&r| r <= t).count() as f64 / k)
        .collect())
}

/// Closed-form upper bound on total proof bytes when every robot completes
/// its tree: `(R_n - 1) * n` proofs of `log2(n_padded) + 2` hashes each.
pub fn ac_upper_limit(robot_count: usize, n: usize, hash_size: usize) -> u64 {
    if robot_count == 0 || n == 0 {
        return 0;
    }
    let proofs = (robot_count as u64 - 1) * n as u64;
    proofs * proof_length(n).expect("n >= 1") as u64 * hash_size as u64
}

/// Per-robot bound implied by the same formula: each robot receives at most
/// one proof per operation.
pub fn ac_per_robot_bound(n: usize, hash_size: usize) -> u64 {
    if n == 0 {
        return 0;
    }
    n as u64 * proof_length(n).expect("n >= 1") as u64 * hash_size as u64
}

/// Shannon equitability of the completed-operation distribution.
///
/// Contributing robots (count >= 1) form the community: `p_i = count_i / n`,
/// `I = -sum p_i ln p_i`, `I_max = ln S` over the S contributors, and the
/// result is `I / I_max`, defined as 0 when S <= 1.
///
/// When the counts sum to n (a finished mission) the ratio lands in [0, 1]
/// on its own. Partial distributions can push `I` slightly past `ln S`
/// (each -p ln p term peaks at p = 1/e, not at the uniform share), so the
/// result is capped at 1 to keep the declared range.
pub fn shannon_equitability(ops_per_robot: &[usize], n: usize) -> Result<f64, MetricsError> {
    let sum: usize = ops_per_robot.iter().sum();
    if sum > n {
        return Err(MetricsError::CountsExceedMission { sum, n });
    }
    let contributors: Vec<usize> = ops_per_robot.iter().copied().filter(|&c| c > 0).collect();
    let s = contributors.len();
    if s <= 1 {
        return Ok(0.0);
    }
    let index: f64 = contributors
        .iter()
        .map(|&c| {
            let p = c as f64 / n as f64;
            -p * p.ln()
        })
        .sum();
    Ok((index / (s as f64).ln()).min(1.0))
}

/// Leaf-hash storage of a mission tree: n hashes of `hash_size` bytes.
pub fn memory_footprint(n: usize, hash_size: usize) -> u64 {
    n as u64 * hash_size as u64
}

/// Total proof bytes observed in a run: accepted plus rejected proof
/// deliveries, `log2(n_padded) + 2` hashes of 32 bytes each.
pub fn measured_ac(record: &RunRecord) -> u64 {
    record.proof_exchanges * proof_length(record.n).expect("n >= 1") as u64 * 32
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample standard deviation; 0 for fewer than two samples.
fn std_dev(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let m = mean(values);
    let var = values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (values.len() - 1) as f64;
    var.sqrt()
}

/// Aggregates for one (mission, n, R_n) configuration.
#[derive(Debug, Clone, Serialize)]
pub struct MetricsReport {
    pub mission_kind: MissionKind,
    pub n: usize,
    pub robot_count: usize,
    pub runs: usize,
    pub finished_runs: usize,
    pub ft_mean: f64,
    pub ft_std: f64,
    pub ac_mean: f64,
    pub ac_std: f64,
    pub ac_upper_limit: u64,
    pub ie_mean: f64,
    pub ie_std: f64,
    pub memory_bytes: u64,
    /// (t, P_s) samples over the supplied grid.
    pub ps_curve: Vec<(f64, f64)>,
}

impl MetricsReport {
    pub fn from_records(records: &[RunRecord], t_grid: &[f64]) -> Result<Self, MetricsError> {
        let first = records.first().ok_or(MetricsError::Empty)?;
        let n = first.n;
        let robot_count = first.robot_count;

        let ft: Vec<f64> = records.iter().map(|r| r.finishing_time).collect();
        let ac: Vec<f64> = records.iter().map(|r| measured_ac(r) as f64).collect();
        let ie: Vec<f64> = records
            .iter()
            .map(|r| shannon_equitability(&r.ops_per_robot, r.n))
            .collect::<Result<_, _>>()?;

        // Unfinished runs sit above the cap so the curve never counts them.
        let run_times: Vec<f64> = records
            .iter()
            .map(|r| {
                if r.finished {
                    r.finishing_time
                } else {
                    f64::INFINITY
                }
            })
            .collect();
        let ps = success_curve(&run_times, t_grid)?;

        Ok(MetricsReport {
            mission_kind: MissionKind::Foraging,
            n,
            robot_count,
            runs: records.len(),
            finished_runs: records.iter().filter(|r| r.finished).count(),
            ft_mean: mean(&ft),
            ft_std: std_dev(&ft),
            ac_mean: mean(&ac),
            ac_std: std_dev(&ac),
            ac_upper_limit: ac_upper_limit(robot_count, n, 32),
            ie_mean: mean(&ie),
            ie_std: std_dev(&ie),
            memory_bytes: memory_footprint(n, 32),
            ps_curve: t_grid.iter().copied().zip(ps).collect(),
        })
    }

    pub fn with_kind(mut self, kind: MissionKind) -> Self {
        self.mission_kind = kind;
        self
    }

    /// First grid time at which P_s reaches the given level.
    pub fn time_to_success(&self, level: f64) -> Option<f64> {
        self.ps_curve
            .iter()
            .find(|(_, p)| *p >= level)
            .map(|(t, _)| *t)
    }

    pub fn final_ps(&self) -> f64 {
        self.ps_curve.last().map(|(_, p)| *p).unwrap_or(0.0)
    }

    pub fn csv_header() -> &'static str {
        "mission,n,robots,runs,finished,ft_mean,ft_std,ac_mean,ac_std,ac_ul,ie_mean,ie_std,memory_bytes,ps_t50,ps_final"
    }

    pub fn csv_row(&self) -> String {
        let kind = match self.mission_kind {
            MissionKind::Foraging => "foraging",
            MissionKind::Maze => "maze",
        };
        format!(
            "{},{},{},{},{},{:.3},{:.3},{:.1},{:.1},{},{:.6},{:.6},{},{},{:.3}",
            kind,
            self.n,
            self.robot_count,
            self.runs,
            self.finished_runs,
            self.ft_mean,
            self.ft_std,
            self.ac_mean,
            self.ac_std,
            self.ac_upper_limit,
            self.ie_mean,
            self.ie_std,
            self.memory_bytes,
            self.time_to_success(0.5)
                .map_or("inf".to_string(), |t| format!("{t:.1}")),
            self.final_ps()
        )
    }

    /// One human-readable summary line.
    pub fn summary_line(&self) -> String {
        format!(
            "n={:<5} R_n={:<3} runs={:<4} finished={:<4} F_t={:8.1}s (sd {:6.1})  AC={:9.1}B (sd {:8.1}, ul {})  I_e={:.4} (sd {:.4})",
            self.n,
            self.robot_count,
            self.runs,
            self.finished_runs,
            self.ft_mean,
            self.ft_std,
            self.ac_mean,
            self.ac_std,
            self.ac_upper_limit,
            self.ie_mean,
            self.ie_std
        )
    }
}

/// Evenly spaced time grid from 0 to `end` inclusive.
pub fn time_grid(end: f64, step: f64) -> Vec<f64> {
    let count = (end / step).ceil() as usize;
    (0..=count).map(|i| i as f64 * step).collect()
}
