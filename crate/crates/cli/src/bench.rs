//! Large-mission projections: memory footprint, per-robot communication
//! bound, and wall-clock timing of tree build (G), proof generation (P),
//! and proof verification (V).

use std::path::PathBuf;
use std::time::Instant;

use anyhow::{Context, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use mtswarm_core::merkle::{build_tree, gen_proof, verify_proof, Digest32};
use mtswarm_core::metrics::{ac_per_robot_bound, memory_footprint};
use mtswarm_core::mission::{cell_sensor, encode_operation, Operation, ACTION_STOP};

pub struct BenchRow {
    pub n: usize,
    pub memory_bytes: u64,
    pub ac_per_robot_bytes: u64,
    pub g_mean: f64,
    pub g_std: f64,
    pub p_mean: f64,
    pub p_std: f64,
    pub v_mean: f64,
    pub v_std: f64,
}

pub fn cmd_bench(n_list: &[usize], repeats: usize, out: Option<PathBuf>) -> Result<()> {
    let repeats = repeats.max(1);
    let mut rows = Vec::new();
    for &n in n_list {
        rows.push(bench_one(n, repeats));
    }

    println!(
        "{:>6}  {:>12}  {:>14}  {:>22}  {:>22}  {:>22}",
        "n", "memory (B)", "AC/robot (B)", "G mean/sd (s)", "P mean/sd (s)", "V mean/sd (s)"
    );
    let mut csv = String::from("n,memory_bytes,ac_per_robot_bytes,g_mean_s,g_std_s,p_mean_s,p_std_s,v_mean_s,v_std_s\n");
    for row in &rows {
        println!(
            "{:>6}  {:>12}  {:>14}  {:>11.6}/{:<10.6}  {:>11.9}/{:<10.9}  {:>11.9}/{:<10.9}",
            row.n,
            row.memory_bytes,
            row.ac_per_robot_bytes,
            row.g_mean,
            row.g_std,
            row.p_mean,
            row.p_std,
            row.v_mean,
            row.v_std
        );
        csv.push_str(&format!(
            "{},{},{},{:.9},{:.9},{:.9},{:.9},{:.9},{:.9}\n",
            row.n,
            row.memory_bytes,
            row.ac_per_robot_bytes,
            row.g_mean,
            row.g_std,
            row.p_mean,
            row.p_std,
            row.v_mean,
            row.v_std
        ));
    }
    if let Some(path) = out {
        std::fs::write(&path, csv).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

/// Random canonical operations; the timing depends only on n and the hash
/// size, not on operation content.
fn random_operations(n: usize, rng: &mut ChaCha8Rng) -> Vec<Operation> {
    (0..n)
        .map(|_| {
            Operation::new(
                cell_sensor(rng.random_range(0..1_000_000), rng.random_range(0..1_000_000)),
                ACTION_STOP,
            )
        })
        .collect()
}

pub fn bench_one(n: usize, repeats: usize) -> BenchRow {
    let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
    let ops = random_operations(n, &mut rng);

    let mut g_times = Vec::with_capacity(repeats);
    let mut p_times = Vec::with_capacity(repeats);
    let mut v_times = Vec::with_capacity(repeats);

    // One build outside the loop provides the tree the P/V samples use.
    let encoded: Vec<(Digest32, Digest32, Digest32)> = ops
        .iter()
        .map(|op| encode_operation(op).expect("canonical bench op"))
        .collect();
    let leaves: Vec<Digest32> = encoded.iter().map(|(_, _, leaf)| *leaf).collect();
    let tree = build_tree(&leaves).expect("n >= 1");
    let root = tree.root();

    for _ in 0..repeats {
        // G: hash every operation and build the full tree.
        let t0 = Instant::now();
        let leaves: Vec<Digest32> = ops
            .iter()
            .map(|op| encode_operation(op).expect("canonical bench op").2)
            .collect();
        let built = build_tree(&leaves).expect("n >= 1");
        g_times.push(t0.elapsed().as_secs_f64());
        assert_eq!(built.root(), root);

        let index = rng.random_range(0..n);
        let (h_s, h_a, _) = encoded[index];

        let t0 = Instant::now();
        let proof = gen_proof(&tree, index as u32, &h_s, &h_a).expect("index in range");
        p_times.push(t0.elapsed().as_secs_f64());

        let t0 = Instant::now();
        let ok = verify_proof(&root, &proof);
        v_times.push(t0.elapsed().as_secs_f64());
        assert!(ok);
    }

    BenchRow {
        n,
        memory_bytes: memory_footprint(n, 32),
        ac_per_robot_bytes: ac_per_robot_bound(n, 32),
        g_mean: mean(&g_times),
        g_std: std_dev(&g_times),
        p_mean: mean(&p_times),
        p_std: std_dev(&p_times),
        v_mean: mean(&v_times),
        v_std: std_dev(&v_times),
    }
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn std_dev(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let m = mean(values);
    (values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (values.len() - 1) as f64).sqrt()
}
