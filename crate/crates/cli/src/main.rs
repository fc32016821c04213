//! Operator command line: encode missions into trees, run single
//! simulations, sweep experiment grids, bench tree operations at large n,
//! and verify proof files.

mod bench;
mod sweep;

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use mtswarm_core::merkle::{
    gen_proof, read_proof, read_tree, verify_proof, write_proof, write_tree, Digest32,
};
use mtswarm_core::mission::{
    encode_mission, encode_operation, read_mission, read_secrets, write_secrets, MissionSpec,
};
use mtswarm_core::sim::{run_with_net, NetConfig, RunRecord};

#[derive(Parser)]
#[command(name = "mtswarm", version, about = "Merkle-tree secured swarm missions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Encode a mission file into a binary tree file plus an operator-side
    /// secrets file; prints the root hash.
    Encode {
        #[arg(long)]
        mission: PathBuf,
        /// Tree file path (default: mission path with .mtre extension).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Secrets file path (default: mission path with .secrets.json).
        #[arg(long)]
        secrets: Option<PathBuf>,
    },
    /// Run one simulation and emit its record as a CSV row.
    Run {
        #[arg(long)]
        mission: PathBuf,
        #[arg(long)]
        tree: PathBuf,
        /// Robot count (default: the mission file's value).
        #[arg(long)]
        robots: Option<usize>,
        /// RNG seed (default: the mission file's value).
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 0)]
        net_latency_ticks: u64,
        #[arg(long, default_value_t = 0.0)]
        net_drop: f64,
        /// Write the CSV row here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the newline-delimited JSON event log here.
        #[arg(long)]
        events: Option<PathBuf>,
    },
    /// Run an experiment grid and aggregate metrics per (mission, R_n) cell.
    Sweep {
        /// Sweep plan JSON file.
        #[arg(long)]
        plan: PathBuf,
        /// Override the plan's runs-per-cell count.
        #[arg(long)]
        seeds: Option<usize>,
        /// Metrics CSV output path.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Optional per-run CSV output path.
        #[arg(long)]
        runs_out: Option<PathBuf>,
    },
    /// Benchmark tree build / proof generation / verification for large
    /// missions and report memory and per-robot communication bounds.
    Bench {
        #[arg(long, value_delimiter = ',', default_values_t = vec![7541usize, 5923, 3599])]
        n_list: Vec<usize>,
        #[arg(long, default_value_t = 100)]
        repeats: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a proof file for one operation from the operator's tree and
    /// secrets files.
    Prove {
        #[arg(long)]
        tree: PathBuf,
        #[arg(long)]
        secrets: PathBuf,
        /// Operation index to prove.
        #[arg(long)]
        index: u32,
        /// Proof file path (default: proof-INDEX.mtpf).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Verify a proof file against a tree file or a bare root hash.
    /// Exits 0 if valid, 1 if invalid, 2 on malformed input.
    Verify {
        #[arg(long, conflicts_with = "root")]
        tree: Option<PathBuf>,
        /// Hex-encoded root digest.
        #[arg(long)]
        root: Option<String>,
        #[arg(long)]
        proof: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Encode {
            mission,
            out,
            secrets,
        } => report(cmd_encode(&mission, out, secrets)),
        Command::Run {
            mission,
            tree,
            robots,
            seed,
            net_latency_ticks,
            net_drop,
            out,
            events,
        } => report(cmd_run(
            &mission,
            &tree,
            robots,
            seed,
            NetConfig {
                latency_ticks: net_latency_ticks,
                drop_prob: net_drop,
            },
            out,
            events,
        )),
        Command::Sweep {
            plan,
            seeds,
            out,
            runs_out,
        } => report(sweep::cmd_sweep(&plan, seeds, out, runs_out)),
        Command::Bench {
            n_list,
            repeats,
            out,
        } => report(bench::cmd_bench(&n_list, repeats, out)),
        Command::Prove {
            tree,
            secrets,
            index,
            out,
        } => report(cmd_prove(&tree, &secrets, index, out)),
        Command::Verify { tree, root, proof } => cmd_verify(tree, root, &proof),
    }
}

fn report(result: Result<()>) -> ExitCode {
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

fn load_mission(path: &Path) -> Result<MissionSpec> {
    let mut reader = BufReader::new(
        File::open(path).with_context(|| format!("opening {}", path.display()))?,
    );
    read_mission(&mut reader).with_context(|| format!("reading mission {}", path.display()))
}

fn cmd_encode(mission: &Path, out: Option<PathBuf>, secrets: Option<PathBuf>) -> Result<()> {
    let spec = load_mission(mission)?;
    let (tree, operator_secrets) = encode_mission(&spec)?;

    let tree_path = out.unwrap_or_else(|| mission.with_extension("mtre"));
    let mut w = BufWriter::new(
        File::create(&tree_path).with_context(|| format!("creating {}", tree_path.display()))?,
    );
    write_tree(&tree, &mut w)?;
    w.flush()?;

    let secrets_path = secrets.unwrap_or_else(|| mission.with_extension("secrets.json"));
    let mut w = BufWriter::new(File::create(&secrets_path).with_context(|| {
        format!("creating {}", secrets_path.display())
    })?);
    write_secrets(&operator_secrets, &mut w)?;
    w.flush()?;

    println!("{}", tree.root().to_hex());
    eprintln!(
        "encoded {} operations (padded {}) -> {} + {}",
        tree.leaf_count(),
        tree.padded_leaf_count(),
        tree_path.display(),
        secrets_path.display()
    );
    Ok(())
}

fn cmd_run(
    mission: &Path,
    tree_path: &Path,
    robots: Option<usize>,
    seed: Option<u64>,
    net: NetConfig,
    out: Option<PathBuf>,
    events: Option<PathBuf>,
) -> Result<()> {
    let spec = load_mission(mission)?;
    let mut reader = BufReader::new(
        File::open(tree_path).with_context(|| format!("opening {}", tree_path.display()))?,
    );
    let tree = read_tree(&mut reader)
        .with_context(|| format!("reading tree {}", tree_path.display()))?;

    let robots = robots.unwrap_or(spec.robots);
    let seed = seed.unwrap_or(spec.seed);
    let record = run_with_net(&spec, &tree, robots, seed, net)?;

    let csv = format!("{}\n{}\n", RunRecord::csv_header(), record.csv_row());
    match out {
        Some(path) => std::fs::write(&path, csv)
            .with_context(|| format!("writing {}", path.display()))?,
        None => print!("{csv}"),
    }
    if let Some(path) = events {
        let mut w = BufWriter::new(
            File::create(&path).with_context(|| format!("creating {}", path.display()))?,
        );
        record.write_events(&mut w)?;
        w.flush()?;
    }
    eprintln!(
        "{}: finished={} F_t={:.1}s proofs={} ac={}B",
        mission.display(),
        record.finished,
        record.finishing_time,
        record.proof_exchanges,
        record.ac_bytes
    );
    Ok(())
}

fn cmd_prove(
    tree_path: &Path,
    secrets_path: &Path,
    index: u32,
    out: Option<PathBuf>,
) -> Result<()> {
    let mut reader = BufReader::new(
        File::open(tree_path).with_context(|| format!("opening {}", tree_path.display()))?,
    );
    let tree = read_tree(&mut reader)
        .with_context(|| format!("reading tree {}", tree_path.display()))?;
    let mut reader = BufReader::new(
        File::open(secrets_path)
            .with_context(|| format!("opening {}", secrets_path.display()))?,
    );
    let secrets = read_secrets(&mut reader)
        .with_context(|| format!("reading secrets {}", secrets_path.display()))?;

    let op = secrets
        .operation(index as usize)
        .with_context(|| format!("no operation {index} in the secrets file"))?;
    let (h_s, h_a, _) = encode_operation(op)?;
    let proof = gen_proof(&tree, index, &h_s, &h_a)?;

    let out = out.unwrap_or_else(|| PathBuf::from(format!("proof-{index}.mtpf")));
    let mut w = BufWriter::new(
        File::create(&out).with_context(|| format!("creating {}", out.display()))?,
    );
    write_proof(&proof, &mut w)?;
    w.flush()?;
    println!(
        "operation {index}: {} hashes -> {}",
        proof.hash_count(),
        out.display()
    );
    Ok(())
}

fn cmd_verify(tree: Option<PathBuf>, root: Option<String>, proof_path: &Path) -> ExitCode {
    const MALFORMED: u8 = 2;

    let proof = match File::open(proof_path)
        .map_err(anyhow::Error::from)
        .and_then(|f| read_proof(&mut BufReader::new(f)).map_err(Into::into))
    {
        Ok(p) => p,
        Err(err) => {
            eprintln!("error reading proof {}: {err:#}", proof_path.display());
            return ExitCode::from(MALFORMED);
        }
    };

    // The expected root comes from a tree file or a bare hex digest. A tree
    // file also pins the expected path length.
    let (expected_root, expected_path_len) = match (tree, root) {
        (Some(path), _) => {
            match File::open(&path)
                .map_err(anyhow::Error::from)
                .and_then(|f| read_tree(&mut BufReader::new(f)).map_err(Into::into))
            {
                Ok(t) => (t.root(), Some(t.path_len())),
                Err(err) => {
                    eprintln!("error reading tree {}: {err:#}", path.display());
                    return ExitCode::from(MALFORMED);
                }
            }
        }
        (None, Some(hex_root)) => match hex_root.parse::<Digest32>() {
            Ok(d) => (d, None),
            Err(err) => {
                eprintln!("error parsing root digest: {err}");
                return ExitCode::from(MALFORMED);
            }
        },
        (None, None) => {
            eprintln!("error: pass either --tree or --root");
            return ExitCode::from(MALFORMED);
        }
    };

    let structurally_ok = expected_path_len.is_none_or(|len| proof.path.len() == len);
    let valid = structurally_ok && verify_proof(&expected_root, &proof);
    println!(
        "operation {}: {}",
        proof.op_index,
        if valid { "valid" } else { "invalid" }
    );
    if valid {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
