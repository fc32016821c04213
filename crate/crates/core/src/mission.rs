//! Operator-side mission encoding and the robot-side hash-only mission state.
//!
//! The operator holds raw operations (sensor string, action string) and
//! encodes them into a hash tree; robots receive only the tree. A robot's
//! [`RobotMissionState`] tracks which operations are completed and what
//! evidence it holds for each: raw strings for operations it performed
//! itself, bare hash pairs for operations learned through peer proofs.

use std::io::{self, Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::merkle::{
    build_tree, gen_proof, hash_bytes, make_leaf, verify_proof, Digest32, MerkleError, MerkleTree,
    Proof,
};
use crate::sim::ArenaConfig;

/// Task colors available to foraging missions, in canonical order.
pub const FORAGING_COLORS: [&str; 8] = [
    "green", "magenta", "blue", "yellow", "red", "cyan", "lime", "orange",
];

pub const ACTION_CARRY_TO_TARGET: &str = "action:carry_to_target";
pub const ACTION_STOP: &str = "action:stop";

pub const MISSION_FILE_VERSION: u32 = 1;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MissionError {
    #[error("empty mission")]
    Empty,
    #[error("bad operation encoding: {0:?}")]
    BadOperationEncoding(String),
    #[error("invalid mission: {0}")]
    Invalid(String),
    #[error("out-of-order completion: working index is {expected}, got {got}")]
    OutOfOrderCompletion { expected: usize, got: usize },
    #[error("evidence mismatch for operation {0}")]
    EvidenceMismatch(usize),
    #[error(transparent)]
    Merkle(#[from] MerkleError),
}

#[derive(Debug, Error)]
pub enum MissionFileError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("mission file parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error(transparent)]
    Invalid(#[from] MissionError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MissionKind {
    Foraging,
    Maze,
}

/// One atomic mission step: a canonical sensor string and action string.
///
/// The closed grammar keeps hashes reproducible: sensors are
/// `color:<name>` with a name from [`FORAGING_COLORS`] or `cell:<x>,<y>`
/// with canonical (no leading zero) grid coordinates; actions are
/// `action:carry_to_target` or `action:stop`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Operation {
    pub sensor: String,
    pub action: String,
}

impl Operation {
    pub fn new(sensor: impl Into<String>, action: impl Into<String>) -> Self {
        Operation {
            sensor: sensor.into(),
            action: action.into(),
        }
    }

    pub fn validate(&self) -> Result<(), MissionError> {
        if !sensor_is_canonical(&self.sensor) {
            return Err(MissionError::BadOperationEncoding(self.sensor.clone()));
        }
        if self.action != ACTION_CARRY_TO_TARGET && self.action != ACTION_STOP {
            return Err(MissionError::BadOperationEncoding(self.action.clone()));
        }
        Ok(())
    }
}

fn sensor_is_canonical(sensor: &str) -> bool {
    if let Some(color) = sensor.strip_prefix("color:") {
        return FORAGING_COLORS.contains(&color);
    }
    if let Some(coords) = sensor.strip_prefix("cell:") {
        return parse_cell_coords(coords).is_some();
    }
    false
}

fn parse_cell_coords(coords: &str) -> Option<(u32, u32)> {
    let (xs, ys) = coords.split_once(',')?;
    let x: u32 = xs.parse().ok()?;
    let y: u32 = ys.parse().ok()?;
    // Canonical form only: reject leading zeros, signs, whitespace.
    if xs != x.to_string() || ys != y.to_string() {
        return None;
    }
    Some((x, y))
}

/// Grid coordinates of a maze cell sensor string, if it is one.
pub fn cell_sensor_coords(sensor: &str) -> Option<(u32, u32)> {
    parse_cell_coords(sensor.strip_prefix("cell:")?)
}

/// Canonical sensor string for a grid cell.
pub fn cell_sensor(x: u32, y: u32) -> String {
    format!("cell:{x},{y}")
}

/// Canonical sensor string for a task color.
pub fn color_sensor(color: &str) -> String {
    format!("color:{color}")
}

/// The operator's raw mission description. This is the only place raw
/// operation strings live before the mission starts; robots receive the
/// encoded tree, never this struct.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MissionSpec {
    #[serde(default = "default_version")]
    pub version: u32,
    pub mission_kind: MissionKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub operations: Vec<Operation>,
    #[serde(default)]
    pub arena: ArenaConfig,
    #[serde(default = "default_robots")]
    pub robots: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_version() -> u32 {
    MISSION_FILE_VERSION
}

fn default_robots() -> usize {
    4
}

impl MissionSpec {
    /// Foraging mission over the first `n` canonical colors.
    pub fn foraging(n: usize) -> Self {
        assert!(
            (1..=FORAGING_COLORS.len()).contains(&n),
            "foraging missions carry 1..=8 distinct colors, asked for {n}"
        );
        let operations = FORAGING_COLORS
            .iter()
            .take(n)
            .map(|c| Operation::new(color_sensor(c), ACTION_CARRY_TO_TARGET))
            .collect();
        MissionSpec {
            version: MISSION_FILE_VERSION,
            mission_kind: MissionKind::Foraging,
            label: None,
            operations,
            arena: ArenaConfig::default(),
            robots: default_robots(),
            seed: 0,
        }
    }

    /// Default 16-wall maze blueprint on the 5x5 grid: a bordered maze with
    /// an entrance at (0,3) and an exit at (2,0), walls listed bottom-up in
    /// raster order.
    pub fn maze_default() -> Self {
        const WALLS: [(u32, u32); 16] = [
            (0, 0),
            (1, 0),
            (3, 0),
            (4, 0),
            (0, 1),
            (4, 1),
            (0, 2),
            (1, 2),
            (2, 2),
            (4, 2),
            (4, 3),
            (0, 4),
            (1, 4),
            (2, 4),
            (3, 4),
            (4, 4),
        ];
        let operations = WALLS
            .iter()
            .map(|&(x, y)| Operation::new(cell_sensor(x, y), ACTION_STOP))
            .collect();
        MissionSpec {
            version: MISSION_FILE_VERSION,
            mission_kind: MissionKind::Maze,
            label: None,
            operations,
            arena: ArenaConfig::default(),
            robots: 16,
            seed: 0,
        }
    }

    pub fn n(&self) -> usize {
        self.operations.len()
    }

    /// Full structural validation: grammar, kind consistency, and the
    /// per-kind placement constraints.
    pub fn validate(&self) -> Result<(), MissionError> {
        if self.version != MISSION_FILE_VERSION {
            return Err(MissionError::Invalid(format!(
                "unsupported mission file version {}",
                self.version
            )));
        }
        if self.operations.is_empty() {
            return Err(MissionError::Empty);
        }
        for op in &self.operations {
            op.validate()?;
        }
        match self.mission_kind {
            MissionKind::Foraging => {
                let mut seen = Vec::new();
                for op in &self.operations {
                    if !op.sensor.starts_with("color:") || op.action != ACTION_CARRY_TO_TARGET {
                        return Err(MissionError::Invalid(format!(
                            "operation {:?} does not fit a foraging mission",
                            op.sensor
                        )));
                    }
                    if seen.contains(&op.sensor) {
                        return Err(MissionError::Invalid(format!(
                            "duplicate task color {:?}",
                            op.sensor
                        )));
                    }
                    seen.push(op.sensor.clone());
                }
            }
            MissionKind::Maze => {
                let grid = self.arena.grid;
                let mut seen = Vec::new();
                for op in &self.operations {
                    let Some((x, y)) = cell_sensor_coords(&op.sensor) else {
                        return Err(MissionError::Invalid(format!(
                            "operation {:?} does not fit a maze mission",
                            op.sensor
                        )));
                    };
                    if op.action != ACTION_STOP {
                        return Err(MissionError::Invalid(format!(
                            "maze operations must stop, got {:?}",
                            op.action
                        )));
                    }
                    if x as usize >= grid || y as usize >= grid {
                        return Err(MissionError::Invalid(format!(
                            "wall cell ({x},{y}) outside the {grid}x{grid} grid"
                        )));
                    }
                    if seen.contains(&(x, y)) {
                        return Err(MissionError::Invalid(format!(
                            "duplicate wall cell ({x},{y})"
                        )));
                    }
                    seen.push((x, y));
                }
            }
        }
        Ok(())
    }
}

pub fn read_mission<R: Read>(r: &mut R) -> Result<MissionSpec, MissionFileError> {
    let spec: MissionSpec = serde_json::from_reader(r)?;
    spec.validate()?;
    Ok(spec)
}

pub fn write_mission<W: Write>(spec: &MissionSpec, w: &mut W) -> Result<(), MissionFileError> {
    serde_json::to_writer_pretty(w, spec)?;
    Ok(())
}

/// Raw operation list retained operator-side after encoding. Never handed to
/// robot states.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OperatorSecrets {
    pub version: u32,
    pub operations: Vec<Operation>,
}

impl OperatorSecrets {
    pub fn operation(&self, index: usize) -> Option<&Operation> {
        self.operations.get(index)
    }
}

pub fn read_secrets<R: Read>(r: &mut R) -> Result<OperatorSecrets, MissionFileError> {
    Ok(serde_json::from_reader(r)?)
}

pub fn write_secrets<W: Write>(
    secrets: &OperatorSecrets,
    w: &mut W,
) -> Result<(), MissionFileError> {
    serde_json::to_writer_pretty(w, secrets)?;
    Ok(())
}

/// Hashes one operation: `h_s`, `h_a`, and the leaf `H(h_s || h_a)`.
pub fn encode_operation(op: &Operation) -> Result<(Digest32, Digest32, Digest32), MissionError> {
    op.validate()?;
    let h_s = hash_bytes(op.sensor.as_bytes());
    let h_a = hash_bytes(op.action.as_bytes());
    let leaf = make_leaf(&h_s, &h_a);
    Ok((h_s, h_a, leaf))
}

/// Encodes the whole mission into a tree, returning the tree plus the raw
/// operation list the operator keeps to itself.
pub fn encode_mission(spec: &MissionSpec) -> Result<(MerkleTree, OperatorSecrets), MissionError> {
    spec.validate()?;
    let mut leaves = Vec::with_capacity(spec.operations.len());
    for op in &spec.operations {
        let (_, _, leaf) = encode_operation(op)?;
        leaves.push(leaf);
    }
    let tree = build_tree(&leaves)?;
    Ok((
        tree,
        OperatorSecrets {
            version: MISSION_FILE_VERSION,
            operations: spec.operations.clone(),
        },
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OpStatus {
    Pending,
    Completed,
}

/// What a robot holds for a completed operation. Raw strings appear only for
/// operations the robot performed itself.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Evidence {
    None,
    HashPair { h_s: Digest32, h_a: Digest32 },
    Raw { sensor: String, action: String },
}

impl Evidence {
    /// Preimage hashes, whichever form the evidence takes.
    pub fn hashes(&self) -> Option<(Digest32, Digest32)> {
        match self {
            Evidence::None => None,
            Evidence::HashPair { h_s, h_a } => Some((*h_s, *h_a)),
            Evidence::Raw { sensor, action } => Some((
                hash_bytes(sensor.as_bytes()),
                hash_bytes(action.as_bytes()),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpRecord {
    pub status: OpStatus,
    pub evidence: Evidence,
}

/// Outcome of feeding a peer proof into a robot state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProofOutcome {
    Accepted,
    Rejected,
    Stale,
}

/// A robot's hash-only view of the mission: the broadcast tree, the working
/// index, and per-operation completion records. Contains no raw operation
/// strings except raw evidence for self-completed operations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobotMissionState {
    tree: MerkleTree,
    root: Digest32,
    working_index: usize,
    records: Vec<OpRecord>,
}

impl RobotMissionState {
    pub fn n(&self) -> usize {
        self.records.len()
    }

    pub fn root(&self) -> Digest32 {
        self.root
    }

    pub fn tree(&self) -> &MerkleTree {
        &self.tree
    }

    /// Smallest operation index still pending; equals n when the mission is
    /// complete from this robot's point of view.
    pub fn working_index(&self) -> usize {
        self.working_index
    }

    pub fn is_complete(&self) -> bool {
        self.working_index == self.records.len()
    }

    pub fn record(&self, index: usize) -> Option<&OpRecord> {
        self.records.get(index)
    }

    pub fn is_completed(&self, index: usize) -> bool {
        self.records
            .get(index)
            .is_some_and(|r| r.status == OpStatus::Completed)
    }

    /// Count of operations completed with raw evidence (performed by this
    /// robot itself).
    pub fn raw_completion_count(&self) -> usize {
        self.records
            .iter()
            .filter(|r| matches!(r.evidence, Evidence::Raw { .. }))
            .count()
    }

    /// Tries to match a sensed input against the current working operation.
    /// Returns the matching action and a fresh proof, or nothing if no
    /// action in the set fits.
    pub fn try_match(&self, sensor: &str, action_set: &[&str]) -> Option<(String, Proof)> {
        if self.is_complete() {
            return None;
        }
        let i = self.working_index;
        let target = *self.tree.leaf(i)?;
        let h_s = hash_bytes(sensor.as_bytes());
        for action in action_set {
            let h_a = hash_bytes(action.as_bytes());
            if make_leaf(&h_s, &h_a) == target {
                let proof = gen_proof(&self.tree, i as u32, &h_s, &h_a)
                    .expect("leaf just matched; proof generation cannot fail");
                return Some((action.to_string(), proof));
            }
        }
        None
    }

    /// Marks the current working operation completed with raw evidence.
    /// Only the working index may be completed this way, and the evidence
    /// must hash to the stored leaf.
    pub fn mark_completed(
        &mut self,
        index: usize,
        sensor: &str,
        action: &str,
    ) -> Result<(), MissionError> {
        if index != self.working_index || index >= self.records.len() {
            return Err(MissionError::OutOfOrderCompletion {
                expected: self.working_index,
                got: index,
            });
        }
        let h_s = hash_bytes(sensor.as_bytes());
        let h_a = hash_bytes(action.as_bytes());
        if make_leaf(&h_s, &h_a) != *self.tree.leaf(index).expect("index < n <= padded") {
            return Err(MissionError::EvidenceMismatch(index));
        }
        self.records[index] = OpRecord {
            status: OpStatus::Completed,
            evidence: Evidence::Raw {
                sensor: sensor.to_string(),
                action: action.to_string(),
            },
        };
        self.advance();
        Ok(())
    }

    /// Feeds a peer proof into this state. Duplicates are stale; anything
    /// that fails verification (or targets a padding slot) is rejected and
    /// leaves the state untouched.
    pub fn apply_peer_proof(&mut self, proof: &Proof) -> ProofOutcome {
        let idx = proof.op_index as usize;
        if idx >= self.records.len() {
            return ProofOutcome::Rejected;
        }
        if self.records[idx].status == OpStatus::Completed {
            return ProofOutcome::Stale;
        }
        if proof.path.len() != self.tree.path_len() {
            return ProofOutcome::Rejected;
        }
        if !verify_proof(&self.root, proof) {
            return ProofOutcome::Rejected;
        }
        self.records[idx] = OpRecord {
            status: OpStatus::Completed,
            evidence: Evidence::HashPair {
                h_s: proof.h_s,
                h_a: proof.h_a,
            },
        };
        self.advance();
        ProofOutcome::Accepted
    }

    /// Regenerates a proof for a completed operation from whatever evidence
    /// is held. Returns nothing for pending operations.
    pub fn prove(&self, index: usize) -> Option<Proof> {
        let record = self.records.get(index)?;
        if record.status != OpStatus::Completed {
            return None;
        }
        let (h_s, h_a) = record.evidence.hashes()?;
        gen_proof(&self.tree, index as u32, &h_s, &h_a).ok()
    }

    fn advance(&mut self) {
        while self.working_index < self.records.len()
            && self.records[self.working_index].status == OpStatus::Completed
        {
            self.working_index += 1;
        }
    }
}

/// Builds the state a robot holds right after the tree broadcast: everything
/// pending, no evidence, working index 0. Raw operations are not included.
pub fn init_robot_view(tree: &MerkleTree) -> RobotMissionState {
    let n = tree.leaf_count();
    RobotMissionState {
        tree: tree.clone(),
        root: tree.root(),
        working_index: 0,
        records: vec![
            OpRecord {
                status: OpStatus::Pending,
                evidence: Evidence::None,
            };
            n
        ],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::merkle::proof_length;
    use crate::refsha;

    fn foraging4() -> (MissionSpec, MerkleTree, OperatorSecrets) {
        let spec = MissionSpec::foraging(4);
        let (tree, secrets) = encode_mission(&spec).unwrap();
        (spec, tree, secrets)
    }

    fn proof_for(secrets: &OperatorSecrets, tree: &MerkleTree, index: usize) -> Proof {
        let op = secrets.operation(index).unwrap();
        let (h_s, h_a, _) = encode_operation(op).unwrap();
        gen_proof(tree, index as u32, &h_s, &h_a).unwrap()
    }

    #[test]
    fn encode_operation_frozen_values() {
        let (h_s, h_a, leaf) =
            encode_operation(&Operation::new("color:red", ACTION_CARRY_TO_TARGET)).unwrap();
        assert_eq!(
            h_s.to_hex(),
            "f1ff77e5ddbb1af52eb51c98f725927143221549385937595112128987cf39e4"
        );
        assert_eq!(
            h_a.to_hex(),
            "774d1b2e57e56e4b48075aebd29e3087e1867461d06df8f9daca4573051e9d83"
        );
        assert_eq!(
            leaf.to_hex(),
            "912f818bba88423c380cd22b6e9d2c2e7a3e07186011f59e37d009e063c88039"
        );

        let (h_s, h_a, leaf) =
            encode_operation(&Operation::new("cell:1,1", ACTION_STOP)).unwrap();
        assert_eq!(h_s.0, refsha::sha256(b"cell:1,1"));
        assert_eq!(h_a.0, refsha::sha256(b"action:stop"));
        assert_eq!(
            leaf.to_hex(),
            "192d9d8b44d3a32eabd741480e4978081e4122f8ccc4b59c81f262ae67517966"
        );

        // Determinism.
        let op = Operation::new("cell:1,1", ACTION_STOP);
        assert_eq!(encode_operation(&op).unwrap(), encode_operation(&op).unwrap());
    }

    #[test]
    fn encode_operation_rejects_non_canonical() {
        for (sensor, action) in [
            ("Color:red", ACTION_CARRY_TO_TARGET),
            ("color:teal", ACTION_CARRY_TO_TARGET),
            ("color:red ", ACTION_CARRY_TO_TARGET),
            ("cell:01,1", ACTION_STOP),
            ("cell:1", ACTION_STOP),
            ("cell:-1,2", ACTION_STOP),
            ("color:red", "action:fly"),
            ("color:red", "ACTION:STOP"),
        ] {
            assert!(
                matches!(
                    encode_operation(&Operation::new(sensor, action)),
                    Err(MissionError::BadOperationEncoding(_))
                ),
                "accepted {sensor:?}/{action:?}"
            );
        }
    }

    #[test]
    fn encode_mission_shapes() {
        let (_, tree, _) = foraging4();
        assert_eq!(tree.leaf_count(), 4);
        assert_eq!(tree.padded_leaf_count(), 4);

        let maze = MissionSpec::maze_default();
        maze.validate().unwrap();
        let (tree, _) = encode_mission(&maze).unwrap();
        assert_eq!(tree.leaf_count(), 16);
        assert_eq!(tree.padded_leaf_count(), 16);
    }

    #[test]
    fn encode_mission_order_sensitive() {
        let spec = MissionSpec::foraging(4);
        let mut swapped = spec.clone();
        swapped.operations.swap(1, 2);
        let (tree_a, _) = encode_mission(&spec).unwrap();
        let (tree_b, _) = encode_mission(&swapped).unwrap();
        assert_ne!(tree_a.root(), tree_b.root());
    }

    #[test]
    fn encode_mission_rejects_bad_specs() {
        let mut empty = MissionSpec::foraging(4);
        empty.operations.clear();
        assert_eq!(encode_mission(&empty).unwrap_err(), MissionError::Empty);

        let mut dup = MissionSpec::foraging(4);
        dup.operations[2] = dup.operations[0].clone();
        assert!(matches!(
            encode_mission(&dup),
            Err(MissionError::Invalid(_))
        ));

        let mut off_grid = MissionSpec::maze_default();
        off_grid.operations[0] = Operation::new(cell_sensor(7, 0), ACTION_STOP);
        assert!(matches!(
            encode_mission(&off_grid),
            Err(MissionError::Invalid(_))
        ));
    }

    #[test]
    fn init_robot_view_contract() {
        let (spec, tree, _) = foraging4();
        let state = init_robot_view(&tree);
        assert_eq!(state.working_index(), 0);
        assert_eq!(state.n(), 4);
        assert!(!state.is_complete());
        assert_eq!(state.root(), tree.root());

        // The serialized state holds the broadcast hashes and nothing raw.
        let json = serde_json::to_string(&state).unwrap();
        for op in &spec.operations {
            assert!(!json.contains(&op.sensor));
        }
        assert!(!json.contains("carry_to_target"));

        let other = init_robot_view(&tree);
        assert_eq!(state.root(), other.root());
    }

    #[test]
    fn try_match_finds_current_operation_only() {
        let (_, tree, _) = foraging4();
        let mut state = init_robot_view(&tree);
        let actions = [ACTION_CARRY_TO_TARGET];

        // Operation 0 is green; red is op 4's color and does not match now.
        let (action, proof) = state.try_match("color:green", &actions).unwrap();
        assert_eq!(action, ACTION_CARRY_TO_TARGET);
        assert_eq!(proof.op_index, 0);
        assert_eq!(proof.hash_count(), proof_length(4).unwrap());
        assert!(verify_proof(&state.root(), &proof));

        assert!(state.try_match("color:yellow", &actions).is_none());

        // Completed mission matches nothing.
        for (i, color) in ["green", "magenta", "blue", "yellow"].iter().enumerate() {
            state
                .mark_completed(i, &color_sensor(color), ACTION_CARRY_TO_TARGET)
                .unwrap();
        }
        assert!(state.is_complete());
        assert!(state.try_match("color:green", &actions).is_none());
    }

    #[test]
    fn mark_completed_advances_and_guards() {
        let (_, tree, secrets) = foraging4();
        let mut state = init_robot_view(&tree);

        state
            .mark_completed(0, "color:green", ACTION_CARRY_TO_TARGET)
            .unwrap();
        assert_eq!(state.working_index(), 1);

        // Out of order.
        assert!(matches!(
            state.mark_completed(3, "color:yellow", ACTION_CARRY_TO_TARGET),
            Err(MissionError::OutOfOrderCompletion { expected: 1, got: 3 })
        ));

        // Wrong evidence leaves the state unchanged.
        let before = state.clone();
        assert_eq!(
            state
                .mark_completed(1, "color:blue", ACTION_CARRY_TO_TARGET)
                .unwrap_err(),
            MissionError::EvidenceMismatch(1)
        );
        assert_eq!(state, before);

        // Completing op 1 after op 2 arrived by proof jumps the index by 2.
        let proof2 = proof_for(&secrets, &tree, 2);
        assert_eq!(state.apply_peer_proof(&proof2), ProofOutcome::Accepted);
        assert_eq!(state.working_index(), 1);
        state
            .mark_completed(1, "color:magenta", ACTION_CARRY_TO_TARGET)
            .unwrap();
        assert_eq!(state.working_index(), 3);
    }

    #[test]
    fn apply_peer_proof_tri_state() {
        let (_, tree, secrets) = foraging4();
        let mut state = init_robot_view(&tree);

        let proof = proof_for(&secrets, &tree, 0);
        assert_eq!(state.apply_peer_proof(&proof), ProofOutcome::Accepted);
        assert_eq!(state.working_index(), 1);

        // Duplicate is stale and idempotent.
        let snapshot = state.clone();
        assert_eq!(state.apply_peer_proof(&proof), ProofOutcome::Stale);
        assert_eq!(state, snapshot);

        // Corrupted proof is rejected without state change.
        let mut bad = proof_for(&secrets, &tree, 1);
        bad.h_s.0[0] ^= 0x80;
        assert_eq!(state.apply_peer_proof(&bad), ProofOutcome::Rejected);
        assert_eq!(state, snapshot);

        // Padding-slot index is rejected outright.
        let mut padded = proof_for(&secrets, &tree, 1);
        padded.op_index = 9;
        assert_eq!(state.apply_peer_proof(&padded), ProofOutcome::Rejected);
    }

    #[test]
    fn working_index_is_monotone_and_converges() {
        // Any interleaving of valid proofs for all operations ends at i = n.
        let spec = MissionSpec::foraging(6);
        let (tree, secrets) = encode_mission(&spec).unwrap();
        let orders: [[usize; 6]; 4] = [
            [0, 1, 2, 3, 4, 5],
            [5, 4, 3, 2, 1, 0],
            [3, 0, 5, 1, 4, 2],
            [2, 4, 0, 5, 3, 1],
        ];
        for order in orders {
            let mut state = init_robot_view(&tree);
            let mut last_index = 0;
            for &i in &order {
                let proof = proof_for(&secrets, &tree, i);
                assert_eq!(state.apply_peer_proof(&proof), ProofOutcome::Accepted);
                assert!(state.working_index() >= last_index);
                last_index = state.working_index();
            }
            assert!(state.is_complete());
        }
    }

    #[test]
    fn hash_pair_evidence_is_enough_to_reprove() {
        let (_, tree, secrets) = foraging4();
        let mut state = init_robot_view(&tree);
        let proof = proof_for(&secrets, &tree, 0);
        state.apply_peer_proof(&proof);

        // The robot never saw raw strings for op 0, yet can act as prover.
        let reproved = state.prove(0).unwrap();
        assert!(verify_proof(&state.root(), &reproved));
        assert!(state.prove(1).is_none());
    }

    #[test]
    fn peer_proof_only_states_leak_no_raw_strings() {
        let spec = MissionSpec::foraging(8);
        let (tree, secrets) = encode_mission(&spec).unwrap();
        let mut state = init_robot_view(&tree);
        for i in 0..8 {
            let proof = proof_for(&secrets, &tree, i);
            assert_eq!(state.apply_peer_proof(&proof), ProofOutcome::Accepted);
        }
        assert!(state.is_complete());

        let json = serde_json::to_string(&state).unwrap();
        for op in &spec.operations {
            assert!(!json.contains(&op.sensor), "leaked {:?}", op.sensor);
            assert!(!json.contains(&op.action), "leaked {:?}", op.action);
        }
    }

    #[test]
    fn mission_file_round_trip() {
        let mut spec = MissionSpec::foraging(4);
        spec.label = Some("demo".to_string());
        spec.seed = 7;
        let mut buf = Vec::new();
        write_mission(&spec, &mut buf).unwrap();
        let loaded = read_mission(&mut buf.as_slice()).unwrap();
        assert_eq!(loaded.operations, spec.operations);
        assert_eq!(loaded.seed, 7);

        let (tree_a, _) = encode_mission(&spec).unwrap();
        let (tree_b, _) = encode_mission(&loaded).unwrap();
        assert_eq!(tree_a.root(), tree_b.root());
    }
}
