//! Merkle-tree encoded swarm missions.
//!
//! A mission is an ordered list of operations (sensor input, action). The
//! operator commits the list into a SHA-256 hash tree and broadcasts only the
//! tree; robots then cooperate by exchanging inclusion proofs instead of raw
//! mission data. This crate provides:
//!
//! - [`merkle`]: hashing, padded binary hash trees, inclusion proofs, and the
//!   binary tree/proof file formats;
//! - [`mission`]: operator-side mission encoding and the robot-side hash-only
//!   mission state;
//! - [`protocol`]: the beacon/query/proof wire codec and per-robot
//!   synchronization state machine;
//! - [`sim`]: a deterministic discrete-time arena simulator for the foraging
//!   and maze-formation missions;
//! - [`metrics`]: finishing-time, success-probability, communication, and
//!   information-diversity metrics over simulation runs.

pub mod merkle;
pub mod metrics;
pub mod mission;
pub mod protocol;
pub mod sim;

#[cfg(test)]
pub(crate) mod refsha;
