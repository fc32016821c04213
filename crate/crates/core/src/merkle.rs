//! SHA-256 hash trees over mission operations, inclusion proofs, and the
//! binary tree/proof file formats.
//!
//! Leaves are padded to the next power of two so every level halves cleanly.
//! A proof for operation `i` carries the two preimage hashes (`h_s`, `h_a`)
//! plus one sibling digest per level, so its total hash count is
//! `log2(n_padded) + 2`.

use std::fmt;
use std::io::{self, Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest as _, Sha256};
use thiserror::Error;

/// SHA-256 output size in bytes (|H|).
pub const HASH_SIZE: usize = 32;

const TREE_MAGIC: &[u8; 4] = b"MTRE";
const PROOF_MAGIC: &[u8; 4] = b"MTPF";
const FILE_VERSION: u8 = 0x01;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MerkleError {
    #[error("empty mission")]
    EmptyMission,
    #[error("operation index {index} out of range (n = {n})")]
    IndexOutOfRange { index: u32, n: usize },
    #[error("unknown preimage for operation {0}")]
    UnknownPreimage(u32),
    #[error("leaf count must be at least 1")]
    ZeroLeaves,
}

/// Errors reading or writing the binary tree/proof files.
#[derive(Debug, Error)]
pub enum FileFormatError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("bad magic, not a {0} file")]
    BadMagic(&'static str),
    #[error("unsupported file version {0}")]
    BadVersion(u8),
    #[error("malformed file: {0}")]
    Malformed(&'static str),
}

/// A 32-byte SHA-256 digest. Equality is byte-wise.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Digest32(pub [u8; HASH_SIZE]);

impl Digest32 {
    pub fn as_bytes(&self) -> &[u8; HASH_SIZE] {
        &self.0
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.0)
    }
}

impl fmt::Display for Digest32 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl fmt::Debug for Digest32 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Digest32({})", self.to_hex())
    }
}

impl FromStr for Digest32 {
    type Err = hex::FromHexError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut bytes = [0u8; HASH_SIZE];
        hex::decode_to_slice(s, &mut bytes)?;
        Ok(Digest32(bytes))
    }
}

impl Serialize for Digest32 {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_hex())
    }
}

impl<'de> Deserialize<'de> for Digest32 {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// SHA-256 of an arbitrary byte string. Empty input is allowed.
pub fn hash_bytes(data: &[u8]) -> Digest32 {
    Digest32(Sha256::digest(data).into())
}

/// Hash of the 64-byte concatenation `left || right`.
pub fn hash_pair(left: &Digest32, right: &Digest32) -> Digest32 {
    let mut hasher = Sha256::new();
    hasher.update(left.0);
    hasher.update(right.0);
    Digest32(hasher.finalize().into())
}

/// Leaf digest for one operation: `H(h_s || h_a)`, sensor hash first.
pub fn make_leaf(h_s: &Digest32, h_a: &Digest32) -> Digest32 {
    hash_pair(h_s, h_a)
}

/// Digest used to fill leaf slots beyond the real operation count: the
/// SHA-256 of the empty byte string, placed directly as the leaf hash.
pub fn padding_leaf() -> Digest32 {
    hash_bytes(&[])
}

/// Which child the proven node is at a given level. The sibling digest in the
/// path entry sits on the opposite side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChildSide {
    Left,
    Right,
}

impl ChildSide {
    pub fn wire_byte(self) -> u8 {
        match self {
            ChildSide::Left => 0,
            ChildSide::Right => 1,
        }
    }

    pub fn from_wire_byte(b: u8) -> Option<Self> {
        match b {
            0 => Some(ChildSide::Left),
            1 => Some(ChildSide::Right),
            _ => None,
        }
    }
}

/// One step of an inclusion proof: the proven node's side at this level and
/// the sibling digest needed to compute the parent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathEntry {
    pub side: ChildSide,
    pub sibling: Digest32,
}

/// Inclusion proof for the operation at `op_index`: the two preimage hashes
/// plus the sibling path from leaf to root. Total hash count is
/// `path.len() + 2`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Proof {
    pub op_index: u32,
    pub h_s: Digest32,
    pub h_a: Digest32,
    pub path: Vec<PathEntry>,
}

impl Proof {
    /// Number of 32-byte hashes carried by this proof (path plus h_s, h_a).
    pub fn hash_count(&self) -> usize {
        self.path.len() + 2
    }
}

/// Padded binary hash tree. `levels[0]` holds the padded leaves; each level
/// above halves the count down to the single root digest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MerkleTree {
    leaf_count_real: usize,
    leaf_count_padded: usize,
    levels: Vec<Vec<Digest32>>,
}

impl MerkleTree {
    /// Real (unpadded) operation count n.
    pub fn leaf_count(&self) -> usize {
        self.leaf_count_real
    }

    /// Padded leaf count: the smallest power of two >= n.
    pub fn padded_leaf_count(&self) -> usize {
        self.leaf_count_padded
    }

    /// Number of levels, leaves included: log2(n_padded) + 1.
    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    /// Sibling hops from a leaf to the root: log2(n_padded).
    pub fn path_len(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn root(&self) -> Digest32 {
        self.levels[self.levels.len() - 1][0]
    }

    pub fn leaf(&self, index: usize) -> Option<&Digest32> {
        self.levels[0].get(index)
    }

    pub fn levels(&self) -> &[Vec<Digest32>] {
        &self.levels
    }
}

/// Builds the padded tree bottom-up over the given leaf digests.
pub fn build_tree(leaves: &[Digest32]) -> Result<MerkleTree, MerkleError> {
    if leaves.is_empty() {
        return Err(MerkleError::EmptyMission);
    }
    let n = leaves.len();
    let padded = n.next_power_of_two();

    let mut level: Vec<Digest32> = leaves.to_vec();
    level.resize(padded, padding_leaf());

    let mut levels = Vec::with_capacity(padded.trailing_zeros() as usize + 1);
    levels.push(level);
    while levels.last().unwrap().len() > 1 {
        let below = levels.last().unwrap();
        let above: Vec<Digest32> = below
            .chunks_exact(2)
            .map(|pair| hash_pair(&pair[0], &pair[1]))
            .collect();
        levels.push(above);
    }

    Ok(MerkleTree {
        leaf_count_real: n,
        leaf_count_padded: padded,
        levels,
    })
}

/// Total hash count of a proof for a mission of n operations:
/// `log2(n_padded) + 2`.
pub fn proof_length(n: usize) -> Result<usize, MerkleError> {
    if n == 0 {
        return Err(MerkleError::ZeroLeaves);
    }
    Ok(n.next_power_of_two().trailing_zeros() as usize + 2)
}

/// Generates the inclusion proof for `op_index`, given the raw preimage
/// hashes. Fails if the index is out of range or `H(h_s || h_a)` does not
/// match the stored leaf.
pub fn gen_proof(
    tree: &MerkleTree,
    op_index: u32,
    h_s: &Digest32,
    h_a: &Digest32,
) -> Result<Proof, MerkleError> {
    let idx = op_index as usize;
    if idx >= tree.leaf_count_real {
        return Err(MerkleError::IndexOutOfRange {
            index: op_index,
            n: tree.leaf_count_real,
        });
    }
    if make_leaf(h_s, h_a) != tree.levels[0][idx] {
        return Err(MerkleError::UnknownPreimage(op_index));
    }

    let mut path = Vec::with_capacity(tree.path_len());
    let mut pos = idx;
    for level in &tree.levels[..tree.levels.len() - 1] {
        let side = if pos & 1 == 0 {
            ChildSide::Left
        } else {
            ChildSide::Right
        };
        path.push(PathEntry {
            side,
            sibling: level[pos ^ 1],
        });
        pos >>= 1;
    }

    Ok(Proof {
        op_index,
        h_s: *h_s,
        h_a: *h_a,
        path,
    })
}

/// Recomputes the root bottom-up from the proof and compares it against
/// `expected_root`. Also checks that the path side bits encode `op_index`,
/// so a valid proof replayed under a different index fails.
pub fn verify_proof(expected_root: &Digest32, proof: &Proof) -> bool {
    if proof.path.len() >= 32 {
        // op_index is a u32; longer paths cannot encode it.
        return false;
    }

    let mut current = make_leaf(&proof.h_s, &proof.h_a);
    let mut reconstructed_index: u32 = 0;
    for (level, entry) in proof.path.iter().enumerate() {
        match entry.side {
            ChildSide::Left => current = hash_pair(&current, &entry.sibling),
            ChildSide::Right => {
                current = hash_pair(&entry.sibling, &current);
                reconstructed_index |= 1 << level;
            }
        }
    }

    current == *expected_root && reconstructed_index == proof.op_index
}

// ---------------------------------------------------------------------------
// Binary file formats.
//
// Tree file: magic "MTRE", version 0x01, u32-le n, u32-le n_padded, then all
// levels bottom-up as raw 32-byte digests.
//
// Proof file: magic "MTPF", version 0x01, u32-le op_index, h_s, h_a,
// u8 path_len, then path entries (u8 side: 0 = proven node is the left child,
// 1 = right child; followed by the 32-byte sibling digest).
// ---------------------------------------------------------------------------

pub fn write_tree<W: Write>(tree: &MerkleTree, w: &mut W) -> Result<(), FileFormatError> {
    w.write_all(TREE_MAGIC)?;
    w.write_all(&[FILE_VERSION])?;
    w.write_all(&(tree.leaf_count_real as u32).to_le_bytes())?;
    w.write_all(&(tree.leaf_count_padded as u32).to_le_bytes())?;
    for level in &tree.levels {
        for digest in level {
            w.write_all(&digest.0)?;
        }
    }
    Ok(())
}

pub fn read_tree<R: Read>(r: &mut R) -> Result<MerkleTree, FileFormatError> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != TREE_MAGIC {
        return Err(FileFormatError::BadMagic("tree"));
    }
    let version = read_u8(r)?;
    if version != FILE_VERSION {
        return Err(FileFormatError::BadVersion(version));
    }
    let n = read_u32(r)? as usize;
    let padded = read_u32(r)? as usize;
    if n == 0 || !padded.is_power_of_two() || padded < n || padded != n.next_power_of_two() {
        return Err(FileFormatError::Malformed("leaf counts"));
    }

    let mut levels = Vec::new();
    let mut count = padded;
    loop {
        let mut level = Vec::with_capacity(count);
        for _ in 0..count {
            level.push(read_digest(r)?);
        }
        levels.push(level);
        if count == 1 {
            break;
        }
        count /= 2;
    }

    // Stored interior hashes must be consistent with the leaves.
    for k in 1..levels.len() {
        for (pos, parent) in levels[k].iter().enumerate() {
            if *parent != hash_pair(&levels[k - 1][2 * pos], &levels[k - 1][2 * pos + 1]) {
                return Err(FileFormatError::Malformed("interior hash mismatch"));
            }
        }
    }

    Ok(MerkleTree {
        leaf_count_real: n,
        leaf_count_padded: padded,
        levels,
    })
}

pub fn write_proof<W: Write>(proof: &Proof, w: &mut W) -> Result<(), FileFormatError> {
    w.write_all(PROOF_MAGIC)?;
    w.write_all(&[FILE_VERSION])?;
    w.write_all(&proof.op_index.to_le_bytes())?;
    w.write_all(&proof.h_s.0)?;
    w.write_all(&proof.h_a.0)?;
    w.write_all(&[proof.path.len() as u8])?;
    for entry in &proof.path {
        w.write_all(&[entry.side.wire_byte()])?;
        w.write_all(&entry.sibling.0)?;
    }
    Ok(())
}

pub fn read_proof<R: Read>(r: &mut R) -> Result<Proof, FileFormatError> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != PROOF_MAGIC {
        return Err(FileFormatError::BadMagic("proof"));
    }
    let version = read_u8(r)?;
    if version != FILE_VERSION {
        return Err(FileFormatError::BadVersion(version));
    }
    let op_index = read_u32(r)?;
    let h_s = read_digest(r)?;
    let h_a = read_digest(r)?;
    let path_len = read_u8(r)? as usize;
    let mut path = Vec::with_capacity(path_len);
    for _ in 0..path_len {
        let side = ChildSide::from_wire_byte(read_u8(r)?)
            .ok_or(FileFormatError::Malformed("side byte"))?;
        path.push(PathEntry {
            side,
            sibling: read_digest(r)?,
        });
    }
    Ok(Proof {
        op_index,
        h_s,
        h_a,
        path,
    })
}

fn read_u8<R: Read>(r: &mut R) -> Result<u8, FileFormatError> {
    let mut b = [0u8; 1];
    r.read_exact(&mut b)?;
    Ok(b[0])
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32, FileFormatError> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_digest<R: Read>(r: &mut R) -> Result<Digest32, FileFormatError> {
    let mut b = [0u8; HASH_SIZE];
    r.read_exact(&mut b)?;
    Ok(Digest32(b))
}
