//! Beacon/query/proof wire codec and the per-robot synchronization state
//! machine.
//!
//! Robots in contact broadcast beacons carrying their working index. A robot
//! that hears a peer with a higher index becomes the verifier: it queries for
//! its own working operation, the peer answers with an inclusion proof, and
//! the round repeats until the indices match. All functions here are pure
//! state-machine steps; scheduling and delivery belong to the caller.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::merkle::{ChildSide, Digest32, PathEntry, Proof, HASH_SIZE};
use crate::mission::{ProofOutcome, RobotMissionState};

pub const FRAME_MAGIC: [u8; 2] = [0x4D, 0x54]; // "MT"
pub const FRAME_VERSION: u8 = 1;

const TYPE_BEACON: u8 = 0x01;
const TYPE_QUERY: u8 = 0x02;
const TYPE_PROOF: u8 = 0x03;

#[derive(Debug, Error, PartialEq, Eq)]
#[error("malformed frame: {0}")]
pub struct MalformedFrame(pub &'static str);

/// The three message kinds robots exchange.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Message {
    Beacon {
        robot_id: u16,
        working_index: u32,
        root: Digest32,
    },
    Query {
        robot_id: u16,
        op_index: u32,
    },
    ProofMsg {
        robot_id: u16,
        proof: Proof,
    },
}

impl Message {
    pub fn sender(&self) -> u16 {
        match self {
            Message::Beacon { robot_id, .. }
            | Message::Query { robot_id, .. }
            | Message::ProofMsg { robot_id, .. } => *robot_id,
        }
    }
}

/// Frame layout (little-endian): magic "MT", version u8, msg_type u8,
/// payload_len u16, payload.
pub fn encode_message(m: &Message) -> Vec<u8> {
    let (msg_type, payload) = match m {
        Message::Beacon {
            robot_id,
            working_index,
            root,
        } => {
            let mut p = Vec::with_capacity(38);
            p.extend_from_slice(&robot_id.to_le_bytes());
            p.extend_from_slice(&working_index.to_le_bytes());
            p.extend_from_slice(&root.0);
            (TYPE_BEACON, p)
        }
        Message::Query { robot_id, op_index } => {
            let mut p = Vec::with_capacity(6);
            p.extend_from_slice(&robot_id.to_le_bytes());
            p.extend_from_slice(&op_index.to_le_bytes());
            (TYPE_QUERY, p)
        }
        Message::ProofMsg { robot_id, proof } => {
            let mut p = Vec::with_capacity(71 + proof.path.len() * 33);
            p.extend_from_slice(&robot_id.to_le_bytes());
            p.extend_from_slice(&proof.op_index.to_le_bytes());
            p.extend_from_slice(&proof.h_s.0);
            p.extend_from_slice(&proof.h_a.0);
            p.push(proof.path.len() as u8);
            for entry in &proof.path {
                p.push(entry.side.wire_byte());
                p.extend_from_slice(&entry.sibling.0);
            }
            (TYPE_PROOF, p)
        }
    };

    let mut frame = Vec::with_capacity(6 + payload.len());
    frame.extend_from_slice(&FRAME_MAGIC);
    frame.push(FRAME_VERSION);
    frame.push(msg_type);
    frame.extend_from_slice(&(payload.len() as u16).to_le_bytes());
    frame.extend_from_slice(&payload);
    frame
}

pub fn decode_message(bytes: &[u8]) -> Result<Message, MalformedFrame> {
    if bytes.len() < 6 {
        return Err(MalformedFrame("truncated header"));
    }
    if bytes[0..2] != FRAME_MAGIC {
        return Err(MalformedFrame("bad magic"));
    }
    if bytes[2] != FRAME_VERSION {
        return Err(MalformedFrame("bad version"));
    }
    let msg_type = bytes[3];
    let payload_len = u16::from_le_bytes([bytes[4], bytes[5]]) as usize;
    let payload = &bytes[6..];
    if payload.len() != payload_len {
        return Err(MalformedFrame("payload length mismatch"));
    }

    let mut r = Cursor { buf: payload };
    let msg = match msg_type {
        TYPE_BEACON => {
            let robot_id = r.u16()?;
            let working_index = r.u32()?;
            let root = r.digest()?;
            Message::Beacon {
                robot_id,
                working_index,
                root,
            }
        }
        TYPE_QUERY => {
            let robot_id = r.u16()?;
            let op_index = r.u32()?;
            Message::Query { robot_id, op_index }
        }
        TYPE_PROOF => {
            let robot_id = r.u16()?;
            let op_index = r.u32()?;
            let h_s = r.digest()?;
            let h_a = r.digest()?;
            let path_len = r.u8()? as usize;
            let mut path = Vec::with_capacity(path_len);
            for _ in 0..path_len {
                let side = ChildSide::from_wire_byte(r.u8()?)
                    .ok_or(MalformedFrame("bad side byte"))?;
                path.push(PathEntry {
                    side,
                    sibling: r.digest()?,
                });
            }
            Message::ProofMsg {
                robot_id,
                proof: Proof {
                    op_index,
                    h_s,
                    h_a,
                    path,
                },
            }
        }
        _ => return Err(MalformedFrame("unknown message type")),
    };
    if !r.buf.is_empty() {
        return Err(MalformedFrame("trailing bytes"));
    }
    Ok(msg)
}

struct Cursor<'a> {
    buf: &'a [u8],
}

impl Cursor<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8], MalformedFrame> {
        if self.buf.len() < n {
            return Err(MalformedFrame("truncated payload"));
        }
        let (head, tail) = self.buf.split_at(n);
        self.buf = tail;
        Ok(head)
    }

    fn u8(&mut self) -> Result<u8, MalformedFrame> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16, MalformedFrame> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32, MalformedFrame> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn digest(&mut self) -> Result<Digest32, MalformedFrame> {
        Ok(Digest32(self.take(HASH_SIZE)?.try_into().unwrap()))
    }
}

/// Per-peer synchronization bookkeeping: the peer's last advertised index,
/// at most one outstanding query, and proof byte counters.
#[derive(Debug, Clone, Default)]
pub struct SyncSession {
    pub peer_index: u32,
    outstanding: Option<OutstandingQuery>,
    pub proof_bytes_sent: u64,
    pub proof_bytes_received: u64,
}

#[derive(Debug, Clone, Copy)]
struct OutstandingQuery {
    op_index: u32,
    issued_tick: u64,
}

/// Message counters, kept per robot. Proof counts are split by verification
/// outcome on the receive side; only accepted and rejected proofs contribute
/// to the communication metric.
#[derive(Debug, Clone, Copy, Default)]
pub struct Counters {
    pub beacons_sent: u64,
    pub queries_sent: u64,
    pub proofs_sent: u64,
    pub proofs_accepted: u64,
    pub proofs_rejected: u64,
    pub proofs_stale: u64,
}

/// A robot's protocol endpoint: its mission state plus per-peer sessions.
/// `handle` consumes one inbound message and returns the messages to send,
/// so the caller fully owns scheduling and delivery.
#[derive(Debug, Clone)]
pub struct Endpoint {
    robot_id: u16,
    pub state: RobotMissionState,
    sessions: BTreeMap<u16, SyncSession>,
    pub counters: Counters,
}

impl Endpoint {
    pub fn new(robot_id: u16, state: RobotMissionState) -> Self {
        Endpoint {
            robot_id,
            state,
            sessions: BTreeMap::new(),
            counters: Counters::default(),
        }
    }

    pub fn robot_id(&self) -> u16 {
        self.robot_id
    }

    pub fn session(&self, peer: u16) -> Option<&SyncSession> {
        self.sessions.get(&peer)
    }

    /// Builds this tick's beacon.
    pub fn make_beacon(&mut self) -> Message {
        self.counters.beacons_sent += 1;
        Message::Beacon {
            robot_id: self.robot_id,
            working_index: self.state.working_index() as u32,
            root: self.state.root(),
        }
    }

    /// Processes one inbound message. Returns the verification outcome when
    /// the message was a proof, plus any replies to send.
    pub fn handle(&mut self, msg: &Message, now_tick: u64) -> (Option<ProofOutcome>, Vec<Message>) {
        match msg {
            Message::Beacon {
                robot_id,
                working_index,
                root,
            } => (None, self.on_beacon(*robot_id, *working_index, root, now_tick)),
            Message::Query { robot_id, op_index } => {
                (None, self.on_query(*robot_id, *op_index))
            }
            Message::ProofMsg { robot_id, proof } => {
                let (outcome, out) = self.on_proof(*robot_id, proof, now_tick);
                (Some(outcome), out)
            }
        }
    }

    /// A beacon from a peer on the same mission (same root) that is ahead of
    /// us triggers a query for our own working operation. At most one
    /// outstanding query per peer; an unanswered one is re-issued on the
    /// next beacon.
    fn on_beacon(
        &mut self,
        peer: u16,
        peer_index: u32,
        root: &Digest32,
        now_tick: u64,
    ) -> Vec<Message> {
        if *root != self.state.root() {
            // Foreign swarm; ignore.
            return Vec::new();
        }
        let session = self.sessions.entry(peer).or_default();
        session.peer_index = peer_index;

        let own_index = self.state.working_index() as u32;
        if own_index >= peer_index {
            return Vec::new();
        }
        let may_issue = match session.outstanding {
            None => true,
            Some(q) => q.issued_tick < now_tick,
        };
        if !may_issue {
            return Vec::new();
        }
        session.outstanding = Some(OutstandingQuery {
            op_index: own_index,
            issued_tick: now_tick,
        });
        self.counters.queries_sent += 1;
        vec![Message::Query {
            robot_id: self.robot_id,
            op_index: own_index,
        }]
    }

    /// Answers a query with a proof if the requested operation is completed
    /// with any evidence; hash-pair evidence learned from peers is enough to
    /// re-prove.
    fn on_query(&mut self, peer: u16, op_index: u32) -> Vec<Message> {
        let Some(proof) = self.state.prove(op_index as usize) else {
            return Vec::new();
        };
        let session = self.sessions.entry(peer).or_default();
        session.proof_bytes_sent += (proof.hash_count() * HASH_SIZE) as u64;
        self.counters.proofs_sent += 1;
        vec![Message::ProofMsg {
            robot_id: self.robot_id,
            proof,
        }]
    }

    /// Verifies a received proof. While this robot is still behind the
    /// sending peer's last advertised index, the next query goes out
    /// immediately, so a contact session drains the whole gap.
    fn on_proof(
        &mut self,
        peer: u16,
        proof: &Proof,
        now_tick: u64,
    ) -> (ProofOutcome, Vec<Message>) {
        let outcome = self.state.apply_peer_proof(proof);
        let own_index = self.state.working_index() as u32;
        let session = self.sessions.entry(peer).or_default();

        if outcome != ProofOutcome::Stale {
            session.proof_bytes_received += (proof.hash_count() * HASH_SIZE) as u64;
        }
        match outcome {
            ProofOutcome::Accepted => self.counters.proofs_accepted += 1,
            ProofOutcome::Rejected => self.counters.proofs_rejected += 1,
            ProofOutcome::Stale => self.counters.proofs_stale += 1,
        }

        // Resolve the outstanding query if this proof covered it.
        if let Some(q) = session.outstanding {
            if q.op_index == proof.op_index || own_index > q.op_index {
                session.outstanding = None;
            }
        }

        if outcome == ProofOutcome::Rejected {
            // Bad prover; stop the session. A later beacon may retry.
            return (outcome, Vec::new());
        }

        let mut out = Vec::new();
        if own_index < session.peer_index {
            session.outstanding = Some(OutstandingQuery {
                op_index: own_index,
                issued_tick: now_tick,
            });
            self.counters.queries_sent += 1;
            out.push(Message::Query {
                robot_id: self.robot_id,
                op_index: own_index,
            });
        }
        (outcome, out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::merkle::{gen_proof, proof_length};
    use crate::mission::{
        encode_mission, encode_operation, init_robot_view, MissionSpec, OperatorSecrets,
    };
    use crate::merkle::MerkleTree;
    use proptest::prelude::*;

    fn mission(n: usize) -> (MerkleTree, OperatorSecrets) {
        encode_mission(&MissionSpec::foraging(n)).unwrap()
    }

    fn endpoint_at(id: u16, tree: &MerkleTree, secrets: &OperatorSecrets, index: usize) -> Endpoint {
        let mut state = init_robot_view(tree);
        for i in 0..index {
            let op = secrets.operation(i).unwrap();
            state.mark_completed(i, &op.sensor, &op.action).unwrap();
        }
        Endpoint::new(id, state)
    }

    #[test]
    fn beacon_frame_is_44_bytes() {
        let (tree, _) = mission(4);
        let m = Message::Beacon {
            robot_id: 7,
            working_index: 3,
            root: tree.root(),
        };
        let bytes = encode_message(&m);
        assert_eq!(bytes.len(), 44);
        assert_eq!(decode_message(&bytes).unwrap(), m);
    }

    #[test]
    fn query_round_trips() {
        let m = Message::Query {
            robot_id: 1,
            op_index: 5,
        };
        assert_eq!(decode_message(&encode_message(&m)).unwrap(), m);
    }

    #[test]
    fn malformed_frames_are_rejected() {
        let (tree, secrets) = mission(4);
        let op = secrets.operation(0).unwrap();
        let (h_s, h_a, _) = encode_operation(op).unwrap();
        let proof = gen_proof(&tree, 0, &h_s, &h_a).unwrap();
        let good = encode_message(&Message::ProofMsg { robot_id: 2, proof });

        assert!(decode_message(&good[..5]).is_err());
        assert!(decode_message(&good[..good.len() - 1]).is_err());

        let mut bad_magic = good.clone();
        bad_magic[0] = 0x00;
        assert_eq!(
            decode_message(&bad_magic).unwrap_err(),
            MalformedFrame("bad magic")
        );

        let mut bad_version = good.clone();
        bad_version[2] = 2;
        assert!(decode_message(&bad_version).is_err());

        let mut bad_type = good.clone();
        bad_type[3] = 9;
        assert!(decode_message(&bad_type).is_err());

        let mut bad_len = good.clone();
        bad_len[4] ^= 0x01;
        assert!(decode_message(&bad_len).is_err());
    }

    proptest! {
        #[test]
        fn codec_round_trip(
            robot_id in any::<u16>(),
            op_index in 0u32..1_048_576,
            path_len in 0usize..=20,
            seed in any::<u64>(),
        ) {
            let mut digest = [0u8; 32];
            digest[..8].copy_from_slice(&seed.to_le_bytes());
            let path: Vec<PathEntry> = (0..path_len)
                .map(|i| PathEntry {
                    side: if (op_index >> i) & 1 == 0 { ChildSide::Left } else { ChildSide::Right },
                    sibling: Digest32(digest),
                })
                .collect();
            let messages = [
                Message::Beacon { robot_id, working_index: op_index, root: Digest32(digest) },
                Message::Query { robot_id, op_index },
                Message::ProofMsg {
                    robot_id,
                    proof: Proof { op_index, h_s: Digest32(digest), h_a: Digest32(digest), path },
                },
            ];
            for m in messages {
                let bytes = encode_message(&m);
                // Frames stay small even for million-operation missions.
                prop_assert!(bytes.len() <= 1024);
                prop_assert_eq!(decode_message(&bytes).unwrap(), m);
            }
        }
    }

    #[test]
    fn beacon_disparity_triggers_query() {
        let (tree, secrets) = mission(4);
        let mut verifier = endpoint_at(0, &tree, &secrets, 0);
        let mut prover = endpoint_at(1, &tree, &secrets, 2);

        let beacon = prover.make_beacon();
        let (_, out) = verifier.handle(&beacon, 0);
        assert_eq!(
            out,
            vec![Message::Query {
                robot_id: 0,
                op_index: 0
            }]
        );

        // Same index: no disparity, nothing sent.
        let mut equal = endpoint_at(2, &tree, &secrets, 2);
        let beacon = prover.make_beacon();
        let (_, out) = equal.handle(&beacon, 0);
        assert!(out.is_empty());

        // Re-beacon in the same tick does not duplicate the query.
        let beacon = prover.make_beacon();
        let (_, out) = verifier.handle(&beacon, 0);
        assert!(out.is_empty());
    }

    #[test]
    fn foreign_root_is_ignored() {
        let (tree, secrets) = mission(4);
        let (other_tree, other_secrets) = mission(8);
        let mut verifier = endpoint_at(0, &tree, &secrets, 0);
        let mut foreign = endpoint_at(9, &other_tree, &other_secrets, 3);

        let beacon = foreign.make_beacon();
        let (_, out) = verifier.handle(&beacon, 0);
        assert!(out.is_empty());
        assert!(verifier.session(9).is_none());
    }

    #[test]
    fn query_answered_only_for_completed_ops() {
        let (tree, secrets) = mission(4);
        let mut prover = endpoint_at(1, &tree, &secrets, 2);

        let (_, out) = prover.handle(
            &Message::Query {
                robot_id: 0,
                op_index: 1,
            },
            0,
        );
        assert_eq!(out.len(), 1);
        let Message::ProofMsg { proof, .. } = &out[0] else {
            panic!("expected proof");
        };
        assert_eq!(proof.op_index, 1);

        let (_, out) = prover.handle(
            &Message::Query {
                robot_id: 0,
                op_index: 3,
            },
            0,
        );
        assert!(out.is_empty());
    }

    #[test]
    fn hash_pair_holder_reproves_two_hop_gossip() {
        let (tree, secrets) = mission(4);
        let mut source = endpoint_at(0, &tree, &secrets, 1);
        let mut relay = endpoint_at(1, &tree, &secrets, 0);
        let mut sink = endpoint_at(2, &tree, &secrets, 0);

        // Hop 1: relay learns op 0 from source.
        let (_, proofs) = source.handle(
            &Message::Query {
                robot_id: 1,
                op_index: 0,
            },
            0,
        );
        let (outcome, _) = relay.handle(&proofs[0], 0);
        assert_eq!(outcome, Some(ProofOutcome::Accepted));

        // Hop 2: relay re-proves op 0 to the sink from hash-pair evidence.
        let (_, reproofs) = relay.handle(
            &Message::Query {
                robot_id: 2,
                op_index: 0,
            },
            1,
        );
        assert_eq!(reproofs.len(), 1);
        let (outcome, _) = sink.handle(&reproofs[0], 1);
        assert_eq!(outcome, Some(ProofOutcome::Accepted));
    }

    /// Runs verifier/prover to quiescence over a perfect channel, returning
    /// the number of proof messages delivered.
    fn drain(verifier: &mut Endpoint, prover: &mut Endpoint, tick: u64) -> usize {
        let mut proofs = 0;
        let beacon = prover.make_beacon();
        let (_, mut pending) = verifier.handle(&beacon, tick);
        while let Some(msg) = pending.pop() {
            match &msg {
                Message::Query { .. } => {
                    let (_, replies) = prover.handle(&msg, tick);
                    pending.extend(replies);
                }
                Message::ProofMsg { .. } => {
                    proofs += 1;
                    let (_, replies) = verifier.handle(&msg, tick);
                    pending.extend(replies);
                }
                Message::Beacon { .. } => unreachable!(),
            }
        }
        proofs
    }

    #[test]
    fn pairwise_convergence_costs_exactly_the_gap() {
        let (tree, secrets) = mission(8);
        for (behind, ahead) in [(0usize, 3usize), (2, 7), (0, 8), (5, 6)] {
            let mut verifier = endpoint_at(0, &tree, &secrets, behind);
            let mut prover = endpoint_at(1, &tree, &secrets, ahead);
            let proofs = drain(&mut verifier, &mut prover, 0);
            assert_eq!(proofs, ahead - behind);
            assert_eq!(verifier.state.working_index(), ahead);

            // AC accounting: accepted+rejected proofs, P_l hashes each.
            let expected_bytes =
                (proofs * proof_length(8).unwrap() * HASH_SIZE) as u64;
            assert_eq!(
                verifier.session(1).unwrap().proof_bytes_received,
                expected_bytes
            );
            assert_eq!(verifier.counters.proofs_accepted, proofs as u64);
            assert_eq!(verifier.counters.proofs_rejected, 0);
        }
    }

    #[test]
    fn malicious_prover_never_advances_verifier() {
        let (tree, secrets) = mission(4);
        let mut verifier = endpoint_at(0, &tree, &secrets, 0);
        let mut prover = endpoint_at(1, &tree, &secrets, 4);

        for tick in 0..20u64 {
            let beacon = prover.make_beacon();
            let (_, queries) = verifier.handle(&beacon, tick);
            for q in queries {
                let (_, replies) = prover.handle(&q, tick);
                for reply in replies {
                    let Message::ProofMsg { robot_id, mut proof } = reply else {
                        panic!("expected proof");
                    };
                    // Tamper a different field every round.
                    match tick % 3 {
                        0 => proof.h_s.0[0] ^= 0x01,
                        1 => proof.path[0].sibling.0[31] ^= 0x80,
                        _ => proof.op_index ^= 0x2,
                    }
                    let (outcome, out) =
                        verifier.handle(&Message::ProofMsg { robot_id, proof }, tick);
                    assert_eq!(outcome, Some(ProofOutcome::Rejected));
                    assert!(out.is_empty());
                }
            }
        }
        assert_eq!(verifier.state.working_index(), 0);
        assert_eq!(verifier.counters.proofs_accepted, 0);
        assert!(verifier.counters.proofs_rejected > 0);
    }

    #[test]
    fn stale_proof_retargets_next_query() {
        let (tree, secrets) = mission(4);
        let mut verifier = endpoint_at(0, &tree, &secrets, 0);
        let mut prover = endpoint_at(1, &tree, &secrets, 3);

        let beacon = prover.make_beacon();
        let (_, queries) = verifier.handle(&beacon, 0);
        let (_, proofs) = prover.handle(&queries[0], 0);

        // Verifier completes op 0 itself while the proof is in flight.
        let op = secrets.operation(0).unwrap();
        verifier
            .state
            .mark_completed(0, &op.sensor, &op.action)
            .unwrap();

        let (outcome, out) = verifier.handle(&proofs[0], 0);
        assert_eq!(outcome, Some(ProofOutcome::Stale));
        assert_eq!(
            out,
            vec![Message::Query {
                robot_id: 0,
                op_index: 1
            }]
        );
    }
}
