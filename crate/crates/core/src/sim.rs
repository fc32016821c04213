//! Deterministic discrete-time arena simulator for the two missions.
//!
//! The world advances in fixed ticks: sense, deliver messages and run
//! protocol handlers, step each robot's behavior machine, then move robots
//! with obstacle avoidance. Everything stochastic draws from one seeded RNG
//! stream, so identical (config, seed) pairs replay identical event logs.
//!
//! Mission progress is tracked two ways: each robot's local view (its
//! [`RobotMissionState`](crate::mission::RobotMissionState)) and the
//! world-truth completion log, which attributes every operation to the
//! first robot that physically performed it. The world-truth log is what
//! the run record and metrics report.

use std::collections::{BTreeMap, VecDeque};
use std::f64::consts::{PI, TAU};
use std::io::{self, Write};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::merkle::{proof_length, MerkleTree};
use crate::mission::{
    cell_sensor, cell_sensor_coords, encode_mission, init_robot_view, MissionError, MissionKind,
    MissionSpec, ProofOutcome, ACTION_CARRY_TO_TARGET, ACTION_STOP,
};
use crate::protocol::{Endpoint, Message};

/// Robot body radius in meters (e-puck scale).
pub const ROBOT_RADIUS: f64 = 0.035;
/// Cruising speed in m/s.
pub const ROBOT_SPEED: f64 = 0.12;
/// Per-tick probability of resampling the wander heading.
const HEADING_RESAMPLE_PROB: f64 = 0.05;
/// Arrival threshold for delivering a task at the target (foraging).
const TARGET_ARRIVAL_DIST: f64 = 0.15;
/// Arrival threshold for stopping at a cell center (maze). Must be under
/// half the minimum robot separation so only one robot can ever be inside.
const STOP_ARRIVAL_DIST: f64 = 0.03;
/// Ticks an avoidance turn stays in charge before goal seeking or heading
/// resampling resumes. Without this hold, goal-directed robots re-aim at the
/// goal every tick and can pin themselves against walls or parked robots.
const AVOID_HOLD_TICKS: u8 = 10;
/// Placement attempts before giving up.
const PLACEMENT_RETRIES: usize = 10_000;

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Mission(#[from] MissionError),
    #[error("tree does not encode this mission (root mismatch)")]
    TreeMismatch,
    #[error("robot count must be between 1 and {max}, got {got}")]
    BadRobotCount { got: usize, max: usize },
    #[error("could not place {what} after {PLACEMENT_RETRIES} attempts")]
    PlacementFailed { what: &'static str },
}

/// Arena geometry, interaction ranges, and timing. Defaults match the
/// reference setup: 2.5 m square arena on a 5x5 grid, 1 m communication
/// range, 0.35 m vision range, 0.10 m obstacle range, 5100 s time cap,
/// 0.1 s ticks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ArenaConfig {
    pub side: f64,
    pub grid: usize,
    pub c_range: f64,
    pub v_range: f64,
    pub o_range: f64,
    pub time_cap: f64,
    pub tick: f64,
}

impl Default for ArenaConfig {
    fn default() -> Self {
        ArenaConfig {
            side: 2.5,
            grid: 5,
            c_range: 1.0,
            v_range: 0.35,
            o_range: 0.10,
            time_cap: 5100.0,
            tick: 0.1,
        }
    }
}

impl ArenaConfig {
    pub fn cell_size(&self) -> f64 {
        self.side / self.grid as f64
    }

    /// Central target cell (foraging).
    pub fn target_cell(&self) -> (u32, u32) {
        ((self.grid / 2) as u32, (self.grid / 2) as u32)
    }

    pub fn cell_center(&self, cell: (u32, u32)) -> (f64, f64) {
        let cs = self.cell_size();
        (
            (cell.0 as f64 + 0.5) * cs,
            (cell.1 as f64 + 0.5) * cs,
        )
    }

    /// Grid cell containing a position, origin bottom-left.
    pub fn cell_of(&self, pos: (f64, f64)) -> (u32, u32) {
        let cs = self.cell_size();
        let clamp = |v: f64| (v.floor().max(0.0) as usize).min(self.grid - 1) as u32;
        (clamp(pos.0 / cs), clamp(pos.1 / cs))
    }

    pub fn max_ticks(&self) -> u64 {
        (self.time_cap / self.tick).round() as u64
    }
}

/// Delivery model: a message sent at tick t between robots within `c_range`
/// at tick t arrives at t + `latency_ticks` with probability
/// 1 - `drop_prob`; out of range at send time means dropped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NetConfig {
    pub latency_ticks: u64,
    pub drop_prob: f64,
}

impl Default for NetConfig {
    fn default() -> Self {
        NetConfig {
            latency_ticks: 0,
            drop_prob: 0.0,
        }
    }
}

/// Behavior state of one robot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Behavior {
    Wander,
    /// Sensed something; decide next tick whether it matches the working
    /// operation.
    Check { sensor: String },
    /// Foraging: carrying a task to the target. Maze: heading to the cell
    /// center to stop there.
    Handle {
        op_index: usize,
        sensor: String,
        action: String,
        goal: (f64, f64),
    },
    /// Maze terminal state: parked for good, radio still on.
    Stopped,
    /// Local mission view complete; keeps wandering and serving proofs.
    Done,
}

#[derive(Debug, Clone)]
pub struct Robot {
    pub id: u16,
    pub pos: (f64, f64),
    pub heading: f64,
    pub behavior: Behavior,
    pub endpoint: Endpoint,
    /// Last (cell, working index) pair already checked, to re-check only on
    /// new discoveries (maze).
    last_checked: Option<((u32, u32), usize)>,
    /// Remaining ticks of an active avoidance turn.
    avoid_ticks: u8,
}

/// A colored task cell (foraging). The marker sits at the cell center.
#[derive(Debug, Clone, Serialize)]
pub struct TaskCell {
    pub cell: (u32, u32),
    pub sensor: String,
    pub op_index: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum Event {
    /// World-truth completion: first robot to physically perform the
    /// operation.
    Completion { t: f64, robot: u16, op: u32 },
    /// A later robot performed an operation that was already done (possible
    /// only when two foraging deliveries land in the same tick).
    DuplicateCompletion { t: f64, robot: u16, op: u32 },
    ProofDelivered {
        t: f64,
        from: u16,
        to: u16,
        op: u32,
        outcome: ProofEventOutcome,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProofEventOutcome {
    Accepted,
    Rejected,
    Stale,
}

impl From<ProofOutcome> for ProofEventOutcome {
    fn from(o: ProofOutcome) -> Self {
        match o {
            ProofOutcome::Accepted => ProofEventOutcome::Accepted,
            ProofOutcome::Rejected => ProofEventOutcome::Rejected,
            ProofOutcome::Stale => ProofEventOutcome::Stale,
        }
    }
}

/// Outcome of one simulation run.
#[derive(Debug, Clone, Serialize)]
pub struct RunRecord {
    pub seed: u64,
    pub robot_count: usize,
    pub n: usize,
    pub finished: bool,
    /// Seconds until the last operation completed, or the time cap.
    pub finishing_time: f64,
    /// World-truth completions attributed per robot; sums to n iff finished.
    pub ops_per_robot: Vec<usize>,
    /// Accepted plus rejected proof deliveries.
    pub proof_exchanges: u64,
    /// Proof payload hash bytes: proof_exchanges * proof_length(n) * 32.
    pub ac_bytes: u64,
    pub beacons_sent: u64,
    pub queries_sent: u64,
    pub proofs_stale: u64,
    #[serde(skip)]
    pub events: Vec<Event>,
}

impl RunRecord {
    pub fn csv_header() -> &'static str {
        "seed,robots,n,finished,f_t_s,ac_bytes,proofs,ops_per_robot"
    }

    pub fn csv_row(&self) -> String {
        let counts: Vec<String> = self.ops_per_robot.iter().map(|c| c.to_string()).collect();
        // The clock advances in 0.1 s ticks; one decimal is exact.
        format!(
            "{},{},{},{},{:.1},{},{},\"{}\"",
            self.seed,
            self.robot_count,
            self.n,
            self.finished,
            self.finishing_time,
            self.ac_bytes,
            self.proof_exchanges,
            counts.join(",")
        )
    }

    /// Newline-delimited JSON event log.
    pub fn write_events<W: Write>(&self, w: &mut W) -> io::Result<()> {
        for event in &self.events {
            serde_json::to_writer(&mut *w, event)?;
            writeln!(w)?;
        }
        Ok(())
    }
}

struct Delivery {
    from: u16,
    to: u16,
    msg: Message,
}

pub struct World {
    pub config: ArenaConfig,
    pub kind: MissionKind,
    pub net: NetConfig,
    pub robots: Vec<Robot>,
    pub task_cells: Vec<TaskCell>,
    /// Wall cells of the maze mission, by operation index.
    pub wall_cells: Vec<(u32, u32)>,
    pub events: Vec<Event>,
    seed: u64,
    n: usize,
    completed_by: Vec<Option<u16>>,
    completed_count: usize,
    finish_time: Option<f64>,
    tick_index: u64,
    clock: f64,
    rng: ChaCha8Rng,
    due: VecDeque<Delivery>,
    future: BTreeMap<u64, Vec<Delivery>>,
}

impl World {
    /// Places robots and tasks and hands every robot its view of the tree.
    pub fn new(
        mission: &MissionSpec,
        tree: &MerkleTree,
        robot_count: usize,
        seed: u64,
    ) -> Result<World, SimError> {
        World::with_net(mission, tree, robot_count, seed, NetConfig::default())
    }

    pub fn with_net(
        mission: &MissionSpec,
        tree: &MerkleTree,
        robot_count: usize,
        seed: u64,
        net: NetConfig,
    ) -> Result<World, SimError> {
        mission.validate()?;
        let (expected, _) = encode_mission(mission)?;
        if expected.root() != tree.root() {
            return Err(SimError::TreeMismatch);
        }
        if robot_count < 1 || robot_count > u16::MAX as usize {
            return Err(SimError::BadRobotCount {
                got: robot_count,
                max: u16::MAX as usize,
            });
        }

        let config = mission.arena;
        let n = mission.n();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);

        // Foraging: one marker per operation on distinct non-target cells.
        let mut task_cells = Vec::new();
        let mut wall_cells = Vec::new();
        match mission.mission_kind {
            MissionKind::Foraging => {
                let target = config.target_cell();
                let mut free: Vec<(u32, u32)> = (0..config.grid as u32)
                    .flat_map(|x| (0..config.grid as u32).map(move |y| (x, y)))
                    .filter(|&c| c != target)
                    .collect();
                for (op_index, op) in mission.operations.iter().enumerate() {
                    if free.is_empty() {
                        return Err(SimError::PlacementFailed { what: "task cell" });
                    }
                    let pick = rng.random_range(0..free.len());
                    let cell = free.swap_remove(pick);
                    task_cells.push(TaskCell {
                        cell,
                        sensor: op.sensor.clone(),
                        op_index,
                    });
                }
            }
            MissionKind::Maze => {
                for op in &mission.operations {
                    wall_cells.push(
                        cell_sensor_coords(&op.sensor).expect("validated maze sensor"),
                    );
                }
            }
        }

        // Robots: uniform positions, non-overlapping, outside the target
        // cell in the foraging mission.
        let mut robots: Vec<Robot> = Vec::with_capacity(robot_count);
        let low = ROBOT_RADIUS;
        let high = config.side - ROBOT_RADIUS;
        for id in 0..robot_count as u16 {
            let mut placed = false;
            for _ in 0..PLACEMENT_RETRIES {
                let pos = (rng.random_range(low..high), rng.random_range(low..high));
                if mission.mission_kind == MissionKind::Foraging
                    && config.cell_of(pos) == config.target_cell()
                {
                    continue;
                }
                if robots
                    .iter()
                    .any(|r| dist(r.pos, pos) < 2.0 * ROBOT_RADIUS + 0.01)
                {
                    continue;
                }
                let heading = rng.random_range(0.0..TAU);
                robots.push(Robot {
                    id,
                    pos,
                    heading,
                    behavior: Behavior::Wander,
                    endpoint: Endpoint::new(id, init_robot_view(tree)),
                    last_checked: None,
                    avoid_ticks: 0,
                });
                placed = true;
                break;
            }
            if !placed {
                return Err(SimError::PlacementFailed { what: "robot" });
            }
        }

        Ok(World {
            config,
            kind: mission.mission_kind,
            net,
            robots,
            task_cells,
            wall_cells,
            events: Vec::new(),
            seed,
            n,
            completed_by: vec![None; n],
            completed_count: 0,
            finish_time: None,
            tick_index: 0,
            clock: 0.0,
            rng,
            due: VecDeque::new(),
            future: BTreeMap::new(),
        })
    }

    pub fn clock(&self) -> f64 {
        self.clock
    }

    pub fn tick_index(&self) -> u64 {
        self.tick_index
    }

    pub fn is_finished(&self) -> bool {
        self.completed_count == self.n
    }

    /// What the robot's sensor reports right now: the nearest in-range task
    /// marker (foraging) or the currently occupied grid cell (maze).
    pub fn sense(&self, robot: &Robot) -> Option<String> {
        match self.kind {
            MissionKind::Foraging => {
                let mut best: Option<(f64, &TaskCell)> = None;
                for task in &self.task_cells {
                    let d = dist(robot.pos, self.config.cell_center(task.cell));
                    if d <= self.config.v_range && best.is_none_or(|(bd, _)| d < bd) {
                        best = Some((d, task));
                    }
                }
                best.map(|(_, task)| task.sensor.clone())
            }
            MissionKind::Maze => {
                let (x, y) = self.config.cell_of(robot.pos);
                Some(cell_sensor(x, y))
            }
        }
    }

    /// Advances the world one tick: sense, communicate, behave, move.
    pub fn step(&mut self) {
        self.tick_index += 1;
        self.clock = self.tick_index as f64 * self.config.tick;

        let sensed: Vec<Option<String>> =
            self.robots.iter().map(|r| self.sense(r)).collect();

        self.communication_phase();
        self.behavior_phase(&sensed);
        self.kinematics_phase();
    }

    /// Runs to completion or the time cap and summarizes.
    pub fn run_to_end(&mut self) -> RunRecord {
        let max_ticks = self.config.max_ticks();
        while !self.is_finished() && self.tick_index < max_ticks {
            self.step();
        }
        self.record()
    }

    pub fn record(&self) -> RunRecord {
        let mut ops_per_robot = vec![0usize; self.robots.len()];
        for completer in self.completed_by.iter().flatten() {
            ops_per_robot[*completer as usize] += 1;
        }
        let mut proof_exchanges = 0;
        let mut beacons_sent = 0;
        let mut queries_sent = 0;
        let mut proofs_stale = 0;
        for robot in &self.robots {
            let c = robot.endpoint.counters;
            proof_exchanges += c.proofs_accepted + c.proofs_rejected;
            beacons_sent += c.beacons_sent;
            queries_sent += c.queries_sent;
            proofs_stale += c.proofs_stale;
        }
        let hashes_per_proof = proof_length(self.n).expect("n >= 1") as u64;
        RunRecord {
            seed: self.seed,
            robot_count: self.robots.len(),
            n: self.n,
            finished: self.is_finished(),
            finishing_time: self.finish_time.unwrap_or(self.config.time_cap),
            ops_per_robot,
            proof_exchanges,
            ac_bytes: proof_exchanges * hashes_per_proof * 32,
            beacons_sent,
            queries_sent,
            proofs_stale,
            events: self.events.clone(),
        }
    }

    // --- phase 2: message exchange -------------------------------------

    fn communication_phase(&mut self) {
        if let Some(mut batch) = self.future.remove(&self.tick_index) {
            self.due.extend(batch.drain(..));
        }

        // Beacons go out every tick a robot has anyone in range.
        let positions: Vec<(f64, f64)> = self.robots.iter().map(|r| r.pos).collect();
        let c_range = self.config.c_range;
        for i in 0..self.robots.len() {
            let neighbors: Vec<u16> = (0..self.robots.len())
                .filter(|&j| j != i && dist(positions[i], positions[j]) <= c_range)
                .map(|j| j as u16)
                .collect();
            if neighbors.is_empty() {
                continue;
            }
            let beacon = self.robots[i].endpoint.make_beacon();
            for to in neighbors {
                self.post(i as u16, to, beacon.clone());
            }
        }

        // Drain deliveries due this tick; replies with zero latency join the
        // same queue, so a contact can resolve a whole index gap in one tick.
        while let Some(Delivery { from, to, msg }) = self.due.pop_front() {
            let (outcome, replies) = self.robots[to as usize]
                .endpoint
                .handle(&msg, self.tick_index);
            if let (Some(outcome), Message::ProofMsg { proof, .. }) = (outcome, &msg) {
                self.events.push(Event::ProofDelivered {
                    t: self.clock,
                    from,
                    to,
                    op: proof.op_index,
                    outcome: outcome.into(),
                });
            }
            for reply in replies {
                self.post(to, from, reply);
            }
        }
    }

    /// Applies the range check and loss/latency model at send time.
    fn post(&mut self, from: u16, to: u16, msg: Message) {
        let d = dist(self.robots[from as usize].pos, self.robots[to as usize].pos);
        if d > self.config.c_range {
            return;
        }
        if self.net.drop_prob > 0.0 && self.rng.random::<f64>() < self.net.drop_prob {
            return;
        }
        let delivery = Delivery { from, to, msg };
        if self.net.latency_ticks == 0 {
            self.due.push_back(delivery);
        } else {
            self.future
                .entry(self.tick_index + self.net.latency_ticks)
                .or_default()
                .push(delivery);
        }
    }

    // --- phase 3: behavior machines ------------------------------------

    fn behavior_phase(&mut self, sensed: &[Option<String>]) {
        let World {
            robots,
            config,
            kind,
            completed_by,
            completed_count,
            finish_time,
            events,
            clock,
            n,
            ..
        } = self;

        for (idx, robot) in robots.iter_mut().enumerate() {
            let next = match std::mem::replace(&mut robot.behavior, Behavior::Wander) {
                Behavior::Stopped => Behavior::Stopped,
                Behavior::Done => {
                    if robot.endpoint.state.is_complete() {
                        Behavior::Done
                    } else {
                        Behavior::Wander
                    }
                }
                Behavior::Wander => {
                    if robot.endpoint.state.is_complete() {
                        Behavior::Done
                    } else {
                        match (&sensed[idx], *kind) {
                            (Some(sensor), MissionKind::Foraging) => Behavior::Check {
                                sensor: sensor.clone(),
                            },
                            (Some(sensor), MissionKind::Maze) => {
                                let cell = config.cell_of(robot.pos);
                                let key = (cell, robot.endpoint.state.working_index());
                                if robot.last_checked == Some(key) {
                                    Behavior::Wander
                                } else {
                                    robot.last_checked = Some(key);
                                    Behavior::Check {
                                        sensor: sensor.clone(),
                                    }
                                }
                            }
                            (None, _) => Behavior::Wander,
                        }
                    }
                }
                Behavior::Check { sensor } => {
                    let action_set = match kind {
                        MissionKind::Foraging => [ACTION_CARRY_TO_TARGET],
                        MissionKind::Maze => [ACTION_STOP],
                    };
                    match robot.endpoint.state.try_match(&sensor, &action_set) {
                        Some((action, _proof)) => {
                            let op_index = robot.endpoint.state.working_index();
                            let goal = match kind {
                                MissionKind::Foraging => {
                                    (config.side / 2.0, config.side / 2.0)
                                }
                                // Stop at the matched cell, not wherever the
                                // robot has drifted to since sensing it.
                                MissionKind::Maze => config.cell_center(
                                    cell_sensor_coords(&sensor)
                                        .expect("matched maze sensor"),
                                ),
                            };
                            Behavior::Handle {
                                op_index,
                                sensor,
                                action,
                                goal,
                            }
                        }
                        None => Behavior::Wander,
                    }
                }
                Behavior::Handle {
                    op_index,
                    sensor,
                    action,
                    goal,
                } => {
                    if robot.endpoint.state.is_completed(op_index) {
                        // A peer proved this operation done; abandon it.
                        Behavior::Wander
                    } else {
                        let arrival = match kind {
                            MissionKind::Foraging => TARGET_ARRIVAL_DIST,
                            MissionKind::Maze => STOP_ARRIVAL_DIST,
                        };
                        if dist(robot.pos, goal) <= arrival {
                            robot
                                .endpoint
                                .state
                                .mark_completed(op_index, &sensor, &action)
                                .expect("matched operation at working index");
                            if completed_by[op_index].is_none() {
                                completed_by[op_index] = Some(robot.id);
                                *completed_count += 1;
                                events.push(Event::Completion {
                                    t: *clock,
                                    robot: robot.id,
                                    op: op_index as u32,
                                });
                                if *completed_count == *n {
                                    *finish_time = Some(*clock);
                                }
                            } else {
                                events.push(Event::DuplicateCompletion {
                                    t: *clock,
                                    robot: robot.id,
                                    op: op_index as u32,
                                });
                            }
                            match kind {
                                MissionKind::Foraging => Behavior::Wander,
                                MissionKind::Maze => Behavior::Stopped,
                            }
                        } else {
                            Behavior::Handle {
                                op_index,
                                sensor,
                                action,
                                goal,
                            }
                        }
                    }
                }
            };
            robot.behavior = next;
        }
    }

    // --- phase 4: motion -------------------------------------------------

    fn kinematics_phase(&mut self) {
        let step_len = ROBOT_SPEED * self.config.tick;
        let low = ROBOT_RADIUS;
        let high = self.config.side - ROBOT_RADIUS;

        for i in 0..self.robots.len() {
            if matches!(self.robots[i].behavior, Behavior::Stopped) {
                continue;
            }

            // Goal-directed heading while handling, random walk otherwise.
            // An active avoidance turn keeps the helm until it expires.
            if self.robots[i].avoid_ticks > 0 {
                self.robots[i].avoid_ticks -= 1;
            } else {
                match self.robots[i].behavior {
                    Behavior::Handle { goal, .. } => {
                        let r = &mut self.robots[i];
                        r.heading = (goal.1 - r.pos.1).atan2(goal.0 - r.pos.0);
                    }
                    _ => {
                        if self.rng.random::<f64>() < HEADING_RESAMPLE_PROB {
                            self.robots[i].heading = self.rng.random_range(0.0..TAU);
                        }
                    }
                }
            }

            // Obstacle within range: turn away by 90..180 degrees.
            if self.obstacle_near(i) {
                let turn = self.rng.random_range(PI / 2.0..PI);
                let sign = if self.rng.random::<bool>() { 1.0 } else { -1.0 };
                self.robots[i].heading =
                    wrap_angle(self.robots[i].heading + sign * turn);
                self.robots[i].avoid_ticks = AVOID_HOLD_TICKS;
            }

            let (x, y) = self.robots[i].pos;
            let heading = self.robots[i].heading;
            let candidate = (x + step_len * heading.cos(), y + step_len * heading.sin());

            if candidate.0 < low || candidate.0 > high || candidate.1 < low || candidate.1 > high
            {
                continue;
            }
            let blocked = self
                .robots
                .iter()
                .enumerate()
                .any(|(j, other)| j != i && dist(other.pos, candidate) < 2.0 * ROBOT_RADIUS);
            if !blocked {
                self.robots[i].pos = candidate;
            }
        }
    }

    fn obstacle_near(&self, i: usize) -> bool {
        let r = &self.robots[i];
        let o_range = self.config.o_range;
        let near_wall = r.pos.0 < o_range
            || r.pos.1 < o_range
            || r.pos.0 > self.config.side - o_range
            || r.pos.1 > self.config.side - o_range;
        near_wall
            || self
                .robots
                .iter()
                .enumerate()
                .any(|(j, other)| j != i && dist(other.pos, r.pos) <= o_range)
    }
}

fn dist(a: (f64, f64), b: (f64, f64)) -> f64 {
    ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()
}

fn wrap_angle(a: f64) -> f64 {
    a.rem_euclid(TAU)
}

/// Builds the world and runs it to completion or the time cap over an ideal
/// channel.
pub fn run(
    mission: &MissionSpec,
    tree: &MerkleTree,
    robot_count: usize,
    seed: u64,
) -> Result<RunRecord, SimError> {
    run_with_net(mission, tree, robot_count, seed, NetConfig::default())
}

pub fn run_with_net(
    mission: &MissionSpec,
    tree: &MerkleTree,
    robot_count: usize,
    seed: u64,
    net: NetConfig,
) -> Result<RunRecord, SimError> {
    let mut world = World::with_net(mission, tree, robot_count, seed, net)?;
    Ok(world.run_to_end())
}
