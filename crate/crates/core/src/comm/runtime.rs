//! Protocol execution: sessions, modes, and verified outcomes.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use super::ledger::{Endpoint, MessageLedger, Payload};
use super::tape::RandomTape;
use crate::graph::{Edge, EdgePartition, Graph, PlayerId, PlayerInput, Triangle};
use crate::oracle::first_triangle;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Private channels between each player and the coordinator.
    Coordinator,
    /// Every message is posted once and seen by all.
    Blackboard,
    /// One round; each player sends a single message to a referee.
    Simultaneous,
    /// Three players; the first two each send one message to the third.
    OneWayThree,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Coordinator => "coordinator",
            Mode::Blackboard => "blackboard",
            Mode::Simultaneous => "simultaneous",
            Mode::OneWayThree => "one_way_three",
        })
    }
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "coordinator" => Ok(Mode::Coordinator),
            "blackboard" => Ok(Mode::Blackboard),
            "simultaneous" => Ok(Mode::Simultaneous),
            "one_way_three" | "one-way-three" => Ok(Mode::OneWayThree),
            other => Err(format!("unknown mode `{other}`")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    TriangleFound(Triangle),
    NoTriangleFound,
}

impl Verdict {
    pub fn found(&self) -> bool {
        matches!(self, Verdict::TriangleFound(_))
    }
}

/// Counters a protocol may report besides its messages.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct RunStats {
    /// Messages subject to a size cap.
    pub capped_messages: u64,
    /// Of those, the ones whose content exceeded the cap.
    pub cap_hits: u64,
}

impl RunStats {
    pub fn record_cap(&mut self, hit: bool) {
        self.capped_messages += 1;
        self.cap_hits += u64::from(hit);
    }

    pub fn cap_hit_rate(&self) -> f64 {
        if self.capped_messages == 0 {
            0.0
        } else {
            self.cap_hits as f64 / self.capped_messages as f64
        }
    }
}

#[derive(Clone, Debug)]
pub struct ProtocolOutcome {
    pub verdict: Verdict,
    pub ledger: MessageLedger,
    pub stats: RunStats,
}

impl ProtocolOutcome {
    pub fn total_bits(&self) -> u64 {
        self.ledger.total_bits()
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RuntimeError {
    #[error("protocol `{protocol}` cannot run in {mode} mode")]
    ModeMismatch { protocol: String, mode: Mode },
    #[error("protocol returned {0}, which is not a triangle of the input")]
    InvalidWitness(Triangle),
    #[error("protocol `{0}` is not simultaneous")]
    NotSimultaneous(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProtocolKind {
    Interactive,
    Simultaneous,
}

/// State of one protocol run. Protocols see the players' inputs only through
/// [`Session::part`]; the assembled graph stays hidden.
pub struct Session<'a> {
    partition: &'a EdgePartition,
    mode: Mode,
    tape: RandomTape,
    ledger: MessageLedger,
    stats: RunStats,
}

impl<'a> Session<'a> {
    pub fn new(partition: &'a EdgePartition, mode: Mode, tape: RandomTape, record_transcript: bool) -> Self {
        let ledger = MessageLedger::new(partition.n(), partition.k(), record_transcript);
        Session { partition, mode, tape, ledger, stats: RunStats::default() }
    }

    pub fn n(&self) -> usize {
        self.partition.n()
    }

    pub fn k(&self) -> usize {
        self.partition.k()
    }

    pub fn part(&self, player: PlayerId) -> &'a PlayerInput {
        self.partition.part(player)
    }

    pub fn parts(&self) -> &'a [PlayerInput] {
        self.partition.parts()
    }

    /// Whether the inputs are promised to be disjoint. Public knowledge.
    pub fn no_duplication(&self) -> bool {
        self.partition.no_duplication()
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn tape(&mut self) -> &mut RandomTape {
        &mut self.tape
    }

    pub fn ledger(&self) -> &MessageLedger {
        &self.ledger
    }

    pub fn ledger_mut(&mut self) -> &mut MessageLedger {
        &mut self.ledger
    }

    pub fn stats_mut(&mut self) -> &mut RunStats {
        &mut self.stats
    }

    pub fn next_round(&mut self) {
        self.ledger.next_round();
    }

    fn hub(&self) -> Endpoint {
        match self.mode {
            Mode::Blackboard => Endpoint::Board,
            Mode::Simultaneous | Mode::OneWayThree => Endpoint::Referee,
            Mode::Coordinator => Endpoint::Coordinator,
        }
    }

    /// Player `j` talks to the coordinator (or posts on the board).
    pub fn send_up(&mut self, player: PlayerId, payload: Payload, tag: &str) -> u64 {
        let hub = self.hub();
        self.ledger.charge(Endpoint::Player(player), hub, payload, tag)
    }

    /// Player `j` sends `count` copies of `payload` upward.
    pub fn send_up_repeated(&mut self, player: PlayerId, payload: Payload, count: u64, tag: &str) -> u64 {
        let hub = self.hub();
        self.ledger.charge_repeated(Endpoint::Player(player), hub, payload, count, tag)
    }

    /// Every player sends `count` copies of `payload` upward.
    pub fn all_send_up(&mut self, payload: Payload, count: u64, tag: &str) -> u64 {
        let hub = self.hub();
        self.ledger.charge_repeated(Endpoint::AllPlayers, hub, payload, count, tag)
    }

    /// The coordinator addresses a single player.
    pub fn send_down(&mut self, player: PlayerId, payload: Payload, tag: &str) -> u64 {
        match self.mode {
            Mode::Blackboard => self.ledger.charge(Endpoint::Coordinator, Endpoint::Board, payload, tag),
            _ => self.ledger.charge(Endpoint::Coordinator, Endpoint::Player(player), payload, tag),
        }
    }

    /// The coordinator tells every player the same thing: `k` messages, or
    /// one post on the board.
    pub fn broadcast(&mut self, payload: Payload, tag: &str) -> u64 {
        match self.mode {
            Mode::Blackboard => self.ledger.charge(Endpoint::Coordinator, Endpoint::Board, payload, tag),
            _ => self.ledger.charge_repeated(Endpoint::Coordinator, Endpoint::AllPlayers, payload, self.k() as u64, tag),
        }
    }

    fn finish(self, verdict: Verdict) -> ProtocolOutcome {
        ProtocolOutcome { verdict, ledger: self.ledger, stats: self.stats }
    }
}

/// An executable protocol. Implementations must be deterministic given the
/// session's tape.
pub trait Protocol: Sync {
    fn name(&self) -> String;
    fn kind(&self) -> ProtocolKind;
    fn supports(&self, mode: Mode) -> bool;
    fn execute(&self, session: &mut Session<'_>) -> Verdict;
}

pub fn run_protocol(
    partition: &EdgePartition,
    protocol: &dyn Protocol,
    mode: Mode,
    tape: RandomTape,
) -> Result<ProtocolOutcome, RuntimeError> {
    run_protocol_with(partition, protocol, mode, tape, false)
}

/// Runs `protocol`, recording the full transcript when asked. A returned
/// witness is checked against the real graph, so a `TriangleFound` verdict
/// always names a triangle of the input.
pub fn run_protocol_with(
    partition: &EdgePartition,
    protocol: &dyn Protocol,
    mode: Mode,
    tape: RandomTape,
    record_transcript: bool,
) -> Result<ProtocolOutcome, RuntimeError> {
    if !protocol.supports(mode) {
        return Err(RuntimeError::ModeMismatch { protocol: protocol.name(), mode });
    }
    let mut session = Session::new(partition, mode, tape, record_transcript);
    let verdict = protocol.execute(&mut session);
    if let Verdict::TriangleFound(t) = verdict {
        if !partition.graph().has_triangle(t) {
            return Err(RuntimeError::InvalidWitness(t));
        }
    }
    Ok(session.finish(verdict))
}

/// One part of a simultaneous message.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Content {
    Edges(Vec<Edge>),
    Bit(bool),
    Empty,
}

impl Content {
    pub fn payload(&self) -> Payload {
        match self {
            Content::Edges(e) => Payload::EdgeList(e.len()),
            Content::Bit(_) => Payload::Bit,
            Content::Empty => Payload::Empty,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Block {
    pub tag: String,
    pub content: Content,
    /// `Some(hit)` when the block was subject to a size cap.
    pub cap_hit: Option<bool>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Message {
    pub blocks: Vec<Block>,
}

impl Message {
    pub fn push(&mut self, tag: impl Into<String>, content: Content, cap_hit: Option<bool>) {
        self.blocks.push(Block { tag: tag.into(), content, cap_hit });
    }

    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.blocks.iter().flat_map(|b| match &b.content {
            Content::Edges(e) => e.as_slice(),
            _ => &[],
        })
        .copied()
    }

    pub fn bits(&self, n: usize) -> u64 {
        self.blocks.iter().map(|b| b.content.payload().bits(n)).sum()
    }
}

/// A one-round protocol: public coins, then one message per player computed
/// from its own input and the coins alone, then a referee decision.
pub trait SimultaneousProtocol: Sync {
    type Public;

    fn name(&self) -> String;

    fn public_coins(&self, n: usize, k: usize, tape: &mut RandomTape) -> Self::Public;

    fn player_message(&self, public: &Self::Public, n: usize, k: usize, player: PlayerId, input: &PlayerInput) -> Message;

    /// Default: look for a triangle in the union of all received edges.
    fn referee(&self, _public: &Self::Public, n: usize, messages: &[Message]) -> Verdict {
        referee_union_search(n, messages)
    }
}

pub fn referee_union_search(n: usize, messages: &[Message]) -> Verdict {
    let mut edges: Vec<Edge> = messages.iter().flat_map(Message::edges).collect();
    edges.sort_unstable();
    edges.dedup();
    let g = Graph::from_edges(n, edges).expect("players only send valid edges");
    match first_triangle(&g) {
        Some(t) => Verdict::TriangleFound(t),
        None => Verdict::NoTriangleFound,
    }
}

/// Every player's message under the given tape.
pub fn simultaneous_messages<P: SimultaneousProtocol>(protocol: &P, partition: &EdgePartition, tape: &mut RandomTape) -> (P::Public, Vec<Message>) {
    let (n, k) = (partition.n(), partition.k());
    let public = protocol.public_coins(n, k, tape);
    let messages = (0..k).map(|j| protocol.player_message(&public, n, k, j, partition.part(j))).collect();
    (public, messages)
}

/// Runs a [`SimultaneousProtocol`] through the generic runtime.
pub struct Simultaneous<P>(pub P);

impl<P: SimultaneousProtocol> Protocol for Simultaneous<P> {
    fn name(&self) -> String {
        self.0.name()
    }

    fn kind(&self) -> ProtocolKind {
        ProtocolKind::Simultaneous
    }

    fn supports(&self, mode: Mode) -> bool {
        mode == Mode::Simultaneous
    }

    fn execute(&self, session: &mut Session<'_>) -> Verdict {
        let (n, k) = (session.n(), session.k());
        let public = self.0.public_coins(n, k, session.tape());
        let mut messages = Vec::with_capacity(k);
        for j in 0..k {
            let msg = self.0.player_message(&public, n, k, j, session.part(j));
            for block in &msg.blocks {
                session.send_up(j, block.content.payload(), &block.tag);
                if let Some(hit) = block.cap_hit {
                    session.stats_mut().record_cap(hit);
                }
            }
            messages.push(msg);
        }
        self.0.referee(&public, n, &messages)
    }
}

/// Each player sends one bit saying whether it holds any edge.
#[derive(Clone, Copy, Debug, Default)]
pub struct EchoProtocol;

impl SimultaneousProtocol for EchoProtocol {
    type Public = ();

    fn name(&self) -> String {
        "echo".into()
    }

    fn public_coins(&self, _n: usize, _k: usize, _tape: &mut RandomTape) {}

    fn player_message(&self, _: &(), _n: usize, _k: usize, _player: PlayerId, input: &PlayerInput) -> Message {
        let mut m = Message::default();
        m.push("echo", Content::Bit(!input.is_empty()), None);
        m
    }

    fn referee(&self, _: &(), _n: usize, _messages: &[Message]) -> Verdict {
        Verdict::NoTriangleFound
    }
}
