//! Bit-exact message accounting.

use std::fmt;
use std::io::{self, Write};

use serde::Serialize;

use crate::graph::PlayerId;

/// `ceil(log2 x)` for `x >= 1`, and 0 for `x <= 1`.
pub fn ceil_log2(x: u64) -> u32 {
    if x <= 1 {
        0
    } else {
        64 - (x - 1).leading_zeros()
    }
}

/// `floor(log2 x)` for `x >= 1`.
pub fn floor_log2(x: u64) -> u32 {
    63 - x.max(1).leading_zeros()
}

/// Bits to name one of `n` vertices; never below 1.
pub fn vertex_bits(n: usize) -> u64 {
    u64::from(ceil_log2(n as u64).max(1))
}

/// Elias-gamma code length for a positive integer.
pub fn gamma_bits(x: u64) -> u64 {
    u64::from(2 * floor_log2(x.max(1)) + 1)
}

/// A count `c` is sent as its `ceil(log2(c + 1))` value bits after a gamma
/// code of that length (plus one, so that length 0 is encodable).
pub fn count_bits(c: u64) -> u64 {
    let len = u64::from(ceil_log2(c.saturating_add(1)));
    len + gamma_bits(len + 1)
}

/// What a message carries. Each variant has a fixed cost given `n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Payload {
    Bit,
    Vertex,
    Edge,
    /// Index of a most significant bit of a degree below `n`.
    MsbIndex,
    Count(u64),
    EdgeList(usize),
    /// A fixed number of raw bits.
    Raw(u64),
    /// Explicit "nothing to send"; absence is never free.
    Empty,
}

impl Payload {
    pub fn bits(self, n: usize) -> u64 {
        match self {
            Payload::Bit | Payload::Empty => 1,
            Payload::Vertex => vertex_bits(n),
            Payload::Edge => 2 * vertex_bits(n),
            Payload::MsbIndex => u64::from(ceil_log2(1 + u64::from(ceil_log2(n as u64)))).max(1),
            Payload::Count(c) => count_bits(c),
            Payload::EdgeList(l) => l as u64 * 2 * vertex_bits(n) + count_bits(l as u64),
            Payload::Raw(b) => b,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Endpoint {
    Player(PlayerId),
    /// Every player, each sending the same-sized message.
    AllPlayers,
    Coordinator,
    Referee,
    Board,
}

impl fmt::Display for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Endpoint::Player(j) => write!(f, "player{j}"),
            Endpoint::AllPlayers => f.write_str("players"),
            Endpoint::Coordinator => f.write_str("coordinator"),
            Endpoint::Referee => f.write_str("referee"),
            Endpoint::Board => f.write_str("board"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LedgerEntry {
    pub round: u32,
    pub sender: Endpoint,
    pub receiver: Endpoint,
    pub bits: u64,
    pub tag: String,
}

/// Per-run message ledger. Totals are always kept; the entry transcript only
/// when requested, since long runs charge millions of messages.
#[derive(Clone, Debug)]
pub struct MessageLedger {
    n: usize,
    k: usize,
    round: u32,
    rounds_used: u32,
    last_charged_round: Option<u32>,
    total: u64,
    player_sent: Vec<u64>,
    coordinator_sent: u64,
    entries: Option<Vec<LedgerEntry>>,
}

impl MessageLedger {
    pub fn new(n: usize, k: usize, record_transcript: bool) -> Self {
        MessageLedger {
            n,
            k,
            round: 0,
            rounds_used: 0,
            last_charged_round: None,
            total: 0,
            player_sent: vec![0; k],
            coordinator_sent: 0,
            entries: record_transcript.then(Vec::new),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Starts a new round; later charges are attributed to it.
    pub fn next_round(&mut self) {
        if self.last_charged_round == Some(self.round) {
            self.round += 1;
        }
    }

    pub fn round(&self) -> u32 {
        self.round
    }

    /// Number of rounds in which anything was charged.
    pub fn rounds(&self) -> u32 {
        self.rounds_used
    }

    pub fn charge(&mut self, sender: Endpoint, receiver: Endpoint, payload: Payload, tag: &str) -> u64 {
        self.charge_repeated(sender, receiver, payload, 1, tag)
    }

    /// Charges `count` copies of `payload` as one entry. With sender
    /// [`Endpoint::AllPlayers`] every player sends `count` copies.
    pub fn charge_repeated(&mut self, sender: Endpoint, receiver: Endpoint, payload: Payload, count: u64, tag: &str) -> u64 {
        let each = payload.bits(self.n) * count;
        let bits = match sender {
            Endpoint::AllPlayers => each * self.k as u64,
            _ => each,
        };
        self.charge_bits(sender, receiver, bits, tag);
        bits
    }

    /// Charges a raw bit count. For [`Endpoint::AllPlayers`] the bits are
    /// split evenly and must be divisible by `k`.
    pub fn charge_bits(&mut self, sender: Endpoint, receiver: Endpoint, bits: u64, tag: &str) {
        if bits == 0 {
            return;
        }
        match sender {
            Endpoint::Player(j) => self.player_sent[j] += bits,
            Endpoint::AllPlayers => {
                debug_assert_eq!(bits % self.k as u64, 0);
                let each = bits / self.k as u64;
                for b in &mut self.player_sent {
                    *b += each;
                }
            }
            Endpoint::Coordinator | Endpoint::Referee | Endpoint::Board => self.coordinator_sent += bits,
        }
        self.total += bits;
        if self.last_charged_round != Some(self.round) {
            self.last_charged_round = Some(self.round);
            self.rounds_used += 1;
        }
        if let Some(entries) = &mut self.entries {
            entries.push(LedgerEntry { round: self.round, sender, receiver, bits, tag: tag.to_string() });
        }
    }

    pub fn total_bits(&self) -> u64 {
        self.total
    }

    /// Bits sent by player `j`.
    pub fn player_bits(&self, j: PlayerId) -> u64 {
        self.player_sent[j]
    }

    pub fn players_bits(&self) -> &[u64] {
        &self.player_sent
    }

    /// Bits sent by the coordinator (or posted by it on the board).
    pub fn coordinator_bits(&self) -> u64 {
        self.coordinator_sent
    }

    pub fn entries(&self) -> Option<&[LedgerEntry]> {
        self.entries.as_deref()
    }

    /// CSV dump with header `round,sender,receiver,bits,tag`. Writes only the
    /// header when no transcript was recorded.
    pub fn write_csv(&self, mut w: impl Write) -> io::Result<()> {
        writeln!(w, "round,sender,receiver,bits,tag")?;
        for e in self.entries.iter().flatten() {
            writeln!(w, "{},{},{},{},{}", e.round, e.sender, e.receiver, e.bits, e.tag)?;
        }
        Ok(())
    }
}
