//! Symmetrization: simulating a k-player simultaneous protocol with three
//! players, where two of them impersonate random players and the third plays
//! everybody else.

use std::sync::Arc;

use rand::Rng;
use thiserror::Error;

use crate::comm::{
    run_protocol, Endpoint, MessageLedger, Mode, Payload, Protocol, ProtocolKind, RandomTape, RuntimeError, Verdict,
};
use crate::graph::{Edge, EdgePartition, Graph, GraphError, PlayerId};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ReductionError {
    #[error("players {0} and {0} must differ")]
    SamePlayer(PlayerId),
    #[error("player {player} out of range for k = {k}")]
    PlayerOutOfRange { player: PlayerId, k: usize },
    #[error("symmetrization needs k >= 3, got {0}")]
    TooFewPlayers(usize),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Runtime(#[from] RuntimeError),
}

/// Which two of the `k` players receive the first two inputs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EmbedAssignment {
    pub i: PlayerId,
    pub j: PlayerId,
    pub k: usize,
}

impl EmbedAssignment {
    pub fn new(i: PlayerId, j: PlayerId, k: usize) -> Result<Self, ReductionError> {
        if k < 3 {
            return Err(ReductionError::TooFewPlayers(k));
        }
        for player in [i, j] {
            if player >= k {
                return Err(ReductionError::PlayerOutOfRange { player, k });
            }
        }
        if i == j {
            return Err(ReductionError::SamePlayer(i));
        }
        Ok(EmbedAssignment { i, j, k })
    }

    /// A uniform ordered pair of distinct players.
    pub fn draw(k: usize, rng: &mut impl Rng) -> Result<Self, ReductionError> {
        if k < 3 {
            return Err(ReductionError::TooFewPlayers(k));
        }
        let i = rng.random_range(0..k);
        let mut j = rng.random_range(0..k - 1);
        if j >= i {
            j += 1;
        }
        Self::new(i, j, k)
    }
}

/// `k`-player partition: player `i` holds `x[0]`, player `j` holds `x[1]`,
/// everyone else holds `x[2]`.
pub fn embed_input(n: usize, x: &[Vec<Edge>; 3], assignment: EmbedAssignment) -> Result<EdgePartition, ReductionError> {
    let EmbedAssignment { i, j, k } = assignment;
    let parts: Vec<Vec<Edge>> = (0..k)
        .map(|p| {
            let source = if p == i {
                &x[0]
            } else if p == j {
                &x[1]
            } else {
                &x[2]
            };
            let mut part = source.clone();
            part.sort_unstable();
            part.dedup();
            part
        })
        .collect();
    let mut union: Vec<Edge> = x.iter().flatten().copied().collect();
    union.sort_unstable();
    union.dedup();
    let graph = Graph::from_edges(n, union)?;
    Ok(EdgePartition::from_parts(Arc::new(graph), parts)?)
}

#[derive(Clone, Debug)]
pub struct SymmetrizeOutcome {
    pub assignment: EmbedAssignment,
    pub verdict: Verdict,
    /// Bits players `i` and `j` send; what the two impersonators pay.
    pub alice_bob_bits: u64,
    /// Total bits of the underlying `k`-player run.
    pub total_bits: u64,
    /// The three-player transcript: both impersonators write to the third.
    pub ledger: MessageLedger,
}

/// Draws the pair from the first tape step, then runs `protocol` on the
/// embedded input with the rest of the tape. The third player learns both
/// messages and can compute everything else itself, so the verdict is the
/// `k`-player referee's.
pub fn symmetrize_run(
    protocol: &dyn Protocol,
    n: usize,
    x: &[Vec<Edge>; 3],
    k: usize,
    mut tape: RandomTape,
) -> Result<SymmetrizeOutcome, ReductionError> {
    if protocol.kind() != ProtocolKind::Simultaneous {
        return Err(RuntimeError::NotSimultaneous(protocol.name()).into());
    }
    let assignment = EmbedAssignment::draw(k, &mut tape.step())?;
    let partition = embed_input(n, x, assignment)?;
    let outcome = run_protocol(&partition, protocol, Mode::Simultaneous, tape)?;
    let alice = outcome.ledger.player_bits(assignment.i);
    let bob = outcome.ledger.player_bits(assignment.j);
    let mut ledger = MessageLedger::new(n, 3, false);
    ledger.charge(Endpoint::Player(0), Endpoint::Player(2), Payload::Raw(alice), "sym-alice");
    ledger.charge(Endpoint::Player(1), Endpoint::Player(2), Payload::Raw(bob), "sym-bob");
    Ok(SymmetrizeOutcome {
        assignment,
        verdict: outcome.verdict,
        alice_bob_bits: alice + bob,
        total_bits: outcome.total_bits(),
        ledger,
    })
}
