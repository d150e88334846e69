//! The communication model: shared randomness, message accounting and
//! protocol execution.

pub mod ledger;
pub mod runtime;
pub mod tape;

pub use ledger::{Endpoint, LedgerEntry, MessageLedger, Payload};
pub use runtime::{
    run_protocol, run_protocol_with, simultaneous_messages, Block, Content, EchoProtocol, Message, Mode, Protocol,
    ProtocolKind, ProtocolOutcome, RunStats, RuntimeError, Session, Simultaneous, SimultaneousProtocol, Verdict,
};
pub use tape::{KeyedCoins, RandomTape};
