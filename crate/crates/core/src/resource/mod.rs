//! Multi-party resources, combs and protocols.

mod comb;
mod partite;
mod protocol;

use thiserror::Error;

use crate::finstoch::FinStochError;

pub use comb::{contract_with_fillers, Comb};
pub use partite::{Dir, PartiteResource, Port};
pub use protocol::{
    apply_protocol, compose_protocols, tensor_protocols, PartyStrategy, PortRef, Protocol, StageInterface,
};

#[derive(Debug, Error)]
pub enum ResourceError {
    #[error("party: {0}")]
    Party(String),
    #[error("port: {0}")]
    Port(String),
    #[error("output of round {round} depends on a later input (gap {gap:.3e})")]
    Acausal { round: u32, gap: f64 },
    #[error("comb: {0}")]
    Comb(String),
    #[error("protocol: {0}")]
    Protocol(String),
    #[error(transparent)]
    FinStoch(#[from] FinStochError),
    #[error("parsing resource: {0}")]
    Json(#[from] serde_json::Error),
}
