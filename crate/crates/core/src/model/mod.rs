//! Instances, matchings and instance families.
//!
//! Agents are addressed by dense indices per side, assigned in declaration
//! order. Labels are only used at the text boundary.

mod family;
mod instance;
mod matching;
mod text;

use std::fmt;

pub use family::{diff_instances, FamilyError, FamilyRelation, InstanceFamily, PerturbationReport};
pub use instance::{Instance, InstanceBuilder, InstanceError};
pub use matching::{Matching, MatchingError};
pub use text::{
    parse_family, parse_instance, parse_matching, serialize_family, serialize_instance,
    serialize_matching, ParseError,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Worker,
    Firm,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::Worker => Side::Firm,
            Side::Firm => Side::Worker,
        }
    }
}

/// An agent of an [`Instance`]. Workers order before firms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AgentId {
    pub side: Side,
    pub index: usize,
}

impl AgentId {
    pub const fn worker(index: usize) -> Self {
        AgentId { side: Side::Worker, index }
    }

    pub const fn firm(index: usize) -> Self {
        AgentId { side: Side::Firm, index }
    }

    pub fn is_worker(&self) -> bool {
        self.side == Side::Worker
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.side {
            Side::Worker => write!(f, "W{}", self.index),
            Side::Firm => write!(f, "F{}", self.index),
        }
    }
}

/// A worker–firm pair, identified by indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub worker: usize,
    pub firm: usize,
}

impl Edge {
    pub const fn new(worker: usize, firm: usize) -> Self {
        Edge { worker, firm }
    }

    pub fn worker_id(&self) -> AgentId {
        AgentId::worker(self.worker)
    }

    pub fn firm_id(&self) -> AgentId {
        AgentId::firm(self.firm)
    }

    pub fn contains(&self, agent: AgentId) -> bool {
        match agent.side {
            Side::Worker => agent.index == self.worker,
            Side::Firm => agent.index == self.firm,
        }
    }

    /// The endpoint opposite to `agent`, if `agent` is an endpoint.
    pub fn other(&self, agent: AgentId) -> Option<AgentId> {
        if !self.contains(agent) {
            return None;
        }
        Some(match agent.side {
            Side::Worker => self.firm_id(),
            Side::Firm => self.worker_id(),
        })
    }

    /// Builds the edge joining two agents on opposite sides.
    pub fn between(x: AgentId, y: AgentId) -> Option<Edge> {
        match (x.side, y.side) {
            (Side::Worker, Side::Firm) => Some(Edge::new(x.index, y.index)),
            (Side::Firm, Side::Worker) => Some(Edge::new(y.index, x.index)),
            _ => None,
        }
    }
}
