//! Popular, dominant and robust popular matchings in two-sided markets with
//! strict preferences.

pub mod generate;
pub mod mixed;
pub mod model;
pub mod oracle;
pub mod reductions;
pub mod robust;
pub mod solve;
pub mod verify;

pub use model::{AgentId, Edge, Instance, InstanceFamily, Matching, Side};
