//! Fault-tolerance analysis of stabilizer channels.

pub mod circuit;
pub mod f2;
pub mod pauli;

pub use circuit::{ChannelSpec, Circuit, Instruction};
pub use f2::{BitVec, F2Matrix};
pub use pauli::{PauliOp, StabilizerGroup};
