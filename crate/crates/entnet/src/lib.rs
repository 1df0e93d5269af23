//! Distributed entanglement on small networks, simulated exactly.
//!
//! Agents hold qubits of a dense state vector ([`statevec`]) and are linked by
//! EPR pairs or larger GHZ groups ([`netgraph`]). On top of that:
//!
//! - [`protocols`] turns trees of EPR pairs or connected hypergraphs into a
//!   shared CAT state, counting every classical bit sent.
//! - [`locc`] searches bicolourings for merge-count witnesses that rule out
//!   LOCC conversions between structures, and bounds how many copies of one
//!   tree are needed to reach another.
//! - [`keydist`] runs multiparty key distribution: the classical tree round,
//!   the coded pipeline with abort on noise, and two-group parity keys.
//! - [`qss`] plans and simulates hybrid quantum/classical secret sharing,
//!   including assisted and compressed threshold schemes.
//!
//! All randomness comes from a caller-supplied generator, so every run is
//! reproducible from its seed.

pub mod cli;
pub mod error;
pub mod keydist;
pub mod locc;
pub mod netgraph;
pub mod protocols;
pub mod qss;
pub mod statevec;

pub use error::{Error, Result};
