//! Learning dynamics for nonatomic routing games.
//!
//! Path-based methods (`path_algos`) play mixed strategies over enumerated
//! routes; `adalight` runs the same adaptive scheme edge-locally on each
//! pair's acyclic subnetwork without enumerating routes.

pub mod adalight;
pub mod cost;
pub mod flow;
pub mod harness;
pub mod local_flow;
pub mod network;
pub mod path_algos;
