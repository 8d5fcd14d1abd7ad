//! Finite-probability workbench for composable security.
//!
//! Protocols, resources and attacks are finite stochastic matrices. The crate
//! checks Hopf-algebra and group-action equations, evaluates string diagrams,
//! plugs combs, composes protocols, synthesises simulators by linear
//! programming and decides the no-go feasibility problems for
//! commitment-style functionalities.

pub mod causal;
pub mod cli;
pub mod diagram;
pub mod finstoch;
pub mod grouphopf;
pub mod lpsolve;
pub mod network;
pub mod nogo;
pub mod protocols;
pub mod resource;
pub mod security;

pub use finstoch::{
    compose, tensor, tv_distance, FinSet, FinStochError, Flavor, Morphism, Structural, Tolerance, WireList, DEFAULT_TOL,
};
