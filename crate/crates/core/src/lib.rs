//! Causal influence analysis for social learning networks.
//!
//! Agents hold beliefs over a finite set of hypotheses, update them from
//! private Gaussian observations and average them geometrically with their
//! in-neighbors. On top of these dynamics the crate provides
//!
//! - closed-form expected beliefs before and after pinning one agent's belief,
//! - the all-pairs influence matrix and rankings derived from it,
//! - estimation of informativeness and influence from observed belief traces,
//! - a replica-parallel experiment runner with a small CLI.

pub mod causal;
pub mod dynamics;
pub mod error;
pub mod experiment;
pub mod gcl;
pub mod linalg;
pub mod network;
pub mod ranking;
pub mod scenario;
pub mod world;

pub use error::{Error, Result};
