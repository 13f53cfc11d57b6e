//! Bipartite entanglement quantification by Schmidt number.
//!
//! The crate solves the rank-r separability eigenvalue equations to obtain
//! optimal Schmidt-number witnesses, builds entanglement quasi-probability
//! distributions from their solutions and evaluates pseudo- and operational
//! entanglement measures. Every search-based quantity is reported as a
//! certified lower bound.

pub mod error;
pub mod linalg;
pub mod hilbert;
pub mod locc;
pub mod se_solver;
pub mod quasiprob;
pub mod witness;
pub mod measure_props;
pub mod format;
pub mod cli;

pub use error::{Error, Result};
