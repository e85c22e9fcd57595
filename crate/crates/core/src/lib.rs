//! Solvable brickwork circuits with exact boundary channels.
//!
//! The crate builds two-site gates for which the influence of a semi-infinite
//! matrix-product-state bath collapses to a finite Kraus channel, evolves the
//! resulting hidden-Markov joint state, and checks everything against a
//! brute-force chain simulation and a replica transfer matrix.
//!
//! Conventions used everywhere:
//! * two-site basis index `a*q + b` for `|a⟩⊗|b⟩`, left site first;
//! * `SWAP|c,d⟩ = |d,c⟩`;
//! * MPS matrices `A[a]` are `χ×χ` with (left bond, right bond) indices;
//! * joint spaces are ordered ancilla ⊗ site 0 ⊗ site 1 ⊗ ….

pub mod channel;
pub mod error;
pub mod evolve;
pub mod exec;
pub mod gates;
pub mod mps;
pub mod numerics;
pub mod oracle;
pub mod renyi;
pub mod solvable;

pub use error::{Error, Result};
pub use exec::Exec;
pub use numerics::{CMatrix, Rng, C64};
