//! Cost simulation for encrypted sequence models.
//!
//! The crate answers one question: what does a leveled homomorphic runtime
//! actually pay to evaluate a gated state-space recurrence versus a
//! polynomial attention block over the same token stream? It contains
//!
//! - a metadata-faithful ciphertext simulator ([`mock_ckks`]),
//! - the competing sequence circuits built on it ([`circuits`]),
//! - closed-form depth, memory, and operation-count models that the
//!   executed circuits are cross-checked against ([`cost`]),
//! - an end-to-end text classification pipeline that trains in plaintext
//!   and verifies encrypted inference matches exactly ([`pipeline`]).
//!
//! The `parallel` feature (on by default) routes example-level and
//! sweep-level fan-out through rayon; every parallel entry point also takes
//! a runtime flag to force the sequential path for comparison.

pub mod circuits;
pub mod cost;
pub mod pipeline;
pub mod report;
pub mod error;
pub mod exec;
pub mod mock_ckks;

pub use error::SimError;
