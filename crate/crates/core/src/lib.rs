//! Replicated Softmax topic models with an optional sentiment layer.
//!
//! The crate covers the whole experimental pipeline: text ingestion and
//! corpus construction ([`corpus`]), the energy model and its conditionals
//! ([`model`]), contrastive-divergence training ([`training`]), likelihood
//! evaluation with exact and annealed partition functions ([`eval`]), and the
//! downstream classification, retrieval and topic-tagging experiments
//! ([`tasks`]).

pub mod cli;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod model;
pub mod rng;
pub mod tasks;
pub mod training;

pub use error::{Error, Result};
