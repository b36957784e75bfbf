//! Likelihood evaluation: exact and annealed partition functions, perplexity.

mod ais;
pub mod enumerate;
mod partition;
mod perplexity;

pub use ais::{ais_log_z, ais_log_z_clamped, geometric_schedule, AisSettings};
pub use partition::{
    exact_log_likelihood, exact_log_z, exact_log_z_clamped, zero_model_log_z, Method, PartitionEstimate,
};
pub use perplexity::{bucket_lengths, perplexity, Conditioning, Estimator, PartitionTable, PerplexityReport, BUCKETS};
