//! Seeded Monte Carlo sweeps over the protocol and OAC models.
//!
//! Every trial owns a ChaCha8 stream seeded by [`derive_trial_seed`] from the
//! master seed, its grid point and its index. Trials are grouped in fixed-size
//! batches that run in parallel; batch statistics are merged in batch order,
//! so results depend only on the configuration, never on the worker count.

mod config;
mod csv;
mod seed;
mod sweep;
mod trial;

use thiserror::Error;

use crate::oac::OacError;
use crate::protocol::ProtocolError;
use crate::quantizer::QuantizerError;

pub use config::{SweepConfig, Variant, VariantSelection};
pub use csv::{format_float, CSV_HEADER};
pub use seed::{derive_trial_seed, trial_rng};
pub use sweep::{sweep_bits, sweep_period, SweepResult, SweepRow};
pub use trial::{VariantAPoint, VariantBPoint};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("codebook training failed for N={bits}, alpha={variance}: {source}")]
    Codebook {
        bits: u32,
        variance: f64,
        #[source]
        source: QuantizerError,
    },
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Oac(#[from] OacError),
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl HarnessError {
    /// Process exit code: 2 for configuration errors, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) | HarnessError::Io { .. } => 2,
            HarnessError::Codebook { source, .. } => match source {
                QuantizerError::NotConverged { .. } | QuantizerError::EmptyCell { .. } => 3,
                _ => 2,
            },
            HarnessError::Protocol(_) | HarnessError::Oac(_) => 3,
        }
    }
}
